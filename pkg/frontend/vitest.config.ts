import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    include: ["tests/**/*.test.ts"],
    // e2e spawns the search service and trains a model first
    testTimeout: 120_000,
    hookTimeout: 180_000,
  },
});
