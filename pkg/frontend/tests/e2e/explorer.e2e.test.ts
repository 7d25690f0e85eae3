// @vitest-environment node
//
// End-to-end: real service process, real HTTP, real DOM (happy-dom window).
// The service artifacts are generated fresh via the CLI, so this test needs
// the python package installed in the environment.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { Window } from "happy-dom";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../../src/api.js";
import { createExplorer, type Explorer } from "../../src/app.js";
import { getParticipantId } from "../../src/participant.js";

const PYTHON = process.env.PYTHON ?? "python3";

interface CorpusRecord {
  clip_id: string;
  transcript: { text: string } | null;
}

function runCli(args: string[]): void {
  const proc = spawnSync(PYTHON, ["-m", "avsearch.cli", ...args], { encoding: "utf-8" });
  if (proc.status !== 0) {
    throw new Error(`avsearch ${args[0]} failed:\n${proc.stdout}\n${proc.stderr}`);
  }
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

async function waitHealthy(base: string, server: ChildProcess): Promise<void> {
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    if (server.exitCode !== null) throw new Error(`server exited with ${server.exitCode}`);
    try {
      const response = await fetch(`${base}/healthz`);
      if (response.ok) return;
    } catch {
      // not listening yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("server never became healthy");
}

let workdir: string;
let logPath: string;
let base: string;
let server: ChildProcess;
let dom: Window;
let root: HTMLElement;
let explorer: Explorer;
let speechQuery: string;
let speechClipId: string;

function logLines(): string[] {
  try {
    return readFileSync(logPath, "utf-8").split("\n").filter(Boolean);
  } catch {
    return [];
  }
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "avsearch-e2e-"));
  logPath = join(workdir, "interactions.jsonl");
  runCli(["synth", "--n-clips", "60", "--seed", "7", "--out", workdir]);
  runCli([
    "train-classifier",
    "--data", join(workdir, "classifier_train.jsonl"),
    "--seed", "7",
    "--out", join(workdir, "classifier.model"),
  ]);

  // a verbatim spoken phrase, quoted, from a clip that has a transcript
  const corpus = readFileSync(join(workdir, "corpus.jsonl"), "utf-8")
    .split("\n")
    .filter(Boolean)
    .map((line) => JSON.parse(line) as CorpusRecord);
  const spoken = corpus.find((record) => record.transcript !== null);
  if (spoken === undefined || spoken.transcript === null) throw new Error("no transcripts in corpus");
  speechClipId = spoken.clip_id;
  speechQuery = `"${spoken.transcript.text.split(" ").slice(0, 6).join(" ")}"`;

  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn(PYTHON, [
    "-m", "avsearch.cli", "serve",
    "--corpus", join(workdir, "corpus.jsonl"),
    "--embeddings", join(workdir, "embeddings_baseline.bin"),
    "--classifier", join(workdir, "classifier.model"),
    "--log", logPath,
    "--port", String(port),
  ]);
  await waitHealthy(base, server);

  dom = new Window();
  root = dom.document.createElement("div") as unknown as HTMLElement;
  dom.document.body.appendChild(root as never);
  explorer = createExplorer(root, {
    api: new ApiClient(base),
    participantId: getParticipantId(dom.window.localStorage as unknown as Storage),
    k: 5,
  });
});

afterAll(async () => {
  if (server !== undefined && server.exitCode === null) {
    server.kill("SIGTERM");
    await new Promise((resolve) => server.once("exit", resolve));
  }
  if (workdir !== undefined) rmSync(workdir, { recursive: true, force: true });
});

describe("explorer against the live service", () => {
  it("routes a quoted spoken phrase to full-text and renders the server's order", async () => {
    await explorer.search(speechQuery);

    const badge = root.querySelector<HTMLElement>(".route-badge")!;
    expect(badge.textContent).toBe("fulltext");
    expect(badge.dataset.route).toBe("fulltext");

    // Ask the service directly for the authoritative order.
    const params = new URLSearchParams({ q: speechQuery, k: "5", participant_id: "probe" });
    const direct = (await (await fetch(`${base}/search?${params}`)).json()) as {
      route: string;
      results: { clip_id: string }[];
    };
    expect(direct.route).toBe("fulltext");
    const rendered = [...root.querySelectorAll<HTMLElement>(".result-open .clip-id")].map(
      (node) => node.textContent,
    );
    expect(rendered).toEqual(direct.results.map((r) => r.clip_id));
    expect(rendered[0]).toBe(speechClipId);
    expect(root.querySelector<HTMLElement>(".error-banner")!.hidden).toBe(true);
  });

  it("posts exactly one interaction per result click, visible in the service log", async () => {
    const before = logLines().length;

    const firstResult = root.querySelector<HTMLElement>(".result-open")!;
    firstResult.click();
    await explorer.whenIdle();

    const after = logLines();
    expect(after.length).toBe(before + 1);
    const record = JSON.parse(after[after.length - 1]!) as Record<string, unknown>;
    expect(record.action).toBe("click");
    expect(record.target_clip_id).toBe(speechClipId);
    expect(record.query_text).toBe(speechQuery);
    expect(record.participant_id).toMatch(/^p-[a-z0-9]{8}$/);

    // the click also opened the detail panel
    const detail = root.querySelector<HTMLElement>(".detail")!;
    expect(detail.hidden).toBe(false);
    expect(detail.querySelector("h2")!.textContent).toContain(speechClipId);
    expect(detail.querySelectorAll(".captions li").length).toBe(20);
    expect(detail.querySelector(".transcript")!.textContent).toContain(
      speechQuery.replaceAll('"', "").split(" ").slice(0, 3).join(" "),
    );
  });

  it("keeps results on screen when the service rejects a follow-up query", async () => {
    const renderedBefore = root.querySelectorAll(".result-open").length;
    expect(renderedBefore).toBeGreaterThan(0);

    await explorer.search("!!!");
    const banner = root.querySelector<HTMLElement>(".error-banner")!;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).not.toBe("");
    expect(root.querySelectorAll(".result-open").length).toBe(renderedBefore);
  });
});
