import { beforeEach, describe, expect, it } from "vitest";

import { getParticipantId } from "../../src/participant.js";

beforeEach(() => {
  window.localStorage.clear();
});

describe("getParticipantId", () => {
  it("mints a pseudonym once and then reuses it", () => {
    const first = getParticipantId(window.localStorage);
    expect(first).toMatch(/^p-[a-z0-9]{8}$/);
    expect(getParticipantId(window.localStorage)).toBe(first);
  });

  it("survives via storage, not module state", () => {
    const minted = getParticipantId(window.localStorage);
    window.localStorage.setItem("avsearch.participant_id", "p-fixedone");
    expect(getParticipantId(window.localStorage)).toBe("p-fixedone");
    expect(minted).not.toBe("p-fixedone");
  });
});
