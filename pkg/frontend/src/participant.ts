/** Pseudonymous participant identity, persisted in localStorage. */

const STORAGE_KEY = "avsearch.participant_id";

function randomSuffix(): string {
  // 8 base36 chars is plenty for a per-browser pseudonym; this is an
  // analytics label, not a credential.
  let out = "";
  while (out.length < 8) out += Math.random().toString(36).slice(2);
  return out.slice(0, 8);
}

export function getParticipantId(storage: Storage): string {
  const existing = storage.getItem(STORAGE_KEY);
  if (existing) return existing;
  const fresh = `p-${randomSuffix()}`;
  storage.setItem(STORAGE_KEY, fresh);
  return fresh;
}
