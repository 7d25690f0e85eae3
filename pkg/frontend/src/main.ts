import { ApiClient } from "./api.js";
import { createExplorer } from "./app.js";
import { getParticipantId } from "./participant.js";

// Served from the same origin as the API by default; set
// window.AVSEARCH_BASE_URL before this module loads to point elsewhere.
declare global {
  interface Window {
    AVSEARCH_BASE_URL?: string;
  }
}

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app element");

createExplorer(root, {
  api: new ApiClient(window.AVSEARCH_BASE_URL ?? ""),
  participantId: getParticipantId(window.localStorage),
});
