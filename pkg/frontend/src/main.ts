// Wire-up: API base from ?api=..., render into #app, poll the event log.

import { ApiClient } from "./api.js";
import { Console } from "./console.js";
import { renderInto } from "./render.js";

const POLL_MS = 2000;

function apiBase(): string {
  const param = new URLSearchParams(window.location.search).get("api");
  return (param ?? window.location.origin).replace(/\/$/, "");
}

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}

const api = new ApiClient(apiBase());
const ui = new Console(api, (vm) =>
  renderInto(root, vm, {
    onStep: (index) => void ui.step(index),
    onExit: () => void ui.exitCampaign(true),
  }),
);

void ui.refresh();
window.setInterval(() => void ui.pollEvents(), POLL_MS);
