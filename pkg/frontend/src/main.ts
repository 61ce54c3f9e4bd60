/** DOM wiring: the flow controller does the thinking, this file renders. */

import { AnnotationApi } from "./api.js";
import { LabelFlow } from "./flow.js";
import { actionForKey } from "./keyboard.js";
import { SessionState } from "./state.js";
import type { RawLabel } from "./types.js";
import { LEGAL_LABELS } from "./types.js";
import { renderCompletion, renderProgress, renderTask } from "./view.js";

const api = new AnnotationApi();
const state = new SessionState();

const taskPanel = document.getElementById("task")!;
const progressPanel = document.getElementById("progress")!;
const banner = document.getElementById("banner")!;
const countsPanel = document.getElementById("counts")!;

const flow = new LabelFlow(api, state, {
  renderTask(task) {
    taskPanel.innerHTML = renderTask(task);
  },
  renderCompletion() {
    taskPanel.innerHTML = renderCompletion();
  },
  renderProgress(progress) {
    progressPanel.innerHTML = renderProgress(progress);
  },
  renderCounts() {
    countsPanel.innerHTML = LEGAL_LABELS.map(
      (label, index) =>
        `<span class="count"><kbd>${index + 1}</kbd> ${label}: ${state.sessionCounts[label]}</span>`,
    ).join(" ");
  },
  showBanner(message, kind) {
    banner.textContent = message;
    banner.className = `banner ${kind}`;
    banner.hidden = false;
  },
  clearBanner() {
    banner.hidden = true;
  },
  confirmOverwrite(detail, label) {
    return window.confirm(`${detail}\n\nOverwrite with "${label}"?`);
  },
});

document.addEventListener("keydown", (event) => {
  if (event.target instanceof HTMLInputElement) return;
  if (actionForKey(event.key) === null) return;
  event.preventDefault();
  void flow.handleKey(event.key);
});

document.getElementById("export")!.addEventListener("click", () => {
  window.location.href = api.exportUrl();
});

for (const button of document.querySelectorAll<HTMLButtonElement>("[data-label]")) {
  button.addEventListener("click", () => {
    void flow.applyLabel(button.dataset.label as RawLabel);
  });
}

async function boot(): Promise<void> {
  try {
    progressPanel.innerHTML = renderProgress(await api.progress());
  } catch (error) {
    banner.textContent = `Annotation service unreachable: ${error}`;
    banner.className = "banner error";
    banner.hidden = false;
  }
  await flow.showNext();
}

void boot();
