/** Labeling flow, separated from the DOM so it can be tested directly.
 *
 * One rule above all: a label only counts once the server acknowledged it.
 * Failures keep the task on screen and say so; nothing is lost silently.
 */

import type { AnnotationApi } from "./api.js";
import type { SessionState } from "./state.js";
import type { Progress, RawLabel, Task } from "./types.js";
import { actionForKey } from "./keyboard.js";

export interface FlowHooks {
  renderTask(task: Task): void;
  renderCompletion(): void;
  renderProgress(progress: Progress): void;
  renderCounts(): void;
  showBanner(message: string, kind: "error" | "info"): void;
  clearBanner(): void;
  /** Ask the annotator whether to overwrite an existing label. */
  confirmOverwrite(detail: string, label: RawLabel): boolean | Promise<boolean>;
}

export class LabelFlow {
  constructor(
    private readonly api: AnnotationApi,
    private readonly state: SessionState,
    private readonly hooks: FlowHooks,
  ) {}

  /** Route a key press; unmapped keys do nothing at all. */
  async handleKey(key: string): Promise<boolean> {
    const action = actionForKey(key);
    if (action === null) return false;
    if (action.kind === "label") await this.applyLabel(action.label);
    else await this.undoLast();
    return true;
  }

  async showNext(): Promise<void> {
    let task: Task | null;
    try {
      task = await this.api.nextTask();
    } catch (error) {
      this.hooks.showBanner(`Annotation service unreachable: ${error}`, "error");
      return;
    }
    if (task === null) {
      this.state.current = null;
      this.hooks.renderCompletion();
      return;
    }
    this.state.showTask(task);
    this.hooks.renderTask(task);
  }

  async applyLabel(label: RawLabel): Promise<void> {
    const task = this.state.current;
    if (task === null) return;
    const result = await this.api.postLabel(
      task.subclaim_id,
      label,
      this.state.overwriteArmed,
    );
    switch (result.kind) {
      case "ok":
        this.state.acknowledge(task, label, result.ack.progress);
        this.hooks.renderProgress(result.ack.progress);
        this.hooks.renderCounts();
        this.hooks.clearBanner();
        await this.showNext();
        return;
      case "conflict": {
        const confirmed = await this.hooks.confirmOverwrite(result.detail, label);
        if (confirmed) {
          this.state.overwriteArmed = true;
          await this.applyLabel(label);
        }
        return;
      }
      case "offline":
        this.hooks.showBanner(
          `Network failure; the label was not saved. Retry when back online. (${result.detail})`,
          "error",
        );
        return;
      case "rejected":
        this.hooks.showBanner(`Server rejected the label: ${result.detail}`, "error");
        return;
    }
  }

  async undoLast(): Promise<void> {
    const entry = this.state.takeUndo();
    if (entry === null) {
      this.hooks.showBanner("Nothing to undo in this session.", "info");
      return;
    }
    try {
      const task = await this.api.getTask(entry.subclaimId);
      this.state.showTask(task, { armOverwrite: true });
      this.hooks.renderTask(task);
      this.hooks.showBanner(
        `Revisiting "${entry.subclaimId}" (was ${entry.previousLabel ?? "unlabeled"}, ` +
          `now ${entry.appliedLabel}); press 1-4 to relabel.`,
        "info",
      );
    } catch (error) {
      this.hooks.showBanner(`Could not reload the last claim: ${error}`, "error");
    }
  }
}
