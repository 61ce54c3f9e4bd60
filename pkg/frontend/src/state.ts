/** Session state: label counts, the undo buffer, and the labeling cursor.
 *
 * The server's queue drives which task comes next; the session only tracks
 * what this annotator did, so a page refresh loses nothing that was
 * acknowledged.
 */

import type { Progress, RawLabel, Task } from "./types.js";
import { LEGAL_LABELS } from "./types.js";

export interface UndoEntry {
  subclaimId: string;
  appliedLabel: RawLabel;
  previousLabel: string | null;
}

export class SessionState {
  current: Task | null = null;
  /** Set when revisiting an already-labeled claim (undo); arms overwrite. */
  overwriteArmed = false;
  sessionCounts: Record<RawLabel, number>;
  lastProgress: Progress | null = null;
  private undoBuffer: UndoEntry | null = null;

  constructor() {
    this.sessionCounts = Object.fromEntries(
      LEGAL_LABELS.map((label) => [label, 0]),
    ) as Record<RawLabel, number>;
  }

  showTask(task: Task, { armOverwrite = false } = {}): void {
    this.current = task;
    this.overwriteArmed = armOverwrite || task.current_label !== null;
  }

  /** Record an acknowledged label; keeps counts and the undo buffer in step. */
  acknowledge(task: Task, label: RawLabel, progress: Progress): void {
    this.sessionCounts[label] += 1;
    const previous = task.current_label;
    if (previous !== null && isLegal(previous) && this.sessionCounts[previous] > 0) {
      this.sessionCounts[previous] -= 1; // overwrite replaced an earlier choice
    }
    this.undoBuffer = {
      subclaimId: task.subclaim_id,
      appliedLabel: label,
      previousLabel: previous,
    };
    this.lastProgress = progress;
    this.current = null;
    this.overwriteArmed = false;
  }

  /** Pop the last action so the caller can revisit that claim. */
  takeUndo(): UndoEntry | null {
    const entry = this.undoBuffer;
    this.undoBuffer = null;
    return entry;
  }

  get canUndo(): boolean {
    return this.undoBuffer !== null;
  }

  get totalLabeledThisSession(): number {
    return Object.values(this.sessionCounts).reduce((sum, count) => sum + count, 0);
  }

  /** Session counts never disagree with the server's acknowledged totals. */
  consistentWith(progress: Progress): boolean {
    return progress.labeled >= this.totalLabeledThisSession;
  }
}

function isLegal(value: string): value is RawLabel {
  return (LEGAL_LABELS as readonly string[]).includes(value);
}
