/** Keyboard-first labeling: 1..4 pick a label, u revisits the last claim.
 * Every other key is a no-op. */

import type { RawLabel } from "./types.js";

export type KeyAction =
  | { kind: "label"; label: RawLabel }
  | { kind: "undo" }
  | null;

export const SHORTCUT_MAP: Record<string, RawLabel> = {
  "1": "Factual",
  "2": "Subjective",
  "3": "Unverifiable",
  "4": "False",
};

export function actionForKey(key: string): KeyAction {
  const label = SHORTCUT_MAP[key];
  if (label !== undefined) return { kind: "label", label };
  if (key === "u") return { kind: "undo" };
  return null;
}
