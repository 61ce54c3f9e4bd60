/** Payload types mirroring the annotation API's pydantic schemas. */

export const LEGAL_LABELS = ["Factual", "Subjective", "Unverifiable", "False"] as const;

export type RawLabel = (typeof LEGAL_LABELS)[number];

export function isRawLabel(value: string): value is RawLabel {
  return (LEGAL_LABELS as readonly string[]).includes(value);
}

export interface SiblingClaim {
  position: number;
  text: string;
  labeled: boolean;
}

export interface Task {
  example_id: string;
  subclaim_id: string;
  claim: string;
  input: string;
  original_output: string;
  position: number;
  total_claims: number;
  current_label: string | null;
  siblings: SiblingClaim[];
}

export interface ExampleProgress {
  example_id: string;
  labeled: number;
  total: number;
}

export interface Progress {
  labeled: number;
  total: number;
  examples: ExampleProgress[];
}

export interface LabelAck {
  subclaim_id: string;
  raw_label: string;
  progress: Progress;
}
