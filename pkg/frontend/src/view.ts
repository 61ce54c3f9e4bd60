/** Pure rendering helpers. Claim text is always shown verbatim: the only
 * transformation is HTML escaping, never rewriting. */

import type { Progress, SiblingClaim, Task } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Wrap the first verbatim occurrence of the claim inside the output in a
 * <mark>; if the claim is not a substring, the output is left untouched
 * (the claim card still shows it verbatim). */
export function highlightClaim(output: string, claim: string): string {
  const index = claim.length > 0 ? output.indexOf(claim) : -1;
  if (index < 0) return escapeHtml(output);
  return (
    escapeHtml(output.slice(0, index)) +
    "<mark>" +
    escapeHtml(claim) +
    "</mark>" +
    escapeHtml(output.slice(index + claim.length))
  );
}

/** Sibling claims rendered greyed-out inline, the active one highlighted. */
export function renderSiblings(siblings: SiblingClaim[], activePosition: number): string {
  return siblings
    .map((sibling) => {
      const classes = ["sibling"];
      if (sibling.position === activePosition) classes.push("active");
      if (sibling.labeled) classes.push("labeled");
      return `<li class="${classes.join(" ")}">${escapeHtml(sibling.text)}</li>`;
    })
    .join("");
}

export function renderTask(task: Task): string {
  return `
    <div class="task-header">Claim ${task.position} of ${task.total_claims}
      in <code>${escapeHtml(task.example_id)}</code>
      ${task.current_label ? `<span class="current-label">currently: ${escapeHtml(task.current_label)}</span>` : ""}
    </div>
    <div class="prompt"><strong>Prompt</strong> ${escapeHtml(task.input)}</div>
    <div class="output">${highlightClaim(task.original_output, task.claim)}</div>
    <div class="claim-card">${escapeHtml(task.claim)}</div>
    <ul class="siblings">${renderSiblings(task.siblings, task.position)}</ul>
  `;
}

export function renderProgress(progress: Progress): string {
  const overall =
    progress.total === 0 ? 0 : Math.round((100 * progress.labeled) / progress.total);
  const bars = progress.examples
    .map((example) => {
      const percent =
        example.total === 0 ? 0 : Math.round((100 * example.labeled) / example.total);
      return `
        <div class="example-bar" title="${escapeHtml(example.example_id)}">
          <span class="bar-label">${escapeHtml(example.example_id)}</span>
          <span class="bar"><span class="fill" style="width:${percent}%"></span></span>
          <span class="bar-count">${example.labeled}/${example.total}</span>
        </div>`;
    })
    .join("");
  return `
    <div class="overall">${progress.labeled} of ${progress.total} labeled (${overall}%)</div>
    ${bars}
  `;
}

export function renderCompletion(): string {
  return `
    <div class="done">
      <h2>All claims labeled</h2>
      <p>Export the corpus and calibrate a threshold on it.</p>
    </div>
  `;
}
