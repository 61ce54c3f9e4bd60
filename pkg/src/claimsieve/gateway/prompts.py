"""Default prompt templates for decomposition, merging, and support judging.

Placeholders are literal tokens ({claim_string}, {prompt}, {output}) replaced
by :func:`render`; ordinary braces in the surrounding text are left alone.
"""

from __future__ import annotations

from dataclasses import dataclass

SEPARATOR_AND_CONFIDENCE = (
    "Please breakdown the following input into a set of small, independent claims "
    "(make sure not to add any information), and return the output as a jsonl, where "
    "each line is {subclaim:[CLAIM], gpt-score:[CONF]}. The confidence score [CONF] "
    "should represent your confidence in the claim, where a 1 is obvious facts and "
    "results like 'The earth is round' and '1+1=2'. A 0 is for claims that are very "
    "obscure or difficult for anyone to know, like the birthdays of non-notable "
    "people. If the input is short, it is fine to only return 1 claim. "
    "The input is: {output}"
)

MERGER_BIOGRAPHY = (
    "You will get an instruction and a set of facts that are true. Construct an "
    "answer using ONLY the facts provided, and try to use all facts as long as its "
    "possible. If no facts are given, reply to the instruction incorporating the "
    "fact that you dont know enough to fully respond. "
    "\n\nThe facts:\n {claim_string}\n\nThe instruction:\n{prompt}"
)

MERGER_OPEN_QA = (
    "You will get a natural question and parts of an answer, which you are to merge "
    "into coherent prose. Make sure to include all the parts in the answer. There "
    "may be parts that are seemingly unrelated to the others, but DO NOT add "
    "additional information or reasoning to merge them. "
    "\n\nThe parts:\n{claim_string}\n\nThe question:\n{prompt}. Remember, DO NOT add "
    "any additional information or commentary, just combine the parts."
)

MERGER_MATH = (
    "You will get a math problem and a set of steps that are true. Construct an "
    "answer using ONLY the steps provided. Make sure to include all the steps in "
    "the answer, and do not add any additional steps or reasoning. These steps may "
    "not fully solve the problem, but merging them could assist someone in solving "
    "the problem. \n\nThe steps:\n{claim_string}\n\nThe math problem:\n{prompt}. "
    "Remember, do not do any additional reasoning, just combine the given steps."
)

FREQUENCY_JUDGE = (
    "You will get a list of claims and piece of text. For each claim, score whether "
    "the text supports, contradicts, or is unrelated to the claim. Directly return "
    'a jsonl, where each line is {"id":[CLAIM_ID], "score":[SCORE]}. Directly '
    "return the jsonl with no explanation or other formatting. For the [SCORE], "
    "return 1 for supports, -1 for contradicts, and 0 for unrelated. "
    "The claims are:\n{claim_string}\n\nThe text is:\n{output}"
)

PLACEHOLDERS = ("{claim_string}", "{prompt}", "{output}")


@dataclass(frozen=True)
class PromptTemplates:
    separator_and_confidence: str = SEPARATOR_AND_CONFIDENCE
    merger_biography: str = MERGER_BIOGRAPHY
    merger_open_qa: str = MERGER_OPEN_QA
    merger_math: str = MERGER_MATH
    frequency_judge: str = FREQUENCY_JUDGE

    def merger_for(self, task_kind: str) -> str:
        mergers = {
            "biography": self.merger_biography,
            "open-qa": self.merger_open_qa,
            "math": self.merger_math,
        }
        if task_kind not in mergers:
            raise ValueError(f"no merger template for task kind {task_kind!r}")
        return mergers[task_kind]


def render(template: str, **fields: str) -> str:
    """Substitute placeholder tokens without touching other braces."""
    rendered = template
    for name, value in fields.items():
        token = "{" + name + "}"
        if token not in PLACEHOLDERS:
            raise ValueError(f"unknown placeholder {token}")
        rendered = rendered.replace(token, value)
    return rendered
