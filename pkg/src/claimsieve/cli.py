"""Command-line interface.

Subcommands: generate | synth | calibrate | apply | evaluate | annotate.
Batch commands are file-to-file and fully seeded; `annotate` starts the
long-running HTTP service the browser UI talks to.
"""

from __future__ import annotations

import functools
import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from . import conformal, corpus, harness, scoring
from .claims import AnnotatedExample, validate_example
from .errors import ClaimsieveError
from .gateway import Gateway, GatewayConfig, LiveBackend, MockBackend, ReplayBackend
from .gateway.backends import TranscriptWriter

PROTOCOLS = ("split", "loo", "partial", "histogram")


def _cli_errors(command):
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (ClaimsieveError, ValueError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _gateway_options(command):
    options = [
        click.option("--backend", type=click.Choice(["mock", "live", "replay"]), default="mock",
                     show_default=True, help="Completion backend."),
        click.option("--base-url", default="https://api.openai.com/v1", show_default=True),
        click.option("--model", "model_name", default="gpt-4", show_default=True),
        click.option("--api-key-env", default="OPENAI_API_KEY", show_default=True,
                     help="Environment variable holding the API key (live mode)."),
        click.option("--alternates-k", default=5, show_default=True),
        click.option("--max-concurrent", default=4, show_default=True),
        click.option("--timeout", default=60.0, show_default=True),
        click.option("--max-retries", default=3, show_default=True),
        click.option("--transcripts", type=click.Path(path_type=Path), default=None,
                     help="Record every call to this JSONL file (always on for live)."),
        click.option("--replay-from", type=click.Path(exists=True, path_type=Path),
                     default=None, help="Serve responses from a recorded transcript file."),
        click.option("--seed", default=0, show_default=True,
                     help="Seed for deterministic mock variation."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _build_gateway(
    backend: str,
    base_url: str,
    model_name: str,
    api_key_env: str,
    alternates_k: int,
    max_concurrent: int,
    timeout: float,
    max_retries: int,
    transcripts: Path | None,
    replay_from: Path | None,
    seed: int,
) -> Gateway:
    config = GatewayConfig(
        base_url=base_url,
        model_name=model_name,
        api_key_env=api_key_env,
        alternates_k=alternates_k,
        max_concurrent_requests=max_concurrent,
        request_timeout=timeout,
        max_retries=max_retries,
        seed=seed,
    )
    if backend == "mock":
        engine = MockBackend(config)
    elif backend == "replay":
        if replay_from is None:
            raise click.UsageError("--replay-from is required with --backend replay")
        engine = ReplayBackend(replay_from, config)
    else:
        engine = LiveBackend(config)
        if transcripts is None:
            transcripts = Path("transcripts.jsonl")
    writer = TranscriptWriter(transcripts) if transcripts is not None else None
    return Gateway(config, engine, writer)


@click.group()
def main():
    """Calibrated sub-claim filtering for language-model outputs."""


@main.command()
@click.argument("corpus_in", type=click.Path(exists=True, path_type=Path))
@click.argument("corpus_out", type=click.Path(path_type=Path))
@_gateway_options
@click.option("--fail-fast/--no-fail-fast", default=False, show_default=True,
              help="Stop at the first per-example gateway failure.")
@click.option("--workers", default=1, show_default=True,
              help="Examples processed in parallel; output order and mock "
                   "determinism are preserved.")
@_cli_errors
def generate(corpus_in: Path, corpus_out: Path, fail_fast: bool, workers: int,
             **gateway_kwargs):
    """Run the generation pipeline: outputs, sub-claims, alternates, judgments.

    CORPUS_IN is a JSONL file of prompts ({"id", "input", "task_kind"}).
    """
    gateway = _build_gateway(**gateway_kwargs)
    records = _read_jsonl(corpus_in)

    def build(indexed):
        index, record = indexed
        example_id = record.get("id") or f"ex-{index:04d}"
        try:
            example = gateway.populate_example(
                example_id, record["input"], record.get("task_kind", "biography")
            )
            return example_id, example, None
        except ClaimsieveError as exc:
            return example_id, None, exc

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(build, enumerate(records)))
    else:
        results = [build(item) for item in enumerate(records)]

    examples = []
    failures = 0
    for example_id, example, error in results:
        if error is not None:
            failures += 1
            click.echo(f"error on example {example_id}: {error}", err=True)
            if fail_fast:
                raise error
        else:
            examples.append(example)
    corpus.save_corpus(corpus_out, examples)
    click.echo(f"wrote {len(examples)} examples to {corpus_out}"
               + (f" ({failures} failed)" if failures else ""))


@main.command()
@click.argument("corpus_out", type=click.Path(path_type=Path))
@click.option("--n", "n_examples", type=int, required=True, help="Number of examples.")
@click.option("--claims", default="5..12", show_default=True,
              help="Sub-claim count range, e.g. 5..12.")
@click.option("--p-entail", default=0.8, show_default=True)
@click.option("--rho", default=0.7, show_default=True,
              help="Confidence-channel informativeness in [0, 1].")
@click.option("--seed", default=0, show_default=True)
@_cli_errors
def synth(corpus_out: Path, n_examples: int, claims: str, p_entail: float, rho: float,
          seed: int):
    """Write a synthetic annotated corpus."""
    claims_min, claims_max = _parse_range(claims)
    spec = harness.SyntheticSpec(
        n_examples=n_examples,
        claims_min=claims_min,
        claims_max=claims_max,
        p_entail=p_entail,
        rho=rho,
        seed=seed,
    )
    examples = harness.generate_synthetic(spec)
    corpus.save_corpus(corpus_out, examples)
    click.echo(f"wrote {len(examples)} synthetic examples to {corpus_out}")


@main.command()
@click.argument("corpus_in", type=click.Path(exists=True, path_type=Path))
@click.argument("calibration_out", type=click.Path(path_type=Path))
@click.option("--scorer", default="oracle", show_default=True,
              help="random|ordinal|confidence|frequency|oracle, optionally +rank.")
@click.option("--alpha", type=float, required=True, help="Target error rate.")
@click.option("--a", "level", default=1.0, show_default=True,
              help="Partial-entailment level; 1.0 demands full factuality.")
@click.option("--seed", default=0, show_default=True)
@_cli_errors
def calibrate(corpus_in: Path, calibration_out: Path, scorer: str, alpha: float,
              level: float, seed: int):
    """Fit the conformal threshold on an annotated corpus."""
    examples = _load_validated(corpus_in)
    spec = scoring.parse_scorer(scorer, seed=seed)
    result = conformal.calibrate(examples, spec, alpha, level)
    corpus.save_calibration(calibration_out, result)
    k = conformal.quantile_index(result.n, alpha)
    click.echo(
        f"n={result.n} k={k} q_hat={result.q_hat} "
        f"(alpha floor 1/(n+1) = {1.0 / (result.n + 1):.6f})"
    )
    click.echo(f"wrote calibration to {calibration_out}")


@main.command("apply")
@click.argument("corpus_in", type=click.Path(exists=True, path_type=Path))
@click.argument("calibration_in", type=click.Path(exists=True, path_type=Path))
@click.argument("outputs_out", type=click.Path(path_type=Path))
@_gateway_options
@_cli_errors
def apply_cmd(corpus_in: Path, calibration_in: Path, outputs_out: Path, **gateway_kwargs):
    """Filter each example at the calibrated threshold and merge what remains."""
    examples = corpus.load_corpus(corpus_in)
    calibration = corpus.load_calibration(calibration_in)
    spec = scoring.parse_scorer(calibration.scorer, seed=calibration.seed)
    gateway = _build_gateway(**gateway_kwargs)
    lines = []
    for example in examples:
        scores = scoring.final_scores(example, spec)
        output = conformal.apply_threshold(example, scores, calibration.q_hat)
        accepted_texts = [example.claim(cid).text for cid in output.accepted]
        if not output.abstained:
            merged = gateway.merge(example.input, accepted_texts, example.task_kind)
            output = replace(output, merged_text=merged)
        lines.append(corpus.output_to_dict(output, accepted_texts))
    outputs_out.parent.mkdir(parents=True, exist_ok=True)
    corpus.write_text_atomic(
        outputs_out,
        "".join(json.dumps(line, ensure_ascii=False) + "\n" for line in lines),
    )
    abstained = sum(1 for line in lines if line["abstained"])
    click.echo(
        f"wrote {len(lines)} outputs to {outputs_out} "
        f"({abstained} abstentions, q_hat={calibration.q_hat})"
    )


@main.command()
@click.argument("corpus_in", type=click.Path(exists=True, path_type=Path))
@click.argument("out_dir", type=click.Path(path_type=Path))
@click.option("--scorer", "scorers", multiple=True, default=("oracle",), show_default=True)
@click.option("--alphas", default="0.1,0.2,0.3,0.5", show_default=True,
              help="Comma-separated target error rates.")
@click.option("--trials", default=1000, show_default=True)
@click.option("--protocol", type=click.Choice(PROTOCOLS), default="split", show_default=True)
@click.option("--a", "level", default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@_cli_errors
def evaluate(corpus_in: Path, out_dir: Path, scorers: tuple[str, ...], alphas: str,
             trials: int, protocol: str, level: float, seed: int):
    """Run an evaluation protocol and write CSV + JSON reports."""
    examples = _load_validated(corpus_in)
    alpha_grid = [float(a) for a in alphas.split(",") if a.strip()]
    if not alpha_grid:
        raise click.UsageError("--alphas needs at least one value")
    out_dir.mkdir(parents=True, exist_ok=True)
    if protocol == "histogram":
        for name in scorers:
            spec = scoring.parse_scorer(name, seed=seed)
            report = harness.removal_histogram(examples, spec, alpha_grid[0], a=level)
            _write_report_pair(out_dir / f"histogram_{spec.name}", report)
        click.echo(f"wrote histogram reports for {len(scorers)} scorer(s) to {out_dir}")
        return
    reports = []
    for name in scorers:
        spec = scoring.parse_scorer(name, seed=seed)
        if protocol == "split":
            reports.append(
                harness.run_split_experiment(examples, spec, alpha_grid, trials, seed)
            )
        elif protocol == "partial":
            reports.append(
                harness.run_partial_experiment(examples, spec, alpha_grid, trials, seed, level)
            )
        else:
            reports.append(harness.run_removal_curve(examples, spec, alpha_grid, a=level))
    combined = harness.ExperimentReport.combine(reports)
    _write_report_pair(out_dir / f"report_{protocol}", combined)
    click.echo(
        f"wrote {protocol} report for {len(scorers)} scorer(s) "
        f"across {len(alpha_grid)} alpha value(s) to {out_dir}"
    )


@main.command()
@click.argument("corpus_path", type=click.Path(exists=True, path_type=Path))
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui-dir", default=None, help="Directory with the built UI bundle.")
@_cli_errors
def annotate(corpus_path: Path, port: int, host: str, ui_dir: str | None):
    """Serve the annotation API (and UI, if built) for a corpus file."""
    import uvicorn

    from .service import create_app

    app = create_app(corpus_path, ui_dir=ui_dir)
    click.echo(f"annotating {corpus_path} at http://{host}:{port}/")
    uvicorn.run(app, host=host, port=port, log_level="info")


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(json.loads(line))
    return records


def _load_validated(path: Path) -> list[AnnotatedExample]:
    examples = corpus.load_corpus(path)
    for example in examples:
        violations = validate_example(example)
        if violations:
            raise click.ClickException(
                f"example {example.id!r} is invalid: {'; '.join(violations)}"
            )
    return examples


def _parse_range(text: str) -> tuple[int, int]:
    if ".." in text:
        low, high = text.split("..", 1)
        return int(low), int(high)
    value = int(text)
    return value, value


def _write_report_pair(stem: Path, report) -> None:
    corpus.write_text_atomic(stem.with_suffix(".csv"), report.to_csv())
    corpus.write_text_atomic(stem.with_suffix(".json"), report.to_json())


if __name__ == "__main__":
    sys.exit(main())
