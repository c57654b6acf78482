"""Command-line entry points: analyze an essay file, run evaluations, serve
the HTTP API.

Every command runs fully offline with ``--mock FIXTURES_DIR``.  Exit codes
are stable: 0 success, 1 failure, 2 no argumentation found in the essay.
"""

from __future__ import annotations

import json
import socket
import sys
from dataclasses import replace
from pathlib import Path

import click

from .config import AppConfig
from .evalharness import RunFailedError, load_aae_corpus, load_snli, run_structure_eval, run_validity_eval
from .gateway import GatewayError, LlmGateway, ProviderConfigError, TokenBucket, build_provider
from .pipeline import PipelineConfig, PipelineError, run_pipeline

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_EMPTY_ARGUMENT = 2


def _runtime(
    model: str | None,
    provider: str | None,
    mock: str | None,
    threshold: float | None,
    config_file: str | None,
) -> tuple[PipelineConfig, LlmGateway]:
    app = AppConfig.from_env()
    if config_file:
        app = app.with_config_file(config_file)
    pipeline = app.pipeline
    model_cfg = pipeline.model
    if provider:
        model_cfg = replace(model_cfg, provider=provider)
    if model:
        model_cfg = replace(model_cfg, model_name=model)
    pipeline = replace(pipeline, model=model_cfg)
    if threshold is not None:
        pipeline = replace(pipeline, anchor_threshold=threshold)
    mock_dir = Path(mock) if mock else app.mock_dir
    provider_impl = build_provider(pipeline.model, mock_fixtures=mock_dir)
    limiter = TokenBucket(app.rate_limit) if app.rate_limit else None
    gateway = LlmGateway(provider=provider_impl, audit_path=app.audit_path, rate_limiter=limiter)
    return pipeline, gateway


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_FAILURE)


@click.group()
def main() -> None:
    """Argument-aware writing feedback toolkit."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--mode", type=click.Choice(["visual", "socratic"]), default="visual", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write the full result JSON here.")
@click.option("--model", help="Override the model name.")
@click.option("--provider", help="Override the provider (anthropic, openai, mock).")
@click.option("--mock", type=click.Path(exists=True, file_okay=False), help="Mock fixtures directory (offline run).")
@click.option("--threshold", type=float, help="Fuzzy anchor acceptance threshold.")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), help="JSON config file.")
def analyze(file: Path, mode: str, out: Path | None, model: str | None, provider: str | None, mock: str | None, threshold: float | None, config_file: str | None) -> None:
    """Run the analysis pipeline over an essay file and print a summary."""
    essay = file.read_text(encoding="utf-8")
    try:
        pipeline_cfg, gateway = _runtime(model, provider, mock, threshold, config_file)
        result = run_pipeline(essay, gateway, pipeline_cfg)
    except (ProviderConfigError, GatewayError, PipelineError, ValueError) as exc:
        _fail(str(exc))
        return

    payload = result.to_dict()
    payload["mode"] = mode
    if out:
        out.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        click.echo(f"result written to {out}")

    if result.empty_argument:
        click.echo("no argumentation found in the essay")
        sys.exit(EXIT_EMPTY_ARGUMENT)

    invalid = result.evaluated.invalid_indices()
    click.echo(f"claim: {result.analysis.claim_quote}")
    click.echo(
        f"relations: {len(result.analysis.relations)} "
        f"({len(invalid)} invalid, {len(result.evaluated.failed)} unevaluated)"
    )
    click.echo(f"plan steps: {len(result.plan.steps)}")
    for name in ("structure", "evaluation", "plan"):
        if name in result.timings:
            click.echo(f"{name} stage: {result.timings[name]:.2f}s")
    for warning in result.warnings:
        click.echo(f"warning: {warning}")


@main.group(name="eval")
def eval_group() -> None:
    """Evaluation runs against gold datasets."""


@eval_group.command()
@click.option("--corpus", required=True, type=click.Path(exists=True, file_okay=False), help="Directory of .txt/.ann essay pairs.")
@click.option("--n", "n", required=True, type=int)
@click.option("--seed", required=True, type=int)
@click.option("--model", help="Override the model name.")
@click.option("--provider", help="Override the provider.")
@click.option("--mock", type=click.Path(exists=True, file_okay=False), help="Mock fixtures directory.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write the metrics report JSON here.")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False))
def structure(corpus: str, n: int, seed: int, model: str | None, provider: str | None, mock: str | None, out: Path | None, config_file: str | None) -> None:
    """Structure-extraction accuracy against gold essay annotations."""
    try:
        pipeline_cfg, gateway = _runtime(model, provider, mock, None, config_file)
        essays = load_aae_corpus(corpus)
        report = run_structure_eval(essays, n, seed, gateway, pipeline_cfg)
    except (ProviderConfigError, GatewayError, RunFailedError, ValueError) as exc:
        _fail(str(exc))
        return
    click.echo(report.table())
    if out:
        report.write(out)
        click.echo(f"report written to {out}")


@eval_group.command()
@click.option("--pairs", required=True, type=click.Path(exists=True, dir_okay=False), help="Line-delimited JSON premise/hypothesis pairs.")
@click.option("--n", "n", required=True, type=int)
@click.option("--seed", required=True, type=int)
@click.option("--model", help="Override the model name.")
@click.option("--provider", help="Override the provider.")
@click.option("--mock", type=click.Path(exists=True, file_okay=False), help="Mock fixtures directory.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write the metrics report JSON here.")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False))
def validity(pairs: str, n: int, seed: int, model: str | None, provider: str | None, mock: str | None, out: Path | None, config_file: str | None) -> None:
    """Validity-verdict accuracy against converted inference pairs."""
    try:
        pipeline_cfg, gateway = _runtime(model, provider, mock, None, config_file)
        loaded = load_snli(pairs)
        report = run_validity_eval(
            loaded.pairs, n, seed, gateway, pipeline_cfg, skipped_no_consensus=loaded.skipped
        )
    except (ProviderConfigError, GatewayError, RunFailedError, ValueError) as exc:
        _fail(str(exc))
        return
    click.echo(report.table())
    if out:
        report.write(out)
        click.echo(f"report written to {out}")


@main.command()
@click.option("--port", type=int, default=None, help="Port to bind (default from env, then 8000).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store-dir", type=click.Path(file_okay=False), help="Document store directory.")
@click.option("--mock", type=click.Path(exists=True, file_okay=False), help="Mock fixtures directory.")
@click.option("--frontend", type=click.Path(exists=True, file_okay=False), help="Built browser client to serve at /.")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False))
def serve(port: int | None, host: str, store_dir: str | None, mock: str | None, frontend: str | None, config_file: str | None) -> None:
    """Start the HTTP API; SIGINT drains in-flight jobs before exit."""
    import uvicorn

    from .server import create_app

    app_config = AppConfig.from_env()
    if config_file:
        app_config = app_config.with_config_file(config_file)
    if store_dir:
        app_config = replace(app_config, store_dir=Path(store_dir))
    if mock:
        app_config = replace(app_config, mock_dir=Path(mock))
    if frontend:
        app_config = replace(app_config, frontend_dir=Path(frontend))
    bind_port = port if port is not None else app_config.port

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, bind_port))
    except OSError as exc:
        probe.close()
        _fail(f"cannot bind {host}:{bind_port}: {exc}")
        return
    probe.close()

    app = create_app(app_config)
    click.echo(f"serving on http://{host}:{bind_port}")
    uvicorn.run(app, host=host, port=bind_port, log_level="info")


if __name__ == "__main__":
    main()
