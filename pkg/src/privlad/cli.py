"""Command-line front end; a thin client of the HTTP service.

Every command loads one JSON config, posts it to the service (in-process
by default, or a remote base URL via --server), and writes the response to
disk next to a RunManifest. Exit codes: 0 success, 2 validation, 3 net
capacity, 4 audit failure, 5 I/O.
"""

from __future__ import annotations

import asyncio
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import click
import httpx

from . import __version__
from .serialize import dump_json, write_text
from .service.app import create_app

EXIT_VALIDATION = 2
EXIT_CAPACITY = 3
EXIT_AUDIT_FAILED = 4
EXIT_IO = 5


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _load_config(path: str, seed: int | None, threads: int | None) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read config {path}: {exc}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        _fail(EXIT_VALIDATION, f"config {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        _fail(EXIT_VALIDATION, f"config {path} must be a JSON object")
    if seed is not None:
        raw["seed"] = seed
    if threads is not None:
        section = raw.setdefault("experiment", {})
        if isinstance(section, dict):
            section["threads"] = threads
    return raw


def _post(server: str | None, path: str, payload: dict) -> tuple[int, dict]:
    async def go() -> tuple[int, dict]:
        if server is None:
            transport = httpx.ASGITransport(app=create_app())
            client = httpx.AsyncClient(transport=transport, base_url="http://privlad", timeout=None)
        else:
            client = httpx.AsyncClient(base_url=server, timeout=None)
        async with client:
            response = await client.post(path, json=payload)
            return response.status_code, response.json()

    try:
        return asyncio.run(go())
    except httpx.HTTPError as exc:
        _fail(EXIT_IO, f"service request failed: {exc}")


def _unwrap(status: int, body: dict) -> dict:
    """Return the response body on success; exit with the mapped code otherwise."""
    if status < 400:
        return body
    detail = body.get("detail")
    if isinstance(detail, dict) and "kind" in detail:
        kind = detail["kind"]
        message = detail.get("message", "")
        if kind == "capacity":
            _fail(
                EXIT_CAPACITY,
                f"{message} (required_cap={detail.get('required_cap')},"
                f" suggested_zeta={detail.get('suggested_zeta')})",
            )
        if kind == "parse":
            _fail(EXIT_IO, message)
        _fail(EXIT_VALIDATION, message)
    # pydantic request validation: a list of field errors
    _fail(EXIT_VALIDATION, json.dumps(detail))


def _write_output(path: str, text: str) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        write_text(path, text)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {path}: {exc}")


def _write_manifest(
    manifest_path: str | Path,
    config_path: str,
    config: dict,
    started_at: str,
    outputs: list[str],
) -> None:
    manifest = {
        "config_path": str(config_path),
        "config": config,
        "root_seed": config.get("seed"),
        "tool_version": __version__,
        # timestamps are informational only and excluded from reproducibility
        "started_at": started_at,
        "finished_at": _now(),
        "outputs": outputs,
    }
    dump_json(manifest, str(manifest_path))


config_option = click.option("--config", "config_path", required=True, metavar="PATH",
                             help="Run config JSON.")
out_option = click.option("--out", "out_path", required=True, metavar="PATH",
                          help="Output file (directory for sweep).")
seed_option = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None,
                           help="Override the config root seed.")
server_option = click.option("--server", default=None, metavar="URL",
                             help="Remote service base URL (default: in-process).")


@click.group()
@click.version_option(__version__, prog_name="privlad")
def main() -> None:
    """Differentially private L1 regression experiments."""


@main.command()
@config_option
@out_option
@seed_option
@server_option
@click.option("--n", "n_override", type=click.IntRange(min=1), default=None,
              help="Override experiment.n for this draw.")
def synth(config_path: str, out_path: str, seed: int | None, server: str | None,
          n_override: int | None) -> None:
    """Draw a dataset from the configured model and save it as CSV."""
    started = _now()
    cfg = _load_config(config_path, seed, None)
    body = _unwrap(*_post(server, "/v1/synth", {"config": cfg, "n": n_override}))
    _write_output(out_path, body["csv"])
    _write_manifest(f"{out_path}.manifest.json", config_path, cfg, started, [out_path])
    click.echo(f"wrote {body['n']} records with {body['d']} feature(s) to {out_path}")


@main.command()
@config_option
@click.argument("dataset", metavar="DATASET")
@out_option
@seed_option
@server_option
def fit(config_path: str, dataset: str, out_path: str, seed: int | None,
        server: str | None) -> None:
    """Run the private fit on a dataset CSV and save the estimate JSON."""
    started = _now()
    cfg = _load_config(config_path, seed, None)
    try:
        dataset_csv = Path(dataset).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read dataset {dataset}: {exc}")
    body = _unwrap(*_post(server, "/v1/fit", {"config": cfg, "dataset_csv": dataset_csv}))
    _write_output(out_path, json.dumps(body, indent=2, sort_keys=True) + "\n")
    _write_manifest(f"{out_path}.manifest.json", config_path, cfg, started, [out_path])
    params = body["params"]
    click.echo(
        f"w_hat={body['w_hat']} net_size={body['net_size']}"
        f" iota={params['iota']:.6g} zeta={params['zeta']:.6g} ({params['zeta_rule']} rule)"
    )


@main.command()
@config_option
@out_option
@seed_option
@server_option
def audit(config_path: str, out_path: str, seed: int | None, server: str | None) -> None:
    """Audit the mechanism's output distributions; nonzero exit on failure."""
    started = _now()
    cfg = _load_config(config_path, seed, None)
    body = _unwrap(*_post(server, "/v1/audit", {"config": cfg}))
    _write_output(out_path, json.dumps(body, indent=2, sort_keys=True) + "\n")
    _write_manifest(f"{out_path}.manifest.json", config_path, cfg, started, [out_path])
    verdict = "pass" if body["passed"] else "FAIL"
    click.echo(
        f"audit {verdict}: max log ratio {body['max_log_ratio']:.6f}"
        f" vs epsilon {body['epsilon']:.6f} over {body['pairs']} pair(s)"
    )
    if not body["passed"]:
        sys.exit(EXIT_AUDIT_FAILED)


@main.command()
@config_option
@out_option
@seed_option
@server_option
@click.option("--threads", type=click.IntRange(min=1), default=None,
              help="Override experiment.threads.")
def sweep(config_path: str, out_path: str, seed: int | None, server: str | None,
          threads: int | None) -> None:
    """Run the scaling experiment grid; writes rows.csv and summary.json."""
    started = _now()
    cfg = _load_config(config_path, seed, threads)
    body = _unwrap(*_post(server, "/v1/sweep", {"config": cfg}))
    out_dir = Path(out_path)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot create {out_dir}: {exc}")
    rows_path = out_dir / "rows.csv"
    summary_path = out_dir / "summary.json"
    _write_output(str(rows_path), body["rows_csv"])
    dump_json(body["summary"], str(summary_path))
    _write_manifest(
        out_dir / "manifest.json",
        config_path,
        cfg,
        started,
        [str(rows_path), str(summary_path)],
    )
    summary = body["summary"]
    click.echo(
        f"swept {len(summary['cells'])} cell(s), skipped {len(summary['skipped'])},"
        f" slopes: {summary['slopes'] or 'n/a'}"
    )


@main.command()
@config_option
@out_option
@server_option
def net(config_path: str, out_path: str, server: str | None) -> None:
    """Export the covering net at the configured zeta to CSV."""
    started = _now()
    cfg = _load_config(config_path, None, None)
    body = _unwrap(*_post(server, "/v1/net", {"config": cfg}))
    _write_output(out_path, body["csv"])
    _write_manifest(f"{out_path}.manifest.json", config_path, cfg, started, [out_path])
    click.echo(
        f"net of {body['cardinality']} point(s) at zeta={body['zeta']:.6g}"
        f" (cardinality bound {body['bound']}) written to {out_path}"
    )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Serve the HTTP API."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
