"""Command-line interface.

Thin client over the same core functions the HTTP service exposes; all
heavy lifting lives in config/verify/compute.  Exit codes: 0 success (and
verification pass), 1 verification failure, 2 config or IO errors.
"""

from __future__ import annotations

import json
import sys

import click

from .compute import compute_objects, parse_point
from .config import load_config
from .errors import ConfigError, PolyhamError
from .verify import emit_report, run_verification_config


def _fail(message: str, code: int = 2):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(config_path):
    try:
        return load_config(config_path)
    except ConfigError as err:
        _fail(str(err))
    except OSError as err:
        _fail(str(err))


@click.group()
def main():
    """Geometry of the multi-time Hamilton space of electrodynamics:
    pointwise tensors and identity verification on the dual 1-jet space."""


@main.command()
@click.argument("config", type=click.Path())
def check(config):
    """Load and validate a model config, nothing else."""
    cfg = _load(config)
    m, n = cfg.model.dims
    click.echo(f"ok: m={m} n={n} hash={cfg.model_hash[:16]}")


def _parse_at(spec: str) -> dict[str, list[float]]:
    groups: dict[str, list[float]] = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"--at segment {part!r} is not key=values")
        key, _, values = part.partition("=")
        key = key.strip()
        if key not in ("t", "x", "p"):
            raise ConfigError(f"--at key must be t, x or p, got {key!r}")
        try:
            groups[key] = [float(v) for v in values.split(":") if v != ""]
        except ValueError:
            raise ConfigError(f"--at {key}: could not parse {values!r}") from None
    return groups


@main.command()
@click.argument("config", type=click.Path())
@click.option(
    "--at",
    "at_spec",
    required=True,
    help="Jet point, e.g. t=0.4,x=1.1:0.8,p=0.6:-1.2 (p row-major over [i][a]).",
)
@click.option(
    "--object",
    "objects",
    multiple=True,
    default=("all",),
    help="N | torsion | F | einstein | all (repeatable).",
)
def compute(config, at_spec, objects):
    """Print the requested tensors at one jet point as JSON."""
    cfg = _load(config)
    m, n = cfg.model.dims
    try:
        groups = _parse_at(at_spec)
        for key in ("t", "x", "p"):
            if key not in groups:
                raise ConfigError(f"--at is missing {key}=...")
        jp = parse_point(cfg.model, groups["t"], groups["x"], groups["p"])
        einstein_k = float(cfg.raw["constants"].get("einstein_k", 1.0))
        result = compute_objects(cfg.model, jp, objects, einstein_k=einstein_k)
    except PolyhamError as err:
        _fail(str(err))
    click.echo(json.dumps(result, sort_keys=True, indent=2))


@main.command()
@click.argument("config", type=click.Path())
@click.option("--samples", type=int, default=None, help="Override sampling.count.")
@click.option("--seed", type=int, default=None, help="Override sampling.seed.")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json")
@click.option("--out", type=click.Path(), default=None, help="Write the report here instead of stdout.")
def verify(config, samples, seed, fmt, out):
    """Run the full identity verification suite."""
    cfg = _load(config)
    try:
        report = run_verification_config(cfg, samples=samples, seed=seed)
        emit_report(report, fmt, out)
    except OSError as err:
        _fail(str(err))
    sys.exit(0 if report.passed else 1)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("polyham.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
