"""Model configuration files: schema, parsing, validation.

A config is a single JSON document with expression strings:

    {
      "dims": {"m": 1, "n": 2},
      "constants": {"mass": 1.0, "charge": 1.0, "light_speed": 1.0,
                    "einstein_k": 1.0},
      "h":   [["1"]],                      # m x m, over t1..tm
      "phi": [["1", "0"], ["0", "sin(x1)^2"]],   # n x n, over x1..xn
      "A":   [["t1*sin(x2)"], ["x1^2"]],   # n rows x m cols, over t and x
      "P":   "0",                          # over t and x
      "sampling": {"seed": 7, "count": 100,
                   "t_box": [[0.1, 1.0]],
                   "x_box": [[0.3, 2.8], [0.0, 6.2]],
                   "p_box": [-2.0, 2.0]}
    }

``p_box`` is either one [lo, hi] pair, broadcast over all n*m momentum
coordinates, or an n x m grid of pairs.  Sampling boxes are declared by the
user because chart singularities (sphere poles, log branch points) cannot
be inferred from the expressions.

Failures are reported as three distinct kinds: SchemaError (missing, extra
or mistyped keys), ParseError (an expression string failed to parse, with
its config path and byte offset) and ValidationError (the parsed model
violates an invariant such as mass = 0 or a singular metric at a probe
point).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AsymmetricInput,
    DomainError,
    ExprSyntaxError,
    ParseError,
    SchemaError,
    SingularMetric,
    UnknownIdentifier,
    ValidationError,
)
from .expr import Expression, parse
from .geometry import MetricField, coord_names
from .hamilton import ElectrodynamicsModel, PointGeometry
from .tensors import SPATIAL, TEMPORAL

PROBE_COUNT = 10
_PROBE_KEY = 0x9E3779B9


@dataclass(frozen=True)
class SamplingPlan:
    seed: int
    count: int
    t_box: np.ndarray  # (m, 2)
    x_box: np.ndarray  # (n, 2)
    p_box: np.ndarray  # (n, m, 2)


@dataclass(frozen=True)
class LoadedConfig:
    model: ElectrodynamicsModel
    plan: SamplingPlan
    raw: dict
    model_hash: str


def canonical_hash(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _require_keys(obj: dict, required: set[str], optional: set[str], where: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    keys = set(obj)
    missing = required - keys
    extra = keys - required - optional
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")
    if extra:
        raise SchemaError(f"{where}: unknown keys {sorted(extra)}")


def _number(obj, where: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise SchemaError(f"{where}: expected a number")
    return float(obj)


def _grid(obj, rows: int, cols: int, where: str) -> list[list[str]]:
    if not isinstance(obj, list) or len(obj) != rows:
        raise SchemaError(f"{where}: expected {rows} rows")
    out = []
    for r, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != cols:
            raise SchemaError(f"{where}[{r}]: expected {cols} entries")
        for s, cell in enumerate(row):
            if not isinstance(cell, str):
                raise SchemaError(f"{where}[{r}][{s}]: expected an expression string")
        out.append(list(row))
    return out


def _parse_entry(src: str, variables, where: str) -> Expression:
    try:
        return parse(src, variables)
    except ExprSyntaxError as err:
        raise ParseError(where, str(err), err.offset) from None
    except UnknownIdentifier as err:
        raise ParseError(where, str(err), err.offset) from None


def _box(obj, length: int, where: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != length:
        raise SchemaError(f"{where}: expected {length} [lo, hi] ranges")
    out = np.empty((length, 2))
    for k, pair in enumerate(obj):
        if not isinstance(pair, list) or len(pair) != 2:
            raise SchemaError(f"{where}[{k}]: expected [lo, hi]")
        lo, hi = (_number(v, f"{where}[{k}]") for v in pair)
        if not lo <= hi:
            raise ValidationError(f"{where}[{k}]: empty range [{lo}, {hi}]")
        out[k] = (lo, hi)
    return out


def _p_box(obj, n: int, m: int, where: str) -> np.ndarray:
    # one [lo, hi] broadcast over all momenta, or an n x m grid of pairs
    if (
        isinstance(obj, list)
        and len(obj) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)
    ):
        lo, hi = float(obj[0]), float(obj[1])
        if not lo <= hi:
            raise ValidationError(f"{where}: empty range [{lo}, {hi}]")
        return np.tile(np.array([lo, hi]), (n, m, 1))
    if not isinstance(obj, list) or len(obj) != n:
        raise SchemaError(f"{where}: expected [lo, hi] or an {n}x{m} grid of ranges")
    out = np.empty((n, m, 2))
    for i, row in enumerate(obj):
        out[i] = _box(row, m, f"{where}[{i}]")
    return out


def load_config(path) -> LoadedConfig:
    """Load, parse and fully validate a model config file."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(str(path), f"invalid JSON at line {err.lineno}", err.pos) from None
    return load_config_dict(raw, where=str(path))


def load_config_dict(raw: dict, where: str = "config") -> LoadedConfig:
    _require_keys(
        raw,
        {"dims", "constants", "h", "phi", "A", "P", "sampling"},
        set(),
        where,
    )
    _require_keys(raw["dims"], {"m", "n"}, set(), f"{where}.dims")
    m = raw["dims"]["m"]
    n = raw["dims"]["n"]
    if not isinstance(m, int) or not isinstance(n, int) or m < 1 or n < 1:
        raise SchemaError(f"{where}.dims: m and n must be positive integers")

    _require_keys(
        raw["constants"],
        {"mass", "charge", "light_speed"},
        {"einstein_k"},
        f"{where}.constants",
    )
    mass = _number(raw["constants"]["mass"], f"{where}.constants.mass")
    charge = _number(raw["constants"]["charge"], f"{where}.constants.charge")
    light_speed = _number(raw["constants"]["light_speed"], f"{where}.constants.light_speed")
    einstein_k = _number(raw["constants"].get("einstein_k", 1.0), f"{where}.constants.einstein_k")
    if mass == 0:
        raise ValidationError("mass must be nonzero")
    if light_speed <= 0:
        raise ValidationError("light_speed must be positive")
    if einstein_k == 0:
        raise ValidationError("einstein_k must be nonzero")

    tvars, xvars = coord_names(m, n)
    allvars = tvars + xvars

    h_grid = _grid(raw["h"], m, m, f"{where}.h")
    phi_grid = _grid(raw["phi"], n, n, f"{where}.phi")
    a_grid = _grid(raw["A"], n, m, f"{where}.A")
    if not isinstance(raw["P"], str):
        raise SchemaError(f"{where}.P: expected an expression string")

    h_exprs = tuple(
        tuple(_parse_entry(h_grid[i][j], tvars, f"{where}.h[{i}][{j}]") for j in range(m))
        for i in range(m)
    )
    phi_exprs = tuple(
        tuple(_parse_entry(phi_grid[i][j], xvars, f"{where}.phi[{i}][{j}]") for j in range(n))
        for i in range(n)
    )
    a_exprs = tuple(
        tuple(_parse_entry(a_grid[i][a], allvars, f"{where}.A[{i}][{a}]") for a in range(m))
        for i in range(n)
    )
    p_expr = _parse_entry(raw["P"], allvars, f"{where}.P")

    try:
        h_field = MetricField(TEMPORAL, h_exprs, tvars)
        phi_field = MetricField(SPATIAL, phi_exprs, xvars)
    except AsymmetricInput as err:
        raise ValidationError(f"metric symmetry: {err}") from None

    try:
        model = ElectrodynamicsModel(
            (m, n), mass, charge, light_speed, h_field, phi_field, a_exprs, p_expr
        )
    except ValueError as err:
        raise ValidationError(str(err)) from None

    samp = raw["sampling"]
    _require_keys(samp, {"seed", "count", "t_box", "x_box", "p_box"}, set(), f"{where}.sampling")
    if not isinstance(samp["seed"], int) or isinstance(samp["seed"], bool):
        raise SchemaError(f"{where}.sampling.seed: expected an integer")
    if not isinstance(samp["count"], int) or samp["count"] < 1:
        raise SchemaError(f"{where}.sampling.count: expected a positive integer")
    plan = SamplingPlan(
        seed=samp["seed"],
        count=samp["count"],
        t_box=_box(samp["t_box"], m, f"{where}.sampling.t_box"),
        x_box=_box(samp["x_box"], n, f"{where}.sampling.x_box"),
        p_box=_p_box(samp["p_box"], n, m, f"{where}.sampling.p_box"),
    )

    _probe(model, plan)
    return LoadedConfig(model=model, plan=plan, raw=raw, model_hash=canonical_hash(raw))


def _probe(model: ElectrodynamicsModel, plan: SamplingPlan):
    """Check model invariants at a deterministic handful of box points:
    h positive definite, phi nondegenerate, A and P evaluable."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=plan.seed, spawn_key=(_PROBE_KEY,)))
    for k in range(PROBE_COUNT):
        t = rng.uniform(plan.t_box[:, 0], plan.t_box[:, 1])
        x = rng.uniform(plan.x_box[:, 0], plan.x_box[:, 1])
        try:
            geom = PointGeometry(model, t, x, order=0)
            h_vals = np.array(
                [[geom.h[i, j].value for j in range(model.m)] for i in range(model.m)]
            )
            geom.phinv  # raises SingularMetric on degenerate phi
            geom.A
            geom.P
        except SingularMetric as err:
            raise ValidationError(f"spatial metric singular at probe point {k}: {err}") from None
        except DomainError as err:
            raise ValidationError(f"expression not evaluable at probe point {k}: {err}") from None
        eigvals = np.linalg.eigvalsh(h_vals)
        if np.min(eigvals) <= 0:
            raise ValidationError(
                f"temporal metric not positive definite at probe point {k} "
                f"(eigenvalues {eigvals.tolist()})"
            )
