"""Identity verification harness and machine-readable reports.

Each named check samples points from the config's chart-safe boxes with its
own split of the seeded PRNG (spawn key = position in the fixed registry),
so results are deterministic regardless of execution order and two runs
with the same config and seed are byte-identical.  A check that raises is
recorded as failed with infinite residual instead of aborting the suite.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from . import fields as F
from . import hamilton as H
from .config import LoadedConfig, SamplingPlan
from .errors import PolyhamError
from .expr import BinOp, Const, Expression
from .geometry import bianchi_residual, jet_values
from .hamilton import ElectrodynamicsModel, PointGeometry
from .tensors import JetPoint, cyclic_sum_axes, t_lo, x_lo

ABS_FLOOR = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    samples: int
    max_abs: float
    max_rel: float
    tol: float
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    model_hash: str
    seed: int
    checks: tuple[CheckResult, ...]
    passed: bool

    def to_dict(self) -> dict:
        return {
            "model_hash": self.model_hash,
            "seed": self.seed,
            "checks": [
                {
                    "name": c.name,
                    "samples": c.samples,
                    "max_abs": c.max_abs,
                    "max_rel": c.max_rel,
                    "tol": c.tol,
                    "pass": c.passed,
                }
                for c in self.checks
            ],
            "pass": self.passed,
        }

    @staticmethod
    def from_dict(data: dict) -> "VerificationReport":
        checks = tuple(
            CheckResult(
                name=c["name"],
                samples=c["samples"],
                max_abs=c["max_abs"],
                max_rel=c["max_rel"],
                tol=c["tol"],
                passed=c["pass"],
            )
            for c in data["checks"]
        )
        return VerificationReport(
            model_hash=data["model_hash"], seed=data["seed"], checks=checks, passed=data["pass"]
        )


class _Accumulator:
    """Tracks the worst absolute and relative residual over samples."""

    def __init__(self):
        self.max_abs = 0.0
        self.max_rel = 0.0
        self.samples = 0

    def add(self, abs_res: float, scale: float = 1.0):
        abs_res = float(abs_res)
        self.max_abs = max(self.max_abs, abs_res)
        if abs_res == 0.0:
            rel = 0.0
        elif scale > 0.0:
            rel = abs_res / scale
        else:
            rel = float("inf")
        self.max_rel = max(self.max_rel, rel)

    def bump(self):
        self.samples += 1


def _sample_tx(rng, plan: SamplingPlan):
    t = rng.uniform(plan.t_box[:, 0], plan.t_box[:, 1])
    x = rng.uniform(plan.x_box[:, 0], plan.x_box[:, 1])
    return t, x


def _sample_jp(rng, plan: SamplingPlan) -> JetPoint:
    t, x = _sample_tx(rng, plan)
    p = rng.uniform(plan.p_box[:, :, 0], plan.p_box[:, :, 1])
    return JetPoint(t=t, x=x, p=p)


def _perturbed_potential(model: ElectrodynamicsModel) -> ElectrodynamicsModel:
    shifted = Expression(
        ast=BinOp(op="+", left=model.P.ast, right=Const(value=100.0)),
        variables=model.P.variables,
    )
    return dataclasses.replace(model, P=shifted)


# ---------------------------------------------------------------------------
# the checks
# ---------------------------------------------------------------------------
def _check_legendre(model, plan, rng, count, acc):
    for _ in range(count):
        t, x = _sample_tx(rng, plan)
        v = rng.uniform(plan.p_box[:, :, 0], plan.p_box[:, :, 1])
        L = H.lagrangian(model, t, x, v)
        p = H.legendre_momenta(model, t, x, v)
        ham = H.hamiltonian(model, JetPoint(t=t, x=x, p=p))
        acc.add(abs(ham - (float(np.sum(p * v)) - L)), 1.0 + abs(L))
        acc.bump()


def _check_metric_compat(model, plan, rng, count, acc):
    for _ in range(count):
        t, x = _sample_tx(rng, plan)
        geom = PointGeometry(model, t, x, order=1)
        dh = jet_values(geom.cov_t_jets(geom.h, (t_lo(), t_lo())))
        dphi = jet_values(geom.cov_x_jets(geom.phi, (x_lo(), x_lo())))
        scale = max(
            1.0,
            float(np.max(np.abs(jet_values(geom.h)))),
            float(np.max(np.abs(jet_values(geom.phi)))),
        )
        acc.add(max(np.max(np.abs(dh)), np.max(np.abs(dphi))), scale)
        acc.bump()


def _check_bianchi_first(model, plan, rng, count, acc):
    for _ in range(count):
        t, x = _sample_tx(rng, plan)
        geom = PointGeometry(model, t, x, order=2)
        for curv in (jet_values(geom.chi_curv), jet_values(geom.phi_curv)):
            cyc = cyclic_sum_axes(curv, (1, 2, 3))
            acc.add(np.max(np.abs(cyc)), max(1.0, float(np.max(np.abs(curv)))))
        acc.bump()


def _check_bianchi_contracted(model, plan, rng, count, acc):
    for _ in range(count):
        t, x = _sample_tx(rng, plan)
        acc.add(bianchi_residual(model.h, t))
        acc.add(bianchi_residual(model.phi, x))
        acc.bump()


def _check_deflection(model, plan, rng, count, acc):
    for _ in range(count):
        jp = _sample_jp(rng, plan)
        geom = PointGeometry(model, jp.t, jp.x, order=2)
        D = H.liouville_field(geom)
        got = (
            H.dcov_deriv(geom, D, "t").eval(jp).data,
            H.dcov_deriv(geom, D, "x").eval(jp).data,
            H.dcov_deriv(geom, D, "p").eval(jp).data,
        )
        want = F._closed_deflections(geom)
        for g, w in zip(got, want):
            acc.add(np.max(np.abs(g - w)), max(1.0, float(np.max(np.abs(w)))))
        acc.bump()


def _check_torsion_antisym(model, plan, rng, count, acc):
    for _ in range(count):
        jp = _sample_jp(rng, plan)
        r1, _, r3 = H.torsions(model, jp)
        sym1 = r1.data + np.einsum("frab->frba", r1.data)
        sym3 = r3.data + np.einsum("frij->frji", r3.data)
        scale = max(1.0, r1.max_abs(), r3.max_abs())
        acc.add(max(np.max(np.abs(sym1)), np.max(np.abs(sym3))), scale)
        acc.bump()


def _maxwell_check(block: int):
    def run(model, plan, rng, count, acc):
        for _ in range(count):
            jp = _sample_jp(rng, plan)
            lhs, rhs = F.maxwell_sides(model, jp)[block]
            scale = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
            acc.add(np.max(np.abs(lhs - rhs)), scale)
            acc.bump()

    return run


def _check_einstein_trace(model, plan, rng, count, acc):
    mass_c = model.mass * model.light_speed
    m, n = model.dims
    for _ in range(count):
        t, x = _sample_tx(rng, plan)
        chi_ab, phi_ij, chi_sc, phi_sc, sc = F.ricci_blocks(model, t, x)
        geom = PointGeometry(model, t, x, order=0)
        h_vals = jet_values(geom.h)
        phinv = jet_values(geom.phinv)
        hstar_inv = np.linalg.inv(h_vals / (4.0 * mass_c))
        sc_recomputed = float(
            np.einsum("ab,ab->", hstar_inv, chi_ab.data)
            + np.einsum("ij,ij->", phinv, phi_ij.data)
        )
        scale = max(1.0, abs(sc))
        acc.add(abs(sc_recomputed - sc), scale)
        blocks = F.stress_energy(model, t, x, K=1.0)
        tr_t = float(np.einsum("ab,ab->", np.linalg.inv(h_vals), blocks.T_temporal.data))
        tr_x = float(np.einsum("ij,ij->", phinv, blocks.T_spatial.data))
        acc.add(abs(tr_t - (chi_sc - m * sc / (8.0 * mass_c))), scale)
        acc.add(abs(tr_x - (phi_sc - n * sc / 2.0)), scale)
        acc.bump()


def _check_conservation(model, plan, rng, count, acc):
    for _ in range(count):
        t, x = _sample_tx(rng, plan)
        res_t, res_x = F.conservation_residuals(model, t, x)
        acc.add(max(np.max(np.abs(res_t)), np.max(np.abs(res_x))))
        acc.bump()


def _check_potential_independence(model, plan, rng, count, acc):
    other = _perturbed_potential(model)
    for _ in range(count):
        jp = _sample_jp(rng, plan)
        pairs = []
        for mdl, store in ((model, []), (other, [])):
            store.append(H.vertical_metric(mdl, jp.t, jp.x).data)
            nc = H.nonlinear_connection(mdl, jp)
            store.extend([nc.N1.data, nc.N2.data])
            cc = H.cartan_connection(mdl, jp.t, jp.x)
            store.extend([cc.H_temporal.data, cc.H_spatial.data])
            store.extend([blk.data for blk in H.torsions(mdl, jp)])
            store.extend([blk.data for blk in H.cartan_curvatures(mdl, jp.t, jp.x)])
            pairs.append(store)
        worst = max(
            float(np.max(np.abs(a - b))) if a.size else 0.0
            for a, b in zip(pairs[0], pairs[1])
        )
        acc.add(worst)
        acc.bump()


def _check_charge_zero(model, plan, rng, count, acc):
    neutral = dataclasses.replace(model, charge=0.0)
    for _ in range(count):
        jp = _sample_jp(rng, plan)
        em = F.electromagnetic_form(neutral, jp.t, jp.x)
        _, d2, _ = F.deflection_tensors(neutral, jp)
        _, r2, _ = H.torsions(neutral, jp)
        acc.add(max(em.F.max_abs(), d2.max_abs(), r2.max_abs()))
        acc.bump()


# name, runner, relative tolerance, absolute floor.  Order is frozen: the
# PRNG split of every check is keyed to its position here.
CHECK_REGISTRY = (
    ("legendre_duality", _check_legendre, 1e-9, ABS_FLOOR),
    ("metric_compatibility", _check_metric_compat, 1e-10, ABS_FLOOR),
    ("bianchi_first", _check_bianchi_first, 1e-10, ABS_FLOOR),
    ("bianchi_contracted", _check_bianchi_contracted, 1e-9, ABS_FLOOR),
    ("deflection_consistency", _check_deflection, 1e-9, ABS_FLOOR),
    ("torsion_antisymmetry", _check_torsion_antisym, 1e-10, ABS_FLOOR),
    ("maxwell_block_1", _maxwell_check(0), 1e-8, ABS_FLOOR),
    ("maxwell_block_2", _maxwell_check(1), 1e-8, ABS_FLOOR),
    ("maxwell_block_3", _maxwell_check(2), 0.0, 0.0),
    ("einstein_trace", _check_einstein_trace, 1e-10, ABS_FLOOR),
    ("conservation_laws", _check_conservation, 1e-8, 1e-8),
    ("potential_independence", _check_potential_independence, 0.0, 0.0),
    ("charge_zero_limit", _check_charge_zero, 0.0, 1e-15),
)


def run_verification(
    model: ElectrodynamicsModel,
    plan: SamplingPlan,
    model_hash: str = "",
) -> VerificationReport:
    """Run every registered identity check against the model."""
    results = []
    for index, (name, runner, rtol, atol) in enumerate(CHECK_REGISTRY):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=plan.seed, spawn_key=(index,))
        )
        acc = _Accumulator()
        try:
            runner(model, plan, rng, plan.count, acc)
            passed = acc.max_abs <= atol or acc.max_rel <= rtol
        except PolyhamError:
            acc.max_abs = float("inf")
            acc.max_rel = float("inf")
            passed = False
        results.append(
            CheckResult(
                name=name,
                samples=acc.samples,
                max_abs=acc.max_abs,
                max_rel=acc.max_rel,
                tol=rtol,
                passed=passed,
            )
        )
    return VerificationReport(
        model_hash=model_hash,
        seed=plan.seed,
        checks=tuple(results),
        passed=all(c.passed for c in results),
    )


def run_verification_config(
    cfg: LoadedConfig, samples: int | None = None, seed: int | None = None
) -> VerificationReport:
    plan = cfg.plan
    if samples is not None:
        plan = dataclasses.replace(plan, count=samples)
    if seed is not None:
        plan = dataclasses.replace(plan, seed=seed)
    return run_verification(cfg.model, plan, model_hash=cfg.model_hash)


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------
def render_report(report: VerificationReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [
        f"model {report.model_hash[:16]}  seed {report.seed}",
        f"{'check':<24} {'samples':>7} {'max_abs':>12} {'max_rel':>12} {'tol':>9}  result",
    ]
    for c in report.checks:
        lines.append(
            f"{c.name:<24} {c.samples:>7} {c.max_abs:>12.3e} {c.max_rel:>12.3e}"
            f" {c.tol:>9.1e}  {'pass' if c.passed else 'FAIL'}"
        )
    lines.append(f"overall: {'pass' if report.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def emit_report(report: VerificationReport, fmt: str = "json", path=None) -> None:
    """Write the report to ``path`` or stdout."""
    text = render_report(report, fmt)
    if path is None:
        print(text, end="")
    else:
        with open(path, "w") as handle:
            handle.write(text)
