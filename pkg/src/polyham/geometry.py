"""Classical Riemannian objects of the two base metrics.

The temporal metric h_ab(t) and the spatial metric phi_ij(x) each live on
their own factor manifold and depend on their own coordinates only.  This
module computes their Levi-Civita data (Christoffel symbols, curvature,
Ricci, scalar) and the two generalized Levi-Civita covariant derivatives
that extend them to mixed-index fields over (t, x).

Curvature convention.  Components are

    R^l_ijk = d_k Gamma^l_ij - d_j Gamma^l_ik
              + Gamma^s_ij Gamma^l_sk - Gamma^s_ik Gamma^l_sj,

antisymmetric in (j, k), with Ricci formed by contracting the upper slot
against the *last* lower slot, Ric_ij = R^l_ijl.  This is the unique sign
choice under which the unit 2-sphere has Ric = +phi (scalar 2) and under
which the curvature of the canonical nonlinear connection reproduces the
closed-form torsion blocks; the identity suites downstream pin it.

All evaluation is pointwise on demand in jet arithmetic, so derivatives of
derived objects (e.g. the divergence of the Einstein block) are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import AsymmetricInput, SingularMetric
from .expr import Expression, eval_jet
from .jets import Jet, JetSpace, jet_space
from .tensors import (
    LO,
    SPATIAL,
    TEMPORAL,
    UP,
    DET_THRESHOLD,
    DTensor,
    IndexSlot,
)


def coord_names(m: int, n: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Canonical coordinate names: (t1..tm, x1..xn)."""
    return (
        tuple(f"t{k + 1}" for k in range(m)),
        tuple(f"x{k + 1}" for k in range(n)),
    )


# ---------------------------------------------------------------------------
# fields given by expression grids
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class MetricField:
    """Symmetric expression-valued metric block on one factor manifold.

    ``cls`` is TEMPORAL (entries over t1..tm, must be Riemannian) or
    SPATIAL (entries over x1..xn, nondegenerate but possibly indefinite).
    """

    cls: str
    entries: tuple[tuple[Expression, ...], ...]
    coords: tuple[str, ...]

    def __post_init__(self):
        dim = len(self.coords)
        if len(self.entries) != dim or any(len(row) != dim for row in self.entries):
            raise ValueError(f"metric grid must be {dim}x{dim}")
        for i in range(dim):
            for j in range(i + 1, dim):
                if self.entries[i][j].ast != self.entries[j][i].ast and not self._probe_symmetric(i, j):
                    raise AsymmetricInput(f"metric entries [{i}][{j}] and [{j}][{i}] differ")

    def _probe_symmetric(self, i: int, j: int) -> bool:
        space = jet_space(self.coords, 0)
        for k in range(5):
            env = {v: 0.37 + 0.211 * k + 0.05 * pos for pos, v in enumerate(self.coords)}
            try:
                a = eval_jet(self.entries[i][j], space, env).value
                b = eval_jet(self.entries[j][i], space, env).value
            except Exception:
                continue
            if abs(a - b) > 1e-12 * max(1.0, abs(a), abs(b)):
                return False
        return True

    @property
    def dim(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class ExprTensorField:
    """A mixed-index tensor field over (t, x) given by an expression grid."""

    slots: tuple[IndexSlot, ...]
    dims: tuple[int, int]
    entries: np.ndarray  # object array of Expression, shape per slots
    variables: tuple[str, ...]

    def jets(self, space: JetSpace, env: dict[str, float]) -> np.ndarray:
        out = np.empty(self.entries.shape, dtype=object)
        for idx in np.ndindex(self.entries.shape):
            out[idx] = eval_jet(self.entries[idx], space, env)
        return out


# ---------------------------------------------------------------------------
# jet-level kernels
# ---------------------------------------------------------------------------
def metric_jets(metric: MetricField, space: JetSpace, env: dict[str, float]) -> np.ndarray:
    dim = metric.dim
    out = np.empty((dim, dim), dtype=object)
    for i in range(dim):
        for j in range(i, dim):
            out[i, j] = eval_jet(metric.entries[i][j], space, env)
            out[j, i] = out[i, j]
    return out


def invert_jet_matrix(mat: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse of a jet-valued matrix, pivoting on values."""
    n = mat.shape[0]
    vals = np.array([[mat[i, j].value for j in range(n)] for i in range(n)])
    det = float(np.linalg.det(vals))
    if abs(det) <= DET_THRESHOLD:
        raise SingularMetric(f"|det| = {abs(det):.3e} below threshold {DET_THRESHOLD}")
    space = mat[0, 0].space
    a = [[mat[i, j] for j in range(n)] for i in range(n)]
    inv = [
        [Jet.constant(space, 1.0 if i == j else 0.0) for j in range(n)]
        for i in range(n)
    ]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col].value))
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        scale = a[col][col]._reciprocal()
        a[col] = [e * scale for e in a[col]]
        inv[col] = [e * scale for e in inv[col]]
        for row in range(n):
            if row == col:
                continue
            f = a[row][col]
            a[row] = [e - f * p for e, p in zip(a[row], a[col])]
            inv[row] = [e - f * p for e, p in zip(inv[row], inv[col])]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = inv[i][j]
    return out


def christoffel_jets(g: np.ndarray, ginv: np.ndarray, dvars: Sequence[str]) -> np.ndarray:
    """Levi-Civita Gamma^k_ij = 1/2 g^{kr} (d_i g_rj + d_j g_ri - d_r g_ij)."""
    n = g.shape[0]
    dg = np.empty((n, n, n), dtype=object)  # dg[a,b,c] = d g_ab / d var_c
    for a in range(n):
        for b in range(a, n):
            for c in range(n):
                dg[a, b, c] = g[a, b].derivative(dvars[c])
                dg[b, a, c] = dg[a, b, c]
    out = np.empty((n, n, n), dtype=object)
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                acc = None
                for r in range(n):
                    term = ginv[k, r] * (dg[r, j, i] + dg[r, i, j] - dg[i, j, r])
                    acc = term if acc is None else acc + term
                out[k, i, j] = acc * 0.5
                out[k, j, i] = out[k, i, j]
    return out


def riemann_jets(gamma: np.ndarray, dvars: Sequence[str]) -> np.ndarray:
    """R^l_ijk per the module convention; antisymmetric in (j, k) exactly."""
    n = gamma.shape[0]
    dgamma = np.empty((n, n, n, n), dtype=object)  # dgamma[l,i,j,c] = d Gamma^l_ij / d var_c
    for l in range(n):
        for i in range(n):
            for j in range(i, n):
                for c in range(n):
                    dgamma[l, i, j, c] = gamma[l, i, j].derivative(dvars[c])
                    dgamma[l, j, i, c] = dgamma[l, i, j, c]
    out = np.empty((n, n, n, n), dtype=object)
    for l in range(n):
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    acc = dgamma[l, i, j, k] - dgamma[l, i, k, j]
                    for s in range(n):
                        acc = acc + gamma[s, i, j] * gamma[l, s, k] - gamma[s, i, k] * gamma[l, s, j]
                    out[l, i, j, k] = acc
    return out


def ricci_jets(riem: np.ndarray) -> np.ndarray:
    """Ric_ij = R^l_ijl (upper slot against the last lower slot)."""
    n = riem.shape[0]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = reduce(lambda a, b: a + b, (riem[l, i, j, l] for l in range(n)))
    return out


def scalar_jet(ricci: np.ndarray, ginv: np.ndarray) -> Jet:
    n = ricci.shape[0]
    acc = None
    for i in range(n):
        for j in range(n):
            term = ginv[i, j] * ricci[i, j]
            acc = term if acc is None else acc + term
    return acc


def cov_deriv_jets(
    comp: np.ndarray,
    slots: Sequence[IndexSlot],
    gamma: np.ndarray,
    dvars: Sequence[str],
    cls: str,
) -> np.ndarray:
    """Generalized Levi-Civita covariant derivative at jet level.

    Appends one derivative axis (extent = len(dvars)).  Each slot of class
    ``cls`` picks up a connection correction with the sign of its variance;
    slots of the other class are untouched.  Works for the ";a" (temporal)
    and ":k" (spatial) derivatives alike; pair halves are handled by their
    own class and variance.
    """
    nd = len(dvars)
    ext = gamma.shape[0]
    out = np.empty(comp.shape + (nd,), dtype=object)
    for idx in np.ndindex(comp.shape):
        for a in range(nd):
            acc = comp[idx].derivative(dvars[a])
            for spos, slot in enumerate(slots):
                if slot.cls != cls:
                    continue
                c = idx[spos]
                for g in range(ext):
                    swapped = idx[:spos] + (g,) + idx[spos + 1 :]
                    if slot.variance == UP:
                        acc = acc + comp[swapped] * gamma[c, g, a]
                    else:
                        acc = acc - comp[swapped] * gamma[g, c, a]
            out[idx + (a,)] = acc
    return out


def jet_values(arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape, dtype=float)
    for idx in np.ndindex(arr.shape):
        out[idx] = arr[idx].value
    return out


# ---------------------------------------------------------------------------
# point-level API
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ConnectionCoeffs:
    cls: str
    gamma: DTensor  # slots (up, lo, lo), symmetric in the lower pair


class MetricAtPoint:
    """Evaluated jets of one metric block at one point.

    ``space`` may range over any variable tuple containing the metric's
    own coordinates; foreign partials are simply zero, which lets metric
    data mix with jets of fields over the full (t, x) chart.
    """

    def __init__(self, metric: MetricField, space: JetSpace, env: dict[str, float]):
        self.metric = metric
        self.dvars = metric.coords
        self.g = metric_jets(metric, space, env)
        self.ginv = invert_jet_matrix(self.g)

    def gamma(self) -> np.ndarray:
        return christoffel_jets(self.g, self.ginv, self.dvars)

    def riemann(self) -> np.ndarray:
        return riemann_jets(self.gamma(), self.dvars)


def _at_point(metric: MetricField, point, order: int) -> MetricAtPoint:
    env = dict(zip(metric.coords, np.atleast_1d(np.asarray(point, dtype=float))))
    return MetricAtPoint(metric, jet_space(metric.coords, order), env)


def _own_slots(metric: MetricField, pattern: str) -> tuple[IndexSlot, ...]:
    return tuple(IndexSlot(metric.cls, UP if ch == "u" else LO) for ch in pattern)


def christoffel(metric: MetricField, point) -> ConnectionCoeffs:
    """Christoffel symbols of one metric block at a point."""
    at = _at_point(metric, point, order=1)
    data = jet_values(at.gamma())
    dims = _metric_dims_for_tensor(metric)
    return ConnectionCoeffs(metric.cls, DTensor(_own_slots(metric, "ull"), dims, data))


def _metric_dims_for_tensor(metric: MetricField) -> tuple[int, int]:
    # DTensor dims carry (m, n); the unused extent is irrelevant but must
    # be positive, so mirror the block dimension into both.
    d = metric.dim
    return (d, d)


def riemann_curvature(metric: MetricField, point) -> DTensor:
    """Curvature R^l_ijk of one metric block at a point."""
    at = _at_point(metric, point, order=2)
    data = jet_values(at.riemann())
    return DTensor(_own_slots(metric, "ulll"), _metric_dims_for_tensor(metric), data)


def ricci_and_scalar(metric: MetricField, point) -> tuple[DTensor, float]:
    """(Ric_ij, scalar) of one metric block at a point."""
    at = _at_point(metric, point, order=2)
    ric = ricci_jets(at.riemann())
    sc = scalar_jet(ric, at.ginv)
    dt = DTensor(_own_slots(metric, "ll"), _metric_dims_for_tensor(metric), jet_values(ric))
    return dt, sc.value


def bianchi_residual(metric: MetricField, point) -> float:
    """Max-norm of the contracted second Bianchi identity,
    div(Ric^r_j - Sc/2 delta^r_j); vanishes for Levi-Civita data."""
    at = _at_point(metric, point, order=3)
    n = metric.dim
    gamma = at.gamma()
    ric = ricci_jets(riemann_jets(gamma, at.dvars))
    sc = scalar_jet(ric, at.ginv)
    einstein = np.empty((n, n), dtype=object)  # E^r_j
    for r in range(n):
        for j in range(n):
            acc = None
            for s in range(n):
                term = at.ginv[r, s] * ric[s, j]
                acc = term if acc is None else acc + term
            if r == j:
                acc = acc - sc * 0.5
            einstein[r, j] = acc
    slots = _own_slots(metric, "ul")
    div = cov_deriv_jets(einstein, slots, gamma, at.dvars, metric.cls)
    worst = 0.0
    for j in range(n):
        acc = reduce(lambda a, b: a + b, (div[r, j, r] for r in range(n)))
        worst = max(worst, abs(acc.value))
    return worst


def cov_deriv_T(h: MetricField, field: ExprTensorField, t_point, x_point) -> DTensor:
    """T-generalized Levi-Civita covariant derivative of a mixed-index
    field over (t, x): d/dt^a plus chi corrections on temporal slots only.
    Appends one lower temporal slot."""
    return _cov_deriv_public(h, field, t_point, x_point, TEMPORAL)


def cov_deriv_M(phi: MetricField, field: ExprTensorField, t_point, x_point) -> DTensor:
    """M-generalized Levi-Civita covariant derivative: d/dx^k plus gamma
    corrections on spatial slots only.  Appends one lower spatial slot."""
    return _cov_deriv_public(phi, field, t_point, x_point, SPATIAL)


def _cov_deriv_public(metric, field, t_point, x_point, cls) -> DTensor:
    env = dict(zip(field.variables, list(np.atleast_1d(t_point)) + list(np.atleast_1d(x_point))))
    space = jet_space(field.variables, 1)
    comp = field.jets(space, env)
    at = MetricAtPoint(metric, space, env)
    out = cov_deriv_jets(comp, field.slots, at.gamma(), at.dvars, cls)
    slots = field.slots + (IndexSlot(cls, LO),)
    return DTensor(slots, field.dims, jet_values(out))
