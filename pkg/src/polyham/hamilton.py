"""The multi-time Hamilton space of electrodynamics on the dual 1-jet space.

Everything here is anchored at one base point (t, x) and kept symbolic in
the polymomenta: a field on the jet space is a polynomial in the p_i^a
whose coefficients are (t, x)-jets (:class:`PPoly`).  All fields produced
by the quadratic Hamiltonian (H itself, the nonlinear connection, torsions,
deflections, the electromagnetic form) have p-degree at most 2, so both
vertical derivatives d/dp and the adapted horizontal derivatives

    delta/delta t^a = d/dt^a - N1 d/dp,      delta/delta x^i = d/dx^i - N2 d/dp

are exact.  The covariant derivatives induced by the Cartan canonical
connection add chi corrections (temporal slots, under /b) or gamma
corrections (spatial slots, under |k) on top of the adapted derivative;
the vertical covariant derivative is a plain d/dp because the vertical
connection block vanishes.

Models are immutable after construction and every operation is a pure
function of its inputs, so distinct jet points may be evaluated
concurrently without shared state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConsistencyFailure
from .expr import Expression, eval_jet
from .geometry import (
    MetricAtPoint,
    MetricField,
    coord_names,
    cov_deriv_jets,
    jet_values,
    riemann_jets,
)
from .jets import Jet, JetSpace, jet_space
from .tensors import (
    LO,
    SPATIAL,
    TEMPORAL,
    UP,
    DTensor,
    IndexSlot,
    JetPoint,
    t_lo,
    t_up,
    x_lo,
    x_up,
)


@dataclass(frozen=True)
class ElectrodynamicsModel:
    """Input bundle: dimensions, constants and the four field families.

    ``A`` is the n x m grid of polymomentum potential components A_(i)^(a)
    as expressions over (t, x); ``P`` is the scalar potential.  ``mass``
    must be nonzero and ``light_speed`` positive; the temporal metric is
    Riemannian, the spatial metric merely nondegenerate.
    """

    dims: tuple[int, int]
    mass: float
    charge: float
    light_speed: float
    h: MetricField
    phi: MetricField
    A: tuple[tuple[Expression, ...], ...]
    P: Expression

    def __post_init__(self):
        m, n = self.dims
        if self.mass == 0:
            raise ValueError("mass must be nonzero")
        if self.light_speed <= 0:
            raise ValueError("light_speed must be positive")
        if self.h.cls != TEMPORAL or self.h.dim != m:
            raise ValueError("h must be a temporal metric of dimension m")
        if self.phi.cls != SPATIAL or self.phi.dim != n:
            raise ValueError("phi must be a spatial metric of dimension n")
        if len(self.A) != n or any(len(row) != m for row in self.A):
            raise ValueError("A must be an n x m expression grid")

    @property
    def m(self) -> int:
        return self.dims[0]

    @property
    def n(self) -> int:
        return self.dims[1]

    @cached_property
    def tvars(self) -> tuple[str, ...]:
        return coord_names(*self.dims)[0]

    @cached_property
    def xvars(self) -> tuple[str, ...]:
        return coord_names(*self.dims)[1]

    @property
    def variables(self) -> tuple[str, ...]:
        return self.tvars + self.xvars


# ---------------------------------------------------------------------------
# polynomials in the polymomenta with jet coefficients
# ---------------------------------------------------------------------------
class PPoly:
    """Polynomial in the p_i^a with Jet coefficients, anchored at one (t, x).

    Keys are sorted tuples of (i, a) pairs (spatial, temporal); one entry
    per monomial.  Vertical derivatives are polynomial-exact; base
    derivatives differentiate the coefficient jets.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[tuple, Jet] | None = None):
        self.terms = terms or {}

    @staticmethod
    def zero() -> "PPoly":
        return PPoly({})

    @staticmethod
    def from_jet(coeff: Jet) -> "PPoly":
        return PPoly({(): coeff})

    @staticmethod
    def coordinate(space: JetSpace, i: int, a: int) -> "PPoly":
        """The coordinate function p_i^a itself."""
        return PPoly({((i, a),): Jet.constant(space, 1.0)})

    def __add__(self, other: "PPoly") -> "PPoly":
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            out[key] = out[key] + coeff if key in out else coeff
        return PPoly(out)

    def __sub__(self, other: "PPoly") -> "PPoly":
        return self + (-other)

    def __neg__(self) -> "PPoly":
        return PPoly({k: -c for k, c in self.terms.items()})

    def scaled(self, factor) -> "PPoly":
        """Multiply by a Jet or plain number."""
        return PPoly({k: c * factor for k, c in self.terms.items()})

    def __mul__(self, other: "PPoly") -> "PPoly":
        out: dict[tuple, Jet] = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                key = tuple(sorted(ka + kb))
                coeff = ca * cb
                out[key] = out[key] + coeff if key in out else coeff
        return PPoly(out)

    def partial_p(self, i: int, a: int) -> "PPoly":
        out: dict[tuple, Jet] = {}
        for key, coeff in self.terms.items():
            mult = key.count((i, a))
            if mult == 0:
                continue
            reduced = list(key)
            reduced.remove((i, a))
            rkey = tuple(reduced)
            term = coeff * float(mult)
            out[rkey] = out[rkey] + term if rkey in out else term
        return PPoly(out)

    def partial_var(self, name: str) -> "PPoly":
        return PPoly({k: c.derivative(name) for k, c in self.terms.items()})

    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def eval(self, p: np.ndarray) -> float:
        total = 0.0
        for key, coeff in self.terms.items():
            mono = coeff.value
            for (i, a) in key:
                mono *= p[i, a]
            total += mono
        return total

    def coefficient_value(self, key: tuple) -> float:
        jet = self.terms.get(tuple(sorted(key)))
        return jet.value if jet is not None else 0.0


@dataclass(frozen=True)
class PolyField:
    """Tensor-valued field on the jet space: an array of PPoly components
    with typed slots, anchored at one base point."""

    slots: tuple[IndexSlot, ...]
    dims: tuple[int, int]
    comps: np.ndarray  # object array of PPoly

    def eval(self, jp: JetPoint) -> DTensor:
        data = np.empty(self.comps.shape, dtype=float)
        for idx in np.ndindex(self.comps.shape):
            data[idx] = self.comps[idx].eval(jp.p)
        return DTensor(self.slots, self.dims, data)

    def next_pair_id(self) -> int:
        used = [s.pair for s in self.slots if s.pair is not None]
        return (max(used) + 1) if used else 0


# ---------------------------------------------------------------------------
# per-point geometry context
# ---------------------------------------------------------------------------
class PointGeometry:
    """All jets of the model's base objects at one (t, x), lazily derived.

    ``order`` bounds how many further exact derivatives can be taken of the
    objects built here.  Within a single point the intermediate jets are
    reused; nothing is cached across points.
    """

    def __init__(self, model: ElectrodynamicsModel, t, x, order: int):
        self.model = model
        self.m, self.n = model.dims
        self.tvars, self.xvars = model.tvars, model.xvars
        self.order = order
        self.space = jet_space(model.variables, order)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self.t, self.x = t, x
        self.env = {**dict(zip(self.tvars, t)), **dict(zip(self.xvars, x))}

    @cached_property
    def _h_at(self) -> MetricAtPoint:
        return MetricAtPoint(self.model.h, self.space, self.env)

    @cached_property
    def _phi_at(self) -> MetricAtPoint:
        return MetricAtPoint(self.model.phi, self.space, self.env)

    @property
    def h(self) -> np.ndarray:
        return self._h_at.g

    @property
    def hinv(self) -> np.ndarray:
        return self._h_at.ginv

    @property
    def phi(self) -> np.ndarray:
        return self._phi_at.g

    @property
    def phinv(self) -> np.ndarray:
        return self._phi_at.ginv

    @cached_property
    def hstar(self) -> np.ndarray:
        """h*_ab = h_ab / (4 mass c); same Christoffel symbols as h."""
        scale = 1.0 / (4.0 * self.model.mass * self.model.light_speed)
        out = np.empty_like(self.h)
        for idx in np.ndindex(out.shape):
            out[idx] = self.h[idx] * scale
        return out

    @cached_property
    def chi(self) -> np.ndarray:
        """chi^a_bc jets (one order below the metric)."""
        return self._h_at.gamma()

    @cached_property
    def gamma(self) -> np.ndarray:
        return self._phi_at.gamma()

    @cached_property
    def chi_curv(self) -> np.ndarray:
        """chi^f_gab jets (curvature of h)."""
        return riemann_jets(self.chi, self.tvars)

    @cached_property
    def phi_curv(self) -> np.ndarray:
        """Spatial curvature jets (curvature of phi)."""
        return riemann_jets(self.gamma, self.xvars)

    @cached_property
    def A(self) -> np.ndarray:
        out = np.empty((self.n, self.m), dtype=object)
        for i in range(self.n):
            for a in range(self.m):
                out[i, a] = eval_jet(self.model.A[i][a], self.space, self.env)
        return out

    @cached_property
    def P(self) -> Jet:
        return eval_jet(self.model.P, self.space, self.env)

    @cached_property
    def dA_x(self) -> np.ndarray:
        """dA_x[i, a, j] = d A_(i)^(a) / d x^j."""
        out = np.empty((self.n, self.m, self.n), dtype=object)
        for i in range(self.n):
            for a in range(self.m):
                for j in range(self.n):
                    out[i, a, j] = self.A[i, a].derivative(self.xvars[j])
        return out

    @cached_property
    def A_sym(self) -> np.ndarray:
        """A_sym[r, j, f] = d_j A_(r)^(f) + d_r A_(j)^(f) (plain partials)."""
        out = np.empty((self.n, self.n, self.m), dtype=object)
        for r in range(self.n):
            for j in range(self.n):
                for f in range(self.m):
                    out[r, j, f] = self.dA_x[r, f, j] + self.dA_x[j, f, r]
        return out

    @cached_property
    def A_curl(self) -> np.ndarray:
        """A_curl[i, j, f] = d_j A_(i)^(f) - d_i A_(j)^(f)."""
        out = np.empty((self.n, self.n, self.m), dtype=object)
        for i in range(self.n):
            for j in range(self.n):
                for f in range(self.m):
                    out[i, j, f] = self.dA_x[i, f, j] - self.dA_x[j, f, i]
        return out

    def cov_t_jets(self, comp: np.ndarray, slots) -> np.ndarray:
        return cov_deriv_jets(comp, slots, self.chi, self.tvars, TEMPORAL)

    def cov_x_jets(self, comp: np.ndarray, slots) -> np.ndarray:
        return cov_deriv_jets(comp, slots, self.gamma, self.xvars, SPATIAL)

    # -- nonlinear connection as p-polynomials ------------------------------
    @cached_property
    def N1_pp(self) -> np.ndarray:
        """N1[(r) a]^(f) = chi^f_ag p_r^g, laid out [f, r, a]."""
        m, n = self.m, self.n
        out = np.empty((m, n, m), dtype=object)
        for f in range(m):
            for r in range(n):
                for a in range(m):
                    terms = {}
                    for g in range(m):
                        terms[((r, g),)] = self.chi[f, a, g]
                    out[f, r, a] = PPoly(terms)
        return out

    @cached_property
    def N2_pp(self) -> np.ndarray:
        """N2[(r) j]^(f) laid out [f, r, j]; affine in p."""
        m, n = self.m, self.n
        k_A = 2.0 * self.model.charge / self.model.mass
        k_d = self.model.charge / self.model.mass
        out = np.empty((m, n, n), dtype=object)
        for f in range(m):
            for r in range(n):
                for j in range(n):
                    const = None
                    terms: dict[tuple, Jet] = {}
                    for s in range(n):
                        contrib = self.gamma[s, r, j] * (self.A[s, f] * k_A)
                        const = contrib if const is None else const + contrib
                        key = ((s, f),)
                        neg = -self.gamma[s, r, j]
                        terms[key] = terms[key] + neg if key in terms else neg
                    const = const - (self.dA_x[r, f, j] + self.dA_x[j, f, r]) * k_d
                    terms[()] = const
                    out[f, r, j] = PPoly(terms)
        return out

    # -- adapted (horizontal) derivatives on p-polynomials ------------------
    def delta_t(self, field: PPoly, a: int) -> PPoly:
        out = field.partial_var(self.tvars[a])
        for f in range(self.m):
            for r in range(self.n):
                dp = field.partial_p(r, f)
                if not dp.is_zero():
                    out = out - self.N1_pp[f, r, a] * dp
        return out

    def delta_x(self, field: PPoly, i: int) -> PPoly:
        out = field.partial_var(self.xvars[i])
        for f in range(self.m):
            for r in range(self.n):
                dp = field.partial_p(r, f)
                if not dp.is_zero():
                    out = out - self.N2_pp[f, r, i] * dp
        return out


# ---------------------------------------------------------------------------
# Lagrangian side and the Legendre transfer
# ---------------------------------------------------------------------------
def lagrangian(model: ElectrodynamicsModel, t, x, v: np.ndarray) -> float:
    """L = mass*c h^{ab} phi_ij v^i_a v^j_b + (2e/mass) A_(i)^(a) v^i_a + P."""
    geom = PointGeometry(model, t, x, order=0)
    v = np.asarray(v, dtype=float)
    hinv = jet_values(geom.hinv)
    phi = jet_values(geom.phi)
    A = jet_values(geom.A)
    quad = float(np.einsum("ab,ij,ia,jb->", hinv, phi, v, v))
    lin = float(np.sum(A * v))
    return (
        model.mass * model.light_speed * quad
        + (2.0 * model.charge / model.mass) * lin
        + geom.P.value
    )


def legendre_momenta(model: ElectrodynamicsModel, t, x, v: np.ndarray) -> np.ndarray:
    """p_i^a = 2 mass c h^{ab} phi_ij v^j_b + (2e/mass) A_(i)^(a)."""
    geom = PointGeometry(model, t, x, order=0)
    v = np.asarray(v, dtype=float)
    hinv = jet_values(geom.hinv)
    phi = jet_values(geom.phi)
    A = jet_values(geom.A)
    return (
        2.0 * model.mass * model.light_speed * np.einsum("ab,ij,jb->ia", hinv, phi, v)
        + (2.0 * model.charge / model.mass) * A
    )


def velocities_from_momenta(model: ElectrodynamicsModel, t, x, p: np.ndarray) -> np.ndarray:
    """Inverse Legendre map, v^i_a = (1/2 mass c) h_ab phi^{ij} (p_j^b - (2e/mass) A_(j)^(b))."""
    geom = PointGeometry(model, t, x, order=0)
    p = np.asarray(p, dtype=float)
    h = jet_values(geom.h)
    phinv = jet_values(geom.phinv)
    A = jet_values(geom.A)
    shifted = p - (2.0 * model.charge / model.mass) * A
    return np.einsum("ab,ij,jb->ia", h, phinv, shifted) / (
        2.0 * model.mass * model.light_speed
    )


def _hamiltonian_terms(model, h, phinv, A, P, p):
    """Four-term Hamiltonian; generic over the scalar type of p entries."""
    mass, e, c = model.mass, model.charge, model.light_speed
    m, n = model.dims
    quad = None
    cross = None
    for a in range(m):
        for b in range(m):
            for i in range(n):
                for j in range(n):
                    hphi = h[a, b] * phinv[i, j]
                    term = p[i, a] * p[j, b] * hphi
                    quad = term if quad is None else quad + term
                    termc = p[i, a] * (hphi * A[j, b])
                    cross = termc if cross is None else cross + termc
    norm_A = float(np.einsum("ab,ij,ia,jb->", h, phinv, A, A))
    return (
        quad * (1.0 / (4.0 * mass * c))
        - cross * (e / (mass**2 * c))
        + (e**2 / (mass**3 * c)) * norm_A
        - P
    )


def hamiltonian(model: ElectrodynamicsModel, jp: JetPoint) -> float:
    """H = (1/4 mass c) h_ab phi^{ij} p_i^a p_j^b
    - (e / mass^2 c) h_ab phi^{ij} A_(j)^(b) p_i^a
    + (e^2 / mass^3 c) ||A||^2 - P."""
    geom = PointGeometry(model, jp.t, jp.x, order=0)
    h = jet_values(geom.h)
    phinv = jet_values(geom.phinv)
    A = jet_values(geom.A)
    return float(_hamiltonian_terms(model, h, phinv, A, geom.P.value, jp.p))


def hamiltonian_ppoly(geom: PointGeometry) -> PPoly:
    """The Hamiltonian as a p-polynomial with jet coefficients."""
    model = geom.model
    mass, e, c = model.mass, model.charge, model.light_speed
    m, n = model.dims
    terms: dict[tuple, Jet] = {}

    def add(key, coeff):
        key = tuple(sorted(key))
        terms[key] = terms[key] + coeff if key in terms else coeff

    for a in range(m):
        for b in range(m):
            for i in range(n):
                for j in range(n):
                    hphi = geom.h[a, b] * geom.phinv[i, j]
                    add(((i, a), (j, b)), hphi * (1.0 / (4.0 * mass * c)))
                    add(((i, a),), (hphi * geom.A[j, b]) * (-e / (mass**2 * c)))
    normA = None
    for a in range(m):
        for b in range(m):
            for i in range(n):
                for j in range(n):
                    contrib = geom.h[a, b] * geom.phinv[i, j] * geom.A[i, a] * geom.A[j, b]
                    normA = contrib if normA is None else normA + contrib
    add((), normA * (e**2 / (mass**3 * c)) - geom.P)
    return PPoly(terms)


# ---------------------------------------------------------------------------
# vertical metric
# ---------------------------------------------------------------------------
def vertical_metric(model: ElectrodynamicsModel, t, x) -> DTensor:
    """Phi_(a)(b)^(i)(j) = h*_ab phi^{ij}, laid out [i, a, j, b].

    Cross-checked on every call against (1/2) d^2 H / dp dp computed with
    the derivative engine over synthetic p variables; a disagreement beyond
    1e-10 signals convention drift and raises ConsistencyFailure.
    """
    geom = PointGeometry(model, t, x, order=0)
    m, n = model.dims
    hstar = jet_values(geom.hstar)
    phinv = jet_values(geom.phinv)
    data = np.einsum("ij,ab->iajb", phinv, hstar)

    pvars = tuple(f"p_{i + 1}_{a + 1}" for i in range(n) for a in range(m))
    pspace = jet_space(pvars, 2)
    pjets = np.empty((n, m), dtype=object)
    for i in range(n):
        for a in range(m):
            pjets[i, a] = Jet.variable(pspace, f"p_{i + 1}_{a + 1}", 0.17 + 0.09 * (i + a))
    H = _hamiltonian_terms(
        model, jet_values(geom.h), phinv, jet_values(geom.A), geom.P.value, pjets
    )
    for i in range(n):
        for a in range(m):
            for j in range(n):
                for b in range(m):
                    second = 0.5 * H.partial(f"p_{i + 1}_{a + 1}", f"p_{j + 1}_{b + 1}")
                    if abs(second - data[i, a, j, b]) > 1e-10 * max(1.0, abs(second)):
                        raise ConsistencyFailure(
                            "vertical metric disagrees with d^2H/dp^2 at "
                            f"[{i},{a},{j},{b}]: {data[i, a, j, b]} vs {second}"
                        )
    slots = (x_up(0), t_lo(0), x_up(1), t_lo(1))
    return DTensor(slots, model.dims, data)


# ---------------------------------------------------------------------------
# nonlinear connection, Cartan connection, torsions, curvatures
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class NonlinearConnection:
    """Canonical nonlinear connection blocks at a jet point; layout
    N1[a, i, b] and N2[a, i, j] with the (a)/(i) polymomentum pair first."""

    N1: DTensor
    N2: DTensor
    point: JetPoint


@dataclass(frozen=True)
class CartanConnection:
    """Blocks (chi, 0, gamma, 0) of the generalized Cartan connection.
    The mixed and vertical blocks vanish identically for this space."""

    H_temporal: DTensor
    A_mixed: DTensor
    H_spatial: DTensor
    C_vertical: DTensor


def nonlinear_connection(model: ElectrodynamicsModel, jp: JetPoint) -> NonlinearConnection:
    """N1 = chi^a_bf p_i^f and
    N2 = gamma^r_ij [(2e/mass) A_(r)^(a) - p_r^a] - (e/mass)(d_j A_(i)^(a) + d_i A_(j)^(a))."""
    geom = PointGeometry(model, jp.t, jp.x, order=1)
    m, n = model.dims
    chi = jet_values(geom.chi)
    gamma = jet_values(geom.gamma)
    A = jet_values(geom.A)
    dA = jet_values(geom.dA_x)
    n1 = np.einsum("abf,if->aib", chi, jp.p)
    k_A = 2.0 * model.charge / model.mass
    k_d = model.charge / model.mass
    n2 = np.einsum("rij,ra->aij", gamma, k_A * A - jp.p)
    for a in range(m):
        for i in range(n):
            for j in range(n):
                n2[a, i, j] -= k_d * (dA[i, a, j] + dA[j, a, i])
    return NonlinearConnection(
        N1=DTensor((t_up(0), x_lo(0), t_lo()), model.dims, n1),
        N2=DTensor((t_up(0), x_lo(0), x_lo()), model.dims, n2),
        point=jp,
    )


def cartan_connection(model: ElectrodynamicsModel, t, x) -> CartanConnection:
    """Adapted blocks (chi^c_ab, 0, gamma^i_jk, 0)."""
    geom = PointGeometry(model, t, x, order=1)
    m, n = model.dims
    return CartanConnection(
        H_temporal=DTensor((t_up(), t_lo(), t_lo()), model.dims, jet_values(geom.chi)),
        A_mixed=DTensor.zeros((x_up(), x_lo(), t_lo()), model.dims),
        H_spatial=DTensor((x_up(), x_lo(), x_lo()), model.dims, jet_values(geom.gamma)),
        C_vertical=DTensor.zeros((x_up(), x_lo(), x_up(0), t_lo(0)), model.dims),
    )


def torsions(model: ElectrodynamicsModel, jp: JetPoint) -> tuple[DTensor, DTensor, DTensor]:
    """The three effective torsion blocks of the Cartan connection,
    laid out [f, r, a, b], [f, r, a, j] and [f, r, i, j]."""
    geom = PointGeometry(model, jp.t, jp.x, order=2)
    m, n = model.dims
    e_over = model.charge / model.mass

    chi_curv = jet_values(geom.chi_curv)
    r1 = np.einsum("fgab,rg->frab", chi_curv, jp.p)

    # A_(s);a^(f) and [d_j A_(r) + d_r A_(j)]^(f)_{;a}
    A_cov_t = jet_values(geom.cov_t_jets(geom.A, (x_lo(0), t_up(0))))
    sym_cov_t = jet_values(geom.cov_t_jets(geom.A_sym, (x_lo(), x_lo(), t_up())))
    gamma = jet_values(geom.gamma)
    r2 = np.empty((m, n, m, n), dtype=float)
    for f in range(m):
        for r in range(n):
            for a in range(m):
                for j in range(n):
                    acc = -2.0 * e_over * float(np.dot(gamma[:, r, j], A_cov_t[:, f, a]))
                    acc += e_over * sym_cov_t[r, j, f, a]
                    r2[f, r, a, j] = acc

    phi_curv = jet_values(geom.phi_curv)
    curl_cov_x = jet_values(geom.cov_x_jets(geom.A_curl, (x_lo(), x_lo(), t_up())))
    k_A = 2.0 * e_over
    r3 = np.einsum("srij,sf->frij", phi_curv, k_A * jet_values(geom.A) - jp.p)
    r3 -= e_over * np.einsum("ijfr->frij", curl_cov_x)

    pair = (t_up(0), x_lo(0))
    return (
        DTensor(pair + (t_lo(), t_lo()), model.dims, r1),
        DTensor(pair + (t_lo(), x_lo()), model.dims, r2),
        DTensor(pair + (x_lo(), x_lo()), model.dims, r3),
    )


def cartan_curvatures(
    model: ElectrodynamicsModel, t, x
) -> tuple[DTensor, DTensor, DTensor, DTensor]:
    """Four effective curvature blocks: the two base curvatures and their
    two vertical copies with delta factors,
    R_(l)(a)bc^(d)(i) = -delta^i_l chi^d_abc and
    R_(i)(a)jk^(d)(l) = delta^d_a R^l_ijk."""
    geom = PointGeometry(model, t, x, order=2)
    m, n = model.dims
    chi_curv = jet_values(geom.chi_curv)
    phi_curv = jet_values(geom.phi_curv)
    eye_n = np.eye(n)
    eye_m = np.eye(m)
    vert_t = -np.einsum("il,dabc->dliabc", eye_n, chi_curv)
    vert_x = np.einsum("da,lijk->dilajk", eye_m, phi_curv)
    return (
        DTensor((t_up(), t_lo(), t_lo(), t_lo()), model.dims, chi_curv),
        DTensor((x_up(), x_lo(), x_lo(), x_lo()), model.dims, phi_curv),
        DTensor(
            (t_up(0), x_lo(0), x_up(1), t_lo(1), t_lo(), t_lo()), model.dims, vert_t
        ),
        DTensor(
            (t_up(0), x_lo(0), x_up(1), t_lo(1), x_lo(), x_lo()), model.dims, vert_x
        ),
    )


# ---------------------------------------------------------------------------
# adapted and covariant derivatives on jet-space fields
# ---------------------------------------------------------------------------
def adapted_derivative(model: ElectrodynamicsModel, field: PPoly, jp: JetPoint, direction) -> float:
    """Apply one adapted-frame derivative to a scalar field and evaluate.

    ``direction`` is ("t", a), ("x", i) or ("p", i, a).  The field's
    coefficient jets must carry at least one derivative order for the two
    horizontal directions.
    """
    kind = direction[0]
    geom_order = 1
    geom = PointGeometry(model, jp.t, jp.x, order=geom_order)
    if kind == "t":
        return geom.delta_t(field, direction[1]).eval(jp.p)
    if kind == "x":
        return geom.delta_x(field, direction[1]).eval(jp.p)
    if kind == "p":
        return field.partial_p(direction[1], direction[2]).eval(jp.p)
    raise ValueError(f"unknown direction {direction!r}")


def dcov_deriv(geom: PointGeometry, field: PolyField, kind: str) -> PolyField:
    """Covariant derivative induced by the Cartan canonical connection.

    kind "t" ("/b"): adapted delta/delta t^b plus chi corrections, one per
    temporal slot with the sign of its variance.  kind "x" ("|k"): adapted
    delta/delta x^k plus gamma corrections on spatial slots.  kind "p": a
    plain vertical d/dp (the C block vanishes), which appends a pair of
    slots.  Pair halves are corrected like any other slot of their class.
    """
    m, n = geom.m, geom.n
    comps = field.comps
    if kind == "p":
        out = np.empty(comps.shape + (n, m), dtype=object)
        for idx in np.ndindex(comps.shape):
            for j in range(n):
                for b in range(m):
                    out[idx + (j, b)] = comps[idx].partial_p(j, b)
        pid = field.next_pair_id()
        slots = field.slots + (x_up(pid), t_lo(pid))
        return PolyField(slots, field.dims, out)

    if kind == "t":
        cls, conn, ext, nd = TEMPORAL, geom.chi, m, m
        delta = geom.delta_t
        new_slot = t_lo()
    elif kind == "x":
        cls, conn, ext, nd = SPATIAL, geom.gamma, n, n
        delta = geom.delta_x
        new_slot = x_lo()
    else:
        raise ValueError(f"unknown covariant-derivative kind {kind!r}")

    out = np.empty(comps.shape + (nd,), dtype=object)
    for idx in np.ndindex(comps.shape):
        for d in range(nd):
            acc = delta(comps[idx], d)
            for spos, slot in enumerate(field.slots):
                if slot.cls != cls:
                    continue
                c = idx[spos]
                for g in range(ext):
                    swapped = idx[:spos] + (g,) + idx[spos + 1 :]
                    if slot.variance == UP:
                        acc = acc + comps[swapped].scaled(conn[c, g, d])
                    else:
                        acc = acc - comps[swapped].scaled(conn[g, c, d])
            out[idx + (d,)] = acc
    return PolyField(field.slots + (new_slot,), field.dims, out)


def liouville_field(geom: PointGeometry) -> PolyField:
    """The metrical Liouville-type field D_(a)^(i) = h*_af phi^{ir} p_r^f,
    laid out [i, a]; its Cartan covariant derivatives are the deflections."""
    m, n = geom.m, geom.n
    comps = np.empty((n, m), dtype=object)
    for i in range(n):
        for a in range(m):
            terms: dict[tuple, Jet] = {}
            for f in range(m):
                for r in range(n):
                    key = ((r, f),)
                    coeff = geom.hstar[a, f] * geom.phinv[i, r]
                    terms[key] = terms[key] + coeff if key in terms else coeff
            comps[i, a] = PPoly(terms)
    return PolyField((x_up(0), t_lo(0)), geom.model.dims, comps)
