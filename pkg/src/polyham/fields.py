"""Field-theoretic layer: deflections, the polymomentum electromagnetic
form, Maxwell-like and Einstein-like identities, conservation laws.

Every "equation" here is verified as an identity: the left side is pushed
through the Cartan covariant-derivative machinery while the right side is
assembled from its closed form, and the residual of the two routes is what
callers inspect.  Nothing is solved for.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyFailure, ZeroEinsteinConstant
from .geometry import jet_values, ricci_jets, scalar_jet
from .hamilton import (
    ElectrodynamicsModel,
    PointGeometry,
    PolyField,
    dcov_deriv,
    liouville_field,
)
from .tensors import (
    DTensor,
    JetPoint,
    cyclic_sum_axes,
    t_lo,
    t_up,
    x_lo,
    x_up,
)

DEFLECTION_TOL = 1e-9


@dataclass(frozen=True)
class ElectromagneticForm:
    """F_(a)j^(i) laid out [i, a, j]; the vertical-vertical block f is
    identically zero and emitted as a structural zero."""

    F: DTensor
    f: DTensor


@dataclass(frozen=True)
class GravPotential:
    """Diagonal blocks of the polymomentum gravitational potential:
    h*_ab, phi_ij and the vertical block h*_ab phi^{ij} (laid out [i,a,j,b])."""

    temporal: DTensor
    spatial: DTensor
    vertical: DTensor


@dataclass(frozen=True)
class EinsteinBlocks:
    """Stress-energy blocks solved from the Einstein-like equations, plus
    the six structurally-zero off-diagonal blocks."""

    T_temporal: DTensor
    T_spatial: DTensor
    T_vertical: DTensor
    zero_blocks: dict[str, DTensor]
    K: float


# ---------------------------------------------------------------------------
# deflection tensors
# ---------------------------------------------------------------------------
def _closed_deflections(geom: PointGeometry):
    """Closed forms: Delta_(a)b^(i) = 0,
    Delta_(a)j^(i) = (e / 4 mass^2 c) h_af phi^{ir} [A_(r):j^(f) + A_(j):r^(f)],
    theta = (1/4 mass c) h_ab phi^{ij}."""
    model = geom.model
    m, n = model.dims
    h = jet_values(geom.h)
    phinv = jet_values(geom.phinv)
    hstar = jet_values(geom.hstar)
    A_cov_x = jet_values(geom.cov_x_jets(geom.A, (x_lo(0), t_up(0))))  # [r, f, j]
    sym = A_cov_x + np.einsum("jfr->rfj", A_cov_x)  # A_(r):j + A_(j):r as [r, f, j]
    k = model.charge / (4.0 * model.mass**2 * model.light_speed)
    d2 = k * np.einsum("af,ir,rfj->iaj", h, phinv, sym)
    d1 = np.zeros((n, m, m))
    theta = np.einsum("ij,ab->iajb", phinv, hstar)
    return d1, d2, theta


def deflection_routes(model: ElectrodynamicsModel, jp: JetPoint):
    """Both routes to the deflection tensors: the covariant-derivative
    pipeline applied to the Liouville-type field, and the closed forms.
    Returned as two triples of arrays laid out [i,a,b], [i,a,j], [i,a,j,b]."""
    geom = PointGeometry(model, jp.t, jp.x, order=2)
    D = liouville_field(geom)
    pipeline = (
        dcov_deriv(geom, D, "t").eval(jp).data,
        dcov_deriv(geom, D, "x").eval(jp).data,
        dcov_deriv(geom, D, "p").eval(jp).data,
    )
    return pipeline, _closed_deflections(geom)


def deflection_tensors(
    model: ElectrodynamicsModel, jp: JetPoint
) -> tuple[DTensor, DTensor, DTensor]:
    """Metrical deflection d-tensors, computed both by the covariant
    derivative pipeline and by their closed forms.

    Layouts: [i, a, b], [i, a, j], [i, a, j, b].  The two routes must agree
    within 1e-9 relative; a larger gap raises ConsistencyFailure since it
    can only come from a convention drift between the two sides.  The
    closed-form values are returned (they carry structural zeros exactly).
    """
    pipeline, closed = deflection_routes(model, jp)
    for name, got, want in zip(
        ("Delta_(a)b^(i)", "Delta_(a)j^(i)", "theta_(a)(b)^(i)(j)"), pipeline, closed
    ):
        scale = max(1.0, float(np.max(np.abs(want))))
        gap = float(np.max(np.abs(got - want)))
        if gap > DEFLECTION_TOL * scale:
            raise ConsistencyFailure(
                f"deflection {name}: covariant route differs from closed form by {gap:.3e}"
            )
    model_dims = model.dims
    c1, c2, c3 = closed
    return (
        DTensor((x_up(0), t_lo(0), t_lo()), model_dims, c1),
        DTensor((x_up(0), t_lo(0), x_lo()), model_dims, c2),
        DTensor((x_up(0), t_lo(0), x_up(1), t_lo(1)), model_dims, c3),
    )


# ---------------------------------------------------------------------------
# electromagnetic form and Maxwell-like identities
# ---------------------------------------------------------------------------
def _em_tensor_values(geom: PointGeometry) -> np.ndarray:
    """F_(a)j^(i) = (1/2)[Delta_(a)j^(i) - Delta_(a)i^(j)] as [i, a, j]."""
    _, d2, _ = _closed_deflections(geom)
    return 0.5 * (d2 - np.einsum("jai->iaj", d2))


def electromagnetic_form(model: ElectrodynamicsModel, t, x) -> ElectromagneticForm:
    geom = PointGeometry(model, t, x, order=1)
    data = _em_tensor_values(geom)
    F = DTensor((x_up(0), t_lo(0), x_lo()), model.dims, data)
    m, n = model.dims
    f = DTensor.zeros((x_up(0), t_lo(0), x_up(1), t_lo(1)), model.dims)
    return ElectromagneticForm(F=F, f=f)


def _em_field(geom: PointGeometry) -> PolyField:
    """F as a (p-independent) field on the jet space, coefficients one jet
    order below the geometry context."""
    from .hamilton import PPoly

    model = geom.model
    m, n = model.dims
    h = geom.h
    phinv = geom.phinv
    A_cov_x = geom.cov_x_jets(geom.A, (x_lo(0), t_up(0)))  # [r, f, j] jets
    k = model.charge / (8.0 * model.mass**2 * model.light_speed)
    comps = np.empty((n, m, n), dtype=object)
    for i in range(n):
        for a in range(m):
            for j in range(n):
                acc = None
                for f in range(m):
                    for r in range(n):
                        term = h[a, f] * (
                            phinv[i, r] * (A_cov_x[r, f, j] + A_cov_x[j, f, r])
                            - phinv[j, r] * (A_cov_x[r, f, i] + A_cov_x[i, f, r])
                        )
                        acc = term if acc is None else acc + term
                comps[i, a, j] = PPoly.from_jet(acc * k)
    return PolyField((x_up(0), t_lo(0), x_lo()), model.dims, comps)


def maxwell_residuals(
    model: ElectrodynamicsModel, jp: JetPoint
) -> tuple[DTensor, DTensor, DTensor]:
    """Residuals (LHS - RHS) of the three geometrical Maxwell-like blocks.

    F is the alternation of the deflection tensor, F = (1/2) A_{i,j} Delta,
    and the alternation swaps an upper label into a lower slot.  The
    temporal and vertical covariant derivatives commute with that swap, so
    blocks 1 and 3 apply them to the F field directly.  The spatial
    derivative does not commute with it; block 2 holds with the alternation
    taken *outside*, so its left side is the cyclic sum of
    (1/2) A_{i,j} { Delta_(a)j|k^(i) }, with the deflection tensor pushed
    through the covariant pipeline first.  The label cycle on (i, j, k)
    acts positionally.  Block 3 is exactly zero: F is p-independent and the
    vertical connection block vanishes.
    """
    (lhs1, rhs1), (lhs2, rhs2), (lhs3, rhs3) = maxwell_sides(model, jp)
    res1 = DTensor((x_up(0), t_lo(0), x_lo(), t_lo()), model.dims, lhs1 - rhs1)
    res2 = DTensor((x_up(0), t_lo(0), x_lo(), x_lo()), model.dims, lhs2 - rhs2)
    res3 = DTensor(
        (x_up(0), t_lo(0), x_lo(), x_up(1), t_lo(1)), model.dims, lhs3 - rhs3
    )
    return res1, res2, res3


def maxwell_sides(
    model: ElectrodynamicsModel, jp: JetPoint
) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """(LHS, RHS) arrays for the three Maxwell-like blocks; the residual is
    their difference and the larger side sets the scale for relative
    tolerances."""
    geom = PointGeometry(model, jp.t, jp.x, order=2)
    m, n = model.dims
    mass, e, c = model.mass, model.charge, model.light_speed
    F = _em_field(geom)

    lhs1 = dcov_deriv(geom, F, "t").eval(jp).data  # [i, a, j, b]
    h = jet_values(geom.h)
    phinv = jet_values(geom.phinv)
    gamma = jet_values(geom.gamma)
    A_cov_t = jet_values(geom.cov_t_jets(geom.A, (x_lo(0), t_up(0))))  # [s, f, b]
    sym_cov_t = jet_values(
        geom.cov_t_jets(geom.A_sym, (x_lo(), x_lo(), t_up()))
    )  # [r, j, f, b]
    inner = np.einsum("ir,rjfb->ijfb", phinv, sym_cov_t) - 2.0 * np.einsum(
        "ir,srj,sfb->ijfb", phinv, gamma, A_cov_t
    )
    alt = inner - np.einsum("jifb->ijfb", inner)
    rhs1 = (e / (8.0 * mass**2 * c)) * np.einsum("af,ijfb->iajb", h, alt)

    delta2 = dcov_deriv(geom, liouville_field(geom), "x")  # Delta_(a)j^(i) as a field
    d2k = dcov_deriv(geom, delta2, "x").eval(jp).data  # [i, a, j, k]
    lhs2_single = 0.5 * (d2k - np.einsum("jaik->iajk", d2k))
    lhs2 = cyclic_sum_axes(lhs2_single, (0, 2, 3))
    curv = jet_values(geom.phi_curv)  # [s, r, j, k]
    A_vals = jet_values(geom.A)
    curl_cov_x = jet_values(
        geom.cov_x_jets(geom.A_curl, (x_lo(), x_lo(), t_up()))
    )  # [j, k, f, r]
    p_term = np.einsum("sr,irjk,sf->fijk", phinv, curv, jp.p) - np.einsum(
        "ir,srjk,sf->fijk", phinv, curv, jp.p
    )
    a_term = (e / mass) * (
        2.0 * np.einsum("ir,srjk,sf->fijk", phinv, curv, A_vals)
        - np.einsum("ir,jkfr->fijk", phinv, curl_cov_x)
    )
    inner2 = np.einsum("af,fijk->iajk", h, p_term + a_term)
    rhs2 = -(1.0 / (8.0 * mass * c)) * cyclic_sum_axes(inner2, (0, 2, 3))

    vert = dcov_deriv(geom, F, "p").eval(jp).data  # [i, a, j, k, b]
    lhs3 = cyclic_sum_axes(vert, (0, 2, 3))
    rhs3 = np.zeros_like(lhs3)
    return (lhs1, rhs1), (lhs2, rhs2), (lhs3, rhs3)


# ---------------------------------------------------------------------------
# gravitational potential and Einstein-like blocks
# ---------------------------------------------------------------------------
def gravitational_potential(model: ElectrodynamicsModel, t, x) -> GravPotential:
    geom = PointGeometry(model, t, x, order=0)
    hstar = jet_values(geom.hstar)
    phi = jet_values(geom.phi)
    phinv = jet_values(geom.phinv)
    vert = np.einsum("ij,ab->iajb", phinv, hstar)
    return GravPotential(
        temporal=DTensor((t_lo(), t_lo()), model.dims, hstar),
        spatial=DTensor((x_lo(), x_lo()), model.dims, phi),
        vertical=DTensor((x_up(0), t_lo(0), x_up(1), t_lo(1)), model.dims, vert),
    )


def ricci_blocks(model: ElectrodynamicsModel, t, x):
    """Effective Ricci blocks chi_ab, R_ij of the Cartan connection and the
    scalars (chi, R, Sc = 4 mass c chi + R)."""
    geom = PointGeometry(model, t, x, order=2)
    chi_ric = ricci_jets(geom.chi_curv)
    phi_ric = ricci_jets(geom.phi_curv)
    chi_sc = scalar_jet(chi_ric, geom.hinv).value
    phi_sc = scalar_jet(phi_ric, geom.phinv).value
    sc_cartan = 4.0 * model.mass * model.light_speed * chi_sc + phi_sc
    return (
        DTensor((t_lo(), t_lo()), model.dims, jet_values(chi_ric)),
        DTensor((x_lo(), x_lo()), model.dims, jet_values(phi_ric)),
        chi_sc,
        phi_sc,
        sc_cartan,
    )


def scalar_curvature_cartan(model: ElectrodynamicsModel, t, x) -> float:
    """Sc(CGamma) assembled by contracting the effective Ricci blocks with
    the inverse gravitational-potential blocks (the vertical Ricci block
    vanishes, so only the h* and phi traces contribute)."""
    return ricci_blocks(model, t, x)[4]


def stress_energy(model: ElectrodynamicsModel, t, x, K: float = 1.0) -> EinsteinBlocks:
    """Solve the Einstein-like equations for the stress-energy blocks.

    T_ab = [chi_ab - Sc/(8 mass c) h_ab] / K,
    T_ij = [R_ij - Sc/2 phi_ij] / K,
    T-vertical = [-Sc/(8 mass c) h_ab phi^{ij}] / K, plus six off-diagonal
    blocks that vanish identically.
    """
    if K == 0:
        raise ZeroEinsteinConstant("Einstein constant K must be nonzero")
    geom = PointGeometry(model, t, x, order=2)
    m, n = model.dims
    chi_ab, phi_ij, chi_sc, phi_sc, sc = ricci_blocks(model, t, x)
    h = jet_values(geom.h)
    phi = jet_values(geom.phi)
    phinv = jet_values(geom.phinv)
    mass_c = model.mass * model.light_speed
    t_tt = (chi_ab.data - sc / (8.0 * mass_c) * h) / K
    t_xx = (phi_ij.data - sc / 2.0 * phi) / K
    t_vv = -(sc / (8.0 * mass_c)) * np.einsum("ab,ij->iajb", h, phinv) / K
    zeros = {
        "T_ai": DTensor.zeros((t_lo(), x_lo()), model.dims),
        "T_ia": DTensor.zeros((x_lo(), t_lo()), model.dims),
        "T_pair_b": DTensor.zeros((x_up(0), t_lo(0), t_lo()), model.dims),
        "T_a_pair": DTensor.zeros((t_lo(), x_up(0), t_lo(0)), model.dims),
        "T_i_pair": DTensor.zeros((x_lo(), x_up(0), t_lo(0)), model.dims),
        "T_pair_j": DTensor.zeros((x_up(0), t_lo(0), x_lo()), model.dims),
    }
    return EinsteinBlocks(
        T_temporal=DTensor((t_lo(), t_lo()), model.dims, t_tt),
        T_spatial=DTensor((x_lo(), x_lo()), model.dims, t_xx),
        T_vertical=DTensor((x_up(0), t_lo(0), x_up(1), t_lo(1)), model.dims, t_vv),
        zero_blocks=zeros,
        K=float(K),
    )


def conservation_residuals(
    model: ElectrodynamicsModel, t, x
) -> tuple[np.ndarray, np.ndarray]:
    """Residual vectors of the two polymomentum conservation laws,

        [4 mass c chi^f_b - Sc/2 delta^f_b]_{/f}  and
        [R^r_j - Sc/2 delta^r_j]_{|r},

    each evaluated with the matching generalized Levi-Civita derivative and
    contracted on the derivative index.  Both reduce to contracted Bianchi
    identities of the base metrics and vanish for valid inputs.
    """
    geom = PointGeometry(model, t, x, order=3)
    m, n = model.dims
    mass_c = model.mass * model.light_speed

    chi_ric = ricci_jets(geom.chi_curv)
    phi_ric = ricci_jets(geom.phi_curv)
    chi_sc = scalar_jet(chi_ric, geom.hinv)
    phi_sc = scalar_jet(phi_ric, geom.phinv)
    sc = chi_sc * (4.0 * mass_c) + phi_sc

    E_t = np.empty((m, m), dtype=object)  # 4mc chi^f_b - Sc/2 delta^f_b
    for f in range(m):
        for b in range(m):
            acc = None
            for d in range(m):
                term = geom.hinv[f, d] * chi_ric[d, b]
                acc = term if acc is None else acc + term
            acc = acc * (4.0 * mass_c)
            if f == b:
                acc = acc - sc * 0.5
            E_t[f, b] = acc
    div_t = geom.cov_t_jets(E_t, (t_up(), t_lo()))
    res_t = np.zeros(m)
    for b in range(m):
        res_t[b] = sum(div_t[f, b, f].value for f in range(m))

    E_x = np.empty((n, n), dtype=object)  # R^r_j - Sc/2 delta^r_j
    for r in range(n):
        for j in range(n):
            acc = None
            for s in range(n):
                term = geom.phinv[r, s] * phi_ric[s, j]
                acc = term if acc is None else acc + term
            if r == j:
                acc = acc - sc * 0.5
            E_x[r, j] = acc
    div_x = geom.cov_x_jets(E_x, (x_up(), x_lo()))
    res_x = np.zeros(n)
    for j in range(n):
        res_x[j] = sum(div_x[r, j, r].value for r in range(n))
    return res_t, res_x
