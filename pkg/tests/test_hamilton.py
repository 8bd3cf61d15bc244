import dataclasses
import math

import numpy as np
import pytest

from conftest import build_model
from polyham.errors import ConsistencyFailure
from polyham.expr import BinOp, Const, Expression, parse
from polyham.hamilton import (
    PPoly,
    PointGeometry,
    adapted_derivative,
    cartan_connection,
    cartan_curvatures,
    dcov_deriv,
    hamiltonian,
    hamiltonian_ppoly,
    lagrangian,
    legendre_momenta,
    liouville_field,
    nonlinear_connection,
    torsions,
    velocities_from_momenta,
    vertical_metric,
)
from polyham.geometry import jet_values
from polyham.jets import jet_space
from polyham.tensors import JetPoint


@pytest.fixture(scope="module")
def minimal_model():
    return build_model(1, 1, [["1"]], [["1"]], [["0"]], "0")


@pytest.fixture(scope="module")
def flat_A_model():
    # flat metrics, nonzero t-independent potential grid
    return build_model(
        1, 2, [["1"]], [["1", "0"], ["0", "1"]], [["x1^2*x2"], ["x1 + x2^3"]], "0",
        charge=0.7, mass=1.3, light_speed=1.1,
    )


JP = JetPoint(t=[0.4], x=[1.1, 0.8], p=[[0.6], [-1.2]])


class TestLagrangianSide:
    def test_minimal_quadratic(self, minimal_model):
        assert lagrangian(minimal_model, [0.0], [0.0], np.array([[2.0]])) == pytest.approx(4.0)

    def test_zero_velocity_gives_potential(self, sphere_time_model):
        t, x = [0.4], [1.1, 0.8]
        v = np.zeros((2, 1))
        want = 0.4 * 1.1 + 0.8**2
        assert lagrangian(sphere_time_model, t, x, v) == pytest.approx(want)

    def test_quadratic_scaling_without_sources(self):
        model = build_model(1, 2, [["exp(2*t1)"]], [["1", "0"], ["0", "sin(x1)^2"]],
                            [["0"], ["0"]], "0", mass=1.5, light_speed=2.0)
        t, x = [0.3], [1.0, 0.5]
        v = np.array([[0.7], [-0.2]])
        lam = 3.0
        assert lagrangian(model, t, x, lam * v) == pytest.approx(lam**2 * lagrangian(model, t, x, v))

    def test_momenta_flat(self, minimal_model):
        v = np.array([[1.7]])
        assert legendre_momenta(minimal_model, [0.0], [0.0], v) == pytest.approx(2 * v)

    def test_momenta_at_rest(self, flat_A_model):
        t, x = [0.4], [1.1, 0.8]
        p = legendre_momenta(flat_A_model, t, x, np.zeros((2, 1)))
        geom = PointGeometry(flat_A_model, t, x, order=0)
        A = jet_values(geom.A)
        k = 2 * flat_A_model.charge / flat_A_model.mass
        assert np.allclose(p, k * A, atol=1e-14)

    def test_roundtrip(self, sphere_time_model):
        rng = np.random.default_rng(5)
        for _ in range(5):
            t, x = [rng.uniform(0.1, 1.0)], rng.uniform([0.3, 0.0], [2.8, 6.2])
            v = rng.uniform(-2, 2, size=(2, 1))
            p = legendre_momenta(sphere_time_model, t, x, v)
            back = velocities_from_momenta(sphere_time_model, t, x, p)
            assert np.max(np.abs(back - v)) < 1e-12


class TestHamiltonian:
    def test_rest_no_potential_vector(self, minimal_model):
        model = dataclasses.replace(
            minimal_model, P=parse("3", minimal_model.variables)
        )
        jp = JetPoint(t=[0.1], x=[0.2], p=[[0.0]])
        assert hamiltonian(model, jp) == pytest.approx(-3.0)

    def test_flat_kinetic(self, minimal_model):
        jp = JetPoint(t=[0.0], x=[0.0], p=[[2.0]])
        assert hamiltonian(minimal_model, jp) == pytest.approx(1.0)

    @pytest.mark.parametrize("model_name", ["flat_A_model", "sphere_time_model", "curved_multitime_model"])
    def test_legendre_duality(self, model_name, request):
        model = request.getfixturevalue(model_name)
        m, n = model.dims
        rng = np.random.default_rng(6)
        for _ in range(50):
            t = rng.uniform(0.1, 0.9, size=m)
            x = rng.uniform(0.4, 1.4, size=n)
            v = rng.uniform(-2, 2, size=(n, m))
            L = lagrangian(model, t, x, v)
            p = legendre_momenta(model, t, x, v)
            H = hamiltonian(model, JetPoint(t=t, x=x, p=p))
            assert abs(H - (np.sum(p * v) - L)) < 1e-9 * (1 + abs(L))


class TestVerticalMetric:
    def test_flat_quarter(self, minimal_model):
        phi = vertical_metric(minimal_model, [0.0], [0.0])
        assert phi.data[0, 0, 0, 0] == pytest.approx(0.25)

    def test_cross_check_against_p_derivatives_runs(self, curved_multitime_model):
        # raises ConsistencyFailure if (1/2) d2H/dp2 disagrees
        vertical_metric(curved_multitime_model, [0.4, -0.3], [1.1, 0.8])

    def test_independent_of_A_and_P(self, sphere_time_model):
        t, x = [0.4], [1.1, 0.8]
        base = vertical_metric(sphere_time_model, t, x).data
        bumped = dataclasses.replace(
            sphere_time_model,
            A=tuple(
                tuple(
                    Expression(ast=BinOp(op="+", left=e.ast, right=Const(value=5.0)),
                               variables=e.variables)
                    for e in row
                )
                for row in sphere_time_model.A
            ),
        )
        assert np.array_equal(vertical_metric(bumped, t, x).data, base)

    def test_sphere_equator_block(self):
        model = build_model(1, 2, [["1"]], [["1", "0"], ["0", "sin(x1)^2"]],
                            [["0"], ["0"]], "0", mass=1.3, light_speed=1.1)
        phi = vertical_metric(model, [0.0], [math.pi / 2, 1.0])
        want = np.eye(2) / (4 * 1.3 * 1.1)
        got = phi.data[:, 0, :, 0]
        assert np.max(np.abs(got - want)) < 1e-12


class TestNonlinearConnection:
    def test_flat_sourceless_vanishes(self, flat_model):
        nc = nonlinear_connection(flat_model, JP)
        assert nc.N1.max_abs() == 0.0 and nc.N2.max_abs() == 0.0

    def test_flat_with_A_matches_derivative_term(self, flat_A_model):
        nc = nonlinear_connection(flat_A_model, JP)
        assert nc.N1.max_abs() == 0.0
        geom = PointGeometry(flat_A_model, JP.t, JP.x, order=1)
        dA = jet_values(geom.dA_x)
        k = flat_A_model.charge / flat_A_model.mass
        want = np.empty((1, 2, 2))
        for a in range(1):
            for i in range(2):
                for j in range(2):
                    want[a, i, j] = -k * (dA[i, a, j] + dA[j, a, i])
        assert np.max(np.abs(nc.N2.data - want)) < 1e-14

    def test_N1_linear_in_p(self, curved_multitime_model):
        jp = JetPoint(t=[0.4, -0.3], x=[1.1, 0.8], p=[[0.6, 0.2], [-1.2, 0.9]])
        jp2 = JetPoint(t=jp.t, x=jp.x, p=2 * jp.p)
        n1 = nonlinear_connection(curved_multitime_model, jp).N1.data
        n1_doubled = nonlinear_connection(curved_multitime_model, jp2).N1.data
        assert np.allclose(n1_doubled, 2 * n1, atol=1e-14)

    def test_N2_symmetric_in_lower_pair(self, sphere_time_model):
        nc = nonlinear_connection(sphere_time_model, JP)
        n2 = nc.N2.data
        assert np.max(np.abs(n2 - np.einsum("aij->aji", n2))) < 1e-12


class TestAdaptedDerivative:
    def test_momentum_coordinate_gives_minus_N1(self, sphere_time_model):
        space = jet_space(sphere_time_model.variables, 1)
        field = PPoly.coordinate(space, 1, 0)  # p_2^1
        got = adapted_derivative(sphere_time_model, field, JP, ("t", 0))
        nc = nonlinear_connection(sphere_time_model, JP)
        assert got == pytest.approx(-nc.N1.data[0, 1, 0], abs=1e-14)

    def test_p_independent_field_reduces_to_partial(self, sphere_time_model):
        space = jet_space(sphere_time_model.variables, 1)
        from polyham.expr import eval_jet

        expr = parse("t1*x1^2", sphere_time_model.variables)
        env = {"t1": 0.4, "x1": 1.1, "x2": 0.8}
        field = PPoly.from_jet(eval_jet(expr, space, env))
        got = adapted_derivative(sphere_time_model, field, JP, ("x", 0))
        assert got == pytest.approx(2 * 0.4 * 1.1, abs=1e-14)

    def test_hamiltonian_horizontally_flat_without_sources(self, flat_model):
        # brute-force oracle: dH/dx - N2 dH/dp with flat data is plainly zero
        geom = PointGeometry(flat_model, JP.t, JP.x, order=1)
        H = hamiltonian_ppoly(geom)
        for i in range(2):
            assert adapted_derivative(flat_model, H, JP, ("x", i)) == pytest.approx(0.0, abs=1e-14)
        assert adapted_derivative(flat_model, H, JP, ("t", 0)) == pytest.approx(0.0, abs=1e-14)

    def test_vertical_direction_is_plain_p_derivative(self, flat_model):
        geom = PointGeometry(flat_model, JP.t, JP.x, order=1)
        H = hamiltonian_ppoly(geom)
        got = adapted_derivative(flat_model, H, JP, ("p", 0, 0))
        assert got == pytest.approx(0.5 * JP.p[0, 0], abs=1e-14)


class TestCartanConnection:
    def test_structural_zero_blocks(self, curved_multitime_model):
        cc = cartan_connection(curved_multitime_model, [0.4, -0.3], [1.1, 0.8])
        assert cc.A_mixed.max_abs() == 0.0
        assert cc.C_vertical.max_abs() == 0.0

    def test_flat_all_blocks_vanish(self, flat_model):
        cc = cartan_connection(flat_model, [0.1], [0.2, 0.3])
        for block in (cc.H_temporal, cc.A_mixed, cc.H_spatial, cc.C_vertical):
            assert block.max_abs() == 0.0

    def test_blocks_are_base_christoffels(self, sphere_time_model):
        from polyham.geometry import christoffel

        cc = cartan_connection(sphere_time_model, [0.4], [1.1, 0.8])
        want_t = christoffel(sphere_time_model.h, [0.4]).gamma.data
        want_x = christoffel(sphere_time_model.phi, [1.1, 0.8]).gamma.data
        assert np.array_equal(cc.H_temporal.data, want_t)
        assert np.array_equal(cc.H_spatial.data, want_x)


class TestTorsions:
    def test_flat_sourceless_all_vanish(self, flat_model):
        r1, r2, r3 = torsions(flat_model, JP)
        assert r1.max_abs() == r2.max_abs() == r3.max_abs() == 0.0

    def test_sphere_without_A_reduces_to_curvature_term(self):
        model = build_model(1, 2, [["1"]], [["1", "0"], ["0", "sin(x1)^2"]], [["0"], ["0"]], "0")
        _, r2, r3 = torsions(model, JP)
        assert r2.max_abs() == 0.0
        geom = PointGeometry(model, JP.t, JP.x, order=2)
        curv = jet_values(geom.phi_curv)
        want = -np.einsum("srij,sf->frij", curv, JP.p)
        assert np.max(np.abs(r3.data - want)) < 1e-14

    def test_time_independent_A_kills_mixed_block(self, flat_A_model):
        _, r2, _ = torsions(flat_A_model, JP)
        assert r2.max_abs() == 0.0

    def test_antisymmetry(self, curved_multitime_model):
        jp = JetPoint(t=[0.4, -0.3], x=[1.1, 0.8], p=[[0.6, 0.2], [-1.2, 0.9]])
        r1, _, r3 = torsions(curved_multitime_model, jp)
        assert np.max(np.abs(r1.data + np.einsum("frab->frba", r1.data))) < 1e-10
        assert np.max(np.abs(r3.data + np.einsum("frij->frji", r3.data))) < 1e-10


class TestCartanCurvatures:
    def test_flat_vanishes(self, flat_model):
        for block in cartan_curvatures(flat_model, [0.1], [0.2, 0.3]):
            assert block.max_abs() == 0.0

    def test_spatial_block_is_base_curvature(self, sphere_time_model):
        t, x = [0.4], [1.1, 0.8]
        blocks = cartan_curvatures(sphere_time_model, t, x)
        geom = PointGeometry(sphere_time_model, t, x, order=2)
        assert np.array_equal(blocks[1].data, jet_values(geom.phi_curv))

    def test_vertical_block_delta_structure(self, curved_multitime_model):
        t, x = [0.4, -0.3], [1.1, 0.8]
        blocks = cartan_curvatures(curved_multitime_model, t, x)
        geom = PointGeometry(curved_multitime_model, t, x, order=2)
        phi_curv = jet_values(geom.phi_curv)
        chi_curv = jet_values(geom.chi_curv)
        # trace over the delta pair recovers m copies of the base curvature
        trace = np.einsum("dildjk->lijk", blocks[3].data)
        assert np.allclose(trace, 2 * phi_curv, atol=1e-14)
        # temporal vertical block carries -delta^i_l chi^d_abc
        assert np.allclose(blocks[2].data[:, 0, 0], -chi_curv, atol=1e-14)
        assert np.max(np.abs(blocks[2].data[:, 0, 1])) == 0.0


class TestPotentialIndependence:
    def test_geometry_blind_to_P(self, sphere_time_model):
        shifted = dataclasses.replace(
            sphere_time_model,
            P=Expression(
                ast=BinOp(op="+", left=sphere_time_model.P.ast, right=Const(value=100.0)),
                variables=sphere_time_model.P.variables,
            ),
        )
        t, x = JP.t, JP.x
        assert np.array_equal(
            vertical_metric(sphere_time_model, t, x).data, vertical_metric(shifted, t, x).data
        )
        a = nonlinear_connection(sphere_time_model, JP)
        b = nonlinear_connection(shifted, JP)
        assert np.array_equal(a.N1.data, b.N1.data)
        assert np.array_equal(a.N2.data, b.N2.data)
        for ta, tb in zip(torsions(sphere_time_model, JP), torsions(shifted, JP)):
            assert np.array_equal(ta.data, tb.data)
        for ca, cb in zip(
            cartan_curvatures(sphere_time_model, t, x), cartan_curvatures(shifted, t, x)
        ):
            assert np.array_equal(ca.data, cb.data)
        # H itself must move by exactly -100
        assert hamiltonian(shifted, JP) == pytest.approx(hamiltonian(sphere_time_model, JP) - 100.0)


class TestDcovDeriv:
    def test_scalar_spatial_derivative_is_adapted_delta(self, sphere_time_model):
        import numpy as np

        from polyham.hamilton import PolyField

        geom = PointGeometry(sphere_time_model, JP.t, JP.x, order=1)
        H = hamiltonian_ppoly(geom)
        comps = np.empty((), dtype=object)
        comps[()] = H
        field = PolyField((), (1, 2), comps)
        out = dcov_deriv(geom, field, "x").eval(JP)
        for i in range(2):
            want = adapted_derivative(sphere_time_model, H, JP, ("x", i))
            assert out.data[i] == pytest.approx(want, abs=1e-14)

    def test_vertical_of_liouville_is_vertical_metric(self, sphere_time_model):
        geom = PointGeometry(sphere_time_model, JP.t, JP.x, order=1)
        theta = dcov_deriv(geom, liouville_field(geom), "p").eval(JP)
        want = vertical_metric(sphere_time_model, JP.t, JP.x)
        assert np.max(np.abs(theta.data - want.data)) < 1e-14
