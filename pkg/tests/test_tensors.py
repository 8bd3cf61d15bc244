import math

import numpy as np
import pytest

from polyham.errors import AsymmetricInput, SingularMetric, SlotMismatch
from polyham.tensors import (
    DTensor,
    JetPoint,
    antisymmetrize_pair,
    contract,
    cyclic_sum,
    cyclic_sum_axes,
    invert_metric,
    t_lo,
    t_up,
    x_lo,
    x_up,
)


class TestInvertMetric:
    def test_sphere_diagonal(self):
        theta = math.pi / 4
        g = DTensor([x_lo(), x_lo()], (1, 2), [[1, 0], [0, math.sin(theta) ** 2]])
        inv = invert_metric(g)
        assert np.allclose(inv.data, [[1, 0], [0, 2]], atol=1e-14)
        assert inv.slots[0].variance == "up"

    def test_identity(self):
        g = DTensor([x_lo(), x_lo()], (1, 3), np.eye(3))
        assert np.allclose(invert_metric(g).data, np.eye(3))

    def test_minkowski_signature_accepted(self):
        g = DTensor([x_lo(), x_lo()], (1, 2), [[-1, 0], [0, 1]])
        assert np.allclose(invert_metric(g).data, [[-1, 0], [0, 1]])

    def test_involution(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            base = rng.uniform(-1, 1, size=(3, 3))
            mat = base + base.T + 4 * np.eye(3)
            g = DTensor([x_lo(), x_lo()], (1, 3), mat)
            back = invert_metric(invert_metric(g))
            assert np.max(np.abs(back.data - mat)) < 1e-12
            assert back.slots == g.slots

    def test_singular_rejected(self):
        g = DTensor([x_lo(), x_lo()], (1, 2), [[1, 1], [1, 1]])
        with pytest.raises(SingularMetric):
            invert_metric(g)

    def test_asymmetric_rejected(self):
        g = DTensor([x_lo(), x_lo()], (1, 2), [[1, 0.5], [0.2, 1]])
        with pytest.raises(AsymmetricInput):
            invert_metric(g)

    def test_slot_guard(self):
        g = DTensor([x_up(), x_lo()], (1, 2), np.eye(2))
        with pytest.raises(SlotMismatch):
            invert_metric(g)


class TestContract:
    def test_trace_identity(self):
        d = DTensor([x_up(), x_lo()], (1, 5), np.eye(5))
        assert contract(d, 0, 1).data == pytest.approx(5.0)

    def test_metric_roundtrip_is_delta(self):
        theta = 0.9
        phi = DTensor([x_lo(), x_lo()], (1, 2), [[1, 0], [0, math.sin(theta) ** 2]])
        inv = invert_metric(phi)
        # explicit outer then contract: phi^{ir} phi_{rj}
        outer = np.einsum("ir,kj->irkj", inv.data, phi.data)
        t = DTensor([x_up(), x_up(), x_lo(), x_lo()], (1, 2), outer)
        delta = contract(t, 1, 2)
        assert np.allclose(delta.data, np.eye(2), atol=1e-14)

    def test_dot_product(self):
        u, v = np.array([1.0, 2.0]), np.array([3.0, 4.0])
        t = DTensor([x_up(), x_lo()], (1, 2), np.outer(u, v))
        assert contract(t, 0, 1).data == pytest.approx(11.0)

    def test_matches_matrix_product(self):
        rng = np.random.default_rng(1)
        for n in (2, 3):
            a = rng.uniform(-1, 1, size=(n, n))
            b = rng.uniform(-1, 1, size=(n, n))
            t = DTensor(
                [x_up(), x_lo(), x_up(), x_lo()],
                (1, n),
                np.einsum("ij,kl->ijkl", a, b),
            )
            got = contract(t, 1, 2)
            assert np.max(np.abs(got.data - a @ b)) < 1e-14

    def test_same_variance_rejected(self):
        t = DTensor([x_up(), x_up()], (1, 2), np.eye(2))
        with pytest.raises(SlotMismatch):
            contract(t, 0, 1)

    def test_cross_class_rejected(self):
        t = DTensor([t_up(), x_lo()], (2, 2), np.eye(2))
        with pytest.raises(SlotMismatch):
            contract(t, 0, 1)


class TestAntisymmetrize:
    def test_symmetric_input_vanishes(self):
        t = DTensor([x_lo(), x_lo()], (1, 2), [[1, 2], [2, 5]])
        assert antisymmetrize_pair(t, 0, 1).max_abs() == 0.0

    def test_basic(self):
        t = DTensor([x_lo(), x_lo()], (1, 2), [[0, 1], [0, 0]])
        assert antisymmetrize_pair(t, 0, 1).data.tolist() == [[0, 1], [-1, 0]]

    def test_twice_doubles(self):
        rng = np.random.default_rng(2)
        t = DTensor([x_lo(), x_lo()], (1, 3), rng.uniform(-1, 1, (3, 3)))
        once = antisymmetrize_pair(t, 0, 1)
        twice = antisymmetrize_pair(once, 0, 1)
        assert np.allclose(twice.data, 2 * once.data)

    def test_variance_guard(self):
        t = DTensor([x_up(), x_lo()], (1, 2), np.eye(2))
        with pytest.raises(SlotMismatch):
            antisymmetrize_pair(t, 0, 1)


class TestCyclicSum:
    def test_constant_function(self):
        base = DTensor([x_lo(), x_lo(), x_lo()], (1, 2), np.ones((2, 2, 2)))
        out = cyclic_sum(lambda i, j, k: base, (0, 1, 2))
        assert np.allclose(out.data, 3.0)

    def test_positional_cycle_matches_reference(self):
        rng = np.random.default_rng(3)
        data = rng.uniform(-1, 1, (3, 3, 3))
        out = cyclic_sum_axes(data, (0, 1, 2))
        ref = np.zeros_like(data)
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    ref[i, j, k] = data[i, j, k] + data[j, k, i] + data[k, i, j]
        assert np.allclose(out, ref)

    def test_telescoping_gradient(self):
        # f(i,j,k) built as antisymmetrized difference of a symmetric grid
        sym = np.array([[0.0, 1.0, 2.0], [1.0, 3.0, 4.0], [2.0, 4.0, 5.0]])

        def f(i, j, k):
            data = np.zeros((3, 3, 3))
            for a in range(3):
                for b in range(3):
                    for c in range(3):
                        idx = (a, b, c)
                        data[a, b, c] = sym[idx[i], idx[j]] - sym[idx[j], idx[k]]
            return DTensor([x_lo(), x_lo(), x_lo()], (1, 3), data)

        out = cyclic_sum(f, (0, 1, 2))
        assert out.max_abs() < 1e-14

    def test_mismatched_slots_rejected(self):
        a = DTensor([x_lo(), x_lo(), x_lo()], (1, 2), np.ones((2, 2, 2)))
        b = DTensor([x_lo(), x_lo(), t_lo()], (2, 2), np.ones((2, 2, 2)))
        results = iter([a, b, a])
        with pytest.raises(SlotMismatch):
            cyclic_sum(lambda i, j, k: next(results), (0, 1, 2))


class TestJetPoint:
    def test_shape_and_dims(self):
        jp = JetPoint(t=[0.1], x=[0.2, 0.3], p=[[1.0], [2.0]])
        assert jp.dims == (1, 2)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            JetPoint(t=[float("nan")], x=[0.0], p=[[0.0]])

    def test_rejects_bad_momentum_shape(self):
        with pytest.raises(ValueError):
            JetPoint(t=[0.0], x=[0.0], p=[1.0])


class TestPairTags:
    def test_valid_pair(self):
        DTensor([x_up(0), t_lo(0)], (2, 3), np.zeros((3, 2)))

    def test_pair_needs_opposite_variance(self):
        with pytest.raises(SlotMismatch):
            DTensor([x_up(0), t_up(0)], (2, 3), np.zeros((3, 2)))

    def test_pair_needs_adjacency(self):
        with pytest.raises(SlotMismatch):
            DTensor([x_up(0), x_lo(), t_lo(0)], (2, 3), np.zeros((3, 3, 2)))
