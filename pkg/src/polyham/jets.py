"""Truncated multivariate jets: exact mixed partials up to order 3.

A :class:`Jet` stores the value of a scalar quantity together with all of
its raw mixed partial derivatives with respect to a fixed tuple of named
variables, up to a fixed total order.  Arithmetic propagates derivatives
exactly (forward mode), so geometric identities built on third derivatives
of metrics are checked at machine precision instead of finite-difference
noise.

Storage is one dense coefficient vector per jet, indexed by the canonical
monomial enumeration of a :class:`JetSpace`.  One entry is kept per sorted
multi-index, which makes Schwarz symmetry of mixed partials hold bit-exactly
by construction.  Spaces cache a flattened Leibniz product table so that
multiplication is a single fused gather/scatter.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

MAX_ORDER = 3


@lru_cache(maxsize=None)
def jet_space(variables: tuple[str, ...], order: int) -> "JetSpace":
    return JetSpace(variables, order)


class JetSpace:
    """Monomial enumeration and product table for jets over fixed variables.

    Multi-indices are exponent tuples over ``variables``; the table rows
    implement the general Leibniz rule for raw partials,
    d^g(fg) = sum over a<=g of prod(C(g_v, a_v)) d^a f d^(g-a) g.
    Do not construct directly, go through :func:`jet_space` so tables are
    shared.
    """

    def __init__(self, variables: tuple[str, ...], order: int):
        if order < 0 or order > MAX_ORDER:
            raise ValueError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variable names")
        self.variables = tuple(variables)
        self.order = order
        self.nvars = len(variables)
        self._var_pos = {v: k for k, v in enumerate(variables)}

        monos: list[tuple[int, ...]] = []
        for total in range(order + 1):
            for combo in combinations_with_replacement(range(self.nvars), total):
                expo = [0] * self.nvars
                for v in combo:
                    expo[v] += 1
                monos.append(tuple(expo))
        self.monomials = monos
        self.size = len(monos)
        self.index = {mono: k for k, mono in enumerate(monos)}

        out_idx, lhs_idx, rhs_idx, coefs = [], [], [], []
        for k, gamma in enumerate(monos):
            for alpha in self._sub_indices(gamma):
                beta = tuple(g - a for g, a in zip(gamma, alpha))
                c = 1.0
                for g, a in zip(gamma, alpha):
                    c *= math.comb(g, a)
                out_idx.append(k)
                lhs_idx.append(self.index[alpha])
                rhs_idx.append(self.index[beta])
                coefs.append(c)
        self._mul_out = np.asarray(out_idx, dtype=np.intp)
        self._mul_lhs = np.asarray(lhs_idx, dtype=np.intp)
        self._mul_rhs = np.asarray(rhs_idx, dtype=np.intp)
        self._mul_coef = np.asarray(coefs, dtype=np.float64)

        # gather map for partial(): entry k of the order-(K-1) space per variable
        self._partial_maps: dict[str, np.ndarray] = {}
        if order > 0:
            sub = jet_space(variables, order - 1)
            for v, pos in self._var_pos.items():
                gather = np.empty(sub.size, dtype=np.intp)
                for k, mono in enumerate(sub.monomials):
                    bumped = list(mono)
                    bumped[pos] += 1
                    gather[k] = self.index[tuple(bumped)]
                self._partial_maps[v] = gather

    @staticmethod
    def _sub_indices(gamma: tuple[int, ...]) -> Iterable[tuple[int, ...]]:
        ranges = [range(g + 1) for g in gamma]
        out = [()]
        for r in ranges:
            out = [prefix + (a,) for prefix in out for a in r]
        return out

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        prods = self._mul_coef * a[self._mul_lhs] * b[self._mul_rhs]
        return np.bincount(self._mul_out, weights=prods, minlength=self.size)

    def mono_key(self, mono: tuple[int, ...]) -> tuple[str, ...]:
        """Exponent tuple -> sorted tuple of variable names (one per order)."""
        out = []
        for v, e in zip(self.variables, mono):
            out.extend([v] * e)
        return tuple(out)


class Jet:
    """Value plus exact raw partials, closed under arithmetic and the
    elementary functions of the expression grammar.

    Jets are immutable in practice: every operation returns a new jet, so
    concurrent evaluation over shared inputs is safe.  Mixing jets of
    different orders over the same variables silently truncates to the
    lower order (the higher coefficients would not be valid for the result
    anyway); mixing different variable tuples is an error.
    """

    __slots__ = ("space", "c")

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.c = coeffs

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @staticmethod
    def constant(space: JetSpace, value: float) -> "Jet":
        c = np.zeros(space.size)
        c[0] = value
        return Jet(space, c)

    @staticmethod
    def variable(space: JetSpace, name: str, value: float) -> "Jet":
        c = np.zeros(space.size)
        c[0] = value
        if space.order > 0:
            pos = space._var_pos[name]
            seed = tuple(1 if k == pos else 0 for k in range(space.nvars))
            c[space.index[seed]] = 1.0
        return Jet(space, c)

    # ------------------------------------------------------------------
    # accessors
    # ------------------------------------------------------------------
    @property
    def value(self) -> float:
        return float(self.c[0])

    @property
    def partials(self) -> dict[tuple[str, ...], float]:
        """All partials of order >= 1 keyed by sorted variable-name tuples."""
        out = {}
        for k, mono in enumerate(self.space.monomials):
            if sum(mono) == 0:
                continue
            out[self.space.mono_key(mono)] = float(self.c[k])
        return out

    def partial(self, *names: str) -> float:
        mono = [0] * self.space.nvars
        for nm in names:
            mono[self.space._var_pos[nm]] += 1
        return float(self.c[self.space.index[tuple(mono)]])

    def derivative(self, name: str) -> "Jet":
        """The jet of d(self)/d(name), one order lower."""
        if self.space.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        sub = jet_space(self.space.variables, self.space.order - 1)
        return Jet(sub, self.c[self.space._partial_maps[name]])

    def truncate(self, order: int) -> "Jet":
        if order == self.space.order:
            return self
        sub = jet_space(self.space.variables, order)
        return Jet(sub, self.c[: sub.size].copy())

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------
    def _align(self, other) -> tuple["Jet", "Jet"]:
        if not isinstance(other, Jet):
            other = Jet.constant(self.space, float(other))
        if other.space is self.space:
            return self, other
        if other.space.variables != self.space.variables:
            raise ValueError("jets over different variables")
        k = min(self.space.order, other.space.order)
        return self.truncate(k), other.truncate(k)

    def __add__(self, other):
        a, b = self._align(other)
        return Jet(a.space, a.c + b.c)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._align(other)
        return Jet(a.space, a.c - b.c)

    def __rsub__(self, other):
        a, b = self._align(other)
        return Jet(a.space, b.c - a.c)

    def __neg__(self):
        return Jet(self.space, -self.c)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Jet(self.space, self.c * float(other))
        a, b = self._align(other)
        return Jet(a.space, a.space.mul(a.c, b.c))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            if other == 0:
                raise DomainError("division by zero")
            return Jet(self.space, self.c / float(other))
        a, b = self._align(other)
        return a * b._reciprocal()

    def __rtruediv__(self, other):
        a, b = self._align(other)
        return b * a._reciprocal()

    def _reciprocal(self) -> "Jet":
        y = self.value
        if y == 0.0:
            raise DomainError("division by zero")
        derivs = [1.0 / y, -1.0 / y**2, 2.0 / y**3, -6.0 / y**4]
        return self.apply(derivs)

    def __pow__(self, k: int) -> "Jet":
        if not isinstance(k, int):
            raise TypeError("Jet.__pow__ only supports integer exponents")
        if k < 0:
            return (self.__pow__(-k))._reciprocal()
        out = Jet.constant(self.space, 1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    # ------------------------------------------------------------------
    # composition with a univariate function
    # ------------------------------------------------------------------
    def apply(self, u_derivs: Sequence[float]) -> "Jet":
        """Compose with u given [u(f), u'(f), u''(f), u'''(f)] at f = value.

        Mixed partials follow Faa di Bruno specialised to order <= 3; the
        occurrence lists below handle repeated variables correctly because
        raw partials are stored.
        """
        space = self.space
        out = np.zeros(space.size)
        u = u_derivs
        f = self.c
        idx = space.index
        for k, mono in enumerate(space.monomials):
            occ = []
            for pos, e in enumerate(mono):
                occ.extend([pos] * e)
            if len(occ) == 0:
                out[k] = u[0]
            elif len(occ) == 1:
                out[k] = u[1] * f[k]
            elif len(occ) == 2:
                v, w = occ
                fv = f[idx[_unit(space.nvars, v)]]
                fw = f[idx[_unit(space.nvars, w)]]
                out[k] = u[2] * fv * fw + u[1] * f[k]
            else:
                v, w, z = occ
                fv = f[idx[_unit(space.nvars, v)]]
                fw = f[idx[_unit(space.nvars, w)]]
                fz = f[idx[_unit(space.nvars, z)]]
                fvw = f[idx[_unit2(space.nvars, v, w)]]
                fvz = f[idx[_unit2(space.nvars, v, z)]]
                fwz = f[idx[_unit2(space.nvars, w, z)]]
                out[k] = (
                    u[3] * fv * fw * fz
                    + u[2] * (fvw * fz + fvz * fw + fwz * fv)
                    + u[1] * f[k]
                )
        return Jet(space, out)

    def __repr__(self):
        return f"Jet(order={self.space.order}, value={self.value!r})"


def _unit(nvars: int, pos: int) -> tuple[int, ...]:
    return tuple(1 if k == pos else 0 for k in range(nvars))


def _unit2(nvars: int, a: int, b: int) -> tuple[int, ...]:
    mono = [0] * nvars
    mono[a] += 1
    mono[b] += 1
    return tuple(mono)
