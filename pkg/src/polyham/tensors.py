"""Dense small-tensor values with typed index slots.

Every indexed object of the theory (metrics, connections, curvatures,
torsions, deflections, the electromagnetic form, stress-energy blocks)
is carried as a :class:`DTensor`: a dense numpy array whose axes are
described by :class:`IndexSlot` entries.  Slots are typed by class
(temporal, ranging 1..m / spatial, ranging 1..n) and variance.

Polymomentum pair indices such as the (i)/(a) of p_i^a are represented as
two adjacent slots sharing a ``pair`` tag: one spatial and one temporal
slot of opposite variances.  The tag is bookkeeping for display and for
locating pair halves; covariant-derivative rules act on each half by its
own class and variance.

Dimensions stay tiny (m, n <= 4 in practice), so storage is dense and all
operations favour clarity over sparsity tricks.  DTensor values are never
mutated after construction; all operations return new values, which makes
concurrent use safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import AsymmetricInput, SingularMetric, SlotMismatch

TEMPORAL = "t"
SPATIAL = "x"
UP = "up"
LO = "lo"

DET_THRESHOLD = 1e-10
SYM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class IndexSlot:
    cls: str  # TEMPORAL or SPATIAL
    variance: str  # UP or LO
    pair: int | None = None

    def extent(self, dims: tuple[int, int]) -> int:
        return dims[0] if self.cls == TEMPORAL else dims[1]

    def __repr__(self):
        tag = f",pair={self.pair}" if self.pair is not None else ""
        return f"Slot({self.cls}{'^' if self.variance == UP else '_'}{tag})"


def t_up(pair=None):
    return IndexSlot(TEMPORAL, UP, pair)


def t_lo(pair=None):
    return IndexSlot(TEMPORAL, LO, pair)


def x_up(pair=None):
    return IndexSlot(SPATIAL, UP, pair)


def x_lo(pair=None):
    return IndexSlot(SPATIAL, LO, pair)


@dataclass(frozen=True)
class JetPoint:
    """A point (t^a, x^i, p_i^a) of the dual 1-jet space."""

    t: np.ndarray  # shape (m,)
    x: np.ndarray  # shape (n,)
    p: np.ndarray  # shape (n, m), row i is the momenta conjugate to x^i

    def __post_init__(self):
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        if self.p.ndim != 2:
            raise ValueError("p must be an n x m array")
        for arr in (self.t, self.x, self.p):
            if not np.all(np.isfinite(arr)):
                raise ValueError("jet point coordinates must be finite")

    @property
    def dims(self) -> tuple[int, int]:
        return len(self.t), len(self.x)


class DTensor:
    """Dense multi-index value at a point."""

    __slots__ = ("slots", "dims", "data")

    def __init__(self, slots: Sequence[IndexSlot], dims: tuple[int, int], data):
        self.slots = tuple(slots)
        self.dims = (int(dims[0]), int(dims[1]))
        arr = np.asarray(data, dtype=float)
        expected = tuple(s.extent(self.dims) for s in self.slots)
        if arr.shape != expected:
            raise ValueError(f"data shape {arr.shape} does not match slots {expected}")
        self.data = arr
        self._check_pairs()

    def _check_pairs(self):
        by_pair: dict[int, list[int]] = {}
        for k, s in enumerate(self.slots):
            if s.pair is not None:
                by_pair.setdefault(s.pair, []).append(k)
        for pair_id, positions in by_pair.items():
            if len(positions) != 2:
                raise SlotMismatch(f"pair tag {pair_id} must mark exactly two slots")
            a, b = (self.slots[k] for k in positions)
            if abs(positions[0] - positions[1]) != 1:
                raise SlotMismatch(f"pair tag {pair_id} must mark adjacent slots")
            if {a.cls, b.cls} != {TEMPORAL, SPATIAL} or a.variance == b.variance:
                raise SlotMismatch(
                    "a polymomentum pair is one spatial and one temporal slot of opposite variances"
                )

    @staticmethod
    def zeros(slots, dims) -> "DTensor":
        shape = tuple(s.extent(dims) for s in slots)
        return DTensor(slots, dims, np.zeros(shape))

    @property
    def rank(self) -> int:
        return len(self.slots)

    def __getitem__(self, idx):
        return self.data[idx]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def __add__(self, other: "DTensor") -> "DTensor":
        if not isinstance(other, DTensor) or other.slots != self.slots or other.dims != self.dims:
            raise SlotMismatch("can only add DTensors with identical slots")
        return DTensor(self.slots, self.dims, self.data + other.data)

    def __sub__(self, other: "DTensor") -> "DTensor":
        if not isinstance(other, DTensor) or other.slots != self.slots or other.dims != self.dims:
            raise SlotMismatch("can only subtract DTensors with identical slots")
        return DTensor(self.slots, self.dims, self.data - other.data)

    def __mul__(self, scalar: float) -> "DTensor":
        return DTensor(self.slots, self.dims, self.data * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "DTensor":
        return DTensor(self.slots, self.dims, -self.data)

    def transpose(self, perm: Sequence[int]) -> "DTensor":
        slots = tuple(self.slots[k] for k in perm)
        return DTensor(slots, self.dims, np.transpose(self.data, perm))

    def __repr__(self):
        return f"DTensor(slots={list(self.slots)}, dims={self.dims})"


# ---------------------------------------------------------------------------
# index algebra
# ---------------------------------------------------------------------------
def invert_metric(g: DTensor) -> DTensor:
    """Inverse of a two-slot metric; flips both variances.

    Requires a square symmetric block of one class with |det| above the
    singularity threshold.  Semi-Riemannian (indefinite) inputs are fine.
    """
    if g.rank != 2 or g.slots[0].cls != g.slots[1].cls or g.slots[0].variance != g.slots[1].variance:
        raise SlotMismatch("invert_metric needs two slots of one class and one variance")
    mat = g.data
    scale = max(1.0, float(np.max(np.abs(mat))))
    if np.max(np.abs(mat - mat.T)) > SYM_TOLERANCE * scale:
        raise AsymmetricInput("metric block is not symmetric")
    det = float(np.linalg.det(mat))
    if abs(det) <= DET_THRESHOLD:
        raise SingularMetric(f"|det| = {abs(det):.3e} below threshold {DET_THRESHOLD}")
    inv = np.linalg.inv(mat)
    inv = 0.5 * (inv + inv.T)
    flip = UP if g.slots[0].variance == LO else LO
    slots = (IndexSlot(g.slots[0].cls, flip), IndexSlot(g.slots[1].cls, flip))
    return DTensor(slots, g.dims, inv)


def contract(t: DTensor, slot_a: int, slot_b: int) -> DTensor:
    """Einstein-sum two slots of the same class and opposite variance."""
    if slot_a == slot_b:
        raise SlotMismatch("cannot contract a slot with itself")
    sa, sb = t.slots[slot_a], t.slots[slot_b]
    if sa.cls != sb.cls or sa.variance == sb.variance:
        raise SlotMismatch("contraction needs one upper and one lower slot of the same class")
    data = np.trace(t.data, axis1=slot_a, axis2=slot_b)
    slots = tuple(s for k, s in enumerate(t.slots) if k not in (slot_a, slot_b))
    return DTensor(slots, t.dims, data)


def antisymmetrize_pair(t: DTensor, slot_a: int, slot_b: int) -> DTensor:
    """Alternate sum T[..i..j..] - T[..j..i..]; no 1/2 factor."""
    sa, sb = t.slots[slot_a], t.slots[slot_b]
    if sa.cls != sb.cls or sa.variance != sb.variance:
        raise SlotMismatch("alternation needs two slots of the same class and variance")
    return DTensor(t.slots, t.dims, t.data - np.swapaxes(t.data, slot_a, slot_b))


def cyclic_sum(f: Callable, labels: tuple) -> DTensor:
    """f(i,j,k) + f(j,k,i) + f(k,i,j) for a tensor-valued f of three labels."""
    i, j, k = labels
    return f(i, j, k) + f(j, k, i) + f(k, i, j)


def cyclic_sum_axes(data: np.ndarray, axes: tuple[int, int, int]) -> np.ndarray:
    """Positional cyclic sum over three axes of a plain array:
    out[..i..j..k..] = T[i,j,k] + T[j,k,i] + T[k,i,j]."""
    a, b, c = axes
    perm1 = list(range(data.ndim))
    perm1[a], perm1[b], perm1[c] = b, c, a  # out[ijk] = T[jki]
    perm2 = list(range(data.ndim))
    perm2[a], perm2[b], perm2[c] = c, a, b  # out[ijk] = T[kij]
    return data + np.transpose(data, perm1) + np.transpose(data, perm2)
