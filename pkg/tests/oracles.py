"""Independent oracles for the test suite: central finite differences and a
seeded random-expression generator.  Nothing here touches the jet engine's
derivative machinery; values come from repeated plain evaluations."""

import numpy as np

from polyham.expr import eval_derivatives, parse


def fd_step(fn, point, index, h=1e-6):
    """Central difference of a scalar callable along one coordinate."""
    hi = np.array(point, dtype=float)
    lo = np.array(point, dtype=float)
    hi[index] += h
    lo[index] -= h
    return (fn(hi) - fn(lo)) / (2.0 * h)


def fd_of_partial(expr, names, point, multi_index, h=5e-6):
    """FD-step the engine's order-(k-1) partial along the first variable of
    ``multi_index``: independent of the engine's order-k propagation."""
    head, rest = multi_index[0], multi_index[1:]
    order = len(rest)

    def partial_rest(pt):
        env = dict(zip(names, pt))
        bundle = eval_derivatives(expr, env, names, order)
        return bundle.value if not rest else bundle.partial(*rest)

    return fd_step(partial_rest, point, names.index(head), h)


def random_polynomial(rng, names, degree=4, terms=5):
    """Random polynomial source of total degree <= degree."""
    pieces = []
    for _ in range(terms):
        coeff = rng.uniform(-2.0, 2.0)
        exponents = rng.multinomial(rng.integers(0, degree + 1), np.ones(len(names)) / len(names))
        mono = "*".join(
            f"{v}^{int(e)}" if e > 1 else v for v, e in zip(names, exponents) if e > 0
        )
        pieces.append(f"{coeff:.6f}" + (f"*{mono}" if mono else ""))
    return " + ".join(pieces)


def random_expression(rng, names):
    """Polynomial core, sometimes wrapped in a bounded transcendental."""
    core = random_polynomial(rng, names, degree=3, terms=3)
    wrap = rng.integers(0, 4)
    if wrap == 0:
        return core
    fn = ("sin", "cos", "exp")[rng.integers(0, 3)]
    scale = rng.uniform(0.1, 0.5)
    return f"{fn}({scale:.3f}*({core})) + {core}"


def parse_random(rng, names):
    return parse(random_expression(rng, names), names)
