import pathlib

import pytest

from polyham.expr import parse
from polyham.geometry import MetricField, coord_names
from polyham.hamilton import ElectrodynamicsModel
from polyham.tensors import SPATIAL, TEMPORAL

FIXTURE_DIR = pathlib.Path(__file__).resolve().parents[1] / "src" / "polyham" / "fixtures"


def build_model(m, n, h_grid, phi_grid, A_grid, P_src, mass=1.0, charge=1.0, light_speed=1.0):
    tv, xv = coord_names(m, n)
    allv = tv + xv
    h = MetricField(TEMPORAL, tuple(tuple(parse(s, tv) for s in row) for row in h_grid), tv)
    phi = MetricField(SPATIAL, tuple(tuple(parse(s, xv) for s in row) for row in phi_grid), xv)
    A = tuple(tuple(parse(s, allv) for s in row) for row in A_grid)
    P = parse(P_src, allv)
    return ElectrodynamicsModel((m, n), mass, charge, light_speed, h, phi, A, P)


@pytest.fixture(scope="session")
def flat_model():
    return build_model(1, 2, [["1"]], [["1", "0"], ["0", "1"]], [["0"], ["0"]], "0")


@pytest.fixture(scope="session")
def sphere_time_model():
    """Exponential 1-d time over the unit 2-sphere with nonzero A and P."""
    return build_model(
        1,
        2,
        [["exp(2*t1)"]],
        [["1", "0"], ["0", "sin(x1)^2"]],
        [["t1*sin(x2) + x1^2"], ["cos(x1)*x2 + t1"]],
        "t1*x1 + x2^2",
    )


@pytest.fixture(scope="session")
def curved_multitime_model():
    """Curved 2-d time (hyperbolic-like) over the sphere, all fields on."""
    return build_model(
        2,
        2,
        [["1", "0"], ["0", "exp(2*t1)"]],
        [["1", "0"], ["0", "sin(x1)^2"]],
        [["t1*sin(x2)", "x1*t2"], ["cos(x1)*x2", "t2*x1 + x2"]],
        "t1*x2 + t2*x1",
        mass=0.9,
        charge=1.2,
        light_speed=1.3,
    )


@pytest.fixture(scope="session")
def fixture_paths():
    return {p.stem: p for p in FIXTURE_DIR.glob("*.json")}
