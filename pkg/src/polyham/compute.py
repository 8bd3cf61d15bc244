"""Pointwise computation surface shared by the CLI and the HTTP service."""

from __future__ import annotations

import numpy as np

from . import fields as F
from . import hamilton as H
from .errors import ValidationError
from .hamilton import ElectrodynamicsModel
from .tensors import LO, TEMPORAL, DTensor, JetPoint

OBJECT_NAMES = ("N", "torsion", "F", "einstein")


def tensor_to_json(t: DTensor) -> dict:
    return {
        "slots": [
            {
                "class": "temporal" if s.cls == TEMPORAL else "spatial",
                "variance": "lower" if s.variance == LO else "upper",
                "pair": s.pair,
            }
            for s in t.slots
        ],
        "shape": list(t.data.shape),
        "components": t.data.tolist(),
    }


def parse_point(model: ElectrodynamicsModel, t_vals, x_vals, p_vals) -> JetPoint:
    m, n = model.dims
    t = np.asarray(t_vals, dtype=float)
    x = np.asarray(x_vals, dtype=float)
    p = np.asarray(p_vals, dtype=float).reshape(-1)
    if t.shape != (m,):
        raise ValidationError(f"expected {m} temporal coordinates, got {t.size}")
    if x.shape != (n,):
        raise ValidationError(f"expected {n} spatial coordinates, got {x.size}")
    if p.size != n * m:
        raise ValidationError(f"expected {n * m} momenta (row-major over [i][a]), got {p.size}")
    return JetPoint(t=t, x=x, p=p.reshape(n, m))


def compute_objects(
    model: ElectrodynamicsModel, jp: JetPoint, objects, einstein_k: float = 1.0
) -> dict:
    """Evaluate the requested tensor families at one jet point."""
    wanted = list(objects)
    if "all" in wanted:
        wanted = list(OBJECT_NAMES)
    unknown = [w for w in wanted if w not in OBJECT_NAMES]
    if unknown:
        raise ValidationError(
            f"unknown objects {unknown}; choose from {', '.join(OBJECT_NAMES)} or all"
        )
    out: dict = {}
    if "N" in wanted:
        nc = H.nonlinear_connection(model, jp)
        out["N"] = {"N1": tensor_to_json(nc.N1), "N2": tensor_to_json(nc.N2)}
    if "torsion" in wanted:
        r1, r2, r3 = H.torsions(model, jp)
        out["torsion"] = {
            "R_temporal": tensor_to_json(r1),
            "R_mixed": tensor_to_json(r2),
            "R_spatial": tensor_to_json(r3),
        }
    if "F" in wanted:
        em = F.electromagnetic_form(model, jp.t, jp.x)
        out["F"] = {"F": tensor_to_json(em.F), "f": tensor_to_json(em.f)}
    if "einstein" in wanted:
        blocks = F.stress_energy(model, jp.t, jp.x, K=einstein_k)
        out["einstein"] = {
            "T_temporal": tensor_to_json(blocks.T_temporal),
            "T_spatial": tensor_to_json(blocks.T_spatial),
            "T_vertical": tensor_to_json(blocks.T_vertical),
            "zero_blocks": {k: tensor_to_json(v) for k, v in blocks.zero_blocks.items()},
            "K": blocks.K,
        }
    return out
