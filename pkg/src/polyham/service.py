"""HTTP service wrapping the core package.

Request bodies carry the same config document the CLI reads from disk;
responses are plain JSON mirrors of the library's report and tensor
structures.  Config problems come back as 422 with the error kind.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .compute import compute_objects, parse_point
from .config import load_config_dict
from .errors import ConfigError, ParseError, PolyhamError, SchemaError
from .verify import run_verification_config

app = FastAPI(
    title="polyham",
    version=__version__,
    description=(
        "Tensors and identity verification for the multi-time Hamilton "
        "space of electrodynamics on the dual 1-jet space."
    ),
)


class DimsBody(BaseModel):
    m: int
    n: int


class ConstantsBody(BaseModel):
    mass: float
    charge: float
    light_speed: float
    einstein_k: float = 1.0


class SamplingBody(BaseModel):
    seed: int
    count: int
    t_box: list[list[float]]
    x_box: list[list[float]]
    p_box: list  # [lo, hi] or n x m grid of [lo, hi]


class ConfigBody(BaseModel):
    dims: DimsBody
    constants: ConstantsBody
    h: list[list[str]]
    phi: list[list[str]]
    A: list[list[str]]
    P: str
    sampling: SamplingBody

    def to_raw(self) -> dict:
        return self.model_dump()


class CheckResponse(BaseModel):
    valid: bool
    model_hash: str
    m: int
    n: int


class ComputeRequest(BaseModel):
    config: ConfigBody
    t: list[float]
    x: list[float]
    p: list[float] = Field(description="row-major over [i][a]")
    objects: list[str] = ["all"]


class VerifyRequest(BaseModel):
    config: ConfigBody
    samples: int | None = None
    seed: int | None = None


def _load_or_422(body: ConfigBody):
    try:
        return load_config_dict(body.to_raw())
    except (SchemaError, ParseError, ConfigError) as err:
        raise HTTPException(
            status_code=422, detail={"kind": type(err).__name__, "message": str(err)}
        ) from None


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/check", response_model=CheckResponse)
def check(body: ConfigBody) -> CheckResponse:
    cfg = _load_or_422(body)
    m, n = cfg.model.dims
    return CheckResponse(valid=True, model_hash=cfg.model_hash, m=m, n=n)


@app.post("/compute")
def compute(body: ComputeRequest) -> dict:
    cfg = _load_or_422(body.config)
    try:
        jp = parse_point(cfg.model, body.t, body.x, body.p)
        objects = compute_objects(
            cfg.model, jp, body.objects, einstein_k=cfg.raw["constants"].get("einstein_k", 1.0)
        )
    except PolyhamError as err:
        raise HTTPException(
            status_code=422, detail={"kind": type(err).__name__, "message": str(err)}
        ) from None
    return {"model_hash": cfg.model_hash, "objects": objects}


@app.post("/verify")
def verify(body: VerifyRequest) -> dict:
    cfg = _load_or_422(body.config)
    report = run_verification_config(cfg, samples=body.samples, seed=body.seed)
    return report.to_dict()
