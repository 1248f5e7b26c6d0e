"""HTTP service wrapping the engine.

Endpoints mirror the CLI subcommands one-to-one; every response echoes the
configuration it was computed with, carries rationals as exact "num/den"
strings, and is deterministic for a given request body.
"""

from __future__ import annotations

import re

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .errors import ConfigError, GWQError
from .mirror import multiple_cover_invert
from .rat import rat_str
from .verify import DEFAULT_NUS, Engine, RunConfig, SUITES, run_suites

INSERTION_RE = re.compile(r"^tau_(\d+)\(([PQRS])\)$")


class ConfigModel(BaseModel):
    dt: int = 5
    ndesc: int = 4
    dq: int = 5
    kz: int = 8
    gmax: int = 2
    seed: int = 20240801
    pad: int = 3
    nus: list[str] = Field(default_factory=lambda: list(DEFAULT_NUS))

    def to_run_config(self) -> RunConfig:
        return RunConfig(dt=self.dt, ndesc=self.ndesc, dq=self.dq, kz=self.kz,
                         gmax=self.gmax, seed=self.seed, pad=self.pad,
                         nus=tuple(self.nus))


class InstantonsRequest(BaseModel):
    dq: int = 5


class OrderParamsRequest(BaseModel):
    config: ConfigModel = Field(default_factory=ConfigModel)


class FreeEnergyRequest(BaseModel):
    genus: int = 0
    config: ConfigModel = Field(default_factory=ConfigModel)


class CorrelatorRequest(BaseModel):
    insertions: str
    genus: int = 0
    degree: int | None = None
    config: ConfigModel = Field(default_factory=ConfigModel)


class VerifyRequest(BaseModel):
    suites: list[str] = Field(default_factory=lambda: ["all"])
    config: ConfigModel = Field(default_factory=ConfigModel)


app = FastAPI(title="gwquintic",
              description="Exact-arithmetic engine for the quintic's "
                          "enumerative and emergent geometry.")


def _engine(cfg: ConfigModel) -> Engine:
    try:
        return Engine(cfg.to_run_config())
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/instantons")
def instantons(req: InstantonsRequest) -> dict:
    if req.dq < 1:
        raise HTTPException(status_code=400, detail="dq must be >= 1")
    eng = Engine(RunConfig(dq=req.dq, kz=req.dq + 8))
    pot = eng.f0_potential()
    n, integral = multiple_cover_invert(pot.a)
    return {
        "N": {str(d): rat_str(c) for d, c in sorted(pot.a.items())},
        "n": {str(d): rat_str(c) for d, c in sorted(n.items())},
        "integral": integral,
        "config": {"dq": req.dq},
    }


@app.post("/order-params")
def order_params(req: OrderParamsRequest) -> dict:
    eng = _engine(req.config)
    try:
        op = eng.order_params()
    except GWQError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    out = {f"u_{k}": op.u[k].truncate_counted(eng.cfg.dt).to_json_obj()
           for k in ("P", "Q", "R", "S")}
    out["config"] = req.config.model_dump()
    return out


@app.post("/free-energy")
def free_energy(req: FreeEnergyRequest) -> dict:
    eng = _engine(req.config)
    if req.genus < 0 or req.genus > eng.cfg.gmax:
        raise HTTPException(status_code=400,
                            detail=f"genus must be in 0..{eng.cfg.gmax}")
    try:
        f = eng.free_energy(req.genus)
    except GWQError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return {
        "genus": req.genus,
        "sampled_degree_terms": req.genus >= 1,
        "series": f.truncate_counted(eng.cfg.dt).to_json_obj(),
        "config": req.config.model_dump(),
    }


def parse_insertions(text: str) -> list[tuple[int, str]]:
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        m = INSERTION_RE.match(piece)
        if not m:
            raise ConfigError(
                f"bad insertion {piece!r}; expected tau_<n>(<P|Q|R|S>)")
        out.append((int(m.group(1)), m.group(2)))
    if not out:
        raise ConfigError("no insertions given")
    return out


@app.post("/correlator")
def correlator(req: CorrelatorRequest) -> dict:
    eng = _engine(req.config)
    try:
        ins = parse_insertions(req.insertions)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    if req.genus < 0 or req.genus > eng.cfg.gmax:
        raise HTTPException(status_code=400,
                            detail=f"genus must be in 0..{eng.cfg.gmax}")
    for n, _ in ins:
        if n > eng.cfg.ndesc:
            raise HTTPException(status_code=400,
                                detail=f"descendant level {n} above the cap")
    cap = eng.chart().table.total_cap
    if len(ins) > cap:
        raise HTTPException(status_code=400,
                            detail="more insertions than the degree cap")
    try:
        f = eng.free_energy(req.genus)
    except GWQError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    for n, sector in ins:
        f = f.derive(f"t{n}{sector}")
    at_origin = f.restrict_zero(eng.chart().coupling_names())
    by_degree = {}
    for d in range(eng.cfg.dq + 1):
        c = at_origin.coeff({"q": d})
        if c != 0 or d == 0:
            by_degree[str(d)] = rat_str(c)
    value_degree = 0 if req.degree is None else req.degree
    if value_degree > eng.cfg.dq:
        raise HTTPException(status_code=400, detail="degree above the q cap")
    return {
        "insertions": req.insertions,
        "genus": req.genus,
        "degree": value_degree,
        "value": rat_str(at_origin.coeff({"q": value_degree})),
        "by_degree": by_degree,
        "sampled_degree_terms": req.genus >= 1,
        "config": req.config.model_dump(),
    }


@app.post("/verify")
def verify(req: VerifyRequest) -> dict:
    try:
        return run_suites(req.suites, req.config.to_run_config())
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@app.get("/suites")
def suites() -> dict:
    return {"suites": list(SUITES) + ["all"]}
