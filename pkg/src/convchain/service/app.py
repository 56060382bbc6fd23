"""FastAPI service exposing the library; the CLI is a thin client of it."""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, analytic, ensemble, exactcount, randommodel, shapes
from ..chain import stats
from ..errors import BudgetError, CalibrationError, DomainError
from . import models as m

app = FastAPI(
    title="convchain",
    version=__version__,
    description="Exact counting, grand-canonical sampling and limit shapes "
                "of convex lattice chains.",
)


@app.exception_handler(DomainError)
async def _domain_error(request: Request, exc: DomainError):
    return JSONResponse(
        status_code=422,
        content={"error": {"kind": "domain", "message": str(exc)}},
    )


@app.exception_handler(CalibrationError)
async def _calibration_error(request: Request, exc: CalibrationError):
    return JSONResponse(
        status_code=422,
        content={"error": {"kind": "calibration", "message": str(exc),
                           "residuals": list(exc.residuals or ())}},
    )


@app.exception_handler(BudgetError)
async def _budget_error(request: Request, exc: BudgetError):
    return JSONResponse(
        status_code=413,
        content={"error": {"kind": "budget", "message": str(exc)}},
    )


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/count/exact", response_model=m.CountExactResponse)
def count_exact(req: m.CountExactRequest):
    table = exactcount.count_exact(req.n1, req.n2, budget=req.budget)
    counts = {str(k): str(v) for k, v in enumerate(table.counts) if v}
    return m.CountExactResponse(
        n1=req.n1, n2=req.n2, counts=counts, total=str(table.total),
        max_vertices=table.max_vertices,
    )


@app.post("/count/estimate", response_model=m.CountEstimateResponse)
def count_estimate(req: m.CountEstimateRequest):
    est = ensemble.estimate_count(
        req.n1, req.n2, req.vertices, req.params.to_params(),
        replicas=req.replicas, seed=req.seed, threads=req.threads,
    )
    return m.CountEstimateResponse(
        estimate=est.estimate, standard_error=est.standard_error,
        hits=est.hits, replicas=est.replicas, log_prefactor=est.log_prefactor,
        zero_hits=est.zero_hits, upper_bound=est.upper_bound,
    )


def _constants_row(lam: float) -> m.ConstantsRow:
    base = analytic.theorem1_constants(lam)
    jar = analytic.jarnik_constants(lam)
    return m.ConstantsRow(lam=lam, delta=base.delta, c=base.c, e=base.e,
                          c_j=jar.c_j, e_j=jar.e_j)


@app.post("/constants", response_model=m.ConstantsResponse)
def constants(req: m.ConstantsRequest):
    if (req.lam is None) == (req.sweep is None):
        raise DomainError("provide exactly one of lam or sweep")
    if req.lam is not None:
        rows = [_constants_row(req.lam)]
    else:
        sw = req.sweep
        if not (sw.start > 0.0 and sw.stop > sw.start):
            raise DomainError("sweep needs 0 < start < stop")
        if sw.log:
            grid = np.geomspace(sw.start, sw.stop, sw.points)
        else:
            grid = np.linspace(sw.start, sw.stop, sw.points)
        rows = [_constants_row(float(g)) for g in grid]
    return m.ConstantsResponse(
        rows=rows, max_vertices_constant=analytic.max_vertices_constant(),
    )


@app.post("/calibrate", response_model=m.CalibrateResponse)
def calibrate(req: m.CalibrateRequest):
    params = ensemble.calibrate(
        req.kind, req.n, lam=req.lam, c=req.c, s=req.s, L=req.L,
        refine=req.refine, truncation_tolerance=req.truncation_tolerance,
    )
    rep = ensemble.moments(params)
    return m.CalibrateResponse(
        params=m.ParamsModel.from_params(params),
        moments=m.MomentsModel(
            expected_endpoint=rep.expected_endpoint,
            expected_vertices=rep.expected_vertices,
            expected_length=rep.expected_length,
            truncation_bound=rep.truncation_bound,
        ),
    )


@app.post("/moments", response_model=m.MomentsResponse)
def moments(req: m.MomentsRequest):
    params = req.params.to_params()
    support = ensemble.build_support(params)
    rep = ensemble.moments(params)
    return m.MomentsResponse(
        expected_endpoint=rep.expected_endpoint,
        expected_vertices=rep.expected_vertices,
        expected_length=rep.expected_length,
        truncation_bound=rep.truncation_bound,
        support_size=support.size,
        neglected_activation_mass=support.neglected_mass,
    )


@app.post("/sample", response_model=m.SampleResponse)
def sample(req: m.SampleRequest):
    params = req.params.to_params()
    items: list[m.SampleItem] = []
    if req.constraint is None:
        from ..chain import decode

        for nu in ensemble.sample_many(params, req.count, req.seed):
            st = stats(nu)
            items.append(m.SampleItem(
                vertex_map={f"{d.x1},{d.x2}": k for d, k in nu.items()},
                chain=list(decode(nu).vertices), endpoint=st.endpoint,
                vertex_count=st.vertex_count,
                euclidean_length=st.euclidean_length,
            ))
    else:
        draws = ensemble.sample_conditioned_many(
            params, req.constraint.to_constraint(), req.count,
            window=req.window, seed=req.seed, max_attempts=req.max_attempts,
        )
        for d in draws:
            st = stats(d.vertex_map)
            items.append(m.SampleItem(
                vertex_map={f"{x.x1},{x.x2}": k for x, k in d.vertex_map.items()},
                chain=list(d.chain.vertices), endpoint=st.endpoint,
                vertex_count=st.vertex_count,
                euclidean_length=st.euclidean_length,
                attempts=d.attempts, offsets=d.offsets,
            ))
    return m.SampleResponse(samples=items)


@app.post("/shape", response_model=m.ShapeResponse)
def shape(req: m.ShapeRequest):
    if req.kind == "parabola":
        spec = shapes.parabola(req.points)
    elif req.kind == "circle":
        spec = shapes.circle(req.points)
    else:
        if req.L is None:
            raise DomainError("family shape needs L")
        spec = shapes.family_curve(req.L, req.points)
    return m.ShapeResponse(
        kind=spec.kind, nominal_length=spec.nominal_length, param=spec.param,
        arc_length=spec.arc_length(),
        points=[(float(x), float(y)) for x, y in spec.points],
    )


@app.post("/jarnik", response_model=m.JarnikResponse)
def jarnik(req: m.JarnikRequest):
    base = analytic.theorem1_constants(req.lam)
    jar = analytic.jarnik_constants(req.lam)
    return m.JarnikResponse(
        lam=req.lam, c=base.c, e=base.e, c_j=jar.c_j, e_j=jar.e_j,
        max_vertices_constant_j=3.0 / (2.0 * math.pi ** (1.0 / 3.0)),
    )


@app.post("/random-model", response_model=m.RandomModelResponse)
def random_model(req: m.RandomModelRequest):
    est = randommodel.convex_probability_mc(req.k, req.trials, seed=req.seed)
    return m.RandomModelResponse(
        k=est.k, trials=est.trials, estimate=est.estimate,
        standard_error=est.standard_error, exact=est.exact,
    )


@app.post("/dbound", response_model=m.DBoundResponse)
def dbound():
    return m.DBoundResponse(d=analytic.random_max_bound())


@app.post("/angular-masses", response_model=m.AngularResponse)
def angular(req: m.AngularRequest):
    masses = ensemble.angular_masses(req.params.to_params(), req.sector_edges)
    return m.AngularResponse(masses=masses)
