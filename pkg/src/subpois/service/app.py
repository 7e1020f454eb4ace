"""FastAPI service exposing tables, densities, simulation and validation."""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from .. import distributions as dist
from .. import hitting as hit
from .. import sampling
from ..errors import CancellationError, DomainError, SubpoisError
from ..families import GAMMA, LINEAR, STABLE, TEMPERED
from ..validation import family_series_pmf, run_suite
from .schemas import (
    ConditionalRequest,
    HealthResponse,
    HittingRequest,
    JumpTimesRequest,
    MomentsRequest,
    PathsResponse,
    PgfRequest,
    PmfRequest,
    SimulateRequest,
    TableResponse,
    ValidateRequest,
    ValidateResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="subpois", version=__version__)

    @app.exception_handler(SubpoisError)
    async def _domain_error(request: Request, exc: SubpoisError):
        return JSONResponse(
            status_code=400,
            content={"detail": str(exc), "error_type": type(exc).__name__},
        )

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/pmf", response_model=TableResponse)
    def pmf_table(req: PmfRequest):
        params = req.to_params()
        table = dist.pmf_table(params, req.t, kmax=req.kmax)
        ode = dist.ode_pmf(params, req.t, req.kmax)
        rows = []
        for k in range(req.kmax + 1):
            bell = float(table.probs[k])
            row = {
                "k": k,
                "p_bell": bell,
                "p_ode": float(ode.probs[k]),
                "p_series": None,
                "max_disagreement": abs(bell - float(ode.probs[k])),
            }
            try:
                series = family_series_pmf(params, req.t, k)
                row["p_series"] = series
                row["max_disagreement"] = max(row["max_disagreement"], abs(bell - series))
            except CancellationError:
                pass
            rows.append(row)
        meta = {"t": req.t, "tail_bound": table.tail_bound, "family": req.family}
        return TableResponse(
            columns=["k", "p_bell", "p_ode", "p_series", "max_disagreement"],
            rows=rows,
            meta=meta,
        )

    @app.post("/pgf", response_model=TableResponse)
    def pgf_table(req: PgfRequest):
        params = req.to_params()
        table = dist.pmf_table(params, req.t, kmax=500) if req.t > 0 else None
        rows = []
        for u in req.u:
            value = dist.pgf(params, u, req.t)
            if table is not None:
                ks = np.arange(table.support_max + 1)
                partial = float(np.sum(table.probs * u**ks))
            else:
                partial = 1.0
            rows.append(
                {"u": u, "pgf": value, "partial_sum": partial, "difference": abs(value - partial)}
            )
        return TableResponse(
            columns=["u", "pgf", "partial_sum", "difference"], rows=rows, meta={"t": req.t}
        )

    @app.post("/hitting", response_model=TableResponse)
    def hitting_table(req: HittingRequest):
        params = req.to_params()
        if req.s_max <= req.s_min:
            raise DomainError("need s_max > s_min")
        form = hit.hitting_density_form(params, req.k)
        grid = np.linspace(req.s_min, req.s_max, req.points)
        columns = ["s", "density", "survival"]
        if req.k == 1:
            columns.append("t1_closed")
        if req.k == 2:
            columns.append("t2_closed")
        rows = []
        for s in grid:
            row = {
                "s": float(s),
                "density": form(float(s)),
                "survival": hit.hitting_survival(params, req.k, float(s)),
            }
            if req.k == 1:
                f = form.decay
                row["t1_closed"] = f * math.exp(-f * float(s))
            if req.k == 2:
                row["t2_closed"] = hit.hitting_density_t2(params, float(s))
            rows.append(row)
        meta = {"k": req.k, "normalization": form.integral_zero_inf()}
        return TableResponse(columns=columns, rows=rows, meta=meta)

    @app.post("/moments", response_model=TableResponse)
    def moments_table(req: MomentsRequest):
        params = req.to_params()
        s = req.s if req.s is not None else req.t
        rows: list[dict] = []

        def add(quantity, value):
            rows.append({"quantity": quantity, "value": value})

        if req.family == STABLE:
            add("mean", "infinite")
            add("variance", "infinite")
            meta = {"refusal": "divergent moments: every moment of the stable family is infinite"}
            return TableResponse(columns=["quantity", "value"], rows=rows, meta=meta)
        add("mean", dist.raw_moment(params, req.t, 1))
        add("variance", dist.central_moment(params, req.t, 2))
        if req.family == TEMPERED:
            closed = dist.tempered_moments(req.alpha, req.theta, req.lam, req.t, s)
            add("covariance", closed.covariance)
        elif req.family == GAMMA:
            closed = dist.gamma_moments(req.lam, req.t, s)
            add("covariance", closed.covariance)
            add("integrated_mean", closed.integrated_mean)
            add("integrated_variance", closed.integrated_variance)
        else:
            add("covariance", dist.central_moment(params, min(s, req.t), 2))
        for r in range(1, req.r_max + 1):
            add(f"factorial_moment_{r}", dist.factorial_moment(params, req.t, r))
        return TableResponse(columns=["quantity", "value"], rows=rows, meta={"t": req.t, "s": s})

    @app.post("/simulate")
    def simulate(req: SimulateRequest):
        params = req.to_params()
        if req.paths:
            if req.method != "path":
                raise DomainError("full trajectories exist only for method='path'")
            records = []
            start = 0
            chunk_id = 0
            while start < req.samples:
                n = min(1 << 15, req.samples - start)
                stream = sampling.RngStream(req.seed, chunk_id)
                records.extend(sampling.paths_from_batch(params, req.t, stream, n))
                start += n
                chunk_id += 1
            return PathsResponse(
                paths=[r.to_json_dict() for r in records],
                meta={"samples": req.samples, "seed": req.seed, "method": "path"},
            )
        counts = sampling.batch_counts(
            params, req.t, req.seed, req.samples, req.method, req.workers, req.ctrw_n
        )
        hist = np.bincount(np.clip(counts, 0, 10**6).astype(np.int64))
        rows = [
            {"k": int(k), "count": int(c), "frequency": float(c) / req.samples}
            for k, c in enumerate(hist)
            if c > 0
        ]
        meta = {
            "samples": req.samples,
            "seed": req.seed,
            "method": req.method,
            "ctrw_n": req.ctrw_n,
            "mean": float(counts.mean()),
        }
        return TableResponse(columns=["k", "count", "frequency"], rows=rows, meta=meta)

    @app.post("/validate", response_model=ValidateResponse)
    def validate(req: ValidateRequest):
        params = req.to_params()
        reports = run_suite(
            req.suite,
            params,
            t=req.t,
            samples=req.samples,
            seed=req.seed,
            thresholds=req.thresholds or None,
            workers=req.workers,
        )
        return ValidateResponse(
            reports=[r.to_dict() for r in reports],
            all_pass=all(r.passed for r in reports),
        )

    @app.post("/conditional", response_model=TableResponse)
    def conditional(req: ConditionalRequest):
        params = req.to_params()
        if not req.s < req.t:
            raise DomainError("need s < t")
        rows = []
        for r in range(req.k + 1):
            if req.family == GAMMA:
                p = dist.conditional_pmf_gamma(req.s, req.t, r, req.k)
            elif req.family == STABLE:
                p = dist.conditional_pmf_spacefractional(req.alpha, req.lam, req.s, req.t, r, req.k)
            elif req.family == LINEAR:
                p = dist.conditional_pmf_spacefractional(1.0, req.lam, req.s, req.t, r, req.k)
            else:
                p = (
                    dist.pmf(params, req.s, r)
                    * dist.pmf(params, req.t - req.s, req.k - r)
                    / dist.pmf(params, req.t, req.k)
                )
            rows.append({"r": r, "probability": p})
        row_sum = sum(row["probability"] for row in rows)
        return TableResponse(
            columns=["r", "probability"],
            rows=rows,
            meta={"s": req.s, "t": req.t, "k": req.k, "row_sum": row_sum},
        )

    @app.post("/jumptimes", response_model=TableResponse)
    def jumptimes(req: JumpTimesRequest):
        k = sum(req.sizes)
        r = len(req.sizes)
        # any valid instants work: the density is constant on the simplex
        instants = [req.t * (i + 1) / (r + 1) for i in range(r)]
        if req.family == GAMMA:
            density = dist.jump_times_density_gamma(req.t, instants, req.sizes)
        elif req.family == STABLE:
            density = dist.jump_times_density_spacefractional(
                req.alpha, req.lam, req.t, instants, req.sizes
            )
        elif req.family == LINEAR:
            density = dist.jump_times_density_spacefractional(
                1.0, req.lam, req.t, instants, req.sizes
            )
        else:
            raise DomainError(
                "jump-instant densities are available for the gamma, stable and linear families"
            )
        composition_probability = density * req.t**r / math.factorial(r)
        rows = [
            {
                "k": k,
                "r": r,
                "sizes": " ".join(str(s) for s in req.sizes),
                "density": density,
                "composition_probability": composition_probability,
            }
        ]
        return TableResponse(
            columns=["k", "r", "sizes", "density", "composition_probability"],
            rows=rows,
            meta={"t": req.t},
        )

    return app
