"""FastAPI service exposing the lattice analyses.

Configuration mistakes come back as 422 (pydantic validation or explicit
ValueError); numerical failures (unbracketed bisection, solver breakdown,
overflow, featureless curves) come back as 409 so clients can distinguish
the two.  All computations are pure, so identical requests produce
identical responses.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__, io
from ..lattice import check_pt_symmetry
from ..modes import exceptional_point_check, residual, type2_bic_closed_form
from ..propagation import (
    PropagationOverflowError,
    classify_growth,
    propagate,
)
from ..scattering import (
    FeaturelessCurveError,
    find_spectral_feature,
    transmission_model_a_analytic,
    transmittance_scan,
)
from ..spectrum import (
    BracketError,
    EigensolverError,
    ScanPoint,
    classify_spectrum,
    eigendecompose,
    find_boc_disappearance,
    find_threshold,
    spectrum_scan,
)
from ..lattice import assemble_hamiltonian, build_model_a, build_model_b
from . import schemas

NUMERIC_ERRORS = (
    BracketError,
    EigensolverError,
    FeaturelessCurveError,
    PropagationOverflowError,
)

app = FastAPI(
    title="ptlattice",
    description="Spectra, bound states, scattering and beam propagation "
    "for PT-symmetric tight-binding lattices.",
    version=__version__,
)


def _numeric_guard(exc: Exception) -> HTTPException:
    return HTTPException(status_code=409, detail=str(exc))


def _config_guard(exc: Exception) -> HTTPException:
    return HTTPException(status_code=422, detail=str(exc))


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/lattice/check-pt", response_model=schemas.CheckPTResponse)
def lattice_check_pt(request: schemas.CheckPTRequest) -> schemas.CheckPTResponse:
    try:
        model = request.model.build()
    except ValueError as exc:
        raise _config_guard(exc)
    report = check_pt_symmetry(model, request.tol)
    return schemas.CheckPTResponse(**io.pt_report_payload(report))


def _family(kind: str, delta: float | None):
    if kind == "a":
        return lambda g, N: build_model_a(delta, g, N)
    return lambda g, N: build_model_b(g, N)


@app.post("/spectrum", response_model=schemas.SpectrumResponse)
def spectrum_endpoint(request: schemas.SpectrumRequest) -> schemas.SpectrumResponse:
    try:
        if request.g_grid is not None:
            family = _family(request.model.kind, request.model.delta)
            points = spectrum_scan(
                family, request.g_grid, request.model.half_width, request.threads
            )
        else:
            model = request.model.build()
            pairs = eigendecompose(assemble_hamiltonian(model))
            report = classify_spectrum(pairs, model)
            g = request.model.g if request.model.g is not None else float("nan")
            points = [ScanPoint(g, report)]
    except ValueError as exc:
        raise _config_guard(exc)
    except NUMERIC_ERRORS as exc:
        raise _numeric_guard(exc)

    rows = []
    summaries = []
    for point in points:
        rows.extend(schemas.SpectrumRow(**r) for r in io.report_rows(point.g, point.report))
        summaries.append(
            schemas.SpectrumPointSummary(
                g=point.g,
                is_pt_broken=point.report.is_pt_broken,
                n_boc=point.report.count("boc"),
                n_type1_bic=point.report.count("type1_bic"),
                n_type2_bic=point.report.count("type2_bic"),
            )
        )
    return schemas.SpectrumResponse(rows=rows, points=summaries)


@app.post("/threshold", response_model=schemas.CriticalPointResponse)
def threshold_endpoint(request: schemas.ThresholdRequest) -> schemas.CriticalPointResponse:
    family = _family(request.kind, request.delta)
    try:
        point = find_threshold(
            family,
            request.g_lo,
            request.g_hi,
            request.tol_g,
            half_width=request.half_width,
            detector=request.detector,
            extrapolate=request.extrapolate,
        )
    except ValueError as exc:
        if isinstance(exc, BracketError):
            raise _numeric_guard(exc)
        raise _config_guard(exc)
    except NUMERIC_ERRORS as exc:
        raise _numeric_guard(exc)
    return schemas.CriticalPointResponse(
        value=point.value,
        N=point.half_width,
        tol=point.tol_g,
        kind=point.kind,
        detector=point.detector,
        per_size={str(k): v for k, v in sorted(point.per_size.items())},
    )


@app.post("/boc-disappearance", response_model=schemas.CriticalPointResponse)
def boc_endpoint(request: schemas.BocDisappearanceRequest) -> schemas.CriticalPointResponse:
    try:
        point = find_boc_disappearance(
            request.delta,
            request.g_lo,
            request.g_hi,
            request.tol_g,
            half_width=request.half_width,
            extrapolate=request.extrapolate,
        )
    except ValueError as exc:
        if isinstance(exc, BracketError):
            raise _numeric_guard(exc)
        raise _config_guard(exc)
    except NUMERIC_ERRORS as exc:
        raise _numeric_guard(exc)
    return schemas.CriticalPointResponse(
        value=point.value,
        N=point.half_width,
        tol=point.tol_g,
        kind=point.kind,
        detector=point.detector,
        per_size={str(k): v for k, v in sorted(point.per_size.items())},
    )


@app.post("/transmit", response_model=schemas.TransmitResponse)
def transmit_endpoint(request: schemas.TransmitRequest) -> schemas.TransmitResponse:
    try:
        model = request.model.build()
        q_grid = [q * float(np.pi) for q in request.q_over_pi]
        results = transmittance_scan(model, q_grid, request.core_halfwidth)
        analytic = None
        if request.include_analytic:
            analytic = [
                transmission_model_a_analytic(request.model.delta, request.model.g, q)
                for q in q_grid
            ]
    except ValueError as exc:
        raise _config_guard(exc)
    except NUMERIC_ERRORS as exc:
        raise _numeric_guard(exc)

    rows = [
        schemas.TransmitRow(**row, singular=res.singular)
        for row, res in zip(io.scattering_rows(results, analytic), results)
    ]
    feature = None
    if request.locate_feature:
        try:
            feature = schemas.FeatureInfo(**io.feature_payload(find_spectral_feature(results)))
        except FeaturelessCurveError as exc:
            raise _numeric_guard(exc)
        except ValueError as exc:
            raise _config_guard(exc)
    return schemas.TransmitResponse(rows=rows, feature=feature)


@app.post("/propagate", response_model=schemas.PropagateResponse)
def propagate_endpoint(request: schemas.PropagateRequest) -> schemas.PropagateResponse:
    try:
        model = request.model.build()
        if request.c0 is not None:
            c0 = schemas.to_complex_array(request.c0)
        else:
            excite = request.excite if request.excite is not None else 0
            if not -model.half_width <= excite <= model.half_width:
                raise ValueError(f"excite site {excite} outside the window")
            c0 = np.zeros(model.dim, dtype=complex)
            c0[excite + model.half_width] = 1.0
        trace = propagate(model, c0, request.z_max, request.dz_out, request.method)
        growth = None
        if request.classify:
            growth = classify_growth(trace.power, trace.z, request.window_frac)
    except ValueError as exc:
        raise _config_guard(exc)
    except NUMERIC_ERRORS as exc:
        raise _numeric_guard(exc)

    return schemas.PropagateResponse(
        power=[schemas.PowerRow(**r) for r in io.power_rows(trace)],
        growth=None if growth is None else schemas.GrowthInfo(**io.growth_payload(growth)),
        trace=(
            [schemas.TraceRow(**r) for r in io.trace_rows(trace)]
            if request.include_trace
            else None
        ),
    )


@app.post("/bic", response_model=schemas.BicResponse)
def bic_endpoint(request: schemas.BicRequest) -> schemas.BicResponse:
    try:
        mode = type2_bic_closed_form(request.g, request.half_width, request.normalization)
        H = assemble_hamiltonian(build_model_b(request.g, request.half_width))
        res = residual(H, mode)
        exceptional = None
        if request.check_exceptional:
            exceptional = schemas.ExceptionalInfo(
                **io.exceptional_payload(exceptional_point_check(request.half_width))
            )
    except ValueError as exc:
        raise _config_guard(exc)
    except NUMERIC_ERRORS as exc:
        raise _numeric_guard(exc)

    return schemas.BicResponse(
        rows=[schemas.ModeRow(**r) for r in io.mode_rows(mode)],
        energy=(mode.energy.real, mode.energy.imag),
        residual=schemas.ResidualInfo(**io.residual_payload(res)),
        exceptional=exceptional,
    )
