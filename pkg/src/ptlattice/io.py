"""Deterministic CSV/JSON emission for every analysis artifact.

Converters turn result objects into plain row dicts (the same shape the
service returns over the wire), and renderers turn those rows into text.
Floats are written with shortest round-trip precision and no locale or
wall-clock content, so identical inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import json
from typing import Iterable, Mapping, Sequence

import numpy as np

from .modes import ExceptionalPointReport, ModeResidual, ModeVector
from .propagation import GrowthClassification, PropagationTrace
from .lattice import PTSymmetryReport
from .scattering import ScatteringResult, SpectralFeature
from .spectrum import CriticalPoint, ScanPoint, SpectrumReport

__all__ = [
    "scan_rows",
    "report_rows",
    "mode_rows",
    "scattering_rows",
    "trace_rows",
    "power_rows",
    "critical_point_payload",
    "growth_payload",
    "feature_payload",
    "residual_payload",
    "pt_report_payload",
    "exceptional_payload",
    "render_csv",
    "render_json",
    "SPECTRUM_FIELDS",
    "MODE_FIELDS",
    "SCATTERING_FIELDS",
    "SCATTERING_ANALYTIC_FIELDS",
    "TRACE_FIELDS",
    "POWER_FIELDS",
]

SPECTRUM_FIELDS = ("g", "index", "re_E", "im_E", "class", "loc_kind", "loc_param", "tail_mass")
MODE_FIELDS = ("n", "re_c", "im_c", "abs_c")
SCATTERING_FIELDS = ("q_over_pi", "T", "re_t", "im_t", "re_r", "im_r")
SCATTERING_ANALYTIC_FIELDS = SCATTERING_FIELDS + ("T_analytic", "re_t_analytic", "im_t_analytic")
TRACE_FIELDS = ("z", "n", "re_c", "im_c", "abs2")
POWER_FIELDS = ("z", "P", "P_over_P0")


def _fmt(value: object) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def render_csv(fieldnames: Sequence[str], rows: Iterable[Mapping[str, object]]) -> str:
    """Comma-separated text with a header row and '\\n' line endings."""
    lines = [",".join(fieldnames)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(name)) for name in fieldnames))
    return "\n".join(lines) + "\n"


def render_json(payload: object) -> str:
    return json.dumps(payload, indent=2, allow_nan=True) + "\n"


def report_rows(g: float, report: SpectrumReport) -> list[dict]:
    rows = []
    for index, (pair, kind, fit) in enumerate(
        zip(report.eigenpairs, report.classes, report.localizations)
    ):
        rows.append(
            {
                "g": float(g),
                "index": index,
                "re_E": float(pair.eigenvalue.real),
                "im_E": float(pair.eigenvalue.imag),
                "class": kind,
                "loc_kind": fit.kind,
                "loc_param": None if fit.parameter is None else float(fit.parameter),
                "tail_mass": float(fit.tail_mass),
            }
        )
    return rows


def scan_rows(points: Sequence[ScanPoint]) -> list[dict]:
    rows: list[dict] = []
    for point in points:
        rows.extend(report_rows(point.g, point.report))
    return rows


def mode_rows(mode: ModeVector) -> list[dict]:
    rows = []
    for n, amp in zip(range(-mode.half_width, mode.half_width + 1), mode.amplitudes):
        rows.append(
            {
                "n": int(n),
                "re_c": float(amp.real),
                "im_c": float(amp.imag),
                "abs_c": float(abs(amp)),
            }
        )
    return rows


def scattering_rows(
    results: Sequence[ScatteringResult],
    analytic: Sequence[complex] | None = None,
) -> list[dict]:
    if analytic is not None and len(analytic) != len(results):
        raise ValueError("analytic column length must match the scan")
    rows = []
    for i, res in enumerate(results):
        row = {
            "q_over_pi": float(res.q / np.pi),
            "T": float(res.transmittance),
            "re_t": float(res.t.real),
            "im_t": float(res.t.imag),
            "re_r": float(res.r.real),
            "im_r": float(res.r.imag),
        }
        if analytic is not None:
            ta = complex(analytic[i])
            row["T_analytic"] = float(abs(ta) ** 2)
            row["re_t_analytic"] = float(ta.real)
            row["im_t_analytic"] = float(ta.imag)
        rows.append(row)
    return rows


def trace_rows(trace: PropagationTrace) -> list[dict]:
    rows = []
    sites = trace.sites
    for k, z in enumerate(trace.z):
        for j, n in enumerate(sites):
            amp = trace.states[k, j]
            rows.append(
                {
                    "z": float(z),
                    "n": int(n),
                    "re_c": float(amp.real),
                    "im_c": float(amp.imag),
                    "abs2": float(abs(amp) ** 2),
                }
            )
    return rows


def power_rows(trace: PropagationTrace) -> list[dict]:
    p0 = float(trace.power[0])
    return [
        {"z": float(z), "P": float(p), "P_over_P0": float(p / p0)}
        for z, p in zip(trace.z, trace.power)
    ]


def critical_point_payload(point: CriticalPoint) -> dict:
    key = "g_th" if point.kind == "pt_threshold" else "g_star"
    payload = {
        key: point.value,
        "N": point.half_width,
        "tol": point.tol_g,
        "kind": point.kind,
        "detector": point.detector,
        "per_size": {str(size): flip for size, flip in sorted(point.per_size.items())},
    }
    return payload


def growth_payload(growth: GrowthClassification) -> dict:
    return {
        "kind": growth.kind,
        "parameter": growth.parameter,
        "fit_window": [growth.fit_window[0], growth.fit_window[1]],
        "fit_quality": growth.fit_quality,
    }


def feature_payload(feature: SpectralFeature) -> dict:
    return {
        "kind": feature.kind,
        "q_loc_over_pi": feature.q_loc / float(np.pi),
        "width": feature.width,
        "extremum_T": feature.extremum_T,
        "baseline": feature.baseline,
    }


def residual_payload(res: ModeResidual) -> dict:
    return {"interior": res.interior, "boundary": res.boundary}


def pt_report_payload(report: PTSymmetryReport) -> dict:
    return {
        "passed": report.passed,
        "worst_violation": report.worst_violation,
        "tol": report.tol,
    }


def exceptional_payload(report: ExceptionalPointReport) -> dict:
    return {
        "N": report.half_width,
        "interior_residual": report.interior_residual,
        "passes": report.passes,
        "off_point_deviation": {str(g): v for g, v in sorted(report.off_point_deviation.items())},
        "expected_deviation": {str(g): v for g, v in sorted(report.expected_deviation.items())},
    }
