"""Pydantic request/response models for the analysis service.

Complex numbers travel as [re, im] pairs, matching the custom lattice file
schema.  Response rows mirror the CSV column sets emitted by the CLI, so a
thin client can render either format from the same payload.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .. import lattice

ComplexPair = tuple[float, float]


def to_complex_array(pairs: list[ComplexPair]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


class ModelSpec(BaseModel):
    """Selects a lattice: a built-in family at given parameters, or explicit
    coupling/potential arrays."""

    kind: Literal["a", "b", "custom"]
    delta: Optional[float] = None
    g: Optional[float] = None
    half_width: Optional[int] = Field(default=None, ge=1)
    couplings: Optional[list[ComplexPair]] = None
    potentials: Optional[list[ComplexPair]] = None

    @model_validator(mode="after")
    def _check_parameters(self) -> "ModelSpec":
        if self.kind == "a":
            if self.delta is None or self.g is None or self.half_width is None:
                raise ValueError("model 'a' requires delta, g and half_width")
        elif self.kind == "b":
            if self.g is None or self.half_width is None:
                raise ValueError("model 'b' requires g and half_width")
        else:
            if self.couplings is None or self.potentials is None or self.half_width is None:
                raise ValueError("custom model requires half_width, couplings and potentials")
        return self

    def build(self) -> lattice.LatticeModel:
        if self.kind == "a":
            return lattice.build_model_a(self.delta, self.g, self.half_width)
        if self.kind == "b":
            return lattice.build_model_b(self.g, self.half_width)
        return lattice.LatticeModel(
            self.half_width,
            to_complex_array(self.couplings),
            to_complex_array(self.potentials),
            lattice.CustomLabel(),
        )


class CheckPTRequest(BaseModel):
    model: ModelSpec
    tol: float = Field(default=1e-12, gt=0)


class CheckPTResponse(BaseModel):
    passed: bool
    worst_violation: float
    tol: float


class SpectrumRequest(BaseModel):
    model: ModelSpec
    g_grid: Optional[list[float]] = None
    threads: int = Field(default=1, ge=1, le=64)

    @model_validator(mode="after")
    def _check_grid(self) -> "SpectrumRequest":
        if self.g_grid is not None and self.model.kind == "custom":
            raise ValueError("g scans apply to the built-in families only")
        if self.g_grid is not None and len(self.g_grid) == 0:
            raise ValueError("g_grid must not be empty")
        return self


class SpectrumRow(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    g: float
    index: int
    re_E: float
    im_E: float
    state_class: str = Field(alias="class")
    loc_kind: str
    loc_param: Optional[float] = None
    tail_mass: float


class SpectrumPointSummary(BaseModel):
    g: float
    is_pt_broken: bool
    n_boc: int
    n_type1_bic: int
    n_type2_bic: int


class SpectrumResponse(BaseModel):
    rows: list[SpectrumRow]
    points: list[SpectrumPointSummary]


class ThresholdRequest(BaseModel):
    kind: Literal["a", "b"]
    delta: Optional[float] = None
    g_lo: float = 0.1
    g_hi: float = 1.5
    tol_g: float = Field(default=0.002, gt=0)
    half_width: int = Field(default=200, ge=8)
    detector: Literal["bound_pair", "any_imag"] = "bound_pair"
    extrapolate: bool = True

    @model_validator(mode="after")
    def _check(self) -> "ThresholdRequest":
        if self.kind == "a" and self.delta is None:
            raise ValueError("model 'a' requires delta")
        if not self.g_lo < self.g_hi:
            raise ValueError("need g_lo < g_hi")
        return self


class CriticalPointResponse(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    value: float
    N: int
    tol: float
    kind: str
    detector: str
    per_size: dict[str, float]


class BocDisappearanceRequest(BaseModel):
    delta: float
    g_lo: float = 0.1
    g_hi: float = 0.7
    tol_g: float = Field(default=0.002, gt=0)
    half_width: int = Field(default=200, ge=8)
    extrapolate: bool = True

    @model_validator(mode="after")
    def _check(self) -> "BocDisappearanceRequest":
        if not self.g_lo < self.g_hi:
            raise ValueError("need g_lo < g_hi")
        return self


class TransmitRequest(BaseModel):
    model: ModelSpec
    q_over_pi: list[float]
    core_halfwidth: Optional[int] = Field(default=None, ge=1)
    include_analytic: bool = False
    locate_feature: bool = False

    @model_validator(mode="after")
    def _check(self) -> "TransmitRequest":
        if len(self.q_over_pi) == 0:
            raise ValueError("q grid must not be empty")
        if any(not 0.0 < q < 1.0 for q in self.q_over_pi):
            raise ValueError("q/pi values must lie strictly inside (0, 1)")
        if self.include_analytic and self.model.kind != "a":
            raise ValueError("the closed-form transmission applies to model 'a' only")
        return self


class TransmitRow(BaseModel):
    q_over_pi: float
    T: float
    re_t: float
    im_t: float
    re_r: float
    im_r: float
    singular: bool = False
    T_analytic: Optional[float] = None
    re_t_analytic: Optional[float] = None
    im_t_analytic: Optional[float] = None


class FeatureInfo(BaseModel):
    kind: str
    q_loc_over_pi: float
    width: float
    extremum_T: float
    baseline: float


class TransmitResponse(BaseModel):
    rows: list[TransmitRow]
    feature: Optional[FeatureInfo] = None


class PropagateRequest(BaseModel):
    model: ModelSpec
    excite: Optional[int] = 0
    c0: Optional[list[ComplexPair]] = None
    z_max: float = 150.0
    dz_out: float = Field(default=0.5, gt=0)
    method: Literal["matrix_exponential", "adaptive_rk"] = "matrix_exponential"
    window_frac: float = Field(default=0.5, gt=0.0, lt=1.0)
    include_trace: bool = False
    classify: bool = True

    @model_validator(mode="after")
    def _check(self) -> "PropagateRequest":
        if self.c0 is not None and self.excite not in (None, 0):
            raise ValueError("give either excite or c0, not both")
        if self.z_max == 0:
            raise ValueError("z_max must be nonzero")
        return self


class PowerRow(BaseModel):
    z: float
    P: float
    P_over_P0: float


class TraceRow(BaseModel):
    z: float
    n: int
    re_c: float
    im_c: float
    abs2: float


class GrowthInfo(BaseModel):
    kind: str
    parameter: Optional[float] = None
    fit_window: tuple[float, float]
    fit_quality: float


class PropagateResponse(BaseModel):
    power: list[PowerRow]
    growth: Optional[GrowthInfo] = None
    trace: Optional[list[TraceRow]] = None


class BicRequest(BaseModel):
    g: float
    half_width: int = Field(default=400, ge=4)
    normalization: Literal["raw", "unit_norm"] = "raw"
    check_exceptional: bool = False

    @model_validator(mode="after")
    def _check(self) -> "BicRequest":
        if not self.g > 0:
            raise ValueError("g must be positive (the central amplitude is 1/g)")
        return self


class ModeRow(BaseModel):
    n: int
    re_c: float
    im_c: float
    abs_c: float


class ResidualInfo(BaseModel):
    interior: float
    boundary: float


class ExceptionalInfo(BaseModel):
    N: int
    interior_residual: float
    passes: bool
    off_point_deviation: dict[str, float]
    expected_deviation: dict[str, float]


class BicResponse(BaseModel):
    rows: list[ModeRow]
    energy: ComplexPair
    residual: ResidualInfo
    exceptional: Optional[ExceptionalInfo] = None


class HealthResponse(BaseModel):
    status: str
    version: str
