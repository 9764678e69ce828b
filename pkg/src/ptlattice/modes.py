"""Closed-form bound modes of the graded-coupling lattice.

The lattice built by :func:`ptlattice.lattice.build_model_b` carries a
zero-energy bound state in the continuum with algebraic (1/n) localization
for every g > 0.  At the symmetry breaking point g = 1 that energy is an
exceptional point of the continuous spectrum: a bounded associated function
f satisfies H f = c on top of H c = 0, and the pair generates a family of
exact solutions whose amplitude grows linearly (secularly) with z.

All closed forms here are exact on the infinite lattice; on a truncated
window the error is confined to the two edge rows, which is why residuals
are reported split into interior and boundary parts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Hamiltonian, build_model_b, assemble_hamiltonian

__all__ = [
    "ModeVector",
    "AssociatedFunction",
    "ModeResidual",
    "ExceptionalPointReport",
    "type2_bic_closed_form",
    "associated_function",
    "residual",
    "exceptional_point_check",
    "jordan_family",
]

# i**k without floating-point pow
_I_POW = (1 + 0j, 1j, -1 + 0j, -1j)


@dataclass(frozen=True, eq=False)
class ModeVector:
    """Amplitudes over the window -N..N with the mode's energy."""

    amplitudes: np.ndarray
    energy: complex
    normalization: str  # "raw" (closed form as written) | "unit_norm"

    def __post_init__(self) -> None:
        amps = np.ascontiguousarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size % 2 == 0:
            raise ValueError("amplitudes must be a 1-d array of odd length")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def half_width(self) -> int:
        return (self.amplitudes.size - 1) // 2

    def site(self, n: int) -> complex:
        return complex(self.amplitudes[n + self.half_width])


@dataclass(frozen=True, eq=False)
class AssociatedFunction:
    """Bounded generalized eigenvector at the in-band exceptional point.

    f_n = -(i/2) sin(n pi / 2): zero on even sites, magnitude 1/2 on odd
    sites, bounded as n -> +-N.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=complex)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def half_width(self) -> int:
        return (self.values.size - 1) // 2

    def site(self, n: int) -> complex:
        return complex(self.values[n + self.half_width])


def _bic_amplitudes(g: float, half_width: int) -> np.ndarray:
    N = half_width
    amps = np.zeros(2 * N + 1, dtype=complex)
    amps[N] = 1.0 / g
    for n in range(-N, N + 1):
        if n != 0 and n % 2 == 0:
            sign = 1.0 if n > 0 else -1.0
            amps[n + N] = sign * _I_POW[(n + 1) % 4] / np.sqrt(float(n) ** 2 - 1.0)
    return amps


def type2_bic_closed_form(
    g: float, half_width: int, normalization: str = "raw"
) -> ModeVector:
    """Zero-energy algebraically localized bound mode of the graded lattice.

    Supported on even sites only: amplitude 1/g at n = 0 and
    sign(n) * i**(n+1) / sqrt(n**2 - 1) elsewhere, so changing g rescales
    the central site alone.  Exact eigenvector of the infinite lattice; on
    the truncated window the defect is confined to the edge rows.
    """
    if not np.isfinite(g) or g <= 0:
        raise ValueError(f"g must be positive and finite, got {g}")
    if half_width < 4:
        raise ValueError(f"half_width must be >= 4, got {half_width}")
    if normalization not in ("raw", "unit_norm"):
        raise ValueError(f"unknown normalization {normalization!r}")
    amps = _bic_amplitudes(g, half_width)
    if normalization == "unit_norm":
        amps = amps / np.linalg.norm(amps)
    return ModeVector(amps, 0j, normalization)


def associated_function(half_width: int) -> AssociatedFunction:
    """f_n = -(i/2) sin(n pi / 2), evaluated exactly from the parity of n."""
    if half_width < 4:
        raise ValueError(f"half_width must be >= 4, got {half_width}")
    N = half_width
    values = np.zeros(2 * N + 1, dtype=complex)
    for n in range(-N, N + 1):
        if n % 2 != 0:
            # sin(n pi / 2) = +1 for n = 1 mod 4, -1 for n = 3 mod 4
            values[n + N] = -0.5j if n % 4 == 1 else 0.5j
    return AssociatedFunction(values)


@dataclass(frozen=True)
class ModeResidual:
    interior: float  # max |(H v)_n - E v_n| over |n| <= N-1
    boundary: float  # same over the edge rows n = +-N


def residual(H: Hamiltonian, mode: ModeVector) -> ModeResidual:
    """Stationary-equation residual of a mode, split interior vs edge rows."""
    if H.dim != mode.amplitudes.size:
        raise ValueError(f"dimension mismatch: H is {H.dim}, mode is {mode.amplitudes.size}")
    defect = np.abs(H.apply(mode.amplitudes) - mode.energy * mode.amplitudes)
    return ModeResidual(
        interior=float(np.max(defect[1:-1])),
        boundary=float(np.max(defect[[0, -1]])),
    )


@dataclass(frozen=True)
class ExceptionalPointReport:
    half_width: int
    interior_residual: float          # max interior |(H f)_n - c_n| at g = 1
    passes: bool
    off_point_deviation: dict[float, float]  # g -> measured |(H f)_0 - c_0|
    expected_deviation: dict[float, float]   # g -> |g - 1/g|


def exceptional_point_check(
    half_width: int,
    tol: float = 1e-12,
    off_point_g: tuple[float, ...] = (0.5, 2.0),
) -> ExceptionalPointReport:
    """Verify H f = c at g = 1 and that the identity fails off the point.

    At g = 1 the interior rows satisfy (H f)_n = c_n to machine precision.
    For g != 1 only the central row changes, by exactly |g - 1/g|, which is
    reported for each requested g.
    """
    if half_width < 8:
        raise ValueError(f"half_width must be >= 8, got {half_width}")
    f = associated_function(half_width).values
    H1 = assemble_hamiltonian(build_model_b(1.0, half_width))
    c1 = _bic_amplitudes(1.0, half_width)
    interior = float(np.max(np.abs((H1.apply(f) - c1)[1:-1])))

    measured: dict[float, float] = {}
    expected: dict[float, float] = {}
    centre = half_width
    for g in off_point_g:
        Hg = assemble_hamiltonian(build_model_b(float(g), half_width))
        cg = _bic_amplitudes(float(g), half_width)
        measured[float(g)] = float(np.abs(Hg.apply(f)[centre] - cg[centre]))
        expected[float(g)] = abs(float(g) - 1.0 / float(g))
    passes = interior < tol and all(
        abs(measured[g] - expected[g]) < tol for g in measured
    )
    return ExceptionalPointReport(half_width, interior, passes, measured, expected)


def jordan_family(eps: float, z: float, half_width: int) -> np.ndarray:
    """Exact secular solution (1 - i eps z) c + eps f at the breaking point.

    Defined for the graded-coupling lattice at g = 1.  For eps = 0 it is the
    stationary bound mode; otherwise the bound-mode amplitude grows linearly
    in z, so the total power grows quadratically.
    """
    if not np.isfinite(eps) or not np.isfinite(z):
        raise ValueError("eps and z must be finite")
    c = _bic_amplitudes(1.0, half_width)
    f = associated_function(half_width).values
    return (1.0 - 1j * eps * z) * c + eps * f
