"""Tight-binding lattice models with parity-time (PT) symmetric defects.

A model lives on the symmetric site window n = -N..N.  Couplings kappa_n
connect sites n-1 and n (so the window carries 2N of them, n = -N+1..N), and
each site carries a complex on-site potential V_n.  Everything is expressed
in units of the asymptotic coupling, which is fixed to 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "LatticeModel",
    "Hamiltonian",
    "ModelALabel",
    "ModelBLabel",
    "CustomLabel",
    "PTSymmetryReport",
    "LatticeFileError",
    "build_model_a",
    "build_model_b",
    "check_pt_symmetry",
    "assemble_hamiltonian",
    "save_custom",
    "load_custom",
]


class LatticeFileError(ValueError):
    """Raised when a custom lattice file is malformed or inconsistent."""


@dataclass(frozen=True)
class ModelALabel:
    """Uniform lattice with a gain/loss potential pair at sites n = -1, +1."""

    delta: float
    g: float


@dataclass(frozen=True)
class ModelBLabel:
    """Graded-coupling lattice with imaginary central bonds of strength g."""

    g: float


@dataclass(frozen=True)
class CustomLabel:
    """Model built from explicit coupling/potential arrays."""


@dataclass(frozen=True, eq=False)
class LatticeModel:
    """Couplings and potentials on the truncated window n = -N..N.

    couplings[j] is kappa_{j-N+1} (ordered n = -N+1..N); potentials[j] is
    V_{j-N} (ordered n = -N..N).  Instances are immutable; the backing
    arrays are marked read-only so models can be shared across threads.
    """

    half_width: int
    couplings: np.ndarray
    potentials: np.ndarray
    label: ModelALabel | ModelBLabel | CustomLabel

    def __post_init__(self) -> None:
        N = self.half_width
        if N < 1:
            raise ValueError(f"half_width must be >= 1, got {N}")
        couplings = np.ascontiguousarray(self.couplings, dtype=complex)
        potentials = np.ascontiguousarray(self.potentials, dtype=complex)
        if couplings.shape != (2 * N,):
            raise ValueError(
                f"expected {2 * N} couplings for half_width {N}, got {couplings.shape}"
            )
        if potentials.shape != (2 * N + 1,):
            raise ValueError(
                f"expected {2 * N + 1} potentials for half_width {N}, got {potentials.shape}"
            )
        if not np.all(np.isfinite(couplings)) or not np.all(np.isfinite(potentials)):
            raise ValueError("couplings and potentials must be finite")
        couplings.setflags(write=False)
        potentials.setflags(write=False)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "potentials", potentials)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    @property
    def dim(self) -> int:
        return 2 * self.half_width + 1

    def coupling(self, n: int) -> complex:
        """kappa_n for n in -N+1..N."""
        N = self.half_width
        if not (-N + 1 <= n <= N):
            raise IndexError(f"coupling index {n} outside window -{N - 1}..{N}")
        return complex(self.couplings[n + N - 1])

    def potential(self, n: int) -> complex:
        """V_n for n in -N..N."""
        N = self.half_width
        if not (-N <= n <= N):
            raise IndexError(f"site index {n} outside window -{N}..{N}")
        return complex(self.potentials[n + N])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatticeModel):
            return NotImplemented
        return (
            self.half_width == other.half_width
            and np.array_equal(self.couplings, other.couplings)
            and np.array_equal(self.potentials, other.potentials)
        )


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Complex-symmetric tridiagonal matrix of the coupled-mode equations.

    Row i corresponds to site n = i - half_width.  Entry (n, n-1) = kappa_n,
    (n, n) = V_n, (n, n+1) = kappa_{n+1}; truncation is open (Dirichlet), so
    nothing couples beyond +-N.  The sub- and superdiagonals coincide because
    the bond kappa_n enters both of its end sites.
    """

    half_width: int
    subdiagonal: np.ndarray
    diagonal: np.ndarray
    superdiagonal: np.ndarray

    def __post_init__(self) -> None:
        for name in ("subdiagonal", "diagonal", "superdiagonal"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return 2 * self.half_width + 1

    def site_to_row(self, n: int) -> int:
        return n + self.half_width

    def dense(self) -> np.ndarray:
        H = np.diag(self.diagonal.copy())
        idx = np.arange(self.dim - 1)
        H[idx + 1, idx] = self.subdiagonal
        H[idx, idx + 1] = self.superdiagonal
        return H

    def apply(self, v: np.ndarray) -> np.ndarray:
        """H @ v without materialising the dense matrix."""
        v = np.asarray(v, dtype=complex)
        out = self.diagonal * v
        out[1:] += self.subdiagonal * v[:-1]
        out[:-1] += self.superdiagonal * v[1:]
        return out

    def norm_inf(self) -> float:
        """Maximum absolute row sum."""
        row = np.abs(self.diagonal).copy()
        row[1:] += np.abs(self.subdiagonal)
        row[:-1] += np.abs(self.superdiagonal)
        return float(np.max(row))

    def trace(self) -> complex:
        return complex(np.sum(self.diagonal))


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


def build_model_a(delta: float, g: float, half_width: int) -> LatticeModel:
    """Uniform lattice with the complex defect pair V_{-1} = delta + i g,
    V_{+1} = delta - i g (gain on the n = -1 site)."""
    _require_finite(delta=delta, g=g)
    if half_width < 2:
        raise ValueError(f"half_width must be >= 2 for the defect pair, got {half_width}")
    N = half_width
    couplings = np.ones(2 * N, dtype=complex)
    potentials = np.zeros(2 * N + 1, dtype=complex)
    potentials[N - 1] = delta + 1j * g
    potentials[N + 1] = delta - 1j * g
    return LatticeModel(N, couplings, potentials, ModelALabel(delta, g))


def build_model_b(g: float, half_width: int) -> LatticeModel:
    """Lattice with graded real couplings and an imaginary central bond pair.

    kappa_0 = -i g and kappa_1 = +i g; elsewhere kappa_n = sqrt((n+1)/(n-1))
    for even n and sqrt((n-2)/n) for odd n.  The ratios are positive on both
    sides of the window, and kappa_n -> 1 algebraically as |n| grows.
    """
    _require_finite(g=g)
    if g <= 0:
        raise ValueError(f"g must be positive, got {g}")
    if half_width < 4:
        raise ValueError(f"half_width must be >= 4, got {half_width}")
    N = half_width
    couplings = np.empty(2 * N, dtype=complex)
    for n in range(-N + 1, N + 1):
        if n == 0:
            value = -1j * g
        elif n == 1:
            value = 1j * g
        elif n % 2 == 0:
            value = complex(math.sqrt((n + 1) / (n - 1)))
        else:
            value = complex(math.sqrt((n - 2) / n))
        couplings[n + N - 1] = value
    potentials = np.zeros(2 * N + 1, dtype=complex)
    return LatticeModel(N, couplings, potentials, ModelBLabel(g))


@dataclass(frozen=True)
class PTSymmetryReport:
    passed: bool
    worst_violation: float
    tol: float


def check_pt_symmetry(model: LatticeModel, tol: float = 1e-12) -> PTSymmetryReport:
    """Check kappa_{-n} = conj(kappa_{n+1}) and V_{-n} = conj(V_n).

    Pure check: reports the worst absolute violation either way.
    """
    N = model.half_width
    worst = 0.0
    for n in range(0, N):
        worst = max(worst, abs(model.coupling(-n) - np.conj(model.coupling(n + 1))))
    for n in range(0, N + 1):
        worst = max(worst, abs(model.potential(-n) - np.conj(model.potential(n))))
    return PTSymmetryReport(passed=bool(worst <= tol), worst_violation=float(worst), tol=tol)


def assemble_hamiltonian(model: LatticeModel) -> Hamiltonian:
    """Tridiagonal matrix with open ends on the model's window."""
    return Hamiltonian(
        half_width=model.half_width,
        subdiagonal=model.couplings.copy(),
        diagonal=model.potentials.copy(),
        superdiagonal=model.couplings.copy(),
    )


def _pairs(values: np.ndarray) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in values]


def save_custom(model: LatticeModel, path: str | Path) -> None:
    """Write the model as JSON with complex entries as [re, im] pairs.

    Serialisation uses shortest round-trip decimal floats, so save/load is
    bit-exact.
    """
    payload = {
        "half_width": model.half_width,
        "couplings": _pairs(model.couplings),
        "potentials": _pairs(model.potentials),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _parse_pairs(raw: object, name: str) -> np.ndarray:
    if not isinstance(raw, list):
        raise LatticeFileError(f"'{name}' must be a list of [re, im] pairs")
    values = np.empty(len(raw), dtype=complex)
    for i, item in enumerate(raw):
        if (
            not isinstance(item, (list, tuple))
            or len(item) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in item)
        ):
            raise LatticeFileError(f"'{name}[{i}]' is not a [re, im] number pair")
        values[i] = complex(item[0], item[1])
    if not np.all(np.isfinite(values)):
        raise LatticeFileError(f"'{name}' contains non-finite entries")
    return values


def load_custom(path: str | Path) -> LatticeModel:
    """Load a custom lattice file written by :func:`save_custom`."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LatticeFileError(f"not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise LatticeFileError("top-level value must be an object")
    try:
        half_width = payload["half_width"]
    except KeyError as exc:
        raise LatticeFileError("missing 'half_width'") from exc
    if not isinstance(half_width, int) or half_width < 1:
        raise LatticeFileError(f"'half_width' must be a positive integer, got {half_width!r}")
    couplings = _parse_pairs(payload.get("couplings"), "couplings")
    potentials = _parse_pairs(payload.get("potentials"), "potentials")
    if couplings.shape != (2 * half_width,):
        raise LatticeFileError(
            f"expected {2 * half_width} couplings, file has {couplings.shape[0]}"
        )
    if potentials.shape != (2 * half_width + 1,):
        raise LatticeFileError(
            f"expected {2 * half_width + 1} potentials, file has {potentials.shape[0]}"
        )
    return LatticeModel(half_width, couplings, potentials, CustomLabel())
