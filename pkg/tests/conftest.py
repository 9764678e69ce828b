"""Shared helpers: seeded random PT-symmetric lattices and small utilities."""

from __future__ import annotations

import numpy as np
import pytest

from ptlattice.lattice import CustomLabel, LatticeModel


def random_pt_lattice(
    rng: np.random.Generator,
    half_width: int = 30,
    core: int = 8,
    scale: float = 0.5,
    hermitian: bool = False,
) -> LatticeModel:
    """Random lattice satisfying the PT rule exactly.

    Couplings and potentials deviate from the uniform background only inside
    |n| <= core; the partner entries are filled in by conjugation, so
    check_pt_symmetry passes with zero violation.  With hermitian=True all
    entries are real (a parity-symmetric Hermitian lattice, the g = 0 twin).
    """
    N = half_width
    if core >= N - 1:
        raise ValueError("core must leave a uniform tail")
    couplings = np.ones(2 * N, dtype=complex)
    potentials = np.zeros(2 * N + 1, dtype=complex)

    def set_coupling(n: int, value: complex) -> None:
        couplings[n + N - 1] = value

    def set_potential(n: int, value: complex) -> None:
        potentials[n + N] = value

    for n in range(0, core):
        re = 1.0 + scale * rng.uniform(-0.5, 0.5)
        im = 0.0 if hermitian else scale * rng.uniform(-0.4, 0.4)
        value = complex(re, im)
        set_coupling(n + 1, value)       # kappa_{n+1}
        set_coupling(-n, np.conj(value))  # kappa_{-n} = conj(kappa_{n+1})
    for n in range(1, core):
        re = scale * rng.uniform(-0.5, 0.5)
        im = 0.0 if hermitian else scale * rng.uniform(-0.4, 0.4)
        value = complex(re, im)
        set_potential(n, value)
        set_potential(-n, np.conj(value))
    set_potential(0, scale * rng.uniform(-0.5, 0.5))  # V_0 must be real

    return LatticeModel(N, couplings, potentials, CustomLabel())


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
