"""Closed-form reference results for the analytically solvable geometries.

These are independent of the numerical pipeline (no sector matrices, no
eigensolvers) and exist so that the full machinery can be validated against
exact expressions: the single nonlinear (Kerr) site, the uniform dimer with
one channel per site, open-chain spectra, and the alternating doublon state
of uniform chains.

Conventions.  `gamma` is the per-coupling-point rate pi |g|^2, the same
quantity scenario files specify.  The Kerr site is coupled symmetrically to
two channels with rate gamma each, the parallel dimer couples each site to
its own channel with rate gamma.  The amplitude sign convention matches the
pipeline normalization in which A1(0) is the off-diagonal s1 element, so
A2 = A1^2 wherever the interaction vanishes.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import InvalidSize
from .fock import sector_basis

__all__ = [
    "kerr_a1_closed",
    "kerr_a2_closed",
    "kerr_g1_closed",
    "kerr_g2_closed",
    "dimer_a1_closed",
    "dimer_a2_closed",
    "chain_spectrum_closed",
    "doublon_splinter",
    "dimer_two_photon_energies",
]


def kerr_a1_closed(delta: float, gamma: float, tau: float = 0.0) -> complex:
    """One-photon amplitude of the symmetric two-channel Kerr site.

    A1(tau) = -exp(i (delta + 2 i gamma) tau) * 2 i gamma / (delta + 2 i gamma)
    """
    d = delta + 2j * gamma
    return -cmath.exp(1j * d * tau) * 2j * gamma / d


def kerr_a2_closed(delta: float, U: float, gamma: float, tau: float = 0.0) -> complex:
    """Two-photon amplitude of the Kerr site; equals A1^2 at U = 0."""
    d = delta + 2j * gamma
    return -cmath.exp(1j * d * tau) * 4.0 * gamma ** 2 / ((d - U / 2.0) * d)


def kerr_g1_closed(delta: float, gamma: float, flux: float = 1.0) -> float:
    """Kerr transmission g1 = flux * |2 gamma / (delta + 2 i gamma)|^2."""
    return flux * abs(2.0 * gamma / (delta + 2j * gamma)) ** 2


def kerr_g2_closed(delta: float, U: float, gamma: float, tau: float = 0.0) -> float:
    """Delayed intensity correlation of the Kerr site.

    g2(tau) = |1 - exp(i (delta + 2 i gamma) tau)
                   (1 - (delta + 2 i gamma)/(delta + 2 i gamma - U/2))|^2
    """
    d = delta + 2j * gamma
    val = 1.0 - cmath.exp(1j * d * tau) * (1.0 - d / (d - U / 2.0))
    return abs(val) ** 2


def dimer_a1_closed(delta: float, t: float, gamma: float) -> complex:
    """Zero-delay one-photon amplitude through the parallel-coupled dimer.

    A1 = -2 i gamma t / ((delta + i gamma)^2 - t^2)
    """
    d = delta + 1j * gamma
    return -2j * gamma * t / (d * d - t * t)


def dimer_a2_closed(delta: float, U: float, t: float, gamma: float) -> complex:
    """Zero-delay two-photon amplitude through the parallel-coupled dimer.

    A2 = -4 gamma^2 * [2 t^2 / ((d^2 - t^2) (4 d^2 - 2 U d - 4 t^2))]
                    * (2 d / (2 d - U) + 1),   d = delta + i gamma.

    The first denominator vanishes exactly at the two mixed two-photon
    eigenvalues 2 eps + 2 sqrt(2) t alpha_pm (shifted by the -2 i gamma
    sector damping); the bracket reaches 4 i gamma / (-U/2 + 2 i gamma) at
    delta = U/4, the destructive-interference minimum.
    """
    d = delta + 1j * gamma
    det2 = 4.0 * d * d - 2.0 * U * d - 4.0 * t * t
    bracket = 2.0 * d / (2.0 * d - U) + 1.0
    return -4.0 * gamma ** 2 * (2.0 * t * t) / ((d * d - t * t) * det2) * bracket


def chain_spectrum_closed(n_sites: int, epsilon: float, t: float) -> np.ndarray:
    """Open-chain single-photon energies eps + 2 t cos(k pi / (N+1)), k=1..N."""
    if n_sites < 1:
        raise InvalidSize(f"need n_sites >= 1, got {n_sites}")
    k = np.arange(1, n_sites + 1)
    return epsilon + 2.0 * t * np.cos(k * np.pi / (n_sites + 1))


def doublon_splinter(n_sites: int) -> np.ndarray:
    """Alternating doublon state of the uniform chain, in the M = 2 basis.

    (1 / sqrt(2 N)) sum_i (-1)^(i+1) (b_i^dag)^2 |0>; a unit vector whose
    hopping matrix elements cancel pairwise, so it is an exact eigenvector
    of the isolated-chain two-photon Hamiltonian with eigenvalue
    2 eps + U.
    """
    if n_sites < 1:
        raise InvalidSize(f"need n_sites >= 1, got {n_sites}")
    basis = sector_basis(n_sites, 2)
    vec = np.zeros(basis.dim, dtype=complex)
    for i in range(n_sites):
        occ = [0] * n_sites
        occ[i] = 2
        # (b^dag)^2 |0> = sqrt(2) |2_i>, normalized by 1/sqrt(2 N)
        vec[basis.index[tuple(occ)]] = (-1.0) ** i / math.sqrt(n_sites)
    return vec


def dimer_two_photon_energies(epsilon: float, U: float, t: float) -> dict:
    """Isolated-dimer two-photon energies {E0, E+, E-}.

    E0 = 2 eps + U belongs to the antisymmetric doublon state; the other two
    are 2 eps + 2 sqrt(2) t alpha_pm with
    alpha_pm = (U/(4t) pm sqrt(U^2/(16 t^2) + 1)) / sqrt(2).
    """
    if t == 0:
        raise InvalidSize("alpha_pm parameters need t != 0")
    ratio = U / (4.0 * t)
    root = math.sqrt(ratio * ratio + 1.0)
    alpha_p = (ratio + root) / math.sqrt(2.0)
    alpha_m = (ratio - root) / math.sqrt(2.0)
    return {
        "E0": 2.0 * epsilon + U,
        "E+": 2.0 * epsilon + 2.0 * math.sqrt(2.0) * t * alpha_p,
        "E-": 2.0 * epsilon + 2.0 * math.sqrt(2.0) * t * alpha_m,
    }
