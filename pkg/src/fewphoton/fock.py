"""Fock-sector bases (M = 0, 1, 2) and second-quantized operator blocks.

The few-photon observables only ever touch the vacuum, one-photon and
two-photon sectors of the scatterer, so sector enumeration is capped at
M = 2 and anything larger raises UnsupportedPhotonNumber.  All matrices are
dense: the largest sector used in practice is a few thousand states.

Basis ordering is part of the public contract: occupation vectors are listed
in lexicographically descending order, identically on every run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SectorMismatch, UnsupportedPhotonNumber
from .lattice import Graph

__all__ = [
    "SectorBasis",
    "SectorMatrix",
    "sector_basis",
    "annihilation_block",
    "creation_block",
    "add_transition",
    "transition_block",
    "hamiltonian_sector",
    "number_operator_sector",
]

MAX_PHOTONS = 2


@dataclass(frozen=True)
class SectorBasis:
    """Ordered occupation basis of the M-photon sector of an n_sites graph."""

    n_sites: int
    m: int
    occupations: tuple[tuple[int, ...], ...]
    index: dict = field(repr=False, hash=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.occupations)


@dataclass(frozen=True)
class SectorMatrix:
    """Dense complex matrix acting between photon-number sectors.

    entries has shape (dim of sector m_to) x (dim of sector m_from); matrices
    acting within one sector have m_from == m_to.
    """

    m_from: int
    m_to: int
    entries: np.ndarray

    @property
    def shape(self):
        return self.entries.shape


def as_entries(mat) -> np.ndarray:
    """Accept either a SectorMatrix or a bare ndarray and return the array."""
    if isinstance(mat, SectorMatrix):
        return mat.entries
    return np.asarray(mat)


def sector_basis(n_sites: int, m: int) -> SectorBasis:
    """Enumerate the M-photon occupation basis, lexicographically descending.

    The M = 1 sector is ordered so that state j has the photon on site j; the
    M = 2 sector enumerates site pairs (i, j) with i <= j in lexicographic
    order of the pair, which is equivalent to descending occupation vectors.
    """
    if n_sites < 1:
        raise SectorMismatch(f"need n_sites >= 1, got {n_sites}")
    if not 0 <= m <= MAX_PHOTONS:
        raise UnsupportedPhotonNumber(
            f"photon sectors are limited to M <= {MAX_PHOTONS}, got M = {m}")

    if m == 0:
        occs = [tuple([0] * n_sites)]
    elif m == 1:
        occs = []
        for j in range(n_sites):
            v = [0] * n_sites
            v[j] = 1
            occs.append(tuple(v))
    else:
        occs = []
        for i in range(n_sites):
            for j in range(i, n_sites):
                v = [0] * n_sites
                v[i] += 1
                v[j] += 1
                occs.append(tuple(v))

    index = {occ: pos for pos, occ in enumerate(occs)}
    return SectorBasis(n_sites=n_sites, m=m, occupations=tuple(occs), index=index)


def _check_pair(basis_upper: SectorBasis, basis_lower: SectorBasis):
    if basis_upper.n_sites != basis_lower.n_sites:
        raise SectorMismatch(
            f"bases built for different graphs: {basis_upper.n_sites} vs "
            f"{basis_lower.n_sites} sites")
    if basis_upper.m != basis_lower.m + 1:
        raise SectorMismatch(
            f"expected sectors (M, M-1), got M={basis_upper.m} and M={basis_lower.m}")


def annihilation_block(j: int, basis_m: SectorBasis, basis_m_minus_1: SectorBasis) -> SectorMatrix:
    """Matrix of b_j mapping sector M to sector M-1.

    The matrix element between occupations differing only by n_j -> n_j - 1
    is sqrt(n_j).
    """
    _check_pair(basis_m, basis_m_minus_1)
    if not 0 <= j < basis_m.n_sites:
        raise SectorMismatch(f"site index {j} outside [0, {basis_m.n_sites})")

    out = np.zeros((basis_m_minus_1.dim, basis_m.dim), dtype=complex)
    for col, occ in enumerate(basis_m.occupations):
        nj = occ[j]
        if nj == 0:
            continue
        lowered = list(occ)
        lowered[j] -= 1
        row = basis_m_minus_1.index[tuple(lowered)]
        out[row, col] = math.sqrt(nj)
    return SectorMatrix(m_from=basis_m.m, m_to=basis_m_minus_1.m, entries=out)


def creation_block(j: int, basis_m: SectorBasis, basis_m_minus_1: SectorBasis) -> SectorMatrix:
    """Matrix of b_j^dag mapping sector M-1 to sector M (adjoint of b_j)."""
    b = annihilation_block(j, basis_m, basis_m_minus_1)
    return SectorMatrix(m_from=basis_m_minus_1.m, m_to=basis_m.m,
                        entries=b.entries.conj().T)


def add_transition(out: np.ndarray, coeff: complex, i: int, j: int,
                   basis: SectorBasis) -> None:
    """Accumulate coeff * b_i^dag b_j into an existing sector matrix.

    One entry per basis state; lets Hamiltonian and self-energy assembly
    avoid allocating a dense scratch matrix per site pair.
    """
    if basis.m == 0:
        return
    for col, occ in enumerate(basis.occupations):
        nj = occ[j]
        if nj == 0:
            continue
        if i == j:
            out[col, col] += coeff * nj
            continue
        moved = list(occ)
        moved[j] -= 1
        amp = math.sqrt(nj) * math.sqrt(moved[i] + 1)
        moved[i] += 1
        row = basis.index[tuple(moved)]
        out[row, col] += coeff * amp


def transition_block(i: int, j: int, basis: SectorBasis) -> np.ndarray:
    """Dense matrix of b_i^dag b_j within the sector of `basis`."""
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    add_transition(out, 1.0, i, j, basis)
    return out


def hamiltonian_sector(graph: Graph, basis: SectorBasis) -> SectorMatrix:
    """Bose-Hubbard Hamiltonian restricted to one photon-number sector.

    Assembled symmetrically (each link contributes t b_i^dag b_j and
    conj(t) b_j^dag b_i), so the result is exactly Hermitian.  The M = 0
    sector gives the 1x1 zero matrix.
    """
    if basis.n_sites != graph.n_sites:
        raise SectorMismatch(
            f"basis has {basis.n_sites} sites but graph has {graph.n_sites}")

    d = basis.dim
    h = np.zeros((d, d), dtype=complex)

    # diagonal: on-site energies and interactions
    for pos, occ in enumerate(basis.occupations):
        e = 0.0
        for site, n in zip(graph.sites, occ):
            e += site.epsilon * n + 0.5 * site.U * n * (n - 1)
        h[pos, pos] = e

    for link in graph.links:
        add_transition(h, link.t, link.i, link.j, basis)
        add_transition(h, np.conj(link.t), link.j, link.i, basis)

    return SectorMatrix(m_from=basis.m, m_to=basis.m, entries=h)


def number_operator_sector(basis: SectorBasis) -> SectorMatrix:
    """Total photon number within a sector: M times the identity."""
    ent = float(basis.m) * np.eye(basis.dim, dtype=complex)
    return SectorMatrix(m_from=basis.m, m_to=basis.m, entries=ent)
