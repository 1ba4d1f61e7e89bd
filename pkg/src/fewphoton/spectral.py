"""Bi-orthogonal spectral decomposition of non-Hermitian sector Hamiltonians.

An effective Hamiltonian H within one photon-number sector is generally
non-Hermitian (dissipative).  When it is diagonalizable it admits the
decomposition

    H = sum_l lambda_l |r_l> <l_l|     with  <l_l | r_l'> = delta_{l l'},

from which the dressed resolvent G(E) = sum_l P_l / (E - lambda_l) and the
propagator exp(i (omega0 - H) tau) follow at O(d^2) cost per evaluation.

Left vectors come from the eigendecomposition of H^T, paired to the right
eigenvalues by proximity (ties broken by maximal overlap), then completed to
exact bi-orthonormality by a single linear solve against the overlap matrix.
That last step only mixes vectors within numerically degenerate clusters,
where any basis of the eigenspace is equally valid.  Matrices whose
eigenbasis is too ill-conditioned for this to work (Jordan-like blocks,
which do occur for cascaded couplings) raise DefectiveMatrix; callers must
then use the direct-solve fallback (`direct_resolvent`, or scaling-and-
squaring for propagators).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import DefectiveMatrix, NegativeDelay, PoleHit, Singular
from .fock import SectorMatrix, as_entries

__all__ = [
    "Eigensystem",
    "biorth_eig",
    "greens_resolvent",
    "propagator",
    "direct_resolvent",
    "propagator_expm",
]

CONDITION_LIMIT = 1e8
RESIDUAL_LIMIT = 1e-10
POLE_TOLERANCE = 1e-13


@dataclass(frozen=True)
class Eigensystem:
    """Bi-orthonormal spectral data of one sector Hamiltonian.

    right holds the right eigenvectors as columns, left the left eigenvectors
    as rows, normalized so that left @ right is the identity (to RESIDUAL_LIMIT).
    condition estimates the conditioning of the eigenvector basis.
    """

    m: int | None
    lambdas: np.ndarray
    right: np.ndarray
    left: np.ndarray
    condition: float

    @property
    def dim(self) -> int:
        return len(self.lambdas)

    def apply_resolvent(self, energy: complex, vec: np.ndarray) -> np.ndarray:
        """G(energy) @ vec without forming the full resolvent matrix."""
        denom = _guarded_denominator(energy, self.lambdas)
        return self.right @ ((self.left @ vec) / denom)

    def apply_propagator(self, tau: float, omega0: float, vec: np.ndarray) -> np.ndarray:
        """exp(i (omega0 - H) tau) @ vec through the spectral representation."""
        if tau < 0:
            raise NegativeDelay(f"propagation delay must be >= 0, got {tau}")
        phases = np.exp(1j * (omega0 - self.lambdas) * tau)
        return self.right @ (phases * (self.left @ vec))


def _guarded_denominator(energy: complex, lambdas: np.ndarray) -> np.ndarray:
    denom = energy - lambdas
    gap = np.min(np.abs(denom))
    if gap <= POLE_TOLERANCE:
        raise PoleHit(f"energy {energy} lies within {gap:.2e} of an eigenvalue")
    return denom


def biorth_eig(h_eff) -> Eigensystem:
    """Compute the bi-orthogonal eigendecomposition of a sector Hamiltonian.

    Accepts a SectorMatrix or a plain square ndarray.  Raises DefectiveMatrix
    when the eigenvector overlap cannot be inverted reliably (condition above
    CONDITION_LIMIT or residuals above RESIDUAL_LIMIT); observables must then
    go through the direct-solve path.
    """
    a = np.asarray(as_entries(h_eff), dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    m = h_eff.m_from if isinstance(h_eff, SectorMatrix) else None
    d = a.shape[0]

    lam_r, right = np.linalg.eig(a)
    lam_l, wt = np.linalg.eig(a.T)
    left_raw = wt.T  # rows w with w @ a = lambda * w

    # Pair left to right eigenvalues: proximity first, overlap as tie-break.
    scale = float(np.max(np.abs(lam_r))) + 1.0
    overlap = np.abs(left_raw @ right)  # |<w_i | r_j>|
    cost = np.abs(lam_l[:, None] - lam_r[None, :]) - (1e-8 * scale) * overlap
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    order = np.empty(d, dtype=int)
    order[cols] = rows
    left = left_raw[order]

    diag = np.einsum("ij,ji->i", left, right)
    if np.min(np.abs(diag)) < 1e-14:
        raise DefectiveMatrix(
            "a left/right eigenvector pair is numerically orthogonal "
            "(Jordan-like block)")
    left = left / diag[:, None]

    # Complete to exact bi-orthonormality; only near-degenerate clusters mix.
    try:
        left = np.linalg.solve(left @ right, left)
    except np.linalg.LinAlgError as exc:
        raise DefectiveMatrix("eigenvector overlap matrix is singular") from exc

    # 1-norm condition of the eigenbasis (left is its inverse at this point)
    cond = float(np.linalg.norm(right, 1) * np.linalg.norm(left, 1))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise DefectiveMatrix(
            f"eigenbasis condition {cond:.3e} exceeds {CONDITION_LIMIT:.0e}")

    res_biorth = float(np.max(np.abs(left @ right - np.eye(d))))
    res_complete = float(np.max(np.abs(right @ left - np.eye(d))))
    if res_biorth > RESIDUAL_LIMIT or res_complete > RESIDUAL_LIMIT:
        raise DefectiveMatrix(
            f"bi-orthonormalization residuals {res_biorth:.2e}/{res_complete:.2e} "
            f"exceed {RESIDUAL_LIMIT:.0e}")

    return Eigensystem(m=m, lambdas=lam_r, right=right, left=left, condition=cond)


def greens_resolvent(eig: Eigensystem, energy: complex) -> SectorMatrix:
    """Dressed Green's function G(E) = sum_l P_l / (E - lambda_l)."""
    denom = _guarded_denominator(energy, eig.lambdas)
    g = (eig.right / denom) @ eig.left
    return SectorMatrix(m_from=eig.m, m_to=eig.m, entries=g)


def propagator(eig: Eigensystem, tau: float, omega0: float = 0.0) -> SectorMatrix:
    """Finite-delay propagator exp(i (omega0 - H) tau) for tau >= 0.

    Bounded for dissipative spectra (Im lambda <= 0 keeps every mode from
    growing); tau = 0 returns the identity up to round-off.
    """
    if tau < 0:
        raise NegativeDelay(f"propagation delay must be >= 0, got {tau}")
    phases = np.exp(1j * (omega0 - eig.lambdas) * tau)
    u = (eig.right * phases) @ eig.left
    return SectorMatrix(m_from=eig.m, m_to=eig.m, entries=u)


def direct_resolvent(h_eff, energy: complex) -> SectorMatrix:
    """(E I - H)^{-1} by dense LU; the oracle/fallback path for G(E)."""
    a = np.asarray(as_entries(h_eff), dtype=complex)
    d = a.shape[0]
    m = h_eff.m_from if isinstance(h_eff, SectorMatrix) else None
    shifted = energy * np.eye(d) - a
    try:
        x = np.linalg.solve(shifted, np.eye(d, dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise Singular(f"E I - H is singular at E = {energy}") from exc
    residual = float(np.max(np.abs(shifted @ x - np.eye(d))))
    if not np.isfinite(residual) or residual > 1e-8 * max(1.0, float(np.max(np.abs(a)))):
        raise Singular(
            f"direct resolvent at E = {energy} has residual {residual:.2e}")
    return SectorMatrix(m_from=m, m_to=m, entries=x)


def propagator_expm(h_eff, tau: float, omega0: float = 0.0) -> SectorMatrix:
    """Scaling-and-squaring fallback for the finite-delay propagator."""
    if tau < 0:
        raise NegativeDelay(f"propagation delay must be >= 0, got {tau}")
    a = np.asarray(as_entries(h_eff), dtype=complex)
    m = h_eff.m_from if isinstance(h_eff, SectorMatrix) else None
    u = scipy.linalg.expm(1j * (omega0 * np.eye(a.shape[0]) - a) * tau)
    return SectorMatrix(m_from=m, m_to=m, entries=u)
