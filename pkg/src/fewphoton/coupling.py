"""Chiral channels, coupling points, self-energies and collective operators.

A coupling point attaches one chiral channel to one graph site with the rate
gamma = pi |g|^2.  Scenarios specify gamma directly (it is the quantity the
observables are naturally expressed in); the amplitude |g| = sqrt(gamma/pi)
is derived internally.

Three coupling modes are supported:

``local``
    Every channel touches the scatterer at exactly one point, whose
    coordinate is gauged away.  The self-energy of a point with amplitude g
    is -i pi |g|^2 b_j^dag b_j, summed over points.

``quasilocal-positions``
    Channels may couple at several points x_n along their own axis.  Within
    the Markov regime the self-energy becomes ordered ("cascaded"):

        Sigma_nm = -2 i pi c_n conj(c_m) Theta(x_n - x_m) b_{j_n}^dag b_{j_m}

    per channel, where c_n = g_n exp(i omega_ref x_n) and Theta(0) = 1/2.
    The carrier phases are recomputed from omega_ref; sweeps that move the
    carrier rebuild the self-energy per point.

``quasilocal-phases``
    Same structure, but each point carries its accumulated phase phi_n
    (standing in for omega_ref * x_n) and an explicit ordering index, both
    held fixed under detuning sweeps.

Channels have a role: ``port`` channels carry input/output photons, ``decay``
channels only contribute loss (they enter the self-energy but are excluded
from scattering-matrix indices).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    IndexOutOfRange,
    MissingPositions,
    ModeMismatch,
    UnknownChannel,
)
from .fock import (
    SectorBasis,
    SectorMatrix,
    add_transition,
    annihilation_block,
    hamiltonian_sector,
    sector_basis,
)
from .lattice import Graph

__all__ = [
    "CouplingPoint",
    "Channel",
    "ChannelSet",
    "MarkovReport",
    "make_channelset",
    "self_energy",
    "collective_operator",
    "effective_hamiltonian",
    "markov_check",
]

MODES = ("local", "quasilocal-positions", "quasilocal-phases")
MARKOV_THRESHOLD = 0.1


@dataclass(frozen=True)
class CouplingPoint:
    """One attachment of a channel to a graph site.

    gamma is the coupling rate pi |g|^2 >= 0 and g_phase the phase of g.
    x (a position along the channel, in units of inverse frequency) is used
    in quasilocal-positions mode; phi and order parameterize
    quasilocal-phases mode directly.
    """

    channel: str
    site: int
    gamma: float
    g_phase: float = 0.0
    x: float | None = None
    phi: float | None = None
    order: int | None = None


@dataclass(frozen=True)
class Channel:
    id: str
    role: str = "port"  # "port" or "decay"


@dataclass(frozen=True)
class ChannelSet:
    """Immutable set of channels plus their coupling points."""

    channels: tuple[Channel, ...]
    points: tuple[CouplingPoint, ...]
    mode: str = "local"
    omega_ref: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ModeMismatch(f"unknown coupling mode {self.mode!r}")
        ids = [c.id for c in self.channels]
        if len(set(ids)) != len(ids):
            raise ModeMismatch(f"duplicate channel ids in {ids}")
        known = set(ids)
        for p in self.points:
            if p.channel not in known:
                raise UnknownChannel(f"coupling point references undeclared channel {p.channel!r}")
            if p.gamma < 0 or not math.isfinite(p.gamma):
                raise ModeMismatch(f"coupling rate gamma must be >= 0, got {p.gamma}")
            if p.site < 0:
                raise IndexOutOfRange(f"coupling site {p.site} is negative")
        for cid in ids:
            pts = self.points_of(cid)
            if not pts:
                raise ModeMismatch(f"channel {cid!r} has no coupling points")
            if self.mode == "local" and len(pts) != 1:
                raise ModeMismatch(
                    f"local mode allows exactly one coupling point per channel; "
                    f"channel {cid!r} has {len(pts)}")
            if self.mode == "quasilocal-positions":
                if any(p.x is None for p in pts):
                    raise MissingPositions(
                        f"quasilocal-positions mode needs x on every coupling "
                        f"point of channel {cid!r}")
                if any(p.phi is not None for p in pts):
                    raise ModeMismatch(
                        f"channel {cid!r} carries phi data in positions mode")
            if self.mode == "quasilocal-phases":
                if any(p.phi is None for p in pts):
                    raise ModeMismatch(
                        f"quasilocal-phases mode needs phi on every coupling "
                        f"point of channel {cid!r}")
                if any(p.x is not None for p in pts):
                    raise ModeMismatch(
                        f"channel {cid!r} carries position data in phases mode")
                orders = [p.order for p in pts]
                if any(o is not None for o in orders) and any(o is None for o in orders):
                    raise ModeMismatch(
                        f"channel {cid!r} mixes explicit and implicit ordering")

    def points_of(self, channel_id: str) -> tuple[CouplingPoint, ...]:
        return tuple(p for p in self.points if p.channel == channel_id)

    @property
    def port_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.channels if c.role == "port")

    @property
    def decay_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.channels if c.role == "decay")

    def has_channel(self, channel_id: str) -> bool:
        return any(c.id == channel_id for c in self.channels)

    def rephased(self, omega0: float) -> "ChannelSet":
        """Convert a positions-mode set to phases mode at carrier omega0.

        phi_n = omega0 * x_n and the ordering index reproduces the position
        ordering, so self-energies and collective operators evaluated on the
        result equal the positions-mode ones at that carrier.
        """
        if self.mode != "quasilocal-positions":
            raise ModeMismatch("rephased() applies to quasilocal-positions mode only")
        new_points = []
        for cid in (c.id for c in self.channels):
            pts = self.points_of(cid)
            ranks = _position_ranks([p.x for p in pts])
            for p, rank in zip(pts, ranks):
                new_points.append(CouplingPoint(
                    channel=p.channel, site=p.site, gamma=p.gamma,
                    g_phase=p.g_phase, phi=omega0 * p.x, order=rank))
        return ChannelSet(channels=self.channels, points=tuple(new_points),
                          mode="quasilocal-phases", omega_ref=omega0)


def _position_ranks(xs):
    """Ordering indices for positions, with exactly equal x sharing a rank."""
    distinct = sorted(set(xs))
    rank = {x: i for i, x in enumerate(distinct)}
    return [rank[x] for x in xs]


@dataclass(frozen=True)
class MarkovReport:
    """Worst-case Markovianity diagnostics for quasi-local coupling.

    worst_d is the largest pi |g_n g_m| |x_n - x_m| over same-channel pairs;
    worst_lambda_dx the largest |lambda - M omega_ref| |x_n - x_m| over the
    M = 1, 2 effective spectra.  Both must stay well below one for the
    Markov treatment of the propagation between coupling points to hold;
    `passed` compares against the given threshold.  The check never raises:
    approximation quality is the caller's judgement.
    """

    worst_d: float
    worst_lambda_dx: float
    passed: bool
    threshold: float = MARKOV_THRESHOLD


def make_channelset(ports, decay=(), mode="local", omega_ref=0.0) -> ChannelSet:
    """Assemble a ChannelSet from port and decay descriptions.

    ports: iterable of (channel_id, couplings); each coupling is either a
        CouplingPoint, a (site, gamma) pair, or a dict with CouplingPoint
        fields (minus the channel id).
    decay: iterable of (site, gamma) pairs; each becomes its own local decay
        channel named "decay<k>".
    """
    channels = []
    points = []
    for cid, couplings in ports:
        channels.append(Channel(id=str(cid), role="port"))
        for c in couplings:
            if isinstance(c, CouplingPoint):
                points.append(CouplingPoint(
                    channel=str(cid), site=c.site, gamma=c.gamma,
                    g_phase=c.g_phase, x=c.x, phi=c.phi, order=c.order))
            elif isinstance(c, dict):
                points.append(CouplingPoint(channel=str(cid), **c))
            else:
                site, gamma = c
                points.append(CouplingPoint(channel=str(cid), site=int(site),
                                            gamma=float(gamma)))
    for k, (site, gamma) in enumerate(decay):
        cid = f"decay{k}"
        channels.append(Channel(id=cid, role="decay"))
        points.append(CouplingPoint(channel=cid, site=int(site), gamma=float(gamma)))
    return ChannelSet(channels=tuple(channels), points=tuple(points),
                      mode=mode, omega_ref=omega_ref)


def _amplitude(point: CouplingPoint, mode: str, omega_ref: float) -> complex:
    """Full vertex amplitude c_n = g_n exp(i phase_n) of a coupling point."""
    g = math.sqrt(point.gamma / math.pi)
    phase = point.g_phase
    if mode == "quasilocal-positions":
        phase += omega_ref * point.x
    elif mode == "quasilocal-phases":
        phase += point.phi
    return g * complex(math.cos(phase), math.sin(phase))


def _ordering_theta(pa: CouplingPoint, pb: CouplingPoint, mode: str, pts) -> float:
    """Theta(x_a - x_b) with Theta(0) = 1/2, by position or by order index."""
    if mode == "quasilocal-positions":
        da = pa.x - pb.x
    else:
        if pa.order is not None:
            da = pa.order - pb.order
        else:
            da = pts.index(pa) - pts.index(pb)
    if da > 0:
        return 1.0
    if da < 0:
        return 0.0
    return 0.5


def _site_coefficients(channelset: ChannelSet, n_sites: int) -> np.ndarray:
    """Site-pair coefficient matrix K with Sigma = sum_ab K[a, b] b_a^dag b_b."""
    K = np.zeros((n_sites, n_sites), dtype=complex)
    for ch in channelset.channels:
        pts = channelset.points_of(ch.id)
        for p in pts:
            if p.site >= n_sites:
                raise IndexOutOfRange(
                    f"coupling point on channel {ch.id!r} references site "
                    f"{p.site} of a {n_sites}-site graph")
        if channelset.mode == "local":
            (p,) = pts
            K[p.site, p.site] += -1j * p.gamma
            continue
        amps = [_amplitude(p, channelset.mode, channelset.omega_ref) for p in pts]
        for a, pa in enumerate(pts):
            for b, pb in enumerate(pts):
                theta = _ordering_theta(pa, pb, channelset.mode, pts)
                if theta == 0.0:
                    continue
                K[pa.site, pb.site] += (-2j * math.pi * theta
                                        * amps[a] * np.conj(amps[b]))
    return K


def self_energy(channelset: ChannelSet, basis: SectorBasis,
                basis_lower: SectorBasis | None = None) -> SectorMatrix:
    """Radiative self-energy Sigma^(M) within the sector of `basis`.

    The result is non-Hermitian; its anti-Hermitian part
    (Sigma - Sigma^dag)/(2i) is negative semidefinite (passivity) and it
    commutes with the total photon number by construction.  Sigma^(0) = 0.

    basis_lower is accepted for signature symmetry with the operator blocks
    but is not needed by the direct occupation-space assembly.
    """
    del basis_lower
    d = basis.dim
    if basis.m == 0:
        return SectorMatrix(m_from=0, m_to=0, entries=np.zeros((d, d), dtype=complex))
    K = _site_coefficients(channelset, basis.n_sites)
    sigma = np.zeros((d, d), dtype=complex)
    for a, b in zip(*np.nonzero(K)):
        add_transition(sigma, K[a, b], int(a), int(b), basis)
    return SectorMatrix(m_from=basis.m, m_to=basis.m, entries=sigma)


def collective_operator(channelset: ChannelSet, sigma: str, basis_m: SectorBasis,
                        basis_m_minus_1: SectorBasis) -> SectorMatrix:
    """Collective annihilation operator of channel sigma, sector M -> M-1.

    The creation form is b~_sigma^dag = sum_n c_n b_{j_n}^dag with the full
    vertex amplitude c_n (coupling amplitude times accumulated phase); this
    returns its adjoint, sum_n conj(c_n) b_{j_n}, as a
    d_{M-1} x d_M block.
    """
    if not channelset.has_channel(sigma):
        raise UnknownChannel(f"channel {sigma!r} is not declared")
    out = np.zeros((basis_m_minus_1.dim, basis_m.dim), dtype=complex)
    for p in channelset.points_of(sigma):
        c = _amplitude(p, channelset.mode, channelset.omega_ref)
        if p.site >= basis_m.n_sites:
            raise IndexOutOfRange(
                f"coupling point on channel {sigma!r} references site {p.site} "
                f"of a {basis_m.n_sites}-site graph")
        out += np.conj(c) * annihilation_block(p.site, basis_m, basis_m_minus_1).entries
    return SectorMatrix(m_from=basis_m.m, m_to=basis_m_minus_1.m, entries=out)


def effective_hamiltonian(graph: Graph, channelset: ChannelSet, m: int) -> SectorMatrix:
    """H_eff^(M) = H^(M) + Sigma^(M); all eigenvalues satisfy Im lambda <= 0."""
    basis = sector_basis(graph.n_sites, m)
    h = hamiltonian_sector(graph, basis).entries
    s = self_energy(channelset, basis).entries
    return SectorMatrix(m_from=m, m_to=m, entries=h + s)


def _pair_separations(channelset: ChannelSet):
    """(pi|g_n g_m|, |x_n - x_m|) for same-channel point pairs, where known."""
    out = []
    for ch in channelset.channels:
        pts = channelset.points_of(ch.id)
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                pa, pb = pts[a], pts[b]
                if channelset.mode == "quasilocal-positions":
                    dx = abs(pa.x - pb.x)
                elif channelset.omega_ref != 0.0:
                    dx = abs(pa.phi - pb.phi) / abs(channelset.omega_ref)
                else:
                    continue  # phase-parameterized with no carrier: unknown x
                gg = math.sqrt(pa.gamma * pb.gamma) / math.pi
                out.append((math.pi * gg, dx))
    return out


def markov_check(graph: Graph, channelset: ChannelSet,
                 threshold: float = MARKOV_THRESHOLD) -> MarkovReport:
    """Evaluate the quasi-local Markov conditions for this model.

    Local coupling is exactly Markovian and reports trivially.  In phases
    mode the point separations are reconstructed from phi / omega_ref; with
    omega_ref = 0 they are unknown and the report passes by declaration.
    """
    if channelset.mode == "local":
        return MarkovReport(0.0, 0.0, True, threshold)
    pairs = _pair_separations(channelset)
    if not pairs:
        return MarkovReport(0.0, 0.0, True, threshold)
    worst_d = max(gg * dx for gg, dx in pairs)
    dx_max = max(dx for _, dx in pairs)
    worst_ldx = 0.0
    for m in (1, 2):
        lams = np.linalg.eigvals(effective_hamiltonian(graph, channelset, m).entries)
        gap = np.max(np.abs(lams - m * channelset.omega_ref))
        worst_ldx = max(worst_ldx, float(gap) * dx_max)
    return MarkovReport(worst_d, worst_ldx, worst_d < threshold and worst_ldx < threshold,
                        threshold)
