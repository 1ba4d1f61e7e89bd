"""Few-photon transport observables for finalized scattering models.

Inputs are weak single-carrier coherent states in the wide-packet limit.
The observables are built from three ingredients per model: the effective
sector Hamiltonians H_eff^(M) (M = 0, 1, 2), the dressed resolvents
G^(M)(E), and the port collective operators b~_sigma.

Single-photon scattering between ports follows the Fisher-Lee form

    s1[out, in] = delta_{out,in}
                  - 2 pi i <0| b~_out G1(w0) b~_in^dag |0>,

with w0 = omega_ref + delta the incoming carrier.  Photon-photon
correlations enter through the pair of amplitudes

    A1(tau) = -2 pi i  <0| b~_out P1(tau) G1(w0) b~_in^dag |0>
    A2(tau) = -4 pi^2 <0| b~_out P1(tau) b~_out G2(2 w0)
                         b~_in^dag G1(w0) b~_in^dag |0>

where P1(tau) = exp(i (w0 - H_eff^(1)) tau), normalized so that
A1(0) equals the off-diagonal s1 element.  The transmission correlation
function for distinct input/output ports is

    g2(tau) = | 1 - A1(tau)/A1(0) + A2(tau)/A1(0)^2 |^2,

and `g2_general` evaluates the full two-detector expression (any port
combination, including reflection), which reduces to the same value in the
cross configuration.  A1/A2 carry no extra global phase factor: only
magnitudes and equal-delay ratios enter the correlation functions.

Every observable can be evaluated through the cached bi-orthogonal
eigensystems (`method="eig"`) or through dense linear solves and
scaling-and-squaring (`method="direct"`); the default `"auto"` uses the
spectral path unless a sector was flagged defective at finalize time.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .coupling import (
    ChannelSet,
    MarkovReport,
    collective_operator,
    markov_check,
    self_energy,
)
from .errors import (
    DefectiveMatrix,
    NegativeDelay,
    OffShell,
    PoleHit,
    TransmissionNode,
    UnknownChannel,
)
from .fock import SectorBasis, hamiltonian_sector, sector_basis
from .lattice import Graph
from .spectral import Eigensystem, biorth_eig

__all__ = [
    "ScatteringModel",
    "CorrelationSweep",
    "finalize",
    "s1_matrix",
    "a1",
    "a2",
    "g1",
    "g2_cross",
    "g2_general",
    "t2_principal",
    "sweep",
]

NODE_TOLERANCE = 1e-13
ONSHELL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ScatteringModel:
    """Finalized, immutable bundle of graph + channels + sector data."""

    graph: Graph
    channelset: ChannelSet
    bases: tuple[SectorBasis, ...]
    h_eff: tuple[np.ndarray, ...]
    eigs: tuple[Eigensystem | None, ...]
    ports: tuple[str, ...]
    # collective operator blocks per port: <0| b~ (1 -> 0) and the 2 -> 1 block
    out_rows: dict = field(repr=False)
    blocks_21: dict = field(repr=False)

    @property
    def omega_ref(self) -> float:
        return self.channelset.omega_ref

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(b.dim for b in self.bases)

    @property
    def defective_sectors(self) -> tuple[int, ...]:
        return tuple(m for m in range(3) if self.eigs[m] is None)

    def port_index(self, sigma: str) -> int:
        try:
            return self.ports.index(sigma)
        except ValueError:
            raise UnknownChannel(f"{sigma!r} is not a port of this model") from None


def finalize(graph: Graph, channelset: ChannelSet) -> ScatteringModel:
    """Assemble and cache everything observable evaluation needs.

    Eigendecompositions that fail bi-orthonormalization leave their sector
    flagged (eigs entry None); observables then take the direct-solve path
    for that sector.
    """
    bases = tuple(sector_basis(graph.n_sites, m) for m in range(3))
    h_eff = []
    eigs = []
    for m in range(3):
        h = (hamiltonian_sector(graph, bases[m]).entries
             + self_energy(channelset, bases[m]).entries)
        h_eff.append(h)
        try:
            eigs.append(biorth_eig(h))
        except DefectiveMatrix:
            eigs.append(None)

    ports = channelset.port_ids
    out_rows = {}
    blocks_21 = {}
    for sigma in ports:
        out_rows[sigma] = collective_operator(
            channelset, sigma, bases[1], bases[0]).entries[0, :].copy()
        blocks_21[sigma] = collective_operator(
            channelset, sigma, bases[2], bases[1]).entries

    return ScatteringModel(
        graph=graph, channelset=channelset, bases=bases,
        h_eff=tuple(h_eff), eigs=tuple(eigs), ports=ports,
        out_rows=out_rows, blocks_21=blocks_21)


# ---------------------------------------------------------------------------
# low-level sector operations (spectral path with direct fallback)
# ---------------------------------------------------------------------------

def _use_eig(model: ScatteringModel, m: int, method: str) -> bool:
    if method == "direct":
        return False
    if model.eigs[m] is None:
        if method == "eig":
            raise DefectiveMatrix(
                f"sector M={m} was flagged defective at finalize time")
        return False
    return True


def _resolvent_vec(model, m, energy, vec, method):
    """G^(M)(energy) @ vec."""
    if _use_eig(model, m, method):
        return model.eigs[m].apply_resolvent(energy, vec)
    h = model.h_eff[m]
    shifted = energy * np.eye(h.shape[0]) - h
    try:
        return np.linalg.solve(shifted, vec)
    except np.linalg.LinAlgError as exc:
        raise PoleHit(f"direct resolvent singular at E = {energy}") from exc


def _propagate_vec(model, m, tau, omega0, vec, method):
    """exp(i (omega0 - H_eff^(M)) tau) @ vec for tau >= 0."""
    if tau < 0:
        raise NegativeDelay(f"delay must be >= 0, got {tau}")
    if _use_eig(model, m, method):
        return model.eigs[m].apply_propagator(tau, omega0, vec)
    h = model.h_eff[m]
    u = scipy.linalg.expm(1j * tau * (omega0 * np.eye(h.shape[0]) - h))
    return u @ vec


def _resolvent_row(model, m, energy, row, method):
    """row @ G^(M)(energy), returned as a 1-d array usable as a row."""
    if _use_eig(model, m, method):
        eig = model.eigs[m]
        denom = energy - eig.lambdas
        if np.min(np.abs(denom)) <= 1e-13:
            raise PoleHit(f"energy {energy} lies on an eigenvalue")
        return ((row @ eig.right) / denom) @ eig.left
    h = model.h_eff[m]
    shifted = energy * np.eye(h.shape[0]) - h
    try:
        return np.linalg.solve(shifted.T, row)
    except np.linalg.LinAlgError as exc:
        raise PoleHit(f"direct resolvent singular at E = {energy}") from exc


def _in_vector(model, sigma):
    """b~_sigma^dag |0> as a length-d1 column."""
    return model.out_rows[sigma].conj()


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

def _s1_at(model: ScatteringModel, omega0: float, method: str) -> np.ndarray:
    ports = model.ports
    n = len(ports)
    s = np.eye(n, dtype=complex)
    for col, sig_in in enumerate(ports):
        gv = _resolvent_vec(model, 1, omega0, _in_vector(model, sig_in), method)
        for row, sig_out in enumerate(ports):
            s[row, col] += -2j * math.pi * (model.out_rows[sig_out] @ gv)
    return s


def s1_matrix(model: ScatteringModel, delta: float = 0.0, method: str = "auto") -> np.ndarray:
    """Port-to-port single-photon amplitude matrix at carrier omega_ref + delta.

    Decay channels are excluded from the indices; with no decay channels and
    local coupling the matrix is unitary (flux conservation).
    """
    return _s1_at(model, model.omega_ref + delta, method)


def _amplitudes_at(model, omega0, sigma_in, sigma_out, taus, method,
                   sigma_inner=None):
    """A1(tau) and A2(tau) for an array of delays, sharing the heavy pieces.

    sigma_inner selects the channel of the inner (zero-delay) annihilator in
    the two-photon amplitude; it defaults to sigma_out, which is the
    single-output configuration.
    """
    model.port_index(sigma_in)
    model.port_index(sigma_out)
    inner = sigma_out if sigma_inner is None else sigma_inner
    row_out = model.out_rows[sigma_out]
    v_in = _in_vector(model, sigma_in)

    g1v = _resolvent_vec(model, 1, omega0, v_in, method)
    w2 = model.blocks_21[sigma_in].conj().T @ g1v
    g2w = _resolvent_vec(model, 2, 2.0 * omega0, w2, method)
    x1 = model.blocks_21[inner] @ g2w

    a1_vals = np.empty(len(taus), dtype=complex)
    a2_vals = np.empty(len(taus), dtype=complex)
    for k, tau in enumerate(taus):
        ut_g1v = _propagate_vec(model, 1, tau, omega0, g1v, method)
        ut_x1 = _propagate_vec(model, 1, tau, omega0, x1, method)
        a1_vals[k] = -2j * math.pi * (row_out @ ut_g1v)
        a2_vals[k] = -4.0 * math.pi ** 2 * (row_out @ ut_x1)
    return a1_vals, a2_vals


def a1(model: ScatteringModel, delta: float, tau: float = 0.0,
       sigma_in=None, sigma_out=None, method: str = "auto") -> complex:
    """One-photon transmission amplitude A1(tau); A1(0) equals s1[out, in].

    Ports default to the first (input) and second (output) declared port.
    """
    sigma_in, sigma_out = _default_ports(model, sigma_in, sigma_out)
    omega0 = model.omega_ref + delta
    a1_vals, _ = _amplitudes_at(model, omega0, sigma_in, sigma_out, [tau], method)
    return complex(a1_vals[0])


def a2(model: ScatteringModel, delta: float, tau: float = 0.0,
       sigma_in=None, sigma_out=None, method: str = "auto") -> complex:
    """Two-photon inelastic amplitude A2(tau); equals A1(0)^2 wherever U = 0."""
    sigma_in, sigma_out = _default_ports(model, sigma_in, sigma_out)
    omega0 = model.omega_ref + delta
    _, a2_vals = _amplitudes_at(model, omega0, sigma_in, sigma_out, [tau], method)
    return complex(a2_vals[0])


def _default_ports(model, sigma_in, sigma_out):
    ports = model.ports
    if sigma_in is None:
        sigma_in = ports[0]
    if sigma_out is None:
        sigma_out = ports[1] if len(ports) > 1 else ports[0]
    return sigma_in, sigma_out


def g1(model: ScatteringModel, sigma_in, sigma_out, delta: float,
       flux: float = 1.0, method: str = "auto") -> float:
    """First-order coherence at zero delay: flux * |s1[out, in]|^2.

    With the default flux of one this is the transmission (or reflection)
    probability directly; the carrier phase factor is never included.
    """
    s = s1_matrix(model, delta, method)
    amp = s[model.port_index(sigma_out), model.port_index(sigma_in)]
    return flux * float(abs(amp)) ** 2


def g2_cross(model: ScatteringModel, delta: float, tau: float = 0.0,
             sigma_in=None, sigma_out=None, method: str = "auto") -> float:
    """Normalized intensity correlation for distinct input and output ports.

    Raises TransmissionNode when the single-photon amplitude vanishes at
    this detuning (the normalization diverges); the exception carries the
    raw |A2|^2 / |A1|^4 ratio so callers can report it without clamping.
    """
    sigma_in, sigma_out = _default_ports(model, sigma_in, sigma_out)
    omega0 = model.omega_ref + delta
    a1_vals, a2_vals = _amplitudes_at(
        model, omega0, sigma_in, sigma_out, [0.0, tau], method)
    a1_0 = a1_vals[0]
    if abs(a1_0) <= NODE_TOLERANCE:
        raw = _raw_node_ratio(a2_vals[1], a1_0)
        raise TransmissionNode(
            f"single-photon transmission vanishes at delta = {delta} "
            f"(|A1(0)| = {abs(a1_0):.2e}); raw |A2|^2/|A1|^4 = {raw:.3e}",
            raw_value=raw)
    return float(abs(1.0 - a1_vals[1] / a1_0 + a2_vals[1] / a1_0 ** 2)) ** 2


def _raw_node_ratio(a2_val, a1_0):
    if a1_0 == 0:
        return math.inf if a2_val != 0 else math.nan
    with np.errstate(over="ignore", divide="ignore"):
        return float(abs(a2_val) ** 2 / abs(a1_0) ** 4)


def g2_general(model: ScatteringModel, sigma_in, sigma_a, sigma_b,
               delta: float, tau: float = 0.0, method: str = "auto") -> float:
    """Full two-detector correlation g2 for any port configuration.

    Input photons arrive on sigma_in; detector sigma_a fires delayed by tau,
    detector sigma_b at zero delay.  The normalization uses the full s1
    elements (identity term included), so reflection configurations
    (sigma_a or sigma_b equal to sigma_in) are covered.  For distinct
    single-output configurations this equals `g2_cross`.
    """
    omega0 = model.omega_ref + delta
    s = _s1_at(model, omega0, method)
    s_a = s[model.port_index(sigma_a), model.port_index(sigma_in)]
    s_b = s[model.port_index(sigma_b), model.port_index(sigma_in)]

    a1_a, a2_ab = _amplitudes_at(model, omega0, sigma_in, sigma_a, [tau], method,
                                 sigma_inner=sigma_b)
    a1_b0, _ = _amplitudes_at(model, omega0, sigma_in, sigma_b, [0.0], method)

    norm = s_a * s_b
    if abs(s_a) <= NODE_TOLERANCE or abs(s_b) <= NODE_TOLERANCE:
        with np.errstate(divide="ignore", over="ignore"):
            raw = float(abs(a2_ab[0]) ** 2 / abs(norm) ** 2) if norm != 0 else math.inf
        raise TransmissionNode(
            f"s1 normalization vanishes at delta = {delta} for ports "
            f"({sigma_a}, {sigma_b})", raw_value=raw)
    val = 1.0 - a1_a[0] * a1_b0[0] / norm + a2_ab[0] / norm
    return float(abs(val)) ** 2


def t2_principal(model: ScatteringModel, omega1p: float, omega2p: float,
                 omega1: float, omega2: float, method: str = "auto") -> np.ndarray:
    """Symmetrized principal-value two-photon T-matrix over all port tuples.

    Frequencies are absolute carrier frequencies and must satisfy the
    on-shell condition omega1p + omega2p = omega1 + omega2 (to 1e-12).
    Returns a complex array T[out1, out2, in1, in2] indexed by port position,
    symmetric under exchange of the outgoing pair (out1, omega1p) <->
    (out2, omega2p) and of the incoming pair.  Identically zero when all
    interactions vanish.
    """
    scale = max(1.0, abs(omega1p), abs(omega2p), abs(omega1), abs(omega2))
    if abs((omega1p + omega2p) - (omega1 + omega2)) > ONSHELL_TOLERANCE * scale:
        raise OffShell(
            f"off-shell frequencies: {omega1p} + {omega2p} != {omega1} + {omega2}")
    e_total = omega1 + omega2

    ports = model.ports
    n = len(ports)
    h1 = model.h_eff[1]
    freqs = tuple(dict.fromkeys((omega1p, omega2p, omega1, omega2)))

    # row-side chains <0| b~_o G1(w) and column-side chains G1(w) b~_i^dag |0>
    row_g = {}
    col_g = {}
    for sigma in ports:
        for w in freqs:
            row_g[sigma, w] = _resolvent_row(model, 1, w, model.out_rows[sigma], method)
            col_g[sigma, w] = _resolvent_vec(model, 1, w, _in_vector(model, sigma), method)

    # two-photon pathway pieces b~_i2^dag G1(w) b~_i1^dag |0> pushed through G2
    g2_cols = {}
    for i1 in ports:
        for i2 in ports:
            for w in freqs:
                z = model.blocks_21[i2].conj().T @ col_g[i1, w]
                g2_cols[i2, i1, w] = _resolvent_vec(model, 2, e_total, z, method)

    def kernel(o1, w1p, o2, w2p, i1, w1, i2, w2):
        term1 = row_g[o1, w1p] @ (model.blocks_21[o2] @ g2_cols[i2, i1, w1])
        # single-photon exchange pathway with the (E - l' - l) weight
        f_plain = row_g[o1, w1p] @ col_g[i2, w2]
        f_lam = row_g[o1, w1p] @ (h1 @ col_g[i2, w2])
        g_plain = row_g[o2, w2p] @ col_g[i1, w1]
        g_lam = row_g[o2, w2p] @ (h1 @ col_g[i1, w1])
        term2 = -0.5 * (e_total * f_plain * g_plain
                        - f_lam * g_plain - f_plain * g_lam)
        return term1 + term2

    out = np.zeros((n, n, n, n), dtype=complex)
    for a_idx, o1 in enumerate(ports):
        for b_idx, o2 in enumerate(ports):
            for c_idx, i1 in enumerate(ports):
                for d_idx, i2 in enumerate(ports):
                    val = (kernel(o1, omega1p, o2, omega2p, i1, omega1, i2, omega2)
                           + kernel(o2, omega2p, o1, omega1p, i1, omega1, i2, omega2)
                           + kernel(o1, omega1p, o2, omega2p, i2, omega2, i1, omega1)
                           + kernel(o2, omega2p, o1, omega1p, i2, omega2, i1, omega1))
                    out[a_idx, b_idx, c_idx, d_idx] = 0.25 * val
    return out


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationSweep:
    """Grid results of a detuning/delay sweep for one port pair.

    s1 has shape (n_delta, n_ports, n_ports); g2 has shape
    (n_delta, n_tau).  flags holds per-delta tuples of flag strings
    (transmission_node, pole_hit, markov_warn, defective_fallback).
    """

    delta: np.ndarray
    tau: np.ndarray
    s1: np.ndarray
    t_abs2: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    flags: tuple
    markov: MarkovReport
    metadata: dict


def _model_at(model: ScatteringModel, delta: float):
    """Evaluation context for one grid point: (model, absolute carrier).

    Position-parameterized quasi-local coupling accumulates carrier-dependent
    phases, so the effective Hamiltonians are rebuilt per point; the other
    modes reuse the cached model.
    """
    omega0 = model.omega_ref + delta
    if model.channelset.mode == "quasilocal-positions":
        return finalize(model.graph, model.channelset.rephased(omega0)), omega0
    return model, omega0


def _check_grid(grid, name, allow_negative):
    arr = np.asarray(grid, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} grid must be a non-empty 1-d array")
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise ValueError(f"{name} grid must be strictly increasing")
    if not allow_negative and arr[0] < 0:
        raise NegativeDelay(f"{name} grid must be >= 0")
    return arr


def sweep(model: ScatteringModel, ports, delta_grid, tau_grid=None,
          flux: float = 1.0, threads: int = 1, method: str = "auto",
          run_markov_check: bool = True) -> CorrelationSweep:
    """Evaluate transmission, g1 and g2 on a (delta, tau) grid.

    ports is the (input, output) pair of port ids.  An empty/None tau grid
    means zero delay only.  Per-point failures are recorded in flags rather
    than aborting the sweep: transmission nodes report the raw divergent
    ratio in the g2 column, pole hits leave NaNs.

    Grid points are independent; with threads > 1 they are evaluated by a
    thread pool, and results are written by index so the output arrays are
    identical to a sequential run.
    """
    sigma_in, sigma_out = ports
    deltas = _check_grid(delta_grid, "delta", allow_negative=True)
    taus = (np.asarray([0.0]) if tau_grid is None or len(tau_grid) == 0
            else _check_grid(tau_grid, "tau", allow_negative=False))

    n_d, n_t, n_p = len(deltas), len(taus), len(model.ports)
    s1_arr = np.full((n_d, n_p, n_p), np.nan, dtype=complex)
    g2_arr = np.full((n_d, n_t), np.nan)
    flags = [[] for _ in range(n_d)]

    if run_markov_check:
        markov = markov_check(model.graph, model.channelset)
    else:
        markov = MarkovReport(0.0, 0.0, True)

    base_flags = []
    if model.defective_sectors and method != "direct":
        base_flags.append("defective_fallback")
    if not markov.passed:
        base_flags.append("markov_warn")

    out_idx = model.port_index(sigma_out)
    in_idx = model.port_index(sigma_in)

    def run_point(k):
        point_flags = list(base_flags)
        try:
            ctx, omega0 = _model_at(model, deltas[k])
            s1_arr[k] = _s1_at(ctx, omega0, method)
            a1_vals, a2_vals = _amplitudes_at(
                ctx, omega0, sigma_in, sigma_out, taus, method)
            a1_0 = a1_vals[0] if taus[0] == 0.0 else _amplitudes_at(
                ctx, omega0, sigma_in, sigma_out, [0.0], method)[0][0]
            if abs(a1_0) <= NODE_TOLERANCE:
                point_flags.append("transmission_node")
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    g2_arr[k] = np.abs(a2_vals) ** 2 / abs(a1_0) ** 4
            else:
                g2_arr[k] = np.abs(1.0 - a1_vals / a1_0 + a2_vals / a1_0 ** 2) ** 2
        except PoleHit:
            point_flags.append("pole_hit")
        flags[k] = point_flags

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_point, range(n_d)))
    else:
        for k in range(n_d):
            run_point(k)

    amp = s1_arr[:, out_idx, in_idx]
    t_abs2 = np.abs(amp) ** 2
    metadata = {
        "ports": (sigma_in, sigma_out),
        "flux": flux,
        "mode": model.channelset.mode,
        "defective_sectors": model.defective_sectors,
        "method": method,
    }
    return CorrelationSweep(
        delta=deltas, tau=taus, s1=s1_arr, t_abs2=t_abs2,
        g1=flux * t_abs2, g2=g2_arr,
        flags=tuple(tuple(f) for f in flags), markov=markov, metadata=metadata)
