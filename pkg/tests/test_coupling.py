import math

import numpy as np
import pytest

from fewphoton import (
    MissingPositions,
    ModeMismatch,
    UnknownChannel,
    collective_operator,
    effective_hamiltonian,
    make_channelset,
    markov_check,
    number_operator_sector,
    preset_chain,
    preset_kerr,
    self_energy,
    sector_basis,
)
from fewphoton.coupling import CouplingPoint, ChannelSet, Channel
from fewphoton.fock import transition_block

from conftest import dimer_quasilocal_channels, standard_corpus


def test_local_two_ports_single_site():
    cs = make_channelset([("in", [(0, 1.0)]), ("out", [(0, 1.0)])])
    s1 = self_energy(cs, sector_basis(1, 1)).entries
    assert abs(s1[0, 0] - (-2j)) < 1e-15
    s2 = self_energy(cs, sector_basis(1, 2)).entries
    assert abs(s2[0, 0] - (-4j)) < 1e-15


def test_sigma_vacuum_zero():
    cs = make_channelset([("in", [(0, 1.0)]), ("out", [(0, 1.0)])])
    s0 = self_energy(cs, sector_basis(1, 0)).entries
    assert np.array_equal(s0, np.zeros((1, 1)))


def test_local_mode_requires_single_point():
    with pytest.raises(ModeMismatch):
        make_channelset([("in", [(0, 1.0), (1, 1.0)])], mode="local")


def test_positions_mode_requires_x():
    with pytest.raises(MissingPositions):
        make_channelset([("in", [dict(site=0, gamma=1.0),
                                 dict(site=1, gamma=1.0)])],
                        mode="quasilocal-positions")


def test_phases_mode_rejects_positions():
    with pytest.raises(ModeMismatch):
        make_channelset([("in", [dict(site=0, gamma=1.0, phi=0.0, x=1.0),
                                 dict(site=1, gamma=1.0, phi=0.2)])],
                        mode="quasilocal-phases")


def test_unknown_channel():
    cs = make_channelset([("in", [(0, 1.0)])])
    with pytest.raises(UnknownChannel):
        collective_operator(cs, "nope", sector_basis(1, 1), sector_basis(1, 0))
    with pytest.raises(UnknownChannel):
        ChannelSet(channels=(Channel("a"),),
                   points=(CouplingPoint(channel="b", site=0, gamma=1.0),))


def test_quasilocal_equal_positions_reduces_to_local():
    # all coupling points of each channel at the same x: Theta(0) = 1/2
    # halves the doubled prefactor and the local formula is recovered
    cs_q = make_channelset(
        [("in", [dict(site=0, gamma=0.8, x=1.3)]),
         ("out", [dict(site=1, gamma=0.5, x=-0.2)])],
        mode="quasilocal-positions", omega_ref=2.0)
    cs_l = make_channelset([("in", [(0, 0.8)]), ("out", [(1, 0.5)])])
    for m in (1, 2):
        b = sector_basis(2, m)
        sq = self_energy(cs_q, b).entries
        sl = self_energy(cs_l, b).entries
        assert np.max(np.abs(sq - sl)) < 1e-14


def test_quasilocal_multipoint_equal_positions():
    # two points on one channel at equal x: Sigma = -i pi sum_nm c_n conj(c_m)
    gamma = 0.6
    cs = make_channelset(
        [("in", [dict(site=0, gamma=gamma, x=0.5),
                 dict(site=1, gamma=gamma, x=0.5)])],
        mode="quasilocal-positions", omega_ref=1.7)
    b = sector_basis(2, 1)
    got = self_energy(cs, b).entries
    want = np.zeros((2, 2), dtype=complex)
    for a in (0, 1):
        for c in (0, 1):
            want += -1j * gamma * transition_block(a, c, b)
    assert np.max(np.abs(got - want)) < 1e-14


def test_quasilocal_dimer_sigma_matrix():
    # Sigma^(M) = -2i Gamma (M + b2^dag b1 e^{i phi} + b1^dag b2 e^{-i phi})
    gamma = 1.0
    for phi in (0.0, 0.3, math.pi / 10):
        cs = dimer_quasilocal_channels(gamma=gamma, phi=phi)
        for m in (1, 2):
            b = sector_basis(2, m)
            got = self_energy(cs, b).entries
            want = (-2j * gamma * m * np.eye(b.dim)
                    - 2j * gamma * np.exp(1j * phi) * transition_block(1, 0, b)
                    - 2j * gamma * np.exp(-1j * phi) * transition_block(0, 1, b))
            assert np.max(np.abs(got - want)) < 1e-14


def test_collective_operator_single_port():
    cs = make_channelset([("in", [(0, 0.9)])])
    b1, b0 = sector_basis(1, 1), sector_basis(1, 0)
    op = collective_operator(cs, "in", b1, b0).entries
    assert abs(op[0, 0] - math.sqrt(0.9 / math.pi)) < 1e-15


def test_collective_operator_quasilocal_phases():
    g = math.sqrt(0.5 / math.pi)
    cs = make_channelset(
        [("in", [dict(site=0, gamma=0.5, phi=0.4, order=0),
                 dict(site=1, gamma=0.5, phi=0.9, order=1)])],
        mode="quasilocal-phases")
    b1, b0 = sector_basis(2, 1), sector_basis(2, 0)
    op = collective_operator(cs, "in", b1, b0).entries
    # adjoint of sum_n g e^{i phi_n} b_n^dag
    want = np.array([[g * np.exp(-0.4j), g * np.exp(-0.9j)]])
    assert np.max(np.abs(op - want)) < 1e-15


def test_collective_operator_parallel_dimer_support():
    g_, cs = preset_chain(2, 0, 1, 1), make_channelset(
        [("in", [(0, 1.0)]), ("out", [(1, 1.0)])])
    b1, b0 = sector_basis(2, 1), sector_basis(2, 0)
    op = collective_operator(cs, "in", b1, b0).entries
    assert op[0, 1] == 0.0 and abs(op[0, 0]) > 0


def test_effective_hamiltonian_kerr():
    g = preset_kerr(0.5, 3.0)
    cs = make_channelset([("in", [(0, 1.0)]), ("out", [(0, 1.0)])])
    h1 = effective_hamiltonian(g, cs, 1).entries
    h2 = effective_hamiltonian(g, cs, 2).entries
    assert abs(h1[0, 0] - (0.5 - 2j)) < 1e-14
    assert abs(h2[0, 0] - (2 * 0.5 + 3.0 - 4j)) < 1e-14


def test_effective_hamiltonian_parallel_dimer_spectrum():
    eps, U, t, gamma = 0.0, 2.0, 1.4, 1.0
    g = preset_chain(2, eps, U, t)
    cs = make_channelset([("in", [(0, gamma)]), ("out", [(1, gamma)])])
    lam1 = np.linalg.eigvals(effective_hamiltonian(g, cs, 1).entries)
    want1 = np.array([eps - t - 1j * gamma, eps + t - 1j * gamma])
    assert np.max(np.abs(np.sort_complex(lam1) - np.sort_complex(want1))) < 1e-12
    lam2 = np.sort_complex(np.linalg.eigvals(effective_hamiltonian(g, cs, 2).entries))
    from fewphoton import reference
    e2 = reference.dimer_two_photon_energies(eps, U, t)
    want2 = np.sort_complex(np.array(
        [e2["E0"], e2["E+"], e2["E-"]]) - 2j * gamma)
    assert np.max(np.abs(lam2 - want2)) < 1e-12


def test_quasilocal_dimer_dark_state():
    eps, t, gamma = 0.0, 1.0, 1.0
    g = preset_chain(2, eps, 1.0, t)
    cs = dimer_quasilocal_channels(gamma=gamma, phi=0.0)
    lam = np.linalg.eigvals(effective_hamiltonian(g, cs, 1).entries)
    lam = lam[np.argsort(lam.real)]
    assert abs(lam[0] - (eps - t)) < 1e-12
    assert abs(lam[0].imag) < 1e-12          # dark antisymmetric state
    assert abs(lam[1] - (eps + t - 4j * gamma)) < 1e-12


def test_passivity_and_number_conservation_corpus():
    for name, g, cs, _ in standard_corpus():
        for m in (1, 2):
            b = sector_basis(g.n_sites, m)
            sig = self_energy(cs, b).entries
            anti = (sig - sig.conj().T) / 2j
            ev = np.linalg.eigvalsh(anti)
            assert ev.max() <= 1e-12, f"{name} M={m} not passive"
            nm = number_operator_sector(b).entries
            assert np.max(np.abs(sig @ nm - nm @ sig)) == 0.0


def test_eigenvalues_dissipative_corpus():
    for name, g, cs, _ in standard_corpus():
        for m in (1, 2):
            lam = np.linalg.eigvals(effective_hamiltonian(g, cs, m).entries)
            assert lam.imag.max() <= 1e-12, f"{name} M={m} has gain"


def test_markov_local_trivially_passes():
    cs = make_channelset([("in", [(0, 1.0)])])
    rep = markov_check(preset_kerr(0, 0), cs)
    assert rep.passed and rep.worst_d == 0.0


def test_markov_small_and_large_separation():
    gamma = 1.0
    # D_nm = pi |g_n g_m| |dx| = gamma |dx| for equal rates
    for dx, expect_pass in ((0.01, True), (10.0, False)):
        cs = make_channelset(
            [("in", [dict(site=0, gamma=gamma, x=0.0),
                     dict(site=1, gamma=gamma, x=dx)]),
             ("out", [dict(site=1, gamma=gamma, x=0.0)])],
            mode="quasilocal-positions", omega_ref=0.0)
        g = preset_chain(2, 0.0, 0.0, 0.1)
        rep = markov_check(g, cs)
        assert abs(rep.worst_d - gamma * dx) < 1e-12
        assert rep.passed == expect_pass


def test_markov_lambda_dx_component():
    # a strongly detuned scatterer violates the frozen-dynamics condition
    # even at small D
    g = preset_chain(2, 50.0, 0.0, 0.1)
    cs = make_channelset(
        [("in", [dict(site=0, gamma=0.01, x=0.0),
                 dict(site=1, gamma=0.01, x=0.05)])],
        mode="quasilocal-positions", omega_ref=0.0)
    rep = markov_check(g, cs)
    assert rep.worst_d < 0.1
    assert rep.worst_lambda_dx > 0.1
    assert not rep.passed


def test_gamma_must_be_nonnegative():
    with pytest.raises(ModeMismatch):
        make_channelset([("in", [(0, -1.0)])])
