import math

import numpy as np
import pytest

from fewphoton import (
    SectorMismatch,
    UnsupportedPhotonNumber,
    annihilation_block,
    creation_block,
    hamiltonian_sector,
    make_graph,
    number_operator_sector,
    preset_chain,
    preset_kerr,
    sector_basis,
)
from fewphoton.fock import transition_block
from fewphoton import reference


def test_sector_dimensions():
    assert sector_basis(10, 2).dim == 55
    assert sector_basis(64, 2).dim == 2080
    assert sector_basis(5, 0).dim == 1
    assert sector_basis(5, 1).dim == 5


def test_vacuum_sector():
    b = sector_basis(4, 0)
    assert b.occupations == ((0, 0, 0, 0),)


def test_rejects_three_photons():
    with pytest.raises(UnsupportedPhotonNumber):
        sector_basis(4, 3)


def test_ordering_descending_and_deterministic():
    b = sector_basis(3, 2)
    occs = b.occupations
    assert occs == ((2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2))
    for i in range(len(occs) - 1):
        assert occs[i] > occs[i + 1]
    again = sector_basis(3, 2)
    assert again.occupations == occs
    assert all(b.index[occ] == k for k, occ in enumerate(occs))


def test_single_photon_state_is_site_index():
    b = sector_basis(4, 1)
    for j in range(4):
        assert b.occupations[j][j] == 1


def test_annihilation_sqrt2():
    b2 = sector_basis(1, 2)
    b1 = sector_basis(1, 1)
    b0 = sector_basis(1, 0)
    a21 = annihilation_block(0, b2, b1).entries
    a10 = annihilation_block(0, b1, b0).entries
    assert abs(a21[0, 0] - math.sqrt(2)) < 1e-15
    # b applied twice to |2> gives sqrt(2) * 1 * |0>
    assert abs((a10 @ a21)[0, 0] - math.sqrt(2)) < 1e-15


def test_two_site_pair_normalization():
    # <0| b_j b_k b_k^dag b_j^dag |0> = 1 for j != k
    b0, b1, b2 = (sector_basis(2, m) for m in range(3))
    cj = creation_block(0, b1, b0).entries
    ck = creation_block(1, b2, b1).entries
    state = ck @ cj @ np.array([1.0])
    assert abs(np.vdot(state, state) - 1.0) < 1e-15


def test_sector_mismatch_checks():
    with pytest.raises(SectorMismatch):
        annihilation_block(0, sector_basis(2, 2), sector_basis(3, 1))
    with pytest.raises(SectorMismatch):
        annihilation_block(0, sector_basis(2, 2), sector_basis(2, 0))
    with pytest.raises(SectorMismatch):
        hamiltonian_sector(preset_kerr(0, 0), sector_basis(2, 1))


def test_kerr_two_photon_energy():
    g = preset_kerr(0.7, 3.0)
    h2 = hamiltonian_sector(g, sector_basis(1, 2)).entries
    assert h2.shape == (1, 1)
    assert abs(h2[0, 0] - (2 * 0.7 + 3.0)) < 1e-14
    h0 = hamiltonian_sector(g, sector_basis(1, 0)).entries
    assert h0.shape == (1, 1) and h0[0, 0] == 0.0


def test_dimer_single_photon_spectrum():
    eps, t = 0.3, 1.7
    g = preset_chain(2, eps, 5.0, t)
    h1 = hamiltonian_sector(g, sector_basis(2, 1)).entries
    ev = np.sort(np.linalg.eigvalsh(h1))
    assert np.allclose(ev, [eps - t, eps + t], atol=1e-13)


def test_dimer_two_photon_spectrum_alpha():
    eps, U, t = 0.0, 4.0, 1.3
    g = preset_chain(2, eps, U, t)
    h2 = hamiltonian_sector(g, sector_basis(2, 2)).entries
    ev = np.sort(np.linalg.eigvalsh(h2))
    ref_e = reference.dimer_two_photon_energies(eps, U, t)
    want = np.sort([ref_e["E0"], ref_e["E+"], ref_e["E-"]])
    assert np.max(np.abs(ev - want)) < 1e-12


def test_chain_cosine_spectrum():
    for n in (1, 2, 5, 10):
        g = preset_chain(n, 0.4, 2.0, 0.9)
        h1 = hamiltonian_sector(g, sector_basis(n, 1)).entries
        ev = np.sort(np.linalg.eigvalsh(h1))
        want = np.sort(reference.chain_spectrum_closed(n, 0.4, 0.9))
        assert np.max(np.abs(ev - want)) < 1e-12


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
def test_doublon_splinter_exact_eigenstate(n):
    eps, U, t = 0.2, 3.7, 1.1
    g = preset_chain(n, eps, U, t)
    h2 = hamiltonian_sector(g, sector_basis(n, 2)).entries
    phi0 = reference.doublon_splinter(n)
    assert abs(np.vdot(phi0, phi0) - 1.0) < 1e-14
    residual = np.linalg.norm(h2 @ phi0 - (2 * eps + U) * phi0)
    assert residual <= 1e-12


def test_splinter_dimer_form():
    phi0 = reference.doublon_splinter(2)
    b2 = sector_basis(2, 2)
    want = np.zeros(3, dtype=complex)
    want[b2.index[(2, 0)]] = 1 / math.sqrt(2)
    want[b2.index[(0, 2)]] = -1 / math.sqrt(2)
    assert np.allclose(phi0, want, atol=1e-15)


def test_number_operator():
    g = make_graph([(0.1, 1.0), (0.2, 2.0), (0.3, 0.5)],
                   [(0, 1, 0.5 + 0.2j), (1, 2, 0.3)])
    for m in (0, 1, 2):
        b = sector_basis(3, m)
        nm = number_operator_sector(b).entries
        assert np.array_equal(nm, m * np.eye(b.dim))
        h = hamiltonian_sector(g, b).entries
        assert np.max(np.abs(h @ nm - nm @ h)) == 0.0


def test_commutator_loop_vacuum_to_one():
    # [b_j, b_j^dag] acting through the 0 -> 1 -> 0 loop is the identity
    b0, b1 = sector_basis(3, 0), sector_basis(3, 1)
    for j in range(3):
        a = annihilation_block(j, b1, b0).entries
        c = creation_block(j, b1, b0).entries
        assert np.allclose(a @ c, np.eye(1))


def test_transition_block_against_blocks():
    b1, b0 = sector_basis(3, 1), sector_basis(3, 0)
    b2 = sector_basis(3, 2)
    for i in range(3):
        for j in range(3):
            direct = transition_block(i, j, b2)
            via = (creation_block(i, b2, b1).entries
                   @ annihilation_block(j, b2, b1).entries)
            assert np.allclose(direct, via, atol=1e-14)
