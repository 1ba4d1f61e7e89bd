"""Shared model corpus used across the test modules.

Each builder returns (graph, channelset) for one of the standard setups.
Coupling rates follow the figure normalization: every port coupling point
carries gamma = 1 unless stated otherwise.
"""

import math

import numpy as np
import pytest

from fewphoton import (
    make_channelset,
    make_graph,
    preset_chain,
    preset_kerr,
    preset_ring,
    preset_square_flux,
)


def kerr_model(U=10.0, epsilon=0.0, gamma=1.0):
    g = preset_kerr(epsilon, U)
    cs = make_channelset([("in", [(0, gamma)]), ("out", [(0, gamma)])])
    return g, cs


def dimer_parallel_model(U=3.0, t=1.5, epsilon=0.0, gamma=1.0):
    g = preset_chain(2, epsilon, U, t)
    cs = make_channelset([("in", [(0, gamma)]), ("out", [(1, gamma)])])
    return g, cs


def dimer_perpendicular_model(U=2.0, t=2.0, epsilon=0.0, gamma=1.0):
    g = preset_chain(2, epsilon, U, t)
    cs = make_channelset([("in", [(0, gamma)]), ("out", [(0, gamma)])])
    return g, cs


def dimer_quasilocal_channels(gamma=1.0, phi=math.pi / 10):
    """Side-coupled dimer; input channel meets site 0 first, output site 1."""
    return make_channelset(
        ports=[("in", [dict(site=0, gamma=gamma, phi=0.0, order=0),
                       dict(site=1, gamma=gamma, phi=phi, order=1)]),
               ("out", [dict(site=1, gamma=gamma, phi=0.0, order=0),
                        dict(site=0, gamma=gamma, phi=-phi, order=1)])],
        mode="quasilocal-phases")


def dimer_quasilocal_model(U=1.0, t=1.0, phi=math.pi / 10, gamma=1.0):
    g = preset_chain(2, 0.0, U, t)
    return g, dimer_quasilocal_channels(gamma=gamma, phi=phi)


def chain_model(n=10, U=4.0, t=1.0, gamma=1.0, decay_gamma=0.0):
    g = preset_chain(n, 0.0, U, t)
    decay = [(i, decay_gamma) for i in range(n)] if decay_gamma > 0 else ()
    cs = make_channelset([("in", [(0, gamma)]), ("out", [(n - 1, gamma)])],
                         decay=decay)
    return g, cs


def ring_model(n=6, U=1.0, t=1.0, gamma=1.0, sites=(0, 2)):
    g = preset_ring(n, 0.0, U, t)
    cs = make_channelset([("in", [(sites[0], gamma)]),
                          ("out", [(sites[1], gamma)])])
    return g, cs


def plane_model(width=3, height=3, U=1.0, t=1.0, gamma=1.0,
                phi=2 * math.pi / 5, decay_gamma=0.01):
    g = preset_square_flux(width, height, 0.0, U, t, phi)
    decay = ([(i, decay_gamma) for i in range(width * height)]
             if decay_gamma > 0 else ())
    cs = make_channelset(
        [("in", [(0, gamma)]), ("out", [(width * height - 1, gamma)])],
        decay=decay)
    return g, cs


def cascaded_pair_model(gamma=0.5, phi=0.7):
    """Two co-propagating channels passing two identical uncoupled sites.

    The effective Hamiltonian is an exact Jordan block, which exercises the
    defective-matrix fallback end to end.
    """
    g = make_graph([(0.0, 0.0), (0.0, 0.0)])
    cs = make_channelset(
        ports=[("in", [dict(site=0, gamma=gamma, phi=0.0, order=0),
                       dict(site=1, gamma=gamma, phi=phi, order=1)]),
               ("out", [dict(site=0, gamma=gamma, phi=0.0, order=0),
                        dict(site=1, gamma=gamma, phi=phi, order=1)])],
        mode="quasilocal-phases")
    return g, cs


# (name, graph, channelset, lossless) -- the standard corpus
def standard_corpus():
    return [
        ("kerr", *kerr_model(), True),
        ("kerr-linear", *kerr_model(U=0.0), True),
        ("dimer-parallel", *dimer_parallel_model(), True),
        ("dimer-perpendicular", *dimer_perpendicular_model(), True),
        ("dimer-quasilocal", *dimer_quasilocal_model(), True),
        ("chain6", *chain_model(n=6, U=2.0), True),
        ("chain6-decay", *chain_model(n=6, U=2.0, t=10.0, decay_gamma=0.25), False),
        ("ring6", *ring_model(), True),
        ("plane3x3", *plane_model(), False),
    ]


@pytest.fixture(scope="session")
def corpus_models():
    import fewphoton

    out = {}
    for name, g, cs, lossless in standard_corpus():
        out[name] = (fewphoton.finalize(g, cs), lossless)
    return out


def assert_allclose(a, b, tol, msg=""):
    a = np.asarray(a)
    b = np.asarray(b)
    dev = np.max(np.abs(a - b))
    assert dev <= tol, f"{msg} max deviation {dev:.3e} > {tol:.1e}"
