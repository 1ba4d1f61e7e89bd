"""Bose-Hubbard graphs and preset geometries.

A graph is a set of bosonic sites, each with an on-site energy ``epsilon``
and an on-site photon-photon interaction ``U``, connected by complex hopping
amplitudes.  All energies are expressed in units of a reference coupling
rate (no unit handling happens inside the library).

The scatterer Hamiltonian encoded by a graph is

    H = sum_i eps_i n_i + sum_links (t_ij b_i^dag b_j + h.c.)
        + sum_i (U_i / 2) n_i (n_i - 1)

where a ``Link(i, j, t)`` contributes ``t b_i^dag b_j + conj(t) b_j^dag b_i``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DuplicateLink, IndexOutOfRange, InvalidSize, NonFiniteParameter

__all__ = [
    "Site",
    "Link",
    "Graph",
    "make_graph",
    "preset_kerr",
    "preset_chain",
    "preset_ring",
    "preset_square_flux",
]


@dataclass(frozen=True)
class Site:
    """A single bosonic site: excitation energy and on-site interaction."""

    epsilon: float
    U: float


@dataclass(frozen=True)
class Link:
    """Directed hopping amplitude t on b_i^dag b_j (h.c. added at assembly)."""

    i: int
    j: int
    t: complex


@dataclass(frozen=True)
class Graph:
    """Immutable Bose-Hubbard graph."""

    sites: tuple[Site, ...]
    links: tuple[Link, ...]

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def mean_epsilon(self) -> float:
        """Arithmetic mean of the site energies (detuning reference)."""
        return sum(s.epsilon for s in self.sites) / len(self.sites)


def _check_finite(value, what):
    v = complex(value)
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise NonFiniteParameter(f"{what} must be finite, got {value!r}")


def make_graph(sites, links=()) -> Graph:
    """Build a validated graph.

    Parameters
    ----------
    sites : iterable of (epsilon, U) pairs (or Site objects)
    links : iterable of (i, j, t) triples (or Link objects)

    Raises
    ------
    IndexOutOfRange, DuplicateLink, NonFiniteParameter
    """
    site_objs = []
    for s in sites:
        site = s if isinstance(s, Site) else Site(float(s[0]), float(s[1]))
        _check_finite(site.epsilon, "site epsilon")
        _check_finite(site.U, "site U")
        site_objs.append(site)
    if not site_objs:
        raise InvalidSize("a graph needs at least one site")

    n = len(site_objs)
    link_objs = []
    seen_pairs = set()
    for ln in links:
        link = ln if isinstance(ln, Link) else Link(int(ln[0]), int(ln[1]), complex(ln[2]))
        if not (0 <= link.i < n and 0 <= link.j < n):
            raise IndexOutOfRange(
                f"link ({link.i}, {link.j}) references a site outside [0, {n})")
        if link.i == link.j:
            raise IndexOutOfRange(f"link ({link.i}, {link.j}) connects a site to itself")
        _check_finite(link.t, f"hopping t on link ({link.i}, {link.j})")
        pair = (min(link.i, link.j), max(link.i, link.j))
        if pair in seen_pairs:
            raise DuplicateLink(f"more than one link given for site pair {pair}")
        seen_pairs.add(pair)
        link_objs.append(link)

    return Graph(sites=tuple(site_objs), links=tuple(link_objs))


def preset_kerr(epsilon: float, U: float) -> Graph:
    """A single nonlinear site (the Kerr element)."""
    return make_graph([(epsilon, U)])


def preset_chain(n_sites: int, epsilon: float, U: float, t: complex) -> Graph:
    """Uniform open chain with n_sites sites and nearest-neighbour hopping t."""
    if n_sites < 1:
        raise InvalidSize(f"chain needs n_sites >= 1, got {n_sites}")
    sites = [(epsilon, U)] * n_sites
    links = [(i, i + 1, t) for i in range(n_sites - 1)]
    return make_graph(sites, links)


def preset_ring(n_sites: int, epsilon: float, U: float, t: complex) -> Graph:
    """Uniform ring (cycle graph).  Needs n_sites >= 3 to avoid a doubled link."""
    if n_sites < 3:
        raise InvalidSize(f"ring needs n_sites >= 3, got {n_sites}")
    sites = [(epsilon, U)] * n_sites
    links = [(i, (i + 1) % n_sites, t) for i in range(n_sites)]
    return make_graph(sites, links)


def preset_square_flux(width: int, height: int, epsilon: float, U: float,
                       t: float, phi: float) -> Graph:
    """Rectangular lattice threaded by an artificial flux via row-dependent phases.

    Sites are numbered row-major: site(row k, column c) = k * width + c with
    k = 0 .. height-1.  Hopping along row k in the +column direction carries
    the amplitude t * exp(i k phi); hops between rows carry the plain t.
    The accumulated phase around any elementary plaquette then has magnitude
    phi (traversing column-increasing on the lower row first gives
    exp(-i phi); the opposite orientation gives the conjugate).
    """
    if width < 1 or height < 1:
        raise InvalidSize(f"plane needs width, height >= 1, got {width}x{height}")
    sites = [(epsilon, U)] * (width * height)
    links = []
    for k in range(height):
        for c in range(width):
            here = k * width + c
            if c + 1 < width:
                links.append((here + 1, here, t * cmath.exp(1j * k * phi)))
            if k + 1 < height:
                links.append((here + width, here, complex(t)))
    return make_graph(sites, links)
