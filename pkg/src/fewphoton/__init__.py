"""Few-photon scattering on Bose-Hubbard graphs coupled to chiral channels.

Build a graph (`lattice`), attach channels (`coupling`), finalize a
scattering model and evaluate transmission and photon correlations
(`scattering`):

    >>> import fewphoton as fp
    >>> g = fp.preset_kerr(epsilon=0.0, U=10.0)
    >>> cs = fp.make_channelset([("in", [(0, 1.0)]), ("out", [(0, 1.0)])])
    >>> model = fp.finalize(g, cs)
    >>> fp.g2_cross(model, delta=0.0)  # doctest: +ELLIPSIS
    0.137...
"""

from .errors import (
    DefectiveMatrix,
    DuplicateLink,
    FewPhotonError,
    IndexOutOfRange,
    InvalidSize,
    MissingPositions,
    ModeMismatch,
    NegativeDelay,
    NonFiniteParameter,
    OffShell,
    PoleHit,
    ScenarioParseError,
    ScenarioSchemaError,
    SectorMismatch,
    Singular,
    TransmissionNode,
    UnknownChannel,
    UnsupportedPhotonNumber,
)
from .lattice import (
    Graph,
    Link,
    Site,
    make_graph,
    preset_chain,
    preset_kerr,
    preset_ring,
    preset_square_flux,
)
from .fock import (
    SectorBasis,
    SectorMatrix,
    annihilation_block,
    creation_block,
    hamiltonian_sector,
    number_operator_sector,
    sector_basis,
)
from .coupling import (
    Channel,
    ChannelSet,
    CouplingPoint,
    MarkovReport,
    collective_operator,
    effective_hamiltonian,
    make_channelset,
    markov_check,
    self_energy,
)
from .spectral import (
    Eigensystem,
    biorth_eig,
    direct_resolvent,
    greens_resolvent,
    propagator,
    propagator_expm,
)
from .scattering import (
    CorrelationSweep,
    ScatteringModel,
    a1,
    a2,
    finalize,
    g1,
    g2_cross,
    g2_general,
    s1_matrix,
    sweep,
    t2_principal,
)
from . import reference

__version__ = "0.1.0"
