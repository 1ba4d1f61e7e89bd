"""Exception types shared across the package.

Every error raised by the library derives from FewPhotonError, so callers
can catch a single base class at API boundaries (the CLI maps them to exit
codes).
"""


class FewPhotonError(Exception):
    """Base class for all errors raised by this package."""


# --- graph construction ---

class IndexOutOfRange(FewPhotonError):
    """A site index referenced by a link or coupling does not exist."""


class DuplicateLink(FewPhotonError):
    """Two links were given for the same unordered site pair."""


class NonFiniteParameter(FewPhotonError):
    """A site energy, interaction or hopping amplitude is NaN or infinite."""


class InvalidSize(FewPhotonError):
    """A preset was asked for a geometry size it cannot build."""


# --- Fock sectors ---

class UnsupportedPhotonNumber(FewPhotonError):
    """Photon sectors with M >= 3 are deliberately not supported."""


class SectorMismatch(FewPhotonError):
    """Operator assembly was given bases that do not belong together."""


# --- channels and self-energies ---

class MissingPositions(FewPhotonError):
    """Quasi-local position mode requires every coupling point to carry x."""


class ModeMismatch(FewPhotonError):
    """Coupling point data is inconsistent with the declared channel mode."""


class UnknownChannel(FewPhotonError):
    """A channel id was referenced that is not declared in the ChannelSet."""


# --- spectral decomposition ---

class DefectiveMatrix(FewPhotonError):
    """The eigenvector basis is too ill-conditioned for bi-orthonormalization.

    Callers must fall back to direct linear solves instead of the spectral
    representation.
    """


class PoleHit(FewPhotonError):
    """A resolvent was requested at (or numerically on top of) an eigenvalue."""


class NegativeDelay(FewPhotonError):
    """Propagators and correlation delays are defined for tau >= 0 only."""


class Singular(FewPhotonError):
    """A direct linear solve hit a numerically singular matrix."""


# --- observables ---

class TransmissionNode(FewPhotonError):
    """g2 is undefined at a zero of the single-photon transmission.

    Carries the raw (divergent) two-photon ratio so callers can still report
    it alongside the flag.
    """

    def __init__(self, message, raw_value=None):
        super().__init__(message)
        self.raw_value = raw_value


class OffShell(FewPhotonError):
    """Two-photon T-matrix frequencies must satisfy w1' + w2' = w1 + w2."""


# --- scenario files ---

class ScenarioParseError(FewPhotonError):
    """A scenario file is not valid JSON."""


class ScenarioSchemaError(FewPhotonError):
    """A scenario file parsed but violates the scenario schema."""
