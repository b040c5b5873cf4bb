"""Exception taxonomy for stagelab.

Everything raised on purpose derives from :class:`StagelabError`, so callers
(notably the CLI) can distinguish "the network/input is bad" from a genuine
bug in this package.
"""
from __future__ import annotations


class StagelabError(Exception):
    """Base class for all stagelab errors."""


class StageMismatch(StagelabError):
    """Two labstates that must live at the same stage do not."""


class SlotMismatch(StagelabError):
    """Photon-slot structure of two states disagrees."""


class UnknownBasis(StagelabError):
    """A spin basis or spin label that is not HV / LR / DIAG."""


class BadSlot(StagelabError):
    """Slot index outside the state's slot range."""


class DuplicateDetector(StagelabError):
    """A detector excited twice in one signal configuration."""


class InvalidConfig(StagelabError):
    """Experiment or network configuration violates its invariants."""


class UnmatchedTerm(StagelabError):
    """A labstate term has no transition rule covering it."""


class GapInChain(StagelabError):
    """Transitions do not chain contiguously from the source stage."""


class RankDeficient(StagelabError):
    """Transfer-matrix columns are not linearly independent."""


class UnknownDetector(StagelabError):
    """A detector label that the relevant stage does not declare."""


class UnknownSignature(StagelabError):
    """An outcome signature that the rate table does not enumerate."""


class TooLarge(StagelabError):
    """Full-space verification was asked for a network beyond desk scale."""


class UnknownParameter(StagelabError):
    """A sweep/override parameter the network does not define."""


class UnknownOverride(UnknownParameter):
    """An override for a parameter a document never declares."""


class ConstraintViolated(StagelabError):
    """A declared numeric constraint fails after substitution."""


class DslError(StagelabError):
    """Base class for network-description-language errors.

    Carries a 1-based source position so tools can point at the offender.
    """

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class DslSyntaxError(DslError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        detail = f"expected {expected}" + (f", found {found}" if found else "")
        super().__init__(detail, line, col)
        self.expected = expected
        self.found = found


class UndeclaredIdentifier(DslError):
    def __init__(self, line: int, col: int, name: str):
        super().__init__(f"undeclared identifier {name!r}", line, col)
        self.name = name


class DuplicateDeclaration(DslError):
    def __init__(self, line: int, col: int, name: str):
        super().__init__(f"duplicate declaration of {name!r}", line, col)
        self.name = name
