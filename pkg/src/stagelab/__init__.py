"""Stage-network simulator for delayed-choice and quantum-eraser optics.

Networks of detector stages evolve an unnormalized labstate through
semi-unitary transitions; outcome and coincidence rates come out of
generalized Kraus operators and POVM elements, with a brute-force
full-Hilbert-space oracle for independent verification and a small textual
language (.sn) for describing custom networks.
"""
from .errors import StagelabError
from .labstate import (
    BASES,
    DIAG,
    HV,
    LR,
    DetectorId,
    LabState,
    SignalConfig,
    SpinBasis,
    SpinVector,
    change_spin_basis,
)
from .network import (
    EffectiveOperator,
    Network,
    Stage,
    StageTransition,
    TransferMatrix,
    TransitionRule,
    apply,
    compose,
    fraunhofer_columns,
    orthonormalize,
    random_isometry,
    validate_semi_unitarity,
)
from .measurement import (
    KrausOperator,
    PovmElement,
    RateTable,
    completeness_defect,
    kraus,
    marginal,
    max_row_difference,
    povm,
    povm_elements,
    rates,
)
from .experiments import (
    DcqeConfig,
    DoubleSlitConfig,
    WalbornConfig,
    WalbornMode,
    WheelerConfig,
    build_dcqe,
    build_double_slit,
    build_preset,
    build_walborn,
    build_wheeler,
    wheeler_transfer,
)
from .whichpath import PathDisambiguation, WhichPathResult, which_path
from .oracle import FullStateVector, oracle_evolution, oracle_rates
from .dsl import NetworkDoc, elaborate, load, parse, serialize

__version__ = "0.1.0"

__all__ = [
    "BASES", "DIAG", "HV", "LR",
    "DetectorId", "LabState", "SignalConfig", "SpinBasis", "SpinVector",
    "change_spin_basis",
    "EffectiveOperator", "Network", "Stage", "StageTransition",
    "TransferMatrix", "TransitionRule", "apply", "compose",
    "fraunhofer_columns", "orthonormalize", "random_isometry",
    "validate_semi_unitarity",
    "KrausOperator", "PovmElement", "RateTable", "completeness_defect",
    "kraus", "marginal", "max_row_difference", "povm", "povm_elements", "rates",
    "DcqeConfig", "DoubleSlitConfig", "WalbornConfig", "WalbornMode",
    "WheelerConfig", "build_dcqe", "build_double_slit", "build_preset",
    "build_walborn", "build_wheeler", "wheeler_transfer",
    "PathDisambiguation", "WhichPathResult", "which_path",
    "FullStateVector", "oracle_evolution", "oracle_rates",
    "NetworkDoc", "elaborate", "load", "parse", "serialize",
    "StagelabError",
    "__version__",
]
