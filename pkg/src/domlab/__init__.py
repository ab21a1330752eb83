"""Exact tools for dominance-solvable implementation with stochastic mechanisms.

Lotteries, preferences and mechanisms are exact rationals throughout; see
:mod:`domlab.verify` for the decision procedures and :mod:`domlab.search`
for the exhaustive miner.
"""

from .core import (
    CardinalState,
    DeletionTrace,
    ImplementationProblem,
    Lottery,
    Mechanism,
    OmegaMode,
    OrdinalState,
    Preference,
    Restriction,
    SCF,
    Status,
    Verdict,
    Witness,
    make_lottery,
    mix,
)
from .domains import DomainKind, DomainTag, build_problem, canonical_cardinal, sample_cardinal
from .dominance import (
    possibly_undominated,
    robust_udinf,
    robustly_dominates,
    ud1_at,
    udinf_at,
    udk_at,
)
from .errors import DomlabError, ParseError, SizeLimit, Timeout, ValidationError
from .verify import VerificationReport, verify_ud, verify_udinf

__version__ = "0.1.0"

__all__ = [
    "CardinalState", "DeletionTrace", "DomainKind", "DomainTag", "DomlabError",
    "ImplementationProblem", "Lottery", "Mechanism", "OmegaMode", "OrdinalState",
    "ParseError", "Preference", "Restriction", "SCF", "SizeLimit", "Status", "Timeout",
    "ValidationError", "Verdict", "VerificationReport", "Witness", "build_problem",
    "canonical_cardinal", "make_lottery", "mix", "possibly_undominated", "robust_udinf",
    "robustly_dominates", "sample_cardinal", "ud1_at", "udinf_at", "udk_at", "verify_ud",
    "verify_udinf",
]
