"""Existentially restricted quantified constraint satisfaction toolkit."""

from .advanced import (
    MaltsevFingerprint,
    MaltsevScheme,
    NUFingerprint,
    NUScheme,
    compact_representation,
    maltsev_closure,
    signature_of,
)
from .errors import (
    ContractViolation,
    FormulaError,
    ParseError,
    QecspError,
    ReductionError,
    SchemeError,
)
from .fingerprints import (
    ConstantFingerprint,
    ConstantScheme,
    FingerprintScheme,
    PowersetFingerprint,
    PowersetScheme,
    scheme_for_language,
    scheme_from_id,
)
from .formats import formula_digest, parse_instance, serialize_instance
from .model import (
    EXISTS,
    FORALL,
    ConstraintLanguage,
    ExtendedConstraint,
    QuantifiedFormula,
    Relation,
    RelationalStructure,
    check_winning_strategy,
    eval_extended_constraint,
    instantiate_universals,
    prefix_vars,
)
from .oracle import brute_force_truth, find_winning_strategy
from .polymorphisms import (
    CoherenceReport,
    Operation,
    SetFunction,
    classify_set_function,
    is_polymorphism,
    is_set_function_polymorphism,
    power_structure,
    recognize_operation_class,
    semilattice_to_set_function,
)
from .proofs import Proof, Verdict, derive_minimal, encode_proof, parse_proof, solve, verify_proof

__version__ = "0.1.0"

__all__ = [
    "CoherenceReport",
    "ConstantFingerprint",
    "ConstantScheme",
    "ConstraintLanguage",
    "ContractViolation",
    "EXISTS",
    "ExtendedConstraint",
    "FORALL",
    "FingerprintScheme",
    "FormulaError",
    "MaltsevFingerprint",
    "MaltsevScheme",
    "NUFingerprint",
    "NUScheme",
    "Operation",
    "ParseError",
    "PowersetFingerprint",
    "PowersetScheme",
    "Proof",
    "QecspError",
    "QuantifiedFormula",
    "ReductionError",
    "Relation",
    "RelationalStructure",
    "SchemeError",
    "SetFunction",
    "Verdict",
    "brute_force_truth",
    "check_winning_strategy",
    "classify_set_function",
    "compact_representation",
    "derive_minimal",
    "encode_proof",
    "eval_extended_constraint",
    "find_winning_strategy",
    "formula_digest",
    "instantiate_universals",
    "is_polymorphism",
    "is_set_function_polymorphism",
    "maltsev_closure",
    "parse_instance",
    "parse_proof",
    "power_structure",
    "prefix_vars",
    "recognize_operation_class",
    "scheme_for_language",
    "scheme_from_id",
    "semilattice_to_set_function",
    "serialize_instance",
    "signature_of",
    "solve",
    "verify_proof",
]
