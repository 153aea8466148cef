"""Exact second-quantized realization on finite occupation-number bases."""

from .basis import BasisSizeError, FockBasis, enumerate_basis
from .expr import Expr, Monomial, OperatorExpression, apply_monomial, pinned
from .assemble import SparseOperator, assemble, matrix_of_product
from .build import OperatorContext, build_named, NAMED_OPERATORS
from .verify import (
    IDENTITY_NAMES,
    IdentityConfig,
    IdentityReport,
    identity_config_desk,
    verify_identity,
)
from .krylov import (
    conjugated_dense,
    expectation_nplus,
    krylov_conjugate,
    lowest_conjugated,
    rotate_state,
)

__all__ = [
    "BasisSizeError",
    "FockBasis",
    "enumerate_basis",
    "Expr",
    "Monomial",
    "OperatorExpression",
    "apply_monomial",
    "pinned",
    "SparseOperator",
    "assemble",
    "matrix_of_product",
    "OperatorContext",
    "build_named",
    "NAMED_OPERATORS",
    "IdentityConfig",
    "IdentityReport",
    "verify_identity",
    "IDENTITY_NAMES",
    "identity_config_desk",
    "krylov_conjugate",
    "conjugated_dense",
    "lowest_conjugated",
    "rotate_state",
    "expectation_nplus",
]
