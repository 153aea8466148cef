"""Krylov realization of conjugated operators exp(-B) H exp(B).

The generators B are real antisymmetric, so exp(B) is orthogonal and the
conjugation preserves spectra exactly; the matrix exponential never needs
to be formed, only its action on vectors (scaling-and-squaring free
Taylor evaluation with rigorous error control, via scipy's
``expm_multiply``).
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, expm_multiply

from .assemble import SparseOperator


def _mat(op) -> sparse.csr_matrix:
    if isinstance(op, SparseOperator):
        return op.matrix
    return sparse.csr_matrix(op)


def rotate_state(B, vec: np.ndarray, sign: float = 1.0) -> np.ndarray:
    """exp(sign*B) applied to a vector."""
    Bm = _mat(B)
    if Bm.nnz == 0:
        return np.asarray(vec, dtype=float).copy()
    return expm_multiply(sign * Bm, np.asarray(vec, dtype=float))


def krylov_conjugate(H, B, tol: float = 1e-12) -> LinearOperator:
    """Matrix-free action v -> exp(-B) H exp(B) v.

    ``B`` must be antihermitian (checked when a SparseOperator is given);
    the two exponential-vector products are evaluated to near machine
    precision, so ``tol`` only documents the intended downstream accuracy.
    """
    if isinstance(B, SparseOperator):
        if B.symmetry != "antihermitian":
            raise ValueError("conjugation generator must be antihermitian")
        B.check_symmetry()
    Hm = _mat(H)
    Bm = _mat(B)
    n = Hm.shape[0]

    def mv(v):
        w = expm_multiply(Bm, np.asarray(v, dtype=float)) if Bm.nnz else np.asarray(v, dtype=float)
        u = Hm @ w
        return expm_multiply(-Bm, u) if Bm.nnz else u

    return LinearOperator((n, n), matvec=mv, dtype=float)


def conjugated_dense(H, B) -> np.ndarray:
    """Dense matrix of exp(-B) H exp(B), for small dimensions."""
    act = krylov_conjugate(H, B)
    n = act.shape[0]
    out = np.empty((n, n))
    eye = np.eye(n)
    for j in range(n):
        out[:, j] = act @ eye[:, j]
    return out


def lowest_conjugated(
    H, B, m: int, tol: float = 1e-9, dense_cutoff: int = 2000, seed: int = 7
) -> np.ndarray:
    """Lowest m eigenvalues of exp(-B) H exp(B) via the Krylov action."""
    n = _mat(H).shape[0]
    if n <= dense_cutoff:
        dense = conjugated_dense(H, B)
        dense = 0.5 * (dense + dense.T)
        return np.linalg.eigvalsh(dense)[:m]
    from scipy.sparse.linalg import eigsh

    act = krylov_conjugate(H, B)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    vals = eigsh(act, k=m, which="SA", v0=v0, tol=tol,
                 ncv=max(60, 3 * m), return_eigenvectors=False)
    return np.sort(vals)


def expectation_nplus(vec: np.ndarray, basis) -> float:
    """<N_+> of a normalized state vector on an occupation basis."""
    w = np.abs(np.asarray(vec, dtype=float)) ** 2
    return float(np.sum(w * basis.nplus()))
