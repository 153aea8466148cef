"""Sparse assembly of operator expressions on occupation bases."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from .basis import FockBasis
from .expr import ZERO, Monomial, OperatorExpression, monomial_terms

SYMMETRY_TOL = 1e-12


@dataclass
class SparseOperator:
    """Assembled operator: CSR matrix, symmetry flag, truncation counter.

    ``dropped`` counts contributions whose created mode fell outside the
    basis mode list; on a fixed basis this equals projecting the operator,
    but identity checks on conjugation generators require it to be zero.
    """

    name: str
    basis: FockBasis
    matrix: sparse.csr_matrix
    symmetry: str = "none"  # hermitian | antihermitian | none
    dropped: int = 0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def symmetry_defect(self) -> float:
        d = self.matrix - self.matrix.T
        if self.symmetry == "antihermitian":
            d = self.matrix + self.matrix.T
        return float(np.max(np.abs(d.data), initial=0.0))

    def check_symmetry(self) -> None:
        if self.symmetry in ("hermitian", "antihermitian"):
            defect = self.symmetry_defect()
            if defect > SYMMETRY_TOL:
                raise AssertionError(
                    f"{self.name}: claimed {self.symmetry} but defect {defect:.3e}"
                )


def _base_supports(basis: FockBasis, extra: dict) -> dict:
    sup = {
        "modes_nonzero": tuple(m for m in basis.modes if m != ZERO),
        "modes_all": tuple(basis.modes),
    }
    sup.update(extra)
    return sup


def _assemble_monomials(
    monomials: Sequence[Monomial], basis: FockBasis, supports: dict
) -> tuple[sparse.csr_matrix, int]:
    D = basis.dim
    mode_pos = {m: i for i, m in enumerate(basis.modes)}
    pos0 = basis.zero_mode_pos
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    dropped = 0
    for col in range(D):
        occ = basis.states[col]
        n0 = int(occ[pos0]) if pos0 is not None else 0
        occupied = np.nonzero(occ)[0].tolist()
        acc: dict[int, float] = {}
        for mono in monomials:
            terms, dr = monomial_terms(
                mono, occ, basis.modes, mode_pos, basis.N, n0, supports, occupied
            )
            dropped += dr
            for new_occ, amp in terms:
                target = basis.index.get(new_occ.tobytes())
                if target is None:
                    # conserving expressions stay inside the sector; a miss
                    # can only be an out-of-sector contribution on a
                    # sector-free basis mix, which enumerate_basis excludes
                    raise AssertionError(
                        "assembled state missing from basis; expression does "
                        "not preserve the basis constraints"
                    )
                acc[target] = acc.get(target, 0.0) + amp
        for target in sorted(acc):
            v = acc[target]
            if v != 0.0:
                rows.append(target)
                cols.append(col)
                vals.append(v)
    mat = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(D, D), dtype=float
    )
    mat.sum_duplicates()
    return mat, dropped


def assemble(expr: OperatorExpression, basis: FockBasis) -> SparseOperator:
    """Assemble an expression (plus its h.c. completion) on a basis.

    The expression must conserve particle number; on a momentum-sector
    basis it must conserve momentum as well.  Entry order is deterministic
    (canonical CSR).
    """
    if expr.particle_change != 0:
        raise ValueError(
            f"{expr.name}: changes particle number; use matrix_of_product "
            "for strings of non-conserving factors"
        )
    if basis.sector is not None and not expr.conserves_momentum:
        raise ValueError(
            f"{expr.name}: not momentum conserving; assemble on a sector-free basis"
        )
    supports = _base_supports(basis, expr.supports)
    base, dropped = _assemble_monomials(expr.monomials, basis, supports)
    if expr.hermitian_completion == 1:
        mat = base + base.T.tocsr()
    elif expr.hermitian_completion == -1:
        mat = base - base.T.tocsr()
    else:
        mat = base
    mat.sum_duplicates()
    op = SparseOperator(
        name=expr.name,
        basis=basis,
        matrix=mat.tocsr(),
        symmetry=expr.expected_symmetry,
        dropped=dropped,
    )
    op.check_symmetry()
    return op


def _apply_expression_to_vector(
    expr: OperatorExpression,
    vec: dict[bytes, float],
    basis: FockBasis,
    supports: dict,
) -> tuple[dict[bytes, float], int]:
    """One full expression (with completion) applied to a state dictionary.

    Intermediate occupation vectors may leave the particle-number sector;
    they stay keyed by raw occupation bytes over the basis mode list.
    """
    mode_pos = {m: i for i, m in enumerate(basis.modes)}
    pos0 = basis.zero_mode_pos
    M = len(basis.modes)
    out: dict[bytes, float] = {}
    dropped = 0

    monomials = list(expr.monomials)
    if expr.hermitian_completion != 0:
        sign = float(expr.hermitian_completion)
        monomials += [
            _hermitian_conjugate(m, sign) for m in expr.monomials
        ]
    for key, w in vec.items():
        occ = np.frombuffer(key, dtype=np.int16).copy()
        assert occ.size == M
        n0 = int(occ[pos0]) if pos0 is not None else 0
        occupied = np.nonzero(occ)[0].tolist()
        Ntot = int(occ.sum())
        for mono in monomials:
            terms, dr = monomial_terms(
                mono, occ, basis.modes, mode_pos, Ntot, n0, supports, occupied
            )
            dropped += dr
            for new_occ, amp in terms:
                k = new_occ.tobytes()
                out[k] = out.get(k, 0.0) + w * amp
    return out, dropped


def _hermitian_conjugate(mono: Monomial, sign: float) -> Monomial:
    """h.c. of a monomial; valid when its diagonal factor commutes through.

    The diagonal factors used here depend only on the condensate count and
    the total particle number.  Creation/annihilation lists swap and
    reverse; the diagonal factor must be re-based onto the incoming state
    of the conjugate, which the builders account for by only attaching
    diagonal factors to monomials whose own h.c. is taken explicitly.
    """
    if mono.diag is not None:
        raise ValueError("cannot auto-conjugate a monomial with a diagonal factor")
    coeff = mono.coeff
    if callable(coeff):
        new_coeff = (lambda c: (lambda fs: sign * c(fs)))(coeff)
    else:
        new_coeff = sign * coeff
    return Monomial(
        create=tuple(reversed(mono.annihilate)),
        annihilate=tuple(reversed(mono.create)),
        coeff=new_coeff,
        nfree=mono.nfree,
        plan=_conjugate_plan(mono),
        constraint=mono.constraint,
        diag=None,
        allow_zero_modes=mono.allow_zero_modes,
    )


def _conjugate_plan(mono: Monomial) -> tuple[tuple, ...]:
    """Swap ann/cre roles in the plan, keeping index arithmetic intact."""
    k = len(mono.create)
    m = len(mono.annihilate)
    steps = []
    for step in mono.plan:
        if step[0] == "ann":
            # annihilator i becomes creator at reversed position
            steps.append(("cre", m - 1 - step[1], "modes_all"))
        elif step[0] == "cre":
            steps.append(("ann", k - 1 - step[1]))
        else:
            steps.append(step)
    return tuple(steps)


def matrix_of_product(
    exprs: Sequence[OperatorExpression],
    basis: FockBasis,
    supports_extra: Optional[dict] = None,
) -> tuple[sparse.csr_matrix, int]:
    """Matrix of a product of expressions, applied right to left.

    Intermediates may leave the particle-number/momentum sector (they are
    tracked as raw occupation vectors); only the final states are matched
    against the basis.  Returns (matrix, dropped_creations).
    """
    supports: dict = {}
    for e in exprs:
        supports.update(e.supports)
    if supports_extra:
        supports.update(supports_extra)
    supports = _base_supports(basis, supports)

    D = basis.dim
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    dropped = 0
    for col in range(D):
        vec = {basis.states[col].tobytes(): 1.0}
        for expr in reversed(exprs):
            vec, dr = _apply_expression_to_vector(expr, vec, basis, supports)
            dropped += dr
            if not vec:
                break
        for key, w in sorted(vec.items()):
            if w == 0.0:
                continue
            target = basis.index.get(key)
            if target is not None:
                rows.append(target)
                cols.append(col)
                vals.append(w)
    mat = sparse.csr_matrix((vals, (rows, cols)), shape=(D, D), dtype=float)
    mat.sum_duplicates()
    return mat, dropped
