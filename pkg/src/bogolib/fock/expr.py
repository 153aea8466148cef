"""Normal-ordered monomial expressions in creation/annihilation operators.

A monomial is a string  c(f) * a^dag_{e_1(f)} ... a^dag_{e_k(f)} a_{g_1(f)}
... a_{g_m(f)}  whose mode labels are integer-linear expressions in a tuple
of free momentum indices f, optionally multiplied by a diagonal factor
evaluated on the incoming state (a function of the condensate occupation
and total particle number, which covers every operator needed here).

Free indices are bound by an explicit enumeration plan: matching an
annihilator against the occupied modes of the state, matching a creator
against a named support set, or summing a free index over a support set.
Mode labels follow the convention that nonzero-mode operators carry
nonzero momenta; terms where a generic label evaluates to zero are
excluded unless the monomial explicitly allows zero modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

Triple = tuple[int, int, int]

ZERO: Triple = (0, 0, 0)


@dataclass(frozen=True)
class Expr:
    """Integer-linear mode label: sum_j coef[j] * f_j + const."""

    coef: tuple[int, ...]
    const: Triple = ZERO

    def is_const(self) -> bool:
        return all(c == 0 for c in self.coef)

    def evaluate(self, frees: Sequence[Optional[Triple]]) -> Triple:
        x, y, z = self.const
        for c, f in zip(self.coef, frees):
            if c:
                x += c * f[0]
                y += c * f[1]
                z += c * f[2]
        return (x, y, z)

    def unresolved(self, frees: Sequence[Optional[Triple]]) -> list[int]:
        return [j for j, c in enumerate(self.coef) if c != 0 and frees[j] is None]


def pinned(mode) -> Expr:
    """A constant mode label (no free indices)."""
    return Expr(coef=(), const=tuple(int(c) for c in mode))


@dataclass(frozen=True)
class Monomial:
    create: tuple[Expr, ...]
    annihilate: tuple[Expr, ...]
    coeff: Callable[[tuple[Triple, ...]], float] | float
    nfree: int = 0
    plan: tuple[tuple, ...] = ()
    constraint: Optional[Callable[[tuple[Triple, ...]], bool]] = None
    diag: Optional[Callable[[int, int], float]] = None  # (n0, N) of incoming state
    allow_zero_modes: bool = False

    def momentum_balance(self):
        """(coef rows, const) of sum(create) - sum(annihilate); zero iff conserving."""
        rows = [0] * self.nfree
        const = [0, 0, 0]
        for sgn, group in ((+1, self.create), (-1, self.annihilate)):
            for e in group:
                for j, c in enumerate(e.coef):
                    rows[j] += sgn * c
                for k in range(3):
                    const[k] += sgn * e.const[k]
        return rows, tuple(const)

    @property
    def conserves_momentum(self) -> bool:
        rows, const = self.momentum_balance()
        return all(r == 0 for r in rows) and const == ZERO

    @property
    def particle_change(self) -> int:
        return len(self.create) - len(self.annihilate)


@dataclass
class OperatorExpression:
    """A sum of normal-ordered monomials, optionally completed by +/- h.c.

    ``supports`` names the index sets the plans enumerate over; the special
    names ``modes_nonzero`` and ``modes_all`` are filled in from the basis
    at application time.
    """

    name: str
    monomials: list[Monomial]
    hermitian_completion: int = 0  # 0 none, +1 plus h.c., -1 minus h.c.
    supports: dict[str, tuple[Triple, ...]] = field(default_factory=dict)
    symmetry_hint: Optional[str] = None  # structural symmetry not visible above

    def __post_init__(self):
        if self.hermitian_completion not in (-1, 0, 1):
            raise ValueError("hermitian_completion must be -1, 0 or +1")

    @property
    def conserves_momentum(self) -> bool:
        return all(m.conserves_momentum for m in self.monomials)

    @property
    def particle_change(self) -> int:
        changes = {m.particle_change for m in self.monomials}
        if len(changes) != 1:
            raise ValueError(f"{self.name}: mixed particle-number changes {changes}")
        return changes.pop()

    @property
    def expected_symmetry(self) -> str:
        if self.symmetry_hint is not None:
            return self.symmetry_hint
        if self.hermitian_completion == 1:
            return "hermitian"
        if self.hermitian_completion == -1:
            return "antihermitian"
        return "none"


class PlanError(RuntimeError):
    """An enumeration plan cannot bind its free indices."""


def _resolve_single(e: Expr, frees) -> tuple[int, int, Triple]:
    """For an expr with one unbound +-1 free: (index, sign, bound remainder)."""
    open_ = e.unresolved(frees)
    if len(open_) != 1 or abs(e.coef[open_[0]]) != 1:
        raise PlanError(f"expression {e} not bindable at this plan step")
    j = open_[0]
    x, y, z = e.const
    for k, c in enumerate(e.coef):
        if c and k != j:
            f = frees[k]
            x += c * f[0]
            y += c * f[1]
            z += c * f[2]
    return j, e.coef[j], (x, y, z)


def monomial_terms(
    mono: Monomial,
    occ: np.ndarray,
    modes: Sequence[Triple],
    mode_pos: dict,
    Ntot: int,
    n0: int,
    supports: dict[str, Sequence[Triple]],
    occupied: Sequence[int],
):
    """Return ([(new_occupation_vector, amplitude), ...], dropped_count).

    ``occ`` is the occupation vector of the incoming state over ``modes``;
    ``occupied`` lists positions with occ > 0.  Terms whose creators land
    outside the mode list are dropped and counted, never yielded.
    """
    frees: list[Optional[Triple]] = [None] * mono.nfree
    dropped = 0
    results: list[tuple[np.ndarray, float]] = []

    def finalize():
        nonlocal dropped
        if any(f is None for f in frees):
            raise PlanError(f"plan left free indices unbound in {mono}")
        ft = tuple(frees)
        if mono.constraint is not None and not mono.constraint(ft):
            return
        ann_modes = []
        for e in mono.annihilate:
            m = e.evaluate(ft)
            if m == ZERO and not (e.is_const() or mono.allow_zero_modes):
                return
            ann_modes.append(m)
        cre_modes = []
        for e in mono.create:
            m = e.evaluate(ft)
            if m == ZERO and not (e.is_const() or mono.allow_zero_modes):
                return
            cre_modes.append(m)
        c = mono.coeff(ft) if callable(mono.coeff) else mono.coeff
        if c == 0.0:
            return
        if mono.diag is not None:
            c *= mono.diag(n0, Ntot)
            if c == 0.0:
                return
        amp = c
        new = occ.copy()
        for m in reversed(ann_modes):  # rightmost operator acts first
            pos = mode_pos.get(m)
            if pos is None or new[pos] == 0:
                return
            amp *= math.sqrt(float(new[pos]))
            new[pos] -= 1
        for m in reversed(cre_modes):
            pos = mode_pos.get(m)
            if pos is None:
                dropped += 1
                return
            new[pos] += 1
            amp *= math.sqrt(float(new[pos]))
        results.append((new, amp))

    def run(step_idx: int):
        if step_idx == len(mono.plan):
            finalize()
            return
        step = mono.plan[step_idx]
        kind = step[0]
        if kind == "ann":
            e = mono.annihilate[step[1]]
            if not e.unresolved(frees):
                run(step_idx + 1)
                return
            j, sgn, rest = _resolve_single(e, frees)
            for pos in occupied:
                m = modes[pos]
                frees[j] = (
                    sgn * (m[0] - rest[0]),
                    sgn * (m[1] - rest[1]),
                    sgn * (m[2] - rest[2]),
                )
                run(step_idx + 1)
            frees[j] = None
        elif kind == "cre":
            e = mono.create[step[1]]
            if not e.unresolved(frees):
                run(step_idx + 1)
                return
            j, sgn, rest = _resolve_single(e, frees)
            for m in supports[step[2]]:
                frees[j] = (
                    sgn * (m[0] - rest[0]),
                    sgn * (m[1] - rest[1]),
                    sgn * (m[2] - rest[2]),
                )
                run(step_idx + 1)
            frees[j] = None
        elif kind == "free":
            j = step[1]
            if frees[j] is not None:
                run(step_idx + 1)
                return
            for m in supports[step[2]]:
                frees[j] = m
                run(step_idx + 1)
            frees[j] = None
        else:
            raise PlanError(f"unknown plan step {step!r}")

    run(0)
    return results, dropped


def apply_monomial(state, monomial: Monomial, basis) -> list[tuple[np.ndarray, float]]:
    """Apply one monomial to a basis state (occupation vector or index).

    Returns the list of (occupation vector, amplitude) with exact bosonic
    square-root amplitudes; contributions whose created mode leaves the
    basis mode list are dropped (and counted internally during assembly,
    never silently there).
    """
    occ = basis.states[state] if isinstance(state, (int, np.integer)) else np.asarray(
        state, dtype=np.int16
    )
    mode_pos = {m: i for i, m in enumerate(basis.modes)}
    supports = {
        "modes_nonzero": tuple(m for m in basis.modes if m != ZERO),
        "modes_all": tuple(basis.modes),
    }
    pos0 = basis.zero_mode_pos
    n0 = int(occ[pos0]) if pos0 is not None else 0
    occupied = [i for i in range(len(basis.modes)) if occ[i] > 0]
    results, _ = monomial_terms(
        monomial, occ, basis.modes, mode_pos, basis.N, n0, supports, occupied
    )
    return results
