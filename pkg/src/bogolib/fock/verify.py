"""Numerical verification of the operator-algebra identities.

Each identity is checked as an exact matrix statement on a momentum-closed
configuration: the mode list is enlarged until every conjugation generator
maps the basis's Fock space into itself (its assembly then drops nothing),
at which point commutators of truncated operators coincide with matrix
elements of the untruncated algebra.  Identities that rest on the
scattering equation use the solution of the equation truncated to the same
mode set, which closes them exactly (to solver precision).

The infrared threshold is a free parameter here: at desk-scale particle
numbers N**alpha lies below the first lattice shell and every low-momentum
sum is empty, making the cubic-generator identities vacuous.  The checker
therefore runs them both at the literal N**alpha and at a threshold that
includes the first shell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse

from .._indicators import is_low
from ..lattice import TWO_PI, MomentumLattice, PotentialSpec
from ..scattering import solve_scattering_equation, w_coefficients
from .assemble import assemble, matrix_of_product
from .basis import enumerate_basis
from .build import (
    OperatorContext,
    build_named,
    b_annihilator,
    b_creator,
    pair_annihilator,
    pair_creator,
    pinned,
)
from .expr import Expr, Monomial, OperatorExpression

Triple = tuple[int, int, int]

IDENTITY_NAMES = (
    "decompo_HN",
    "comm1",
    "comm2",
    "gamma2",
    "H1B3",
    "Q4B3",
    "bcomm",
    "tQ2B3-comm",
)

# first shell sits at |p| = 2*pi; this threshold includes it and nothing else
FIRST_SHELL_THRESHOLD = 7.0


@dataclass
class IdentityReport:
    name: str
    status: str  # pass | fail | refused
    max_dev: float
    tol: float
    basis_dims: tuple[int, ...]
    note: str = ""
    first_violation: Optional[tuple[int, int, float, float]] = None

    def as_dict(self) -> dict:
        out = {
            "max_dev": self.max_dev,
            "basis_dims": list(self.basis_dims),
            "status": self.status,
            "tol": self.tol,
        }
        if self.note:
            out["note"] = self.note
        return out


def _max_dev(L: sparse.csr_matrix, R: sparse.csr_matrix):
    D = (L - R).tocoo()
    if D.nnz == 0:
        return 0.0, None
    k = int(np.argmax(np.abs(D.data)))
    return float(np.abs(D.data).max()), (int(D.row[k]), int(D.col[k]),
                                         float(L[D.row[k], D.col[k]]),
                                         float(R[D.row[k], D.col[k]]))


def _report(name, dev_info, tol, dims, note=""):
    dev, first = dev_info
    return IdentityReport(
        name=name,
        status="pass" if dev <= tol else "fail",
        max_dev=dev,
        tol=tol,
        basis_dims=tuple(dims),
        note=note,
        first_violation=first,
    )


def _commutator(A: sparse.csr_matrix, B: sparse.csr_matrix) -> sparse.csr_matrix:
    return (A @ B - B @ A).tocsr()


@dataclass
class IdentityConfig:
    """Shared configuration for the identity suite."""

    spec_v: float = 30.0
    spec_R: float = 0.25
    N: int = 3
    K: int = 1
    threshold: Optional[float] = None  # None -> first-shell-inclusive
    tol: float = 1e-10
    sector: Optional[Triple] = (0, 0, 0)
    solver_tol: float = 1e-12

    def spec(self) -> PotentialSpec:
        return PotentialSpec("step", v=self.spec_v, R=self.spec_R, N=self.N)

    def pc(self) -> float:
        return FIRST_SHELL_THRESHOLD if self.threshold is None else self.threshold


def identity_config_desk(N: int = 3, **kw) -> IdentityConfig:
    return IdentityConfig(N=N, **kw)


def _context(cfg: IdentityConfig, shell_nsq: Optional[set] = None):
    """Scattering solution (optionally masked to shells) and its context."""
    lat = MomentumLattice(cfg.K)
    mask = lat.nonzero.copy()
    if shell_nsq is not None:
        mask &= np.isin(lat.nsq, sorted(shell_nsq))
    spec = cfg.spec()
    sol = solve_scattering_equation(lat, spec, tol=cfg.solver_tol, mask=mask)
    W = w_coefficients(sol, spec, lat, threshold=cfg.pc())
    ctx = OperatorContext.from_solution(sol, cfg.pc(), W=W)
    return lat, sol, ctx


def _box_modes(lat: MomentumLattice) -> list[Triple]:
    return lat.modes_shellwise()


# -- identity implementations -------------------------------------------------


def _check_decompo_HN(cfg: IdentityConfig) -> IdentityReport:
    lat, _, ctx = _context(cfg)
    basis = enumerate_basis(_box_modes(lat), cfg.N, cfg.sector)
    L = assemble(build_named("HN", ctx), basis).matrix
    R = None
    for name in ("H0", "H1", "H2", "Q2", "Q3", "Q4"):
        m = assemble(build_named(name, ctx), basis).matrix
        R = m if R is None else R + m
    return _report("decompo_HN", _max_dev(L, R.tocsr()), cfg.tol, (basis.dim,))


def _check_comm2(cfg: IdentityConfig) -> IdentityReport:
    lat, _, ctx = _context(cfg)
    basis = enumerate_basis(_box_modes(lat), cfg.N, cfg.sector)
    zero = pinned((0, 0, 0))
    lhs_expr = OperatorExpression(
        name="a0+a0+a0a0",
        monomials=[Monomial(create=(zero, zero), annihilate=(zero, zero), coeff=1.0)],
    )
    rhs_expr = OperatorExpression(
        name="N(N-1)-2N.N+ + N+(N+ +1)",
        monomials=[Monomial(create=(), annihilate=(), coeff=1.0,
                            diag=lambda n0, N: float(N * (N - 1)
                                                     - 2 * N * (N - n0)
                                                     + (N - n0) * (N - n0 + 1)))],
    )
    L = assemble(lhs_expr, basis).matrix
    R = assemble(rhs_expr, basis).matrix
    return _report("comm2", _max_dev(L, R), cfg.tol, (basis.dim,))


def _check_comm1(cfg: IdentityConfig) -> IdentityReport:
    lat, _, _ = _context(cfg)
    # two bases: full cube at low filling, first shell at high filling
    runs = [
        (enumerate_basis(_box_modes(lat), 2, None), _box_modes(lat)),
        (enumerate_basis(lat.modes_shellwise(max_nsq=1), 4, None),
         lat.modes_shellwise(max_nsq=1)),
    ]
    worst = (0.0, None)
    dims = []
    for basis, modes in runs:
        dims.append(basis.dim)
        nonzero = [m for m in modes if m != (0, 0, 0)]
        for p in nonzero:
            for q in nonzero:
                A = pair_annihilator(p)
                B = pair_creator(q)
                LAB, _ = matrix_of_product([A, B], basis)
                LBA, _ = matrix_of_product([B, A], basis)
                L = LAB - LBA
                d = (1 if p == q else 0) + (1 if p == tuple(-c for c in q) else 0)
                monos = []
                if d:
                    monos.append(Monomial(create=(), annihilate=(),
                                          coeff=float(d)))
                    monos.append(Monomial(create=(pinned(p),), annihilate=(pinned(p),),
                                          coeff=float(d)))
                    mp = tuple(-c for c in p)
                    monos.append(Monomial(create=(pinned(mp),), annihilate=(pinned(mp),),
                                          coeff=float(d)))
                if monos:
                    R = assemble(OperatorExpression(name="comm1-rhs", monomials=monos),
                                 basis).matrix
                else:
                    R = sparse.csr_matrix(L.shape)
                dev = _max_dev(L.tocsr(), R)
                if dev[0] > worst[0]:
                    worst = dev
    return _report("comm1", worst, cfg.tol, tuple(dims))


def _check_bcomm(cfg: IdentityConfig) -> IdentityReport:
    lat, _, _ = _context(cfg)
    modes = lat.modes_shellwise(max_nsq=1)
    nonzero = [m for m in modes if m != (0, 0, 0)]
    worst = (0.0, None)
    dims = []
    for N in (cfg.N, cfg.N + 1):
        basis = enumerate_basis(modes, N, None)
        dims.append(basis.dim)
        for p in nonzero:
            for q in nonzero:
                bp = b_annihilator(p, N)
                bq = b_creator(q, N)
                Lpq, _ = matrix_of_product([bp, bq], basis)
                Lqp, _ = matrix_of_product([bq, bp], basis)
                L = (Lpq - Lqp).tocsr()
                monos = [
                    Monomial(create=(pinned(q),), annihilate=(pinned(p),),
                             coeff=-1.0 / N)
                ]
                if p == q:
                    monos.append(Monomial(create=(), annihilate=(), coeff=1.0,
                                          diag=lambda n0, Nt, NN=N: n0 / float(NN)))
                R = assemble(OperatorExpression(name="bcomm-rhs", monomials=monos),
                             basis).matrix
                dev = _max_dev(L, R)
                if dev[0] > worst[0]:
                    worst = dev
    return _report("bcomm", worst, cfg.tol, tuple(dims))


def _gamma2_rhs(ctx: OperatorContext) -> OperatorExpression:
    """sum_{r,p,q} hat(V_N)(r) phi~_p a+_{p+r} a+_q a+_{-p} a_{q+r} a0 a0 + h.c."""
    tilde = dict(ctx.phi_tilde)
    vn = ctx.vn
    zero = pinned((0, 0, 0))
    # frees (w, p, q) with w = q + r the annihilated momentum, r = w - q
    mono = Monomial(
        create=(Expr((1, 1, -1)), Expr((0, 0, 1)), Expr((0, -1, 0))),
        annihilate=(Expr((1, 0, 0)), zero, zero),
        coeff=lambda fs: vn((fs[0][0] - fs[2][0],
                             fs[0][1] - fs[2][1],
                             fs[0][2] - fs[2][2])) * tilde.get(fs[1], 0.0),
        nfree=3,
        plan=(("ann", 0), ("cre", 2, "phitilde"), ("cre", 1, "modes_nonzero")),
    )
    return OperatorExpression(
        name="gamma2-rhs", monomials=[mono], hermitian_completion=1,
        supports={"phitilde": tuple(sorted(tilde))},
    )


def _check_gamma2(cfg: IdentityConfig) -> IdentityReport:
    lat, sol, ctx = _context(cfg)
    basis = enumerate_basis(_box_modes(lat), cfg.N, cfg.sector)
    B2 = assemble(build_named("B2", ctx), basis)
    if B2.dropped:
        return IdentityReport("gamma2", "refused", math.inf, cfg.tol, (basis.dim,),
                              note="quadratic generator not closed on the mode list")
    H1 = assemble(build_named("H1", ctx), basis).matrix
    Q4 = assemble(build_named("Q4", ctx), basis).matrix
    Q2 = assemble(build_named("Q2", ctx), basis).matrix
    tQ2p = assemble(build_named("tQ2prime", ctx), basis).matrix
    L = _commutator((H1 + Q4).tocsr(), B2.matrix) + Q2 - tQ2p
    R = assemble(_gamma2_rhs(ctx), basis).matrix
    note = f"solver residual {sol.residual_sup:.2e}; threshold {ctx.threshold:g}"
    return _report("gamma2", _max_dev(L.tocsr(), R), cfg.tol, (basis.dim,), note)


def _h1b3_main(ctx: OperatorContext, sol, lat) -> OperatorExpression:
    """-(sum_r hat(V_N)(p-r)(delta_{0,r} + phi_r)) 1_{|p|>pc} 1_{|q|<=pc}
    a+_{p+q} a+_{-p} a_q a0 + h.c., with the r-sum over the scattering modes."""
    vn = ctx.vn
    phi = dict(ctx.phi)
    chi = frozenset(ctx.chi_set())
    high = {}
    for n, _ in phi.items():
        if not ctx.is_low_mode(n):
            s = vn(n)  # r = 0 term
            for r, fr in phi.items():
                s += vn((n[0] - r[0], n[1] - r[1], n[2] - r[2])) * fr
            high[n] = -s
    mono = Monomial(
        create=(Expr((1, 1)), Expr((-1, 0))),
        annihilate=(Expr((0, 1)), pinned((0, 0, 0))),
        coeff=lambda fs: high.get(fs[0], 0.0),
        nfree=2,
        plan=(("ann", 0), ("cre", 1, "main_support")),
        constraint=lambda fs: fs[1] in chi,
    )
    return OperatorExpression(
        name="h1b3-main", monomials=[mono], hermitian_completion=1,
        supports={"main_support": tuple(sorted(high))},
    )


def _h1b3_cross(ctx: OperatorContext) -> OperatorExpression:
    """2 sum_{p,q} (p.q) phi~_p 1_{|q|<=pc} a+_{p+q} a+_{-p} a_q a0 + h.c."""
    tilde = dict(ctx.phi_tilde)
    chi = frozenset(ctx.chi_set())

    def dot(a: Triple, b: Triple) -> float:
        return (TWO_PI ** 2) * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])

    mono = Monomial(
        create=(Expr((1, 1)), Expr((-1, 0))),
        annihilate=(Expr((0, 1)), pinned((0, 0, 0))),
        coeff=lambda fs: 2.0 * dot(fs[0], fs[1]) * tilde.get(fs[0], 0.0),
        nfree=2,
        plan=(("ann", 0), ("cre", 1, "phitilde")),
        constraint=lambda fs: fs[1] in chi,
    )
    return OperatorExpression(
        name="h1b3-cross", monomials=[mono], hermitian_completion=1,
        supports={"phitilde": tuple(sorted(tilde))},
    )


def _check_H1B3(cfg: IdentityConfig) -> IdentityReport:
    lat, sol, ctx = _context(cfg)
    basis = enumerate_basis(_box_modes(lat), cfg.N, cfg.sector)
    H1 = assemble(build_named("H1", ctx), basis).matrix
    B3 = assemble(build_named("B3", ctx), basis)
    L = _commutator(H1, B3.matrix)
    R = (assemble(_h1b3_main(ctx, sol, lat), basis).matrix
         + assemble(_h1b3_cross(ctx), basis).matrix)
    note = f"threshold {ctx.threshold:g}; B3 drops {B3.dropped} (projection-safe here)"
    return _report("H1B3", _max_dev(L.tocsr(), R.tocsr()), cfg.tol, (basis.dim,), note)


def _q4b3_main(ctx: OperatorContext) -> OperatorExpression:
    """sum_{r,p,q} hat(V_N)(p-r) phi~_r 1_{|q|<=pc} (a+_{p+q} a+_{-p} a_q a0 + h.c.)."""
    tilde = dict(ctx.phi_tilde)
    vn = ctx.vn
    chi = frozenset(ctx.chi_set())
    dcache: dict[Triple, float] = {}

    def d(p: Triple) -> float:
        val = dcache.get(p)
        if val is None:
            val = sum(
                vn((p[0] - r[0], p[1] - r[1], p[2] - r[2])) * fr
                for r, fr in tilde.items()
            )
            dcache[p] = val
        return val

    mono = Monomial(
        create=(Expr((1, 1)), Expr((-1, 0))),
        annihilate=(Expr((0, 1)), pinned((0, 0, 0))),
        coeff=lambda fs: d(fs[0]),
        nfree=2,
        plan=(("ann", 0), ("cre", 1, "modes_nonzero")),
        constraint=lambda fs: fs[1] in chi,
    )
    return OperatorExpression(
        name="q4b3-main", monomials=[mono], hermitian_completion=1,
        supports={"phitilde": tuple(sorted(tilde))},
    )


def _q4b3_error(ctx: OperatorContext) -> OperatorExpression:
    """The six normal-ordered remainder families of [Q4, B3], halved, + h.c."""
    tilde = dict(ctx.phi_tilde)
    vn = ctx.vn
    chi_t = ctx.chi_set()
    chi = frozenset(chi_t)
    zero = pinned((0, 0, 0))
    sup = {"phitilde": tuple(sorted(tilde)), "chi": chi_t}

    def vnd(a: Triple, b: Triple) -> float:
        return vn((a[0] - b[0], a[1] - b[1], a[2] - b[2]))

    monos = []
    # E1: frees (p, w, m, u); u = p + r in chi, r = u - p, q = w - u + p
    monos.append(Monomial(
        create=(Expr((0, 0, 1, 1)), Expr((0, 0, -1, 0)), Expr((1, 1, 0, -1))),
        annihilate=(Expr((0, 1, 0, 0)), Expr((1, 0, 0, 0)), zero),
        coeff=lambda fs: -0.5 * vnd(fs[3], fs[0]) * tilde.get(fs[2], 0.0),
        nfree=4,
        plan=(("ann", 0), ("ann", 1), ("free", 2, "phitilde"), ("free", 3, "chi")),
    ))
    # E2: frees (p, w, m, q); q in chi, r = w - q
    monos.append(Monomial(
        create=(Expr((0, 0, 1, 1)), Expr((0, 0, -1, 0)), Expr((1, 1, 0, -1))),
        annihilate=(Expr((0, 1, 0, 0)), Expr((1, 0, 0, 0)), zero),
        coeff=lambda fs: -0.5 * vnd(fs[1], fs[3]) * tilde.get(fs[2], 0.0),
        nfree=4,
        plan=(("ann", 0), ("ann", 1), ("free", 2, "phitilde"), ("free", 3, "chi")),
    ))
    # E3: frees (p, u, m, q); u = q + r - m in chi (annihilated), r = u + m - q
    monos.append(Monomial(
        create=(Expr((1, 1, 1, -1)), Expr((0, 0, -1, 0)), Expr((0, 0, 0, 1))),
        annihilate=(Expr((0, 1, 0, 0)), Expr((1, 0, 0, 0)), zero),
        coeff=lambda fs: 0.5 * vnd((fs[1][0] + fs[2][0], fs[1][1] + fs[2][1],
                                    fs[1][2] + fs[2][2]), fs[3]) * tilde.get(fs[2], 0.0),
        nfree=4,
        plan=(("ann", 0), ("ann", 1), ("free", 2, "phitilde"),
              ("cre", 2, "modes_nonzero")),
        constraint=lambda fs: fs[1] in chi,
    ))
    # E4: frees (u, w, m, q); u = p - m in chi (annihilated), p = u + m, r = w - q
    monos.append(Monomial(
        create=(Expr((1, 1, 1, -1)), Expr((0, 0, -1, 0)), Expr((0, 0, 0, 1))),
        annihilate=(Expr((0, 1, 0, 0)), Expr((1, 0, 0, 0)), zero),
        coeff=lambda fs: 0.5 * vnd(fs[1], fs[3]) * tilde.get(fs[2], 0.0),
        nfree=4,
        plan=(("ann", 0), ("ann", 1), ("free", 2, "phitilde"),
              ("cre", 2, "modes_nonzero")),
        constraint=lambda fs: fs[0] in chi,
    ))
    # E5: frees (p, m, s, q); m in chi (annihilated), s = -q-r in phitilde, r = -q-s
    monos.append(Monomial(
        create=(Expr((1, 0, -1, -1)), Expr((0, 0, 0, 1)), Expr((0, 1, 1, 0))),
        annihilate=(Expr((1, 0, 0, 0)), Expr((0, 1, 0, 0)), zero),
        coeff=lambda fs: 0.5 * vnd((-fs[3][0], -fs[3][1], -fs[3][2]),
                                   fs[2]) * tilde.get(fs[2], 0.0),
        nfree=4,
        plan=(("ann", 0), ("ann", 1), ("free", 2, "phitilde"),
              ("cre", 1, "modes_nonzero")),
        constraint=lambda fs: fs[1] in chi,
    ))
    # E6: frees (s, w, u, q); u = p - m in chi (annihilated), p = -s, r = w - q
    monos.append(Monomial(
        create=(Expr((-1, 1, 0, -1)), Expr((0, 0, 0, 1)), Expr((1, 0, 1, 0))),
        annihilate=(Expr((0, 1, 0, 0)), Expr((0, 0, 1, 0)), zero),
        coeff=lambda fs: 0.5 * vnd(fs[1], fs[3]) * tilde.get(fs[0], 0.0),
        nfree=4,
        plan=(("ann", 0), ("ann", 1), ("free", 0, "phitilde"),
              ("cre", 1, "modes_nonzero")),
        constraint=lambda fs: fs[2] in chi,
    ))
    return OperatorExpression(
        name="q4b3-error", monomials=monos, hermitian_completion=1, supports=sup,
    )


def _closure_modes(ctx: OperatorContext) -> list[Triple]:
    """Mode list closing the cubic generator: zero, scattering modes, the
    low set, and every sum of a phi~ mode with a low mode."""
    out = {(0, 0, 0)}
    out.update(ctx.phi)
    chi = ctx.chi_set()
    out.update(chi)
    for s in ctx.phi_tilde:
        for c in chi:
            t = (s[0] + c[0], s[1] + c[1], s[2] + c[2])
            if t != (0, 0, 0):
                out.add(t)
    return sorted(out)


def _check_Q4B3(cfg: IdentityConfig) -> IdentityReport:
    # scattering restricted to the two lowest shells keeps the closure small
    lat, sol, ctx = _context(cfg, shell_nsq={1, 2})
    if not ctx.phi_tilde or not ctx.chi_set():
        return IdentityReport("Q4B3", "refused", math.inf, cfg.tol, (),
                              note="cubic generator vacuous at this threshold")
    modes = _closure_modes(ctx)
    basis = enumerate_basis(modes, cfg.N, cfg.sector)
    B3 = assemble(build_named("B3", ctx), basis)
    if B3.dropped:
        return IdentityReport("Q4B3", "refused", math.inf, cfg.tol, (basis.dim,),
                              note="cubic generator not closed on the mode list")
    Q4 = assemble(build_named("Q4", ctx), basis).matrix
    L = _commutator(Q4, B3.matrix)
    R = (assemble(_q4b3_main(ctx), basis).matrix
         + assemble(_q4b3_error(ctx), basis).matrix)
    note = f"modes {len(modes)}; threshold {ctx.threshold:g}"
    return _report("Q4B3", _max_dev(L.tocsr(), R.tocsr()), cfg.tol, (basis.dim,), note)


def _tq2b3_rhs(p: Triple, q: Triple, chi: tuple[Triple, ...]) -> OperatorExpression:
    """Remainder of [pair(r)+h.c., cubic(p,q)-h.c.] summed over r in the low set."""
    zero = pinned((0, 0, 0))
    mp = tuple(-c for c in p)
    pq = (p[0] + q[0], p[1] + q[1], p[2] + q[2])
    mpq = tuple(-c for c in pq)
    mq = tuple(-c for c in q)
    monos: list[Monomial] = []
    if pq in chi:
        monos.append(Monomial(  # 2 a0+ a0+ a+_{-p} a_{-p-q} a_q a0
            create=(zero, zero, pinned(mp)),
            annihilate=(pinned(mpq), pinned(q), zero),
            coeff=2.0,
        ))
    if p in chi:
        monos.append(Monomial(  # 2 a0+ a0+ a+_{p+q} a_p a_q a0
            create=(zero, zero, pinned(pq)),
            annihilate=(pinned(p), pinned(q), zero),
            coeff=2.0,
        ))
    if q in chi:
        monos.append(Monomial(  # -2 a+_{p+q} a+_{-p} a+_{-q} a0 a0 a0
            create=(pinned(pq), pinned(mp), pinned(mq)),
            annihilate=(zero, zero, zero),
            coeff=-2.0,
        ))
    for r in chi:  # -2 a+_{p+q} a+_{-p} a0+ a_q a_r a_{-r}, literal sum over r
        monos.append(Monomial(
            create=(pinned(pq), pinned(mp), zero),
            annihilate=(pinned(q), pinned(r), pinned(tuple(-c for c in r))),
            coeff=-2.0,
        ))
    return OperatorExpression(name="tq2b3-rhs", monomials=monos,
                              hermitian_completion=1)


def _check_tQ2B3(cfg: IdentityConfig) -> IdentityReport:
    lat, sol, ctx = _context(cfg)
    chi = ctx.chi_set()
    if not chi:
        return IdentityReport("tQ2B3-comm", "refused", math.inf, cfg.tol, (),
                              note="low set empty at this threshold")
    # close pair creations p+q and the low set over the cube
    extra = set()
    for a in chi:
        for b in chi:
            t = (a[0] + b[0], a[1] + b[1], a[2] + b[2])
            if t != (0, 0, 0) and not all(abs(c) <= cfg.K for c in t):
                extra.add(t)
    modes = _box_modes(lat) + sorted(extra)
    basis = enumerate_basis(modes, cfg.N, cfg.sector)
    worst = (0.0, None)
    pair_sum_monos = [
        Monomial(create=(pinned(r), pinned(tuple(-c for c in r))),
                 annihilate=(pinned((0, 0, 0)), pinned((0, 0, 0))),
                 coeff=1.0)
        for r in chi  # literal sum over r: each +-r pair enters twice
    ]
    X = OperatorExpression(name="pair-sum", monomials=pair_sum_monos,
                           hermitian_completion=1)
    for p in chi:
        for q in chi:
            if (p[0] + q[0], p[1] + q[1], p[2] + q[2]) == (0, 0, 0):
                continue
            Y = OperatorExpression(
                name="cubic",
                monomials=[Monomial(
                    create=(pinned((p[0] + q[0], p[1] + q[1], p[2] + q[2])),
                            pinned(tuple(-c for c in p))),
                    annihilate=(pinned(q), pinned((0, 0, 0))),
                    coeff=1.0)],
                hermitian_completion=-1,
            )
            LXY, dxy = matrix_of_product([X, Y], basis)
            LYX, dyx = matrix_of_product([Y, X], basis)
            if dxy or dyx:
                return IdentityReport("tQ2B3-comm", "refused", math.inf, cfg.tol,
                                      (basis.dim,),
                                      note="factors not closed on the mode list")
            L = (LXY - LYX).tocsr()
            R = assemble(_tq2b3_rhs(p, q, chi), basis).matrix
            dev = _max_dev(L, R)
            if dev[0] > worst[0]:
                worst = dev
    return _report("tQ2B3-comm", worst, cfg.tol, (basis.dim,))


_CHECKS = {
    "decompo_HN": _check_decompo_HN,
    "comm1": _check_comm1,
    "comm2": _check_comm2,
    "gamma2": _check_gamma2,
    "H1B3": _check_H1B3,
    "Q4B3": _check_Q4B3,
    "bcomm": _check_bcomm,
    "tQ2B3-comm": _check_tQ2B3,
}


def verify_identity(name: str, cfg: Optional[IdentityConfig] = None) -> IdentityReport:
    """Verify one named identity (see IDENTITY_NAMES) on its closed config."""
    if name not in _CHECKS:
        raise KeyError(f"unknown identity {name!r}; known: {', '.join(IDENTITY_NAMES)}")
    return _CHECKS[name](cfg or IdentityConfig())
