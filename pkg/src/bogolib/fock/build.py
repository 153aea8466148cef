"""Builders for the named second-quantized operators.

Every operator of the decomposition H_N = H0 + H1 + H2 + Q2 + Q3 + Q4, the
renormalization generators B2 (quadratic), B3 (cubic), B4 (second
quadratic), the renormalized pair terms tQ2 and tQ2prime, the counting
operators N+ and N0, and the interpolating quadratic form E_s are exposed
through :func:`build_named`.  Coefficients close over the scattering data
carried by :class:`OperatorContext`; the scaled potential is evaluated
analytically at any integer momentum transfer, so assemblies never alias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .._indicators import is_low
from ..bogoliubov import dispersion_psq
from ..lattice import TWO_PI, MomentumLattice, PotentialSpec
from ..scattering import ScatteringSolution, WCoefficients
from .expr import Expr, Monomial, OperatorExpression, pinned

Triple = tuple[int, int, int]

NAMED_OPERATORS = (
    "HN", "H0", "H1", "H2", "Q2", "Q3", "Q4",
    "B2", "B3", "B4", "tQ2", "tQ2prime", "N+", "N0", "E_s",
)


def _psq(n: Triple) -> float:
    return (TWO_PI ** 2) * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2])


def _dot_p(a: Triple, b: Triple) -> float:
    return (TWO_PI ** 2) * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])


def _sorted_support(d: dict) -> tuple[Triple, ...]:
    return tuple(sorted(k for k, v in d.items() if v != 0.0))


@dataclass
class OperatorContext:
    """Scattering data and bookkeeping needed to build named operators.

    ``threshold`` is the physical infrared scale splitting low from high
    momenta (N**alpha by default, overridable so the low set is nonempty
    at desk-scale particle numbers).  Dictionaries map integer momentum
    triples to coefficient values; missing keys mean zero.
    """

    N: int
    spec: PotentialSpec
    threshold: float
    phi: dict[Triple, float] = field(default_factory=dict)
    phi_tilde: dict[Triple, float] = field(default_factory=dict)
    W: dict[Triple, float] = field(default_factory=dict)
    tau: dict[Triple, float] = field(default_factory=dict)
    a_N: float = 0.0
    s: float = 1.0
    _vn_cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_solution(
        cls,
        sol: ScatteringSolution,
        threshold: float,
        W: Optional[WCoefficients] = None,
        a_N: Optional[float] = None,
        tau: Optional[dict[Triple, float]] = None,
        s: float = 1.0,
    ) -> "OperatorContext":
        lat = sol.lattice
        on = np.nonzero(sol.mask)[0]
        phi = {tuple(int(c) for c in lat.n[i]): float(sol.phi[i]) for i in on}
        tilde_mask = ~is_low(lat.pabs, threshold)
        phi_tilde = {
            tuple(int(c) for c in lat.n[i]): float(sol.phi[i])
            for i in on
            if tilde_mask[i] and sol.phi[i] != 0.0
        }
        Wd: dict[Triple, float] = {}
        if W is not None:
            for i in np.nonzero(W.mask)[0]:
                if W.W[i] != 0.0:
                    Wd[tuple(int(c) for c in lat.n[i])] = float(W.W[i])
        ctx = cls(
            N=sol.N,
            spec=sol.spec,
            threshold=threshold,
            phi=phi,
            phi_tilde=phi_tilde,
            W=Wd,
            tau=dict(tau) if tau else {},
            a_N=sol.a_N if a_N is None else a_N,
            s=s,
        )
        return ctx

    # -- coefficient helpers -------------------------------------------

    def vn(self, d: Triple) -> float:
        """hat(V_N) at integer transfer d, analytically, cached by |d|^2."""
        s = d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
        val = self._vn_cache.get(s)
        if val is None:
            val = self.spec.fourier_radial(TWO_PI * math.sqrt(s) / self.spec.N) / self.spec.N
            self._vn_cache[s] = val
        return val

    @property
    def vn0(self) -> float:
        return self.vn((0, 0, 0))

    def chi_set(self, lattice: Optional[MomentumLattice] = None) -> tuple[Triple, ...]:
        """All nonzero lattice vectors with |p| <= threshold (a finite ball)."""
        rmax = int(math.floor(self.threshold / TWO_PI + 1e-12))
        out = []
        for x in range(-rmax, rmax + 1):
            for y in range(-rmax, rmax + 1):
                for z in range(-rmax, rmax + 1):
                    if (x, y, z) == (0, 0, 0):
                        continue
                    if is_low(TWO_PI * math.sqrt(x * x + y * y + z * z), self.threshold):
                        out.append((x, y, z))
        return tuple(sorted(out))

    def is_low_mode(self, n: Triple) -> bool:
        return bool(is_low(TWO_PI * math.sqrt(n[0] ** 2 + n[1] ** 2 + n[2] ** 2),
                           self.threshold))

    def hyperbolic(self, n: Triple) -> tuple[float, float, float]:
        t = self.tau.get(n, 0.0)
        return t, math.cosh(self.s * t), math.sinh(self.s * t)


def build_named(name: str, ctx: OperatorContext) -> OperatorExpression:
    """Return the named operator as a normal-ordered expression."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(
            f"unknown operator {name!r}; known: {', '.join(NAMED_OPERATORS)}"
        ) from None
    expr = builder(ctx)
    for m in expr.monomials:
        if name in ("HN", "H0", "H1", "H2", "Q2", "Q3", "Q4") and not m.conserves_momentum:
            raise AssertionError(f"{name}: monomial violates momentum conservation")
    return expr


# -- Hamiltonian pieces ------------------------------------------------------


def _kinetic_monomial() -> Monomial:
    e = Expr(coef=(1,))
    return Monomial(
        create=(e,), annihilate=(e,),
        coeff=lambda fs: _psq(fs[0]),
        nfree=1, plan=(("ann", 0),),
    )


def _build_HN(ctx: OperatorContext) -> OperatorExpression:
    """Full second-quantized H_N: kinetic term plus the unrestricted
    quartic sum (1/2) sum_{r,p,q} hat(V_N)(r) a^dag_{p+r} a^dag_q a_p a_{q+r}."""
    p, w, a = Expr((1, 0, 0)), Expr((0, 1, 0)), Expr((0, 0, 1))
    quartic = Monomial(
        create=(a, Expr((1, 1, -1))),
        annihilate=(p, w),
        coeff=lambda fs: 0.5 * ctx.vn((fs[2][0] - fs[0][0],
                                       fs[2][1] - fs[0][1],
                                       fs[2][2] - fs[0][2])),
        nfree=3,
        plan=(("ann", 0), ("ann", 1), ("cre", 0, "modes_all")),
        allow_zero_modes=True,
    )
    return OperatorExpression(
        name="HN", monomials=[_kinetic_monomial(), quartic],
        symmetry_hint="hermitian",
    )


def _build_H0(ctx: OperatorContext) -> OperatorExpression:
    c = 0.5 * ctx.vn0
    return OperatorExpression(
        name="H0",
        monomials=[Monomial(create=(), annihilate=(), coeff=1.0,
                            diag=lambda n0, N: c * N * (N - 1))],
        symmetry_hint="hermitian",
    )


def _build_H1(ctx: OperatorContext) -> OperatorExpression:
    return OperatorExpression(
        name="H1", monomials=[_kinetic_monomial()], symmetry_hint="hermitian"
    )


def _build_H2(ctx: OperatorContext) -> OperatorExpression:
    e = Expr(coef=(1,))
    vn = ctx.vn
    vn0 = ctx.vn0
    quad = Monomial(
        create=(e,), annihilate=(e,),
        coeff=lambda fs: vn(fs[0]),
        nfree=1, plan=(("ann", 0),),
        diag=lambda n0, N: float(n0),  # a0^dag a0 = N - N_+ on the sector
    )
    diag = Monomial(
        create=(), annihilate=(), coeff=1.0,
        diag=lambda n0, N: -0.5 * vn0 * (N - n0) * (N - n0 - 1),
    )
    return OperatorExpression(
        name="H2", monomials=[quad, diag], symmetry_hint="hermitian"
    )


def _build_Q2(ctx: OperatorContext) -> OperatorExpression:
    vn = ctx.vn
    mono = Monomial(
        create=(Expr((1,)), Expr((-1,))),
        annihilate=(pinned((0, 0, 0)), pinned((0, 0, 0))),
        coeff=lambda fs: 0.5 * vn(fs[0]),
        nfree=1, plan=(("cre", 0, "modes_nonzero"),),
    )
    return OperatorExpression(name="Q2", monomials=[mono], hermitian_completion=1)


def _build_Q3(ctx: OperatorContext) -> OperatorExpression:
    vn = ctx.vn
    mono = Monomial(
        create=(Expr((1, 1)), Expr((0, -1))),
        annihilate=(Expr((1, 0)), pinned((0, 0, 0))),
        coeff=lambda fs: vn(fs[1]),
        nfree=2, plan=(("ann", 0), ("cre", 1, "modes_nonzero")),
    )
    return OperatorExpression(name="Q3", monomials=[mono], hermitian_completion=1)


def _build_Q4(ctx: OperatorContext) -> OperatorExpression:
    vn = ctx.vn
    mono = Monomial(
        create=(Expr((0, 0, 1)), Expr((1, 1, -1))),
        annihilate=(Expr((1, 0, 0)), Expr((0, 1, 0))),
        coeff=lambda fs: 0.5 * vn((fs[2][0] - fs[0][0],
                                   fs[2][1] - fs[0][1],
                                   fs[2][2] - fs[0][2])),
        nfree=3,
        plan=(("ann", 0), ("ann", 1), ("cre", 0, "modes_nonzero")),
    )
    return OperatorExpression(name="Q4", monomials=[mono], symmetry_hint="hermitian")


# -- renormalization generators ---------------------------------------------


def _pair_from_condensate(coeff_of_p, support_name: str, nfree: int = 1) -> Monomial:
    return Monomial(
        create=(Expr((1,)), Expr((-1,))),
        annihilate=(pinned((0, 0, 0)), pinned((0, 0, 0))),
        coeff=coeff_of_p,
        nfree=nfree,
        plan=(("cre", 0, support_name),),
    )


def _build_B2(ctx: OperatorContext) -> OperatorExpression:
    tilde = dict(ctx.phi_tilde)
    mono = _pair_from_condensate(lambda fs: 0.5 * tilde.get(fs[0], 0.0), "phitilde")
    return OperatorExpression(
        name="B2", monomials=[mono], hermitian_completion=-1,
        supports={"phitilde": _sorted_support(tilde)},
    )


def _build_B3(ctx: OperatorContext) -> OperatorExpression:
    tilde = dict(ctx.phi_tilde)
    chi = frozenset(ctx.chi_set())
    mono = Monomial(
        create=(Expr((1, 1)), Expr((-1, 0))),
        annihilate=(Expr((0, 1)), pinned((0, 0, 0))),
        coeff=lambda fs: tilde.get(fs[0], 0.0),
        nfree=2,
        plan=(("ann", 0), ("cre", 1, "phitilde")),
        constraint=lambda fs: fs[1] in chi,
    )
    return OperatorExpression(
        name="B3", monomials=[mono], hermitian_completion=-1,
        supports={"phitilde": _sorted_support(tilde)},
    )


def _build_B4(ctx: OperatorContext) -> OperatorExpression:
    tau = dict(ctx.tau)
    N = ctx.N
    mono = _pair_from_condensate(
        lambda fs: 0.5 * tau.get(fs[0], 0.0) / N, "tau_support"
    )
    return OperatorExpression(
        name="B4", monomials=[mono], hermitian_completion=-1,
        supports={"tau_support": _sorted_support(tau)},
    )


def _build_tQ2(ctx: OperatorContext) -> OperatorExpression:
    c = 4.0 * math.pi * ctx.a_N / ctx.N
    chi = ctx.chi_set()
    mono = _pair_from_condensate(lambda fs: c, "chi")
    return OperatorExpression(
        name="tQ2", monomials=[mono], hermitian_completion=1,
        supports={"chi": chi},
    )


def _build_tQ2prime(ctx: OperatorContext) -> OperatorExpression:
    W = dict(ctx.W)
    mono = _pair_from_condensate(lambda fs: W.get(fs[0], 0.0), "w_support")
    return OperatorExpression(
        name="tQ2prime", monomials=[mono], hermitian_completion=1,
        supports={"w_support": _sorted_support(W)},
    )


# -- counting operators and the interpolated quadratic form ------------------


def _build_Nplus(ctx: OperatorContext) -> OperatorExpression:
    return OperatorExpression(
        name="N+",
        monomials=[Monomial(create=(), annihilate=(), coeff=1.0,
                            diag=lambda n0, N: float(N - n0))],
        symmetry_hint="hermitian",
    )


def _build_N0(ctx: OperatorContext) -> OperatorExpression:
    return OperatorExpression(
        name="N0",
        monomials=[Monomial(create=(), annihilate=(), coeff=1.0,
                            diag=lambda n0, N: float(n0))],
        symmetry_hint="hermitian",
    )


def _build_Es(ctx: OperatorContext) -> OperatorExpression:
    """E(s) = sum_low eps_p (g b+_p + n b_{-p})(g b_p + n b+_{-p}),
    g = cosh(s tau_p), n = sinh(s tau_p), in condensate-weighted form."""
    tau = dict(ctx.tau)
    aN = ctx.a_N
    Npart = ctx.N
    s = ctx.s

    def parts(n: Triple) -> tuple[float, float, float]:
        t = tau.get(n, 0.0)
        eps = dispersion_psq(aN, _psq(n))
        return float(eps), math.cosh(s * t), math.sinh(s * t)

    e = Expr(coef=(1,))
    quad_g2 = Monomial(  # g^2 eps a+_p a_p (N0 + 1)/N
        create=(e,), annihilate=(e,),
        coeff=lambda fs: (lambda E, g, n: E * g * g)(*parts(fs[0])),
        nfree=1, plan=(("ann", 0),),
        constraint=lambda fs: fs[0] in tau,
        diag=lambda n0, N: (n0 + 1.0) / Npart,
    )
    pair_create = Monomial(  # g n eps a+_p a+_{-p} a0 a0 / N
        create=(Expr((1,)), Expr((-1,))),
        annihilate=(pinned((0, 0, 0)), pinned((0, 0, 0))),
        coeff=lambda fs: (lambda E, g, n: E * g * n / Npart)(*parts(fs[0])),
        nfree=1, plan=(("cre", 0, "tau_support"),),
    )
    pair_destroy = Monomial(  # g n eps a0+ a0+ a_{-p} a_p / N
        create=(pinned((0, 0, 0)), pinned((0, 0, 0))),
        annihilate=(Expr((-1,)), Expr((1,))),
        coeff=lambda fs: (lambda E, g, n: E * g * n / Npart)(*parts(fs[0])),
        nfree=1, plan=(("ann", 1),),
    )
    quad_n2 = Monomial(  # n^2 eps a+_p a_p N0 / N
        create=(e,), annihilate=(e,),
        coeff=lambda fs: (lambda E, g, n: E * n * n)(*parts(fs[0])),
        nfree=1, plan=(("ann", 0),),
        constraint=lambda fs: fs[0] in tau,
        diag=lambda n0, N: n0 / float(Npart),
    )
    diag_n2 = Monomial(  # n^2 eps N0 / N (from b b+ reordering)
        create=(), annihilate=(),
        coeff=1.0,
        diag=lambda n0, N: (n0 / float(Npart)) * sum(
            (lambda E, g, n: E * n * n)(*parts(m)) for m in tau
        ),
    )
    return OperatorExpression(
        name="E_s",
        monomials=[quad_g2, pair_create, pair_destroy, quad_n2, diag_n2],
        symmetry_hint="hermitian",
        supports={"tau_support": tuple(sorted(tau))},
    )


# -- pinned elementary operators (for commutator checks) ---------------------


def pair_annihilator(p: Triple) -> OperatorExpression:
    """a_{-p} a_p."""
    return OperatorExpression(
        name=f"a(-{p})a({p})",
        monomials=[Monomial(create=(), annihilate=(pinned(tuple(-c for c in p)), pinned(p)),
                            coeff=1.0)],
    )


def pair_creator(q: Triple) -> OperatorExpression:
    """a^dag_q a^dag_{-q}."""
    return OperatorExpression(
        name=f"a+({q})a+(-{q})",
        monomials=[Monomial(create=(pinned(q), pinned(tuple(-c for c in q))),
                            annihilate=(), coeff=1.0)],
    )


def b_annihilator(p: Triple, N: int) -> OperatorExpression:
    """b_p = a0^dag a_p / sqrt(N)."""
    return OperatorExpression(
        name=f"b({p})",
        monomials=[Monomial(create=(pinned((0, 0, 0)),), annihilate=(pinned(p),),
                            coeff=1.0 / math.sqrt(N))],
    )


def b_creator(q: Triple, N: int) -> OperatorExpression:
    """b^dag_q = a_q^dag a0 / sqrt(N)."""
    return OperatorExpression(
        name=f"b+({q})",
        monomials=[Monomial(create=(pinned(q),), annihilate=(pinned((0, 0, 0)),),
                            coeff=1.0 / math.sqrt(N))],
    )


_BUILDERS: dict[str, Callable[[OperatorContext], OperatorExpression]] = {
    "HN": _build_HN,
    "H0": _build_H0,
    "H1": _build_H1,
    "H2": _build_H2,
    "Q2": _build_Q2,
    "Q3": _build_Q3,
    "Q4": _build_Q4,
    "B2": _build_B2,
    "B3": _build_B3,
    "B4": _build_B4,
    "tQ2": _build_tQ2,
    "tQ2prime": _build_tQ2prime,
    "N+": _build_Nplus,
    "N0": _build_N0,
    "E_s": _build_Es,
}
