"""Box-truncated zero-energy scattering problem and scattering lengths.

The coefficients phi_p solve, for every nonzero lattice vector p inside the
cutoff,

    p^2 phi_p + (1/2) sum_q hat(V_N)(p-q) phi_q = -(1/2) hat(V_N)(p),

with the q-sum over the nonzero lattice vectors of the same truncation and
hat(V_N)(p-q) evaluated analytically (no wrap-around aliasing).  The
projected operator is symmetric positive definite, so the system is solved
by conjugate gradients with diagonal preconditioning; convergence is
declared on the sup-norm of the true residual.

From the solution, the box scattering length is

    a_N = (N / 8 pi) [ hat(V_N)(0) + sum_p hat(V_N)(p) phi_p ],

and an independent continuum oracle integrates the radial zero-energy
problem for -Laplace + V/2 outward through the support of V.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.signal import fftconvolve

from ._indicators import infrared_threshold, is_low
from .lattice import MomentumLattice, PotentialSpec

EIGHT_PI = 8.0 * math.pi

DEFAULT_ALPHA = 2.0 / 17.0


class SolverError(RuntimeError):
    """Iterative solve did not converge; carries the final residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual sup-norm {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class ScatteringSolution:
    """Solution of the truncated scattering equation on a mode set.

    ``phi`` and ``phi_tilde`` are flat arrays over the full lattice cube;
    entries outside ``mask`` (and at the zero mode) are exactly zero.
    ``phi_tilde`` keeps only momenta above the infrared threshold
    N**alpha.
    """

    lattice: MomentumLattice
    spec: PotentialSpec
    mask: np.ndarray
    phi: np.ndarray
    alpha: float
    phi_tilde: np.ndarray
    a_N: float
    residual_sup: float

    @property
    def N(self) -> int:
        return self.spec.N

    def norms(self) -> dict[str, float]:
        """l1/l2/sup norms of phi and phi_tilde plus the pointwise bound."""
        psq = self.lattice.psq
        on = self.mask
        return {
            "phi_l1": float(np.sum(np.abs(self.phi[on]))),
            "phi_l2": float(np.linalg.norm(self.phi[on])),
            "phi_sup": float(np.max(np.abs(self.phi[on]), initial=0.0)),
            "phi_tilde_l1": float(np.sum(np.abs(self.phi_tilde[on]))),
            "phi_tilde_l2": float(np.linalg.norm(self.phi_tilde[on])),
            "phi_tilde_sup": float(np.max(np.abs(self.phi_tilde[on]), initial=0.0)),
            "point_bound": float(
                np.max(self.N * psq[on] * np.abs(self.phi[on]), initial=0.0)
            ),
        }


@dataclass(frozen=True)
class WCoefficients:
    """Auxiliary pair-creation coefficients of the renormalized quadratic term.

    W(p) = (1/2) 1_{|p|<=c} [ (hat(V_N) * phi)(p) + hat(V_N)(p) ]
         - (1/2) sum_{|q|<=c} hat(V_N)(p-q) phi_q,

    with c the infrared threshold and both convolutions restricted to the
    solution's mode set.
    """

    lattice: MomentumLattice
    mask: np.ndarray
    threshold: float
    W: np.ndarray


def _masked_indices(lattice: MomentumLattice, mask: Optional[np.ndarray]) -> np.ndarray:
    if mask is None:
        out = lattice.nonzero.copy()
    else:
        out = np.asarray(mask, dtype=bool).copy()
        if out.shape != (lattice.size,):
            raise ValueError("mode mask must be a flat boolean array over the lattice")
        out[lattice.zero_index] = False
    return out


def solve_scattering_equation(
    lattice: MomentumLattice,
    spec: PotentialSpec,
    tol: float = 1e-10,
    mask: Optional[np.ndarray] = None,
    alpha: float = DEFAULT_ALPHA,
    maxiter: int = 500,
) -> ScatteringSolution:
    """Solve the truncated scattering equation by preconditioned CG.

    ``mask`` optionally restricts the participating nonzero modes (the
    zero mode is always projected out).  The returned solution is exactly
    even under p -> -p and carries the sup-norm residual actually achieved.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    on = _masked_indices(lattice, mask)
    psq = lattice.psq
    vlat = lattice.scaled_potential_values(spec)
    vdiff = lattice.scaled_potential_difference_box(spec)
    vn0 = vlat[lattice.zero_index]

    def project(x: np.ndarray) -> np.ndarray:
        x[~on] = 0.0
        return x

    def apply(x: np.ndarray) -> np.ndarray:
        conv = fftconvolve(vdiff, lattice.to_box(x), mode="valid")
        return project(psq * x + 0.5 * lattice.from_box(conv))

    b = project(-0.5 * vlat.copy())
    if spec.v == 0.0 or not np.any(on):
        phi = np.zeros(lattice.size)
        return _finalize(lattice, spec, on, phi, alpha, 0.0)

    diag = psq + 0.5 * vn0
    diag[lattice.zero_index] = 1.0

    x = np.zeros(lattice.size)
    r = b.copy()
    z = project(r / diag)
    d = z.copy()
    rz = float(r @ z)
    res_sup = float(np.max(np.abs(r)))
    it = 0
    while res_sup > tol:
        if it >= maxiter:
            raise SolverError("scattering CG exceeded iteration budget", res_sup)
        Ad = apply(d.copy())
        denom = float(d @ Ad)
        if denom <= 0:
            raise SolverError("scattering operator lost positivity", res_sup)
        step = rz / denom
        x += step * d
        r -= step * Ad
        if it % 25 == 24:  # guard against residual drift
            r = b - apply(x.copy())
        z = project(r / diag)
        rz_new = float(r @ z)
        d = z + (rz_new / rz) * d
        rz = rz_new
        res_sup = float(np.max(np.abs(r)))
        it += 1

    _symmetrize(lattice, x)
    project(x)
    res_sup = float(np.max(np.abs(b - apply(x.copy()))))
    if res_sup > 10 * tol:
        raise SolverError("residual grew after symmetrization", res_sup)
    return _finalize(lattice, spec, on, x, alpha, res_sup)


def _symmetrize(lattice: MomentumLattice, x: np.ndarray) -> None:
    rev = x[::-1]  # lexicographic order reverses under n -> -n
    np.copyto(x, 0.5 * (x + rev))
    # exact evenness: mirror the lower half onto the upper half bitwise
    half = lattice.size // 2
    x[lattice.size - half:] = x[:half][::-1]


def _finalize(lattice, spec, on, phi, alpha, res_sup) -> ScatteringSolution:
    a_N = _box_length(lattice, spec, on, phi)
    sol = ScatteringSolution(
        lattice=lattice,
        spec=spec,
        mask=on,
        phi=phi,
        alpha=alpha,
        phi_tilde=np.zeros_like(phi),
        a_N=a_N,
        residual_sup=res_sup,
    )
    return truncate_phi(sol, alpha)


def _box_length(lattice, spec, on, phi) -> float:
    vlat = lattice.scaled_potential_values(spec)
    s = float(np.sum(vlat[on] * phi[on]))
    return spec.N * (vlat[lattice.zero_index] + s) / EIGHT_PI


def box_scattering_length(
    sol: ScatteringSolution, spec: PotentialSpec, lattice: MomentumLattice
) -> float:
    """a_N recomputed from a solution (matches the stored value)."""
    return _box_length(lattice, spec, sol.mask, sol.phi)


def truncate_phi(sol: ScatteringSolution, alpha: float) -> ScatteringSolution:
    """Fill phi_tilde = phi restricted to |p| > N**alpha (physical magnitude)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    thr = infrared_threshold(sol.N, alpha)
    tilde = np.where(is_low(sol.lattice.pabs, thr), 0.0, sol.phi)
    tilde[~sol.mask] = 0.0
    return replace(sol, alpha=alpha, phi_tilde=tilde)


def w_coefficients(
    sol: ScatteringSolution,
    spec: PotentialSpec,
    lattice: MomentumLattice,
    alpha: Optional[float] = None,
    threshold: Optional[float] = None,
) -> WCoefficients:
    """Pair-creation coefficients W(p) on the solution's mode set.

    ``threshold`` overrides the default infrared scale N**alpha; both sums
    run over the solution's modes, matching the truncated scattering
    equation.
    """
    if threshold is None:
        threshold = infrared_threshold(sol.N, sol.alpha if alpha is None else alpha)
    on = sol.mask
    vdiff = lattice.scaled_potential_difference_box(spec)
    vlat = lattice.scaled_potential_values(spec)
    low = is_low(lattice.pabs, threshold)

    conv_full = lattice.from_box(
        fftconvolve(vdiff, lattice.to_box(sol.phi), mode="valid")
    )
    phi_low = np.where(low, sol.phi, 0.0)
    conv_low = lattice.from_box(
        fftconvolve(vdiff, lattice.to_box(phi_low), mode="valid")
    )
    W = 0.5 * np.where(low, conv_full + vlat, 0.0) - 0.5 * conv_low
    W[~on] = 0.0
    return WCoefficients(lattice=lattice, mask=on, threshold=threshold, W=W)


# -- continuum oracle ------------------------------------------------------


def continuum_scattering_length(spec: PotentialSpec, tol: float = 1e-10) -> float:
    """Scattering length of the unscaled potential from the radial problem.

    Integrates u'' = (1/2) V(r) u with u(0) = 0, u'(0) = 1 across the
    support; outside, u is linear and a = r - u/u'.  The step control is
    tightened until the extracted value is stable to ``tol``.
    """
    if spec.v == 0.0:
        return 0.0
    rmax = spec.support_radius

    def rhs(r, y):
        return (y[1], 0.5 * spec.radial(r) * y[0])

    def extract(rtol):
        out = solve_ivp(
            rhs, (0.0, rmax), (0.0, 1.0), method="RK45",
            rtol=rtol, atol=rtol * 1e-3, dense_output=False, max_step=rmax / 50,
        )
        if not out.success:
            raise SolverError(
                f"radial integration failed at r = {out.t[-1]:.6g}", math.inf
            )
        u, du = out.y[0, -1], out.y[1, -1]
        return rmax - u / du

    a_prev = extract(1e-8)
    for rtol in (1e-10, 1e-12):
        a = extract(rtol)
        if abs(a - a_prev) <= tol * max(1.0, abs(a)):
            return a
        a_prev = a
    return a_prev


def born_scattering_length(spec: PotentialSpec, order: int = 1) -> float:
    """Weak-coupling expansion of the scattering length.

    First order is hat(V)(0)/(8 pi); the second-order term subtracts
    (1/(32 pi^3)) int_0^inf hat(V)(k)^2 dk.  Used only as a cross-check of
    the radial integrator.
    """
    a1 = spec.vhat0 / EIGHT_PI
    if order == 1:
        return a1
    if order != 2:
        raise ValueError("Born cross-check implemented to order 1 and 2")
    from scipy.integrate import quad

    kmax = 400.0 / spec.support_radius
    val, _ = quad(lambda k: spec.fourier_radial(k) ** 2, 0.0, kmax, limit=400)
    return a1 - val / (32.0 * math.pi ** 3)


def step_scattering_length(v: float, R: float) -> float:
    """Closed form for the step potential: a = R - tanh(kappa R)/kappa."""
    if v == 0.0:
        return 0.0
    kappa = math.sqrt(0.5 * v)
    return R - math.tanh(kappa * R) / kappa
