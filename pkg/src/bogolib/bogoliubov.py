"""Bogoliubov dispersion, rotation coefficients, and predicted spectra.

The elementary excitation energy at scattering length a is

    eps_p = sqrt(|p|^4 + 16 pi a p^2),

and the low-lying spectrum consists of sums n_p eps_p over finitely many
excited modes.  The squeezing angles of the diagonalizing rotation are

    tau_p = -(1/4) log(1 + 16 pi a / p^2),  gamma_p = cosh tau_p,
    nu_p = sinh tau_p,

defined below the infrared threshold.  The ground-state energy combines
4 pi a_N (N - 1) with the lattice sum of

    sigma(p) = eps_p - p^2 - 8 pi a_N + (8 pi a_N)^2 / (2 p^2),

whose tail beyond the cutoff decays like |p|^(-4) and is bounded by an
explicit integral estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._indicators import infrared_threshold, is_low
from .lattice import MomentumLattice, _as_triple

TWO_PI = 2.0 * math.pi


class EnumerationBudgetError(RuntimeError):
    """Spectrum enumeration exceeded the configured state budget.

    Carries the partial (still sorted) level list and the energy boundary
    below which the enumeration is guaranteed complete.
    """

    def __init__(self, count: int, partial, boundary: float):
        super().__init__(
            f"enumeration budget of {count} states exhausted; "
            f"complete only below energy {boundary:.6g}"
        )
        self.partial = partial
        self.boundary = boundary


def dispersion(a: float, p) -> float:
    """eps_p = sqrt(|p|^4 + 16 pi a |p|^2) for a lattice vector p."""
    if a < 0:
        raise ValueError("scattering length must be nonnegative")
    n = _as_triple(p)
    psq = (TWO_PI ** 2) * (n[0] ** 2 + n[1] ** 2 + n[2] ** 2)
    return dispersion_psq(a, psq)


def dispersion_psq(a: float, psq) -> np.ndarray:
    """Dispersion from |p|^2; all terms are positive, no cancellation."""
    psq = np.asarray(psq, dtype=float)
    return np.sqrt(psq * psq + 16.0 * math.pi * a * psq)


def hyperbolic_coefficients(a: float, psq):
    """(tau, gamma, nu) at squared momentum psq > 0 for scattering length a.

    tau = -(1/4) log1p(16 pi a / p^2) avoids cancellation at large |p|.
    """
    psq = np.asarray(psq, dtype=float)
    tau = -0.25 * np.log1p(16.0 * math.pi * a / psq)
    return tau, np.cosh(tau), np.sinh(tau)


@dataclass(frozen=True)
class BogoliubovData:
    """Dispersion and rotation coefficients on a lattice.

    ``eps`` covers every lattice vector; ``tau``, ``gamma``, ``nu`` are
    nonzero only below the infrared threshold (where the rotation acts).
    """

    lattice: MomentumLattice
    a: float
    threshold: float
    eps: np.ndarray
    tau: np.ndarray
    gamma: np.ndarray
    nu: np.ndarray

    def low_indices(self) -> np.ndarray:
        mask = is_low(self.lattice.pabs, self.threshold) & self.lattice.nonzero
        return np.nonzero(mask)[0]


def tau_coefficients(
    a: float,
    lattice: MomentumLattice,
    N: int,
    alpha: float,
    threshold: Optional[float] = None,
) -> BogoliubovData:
    """Rotation coefficients on 0 < |p| <= N**alpha (or an explicit threshold).

    gamma = cosh tau and nu = sinh tau; outside the threshold tau = 0, so
    gamma = 1 and nu = 0 there.
    """
    if a <= 0:
        raise ValueError("tau coefficients need a positive scattering length")
    if threshold is None:
        threshold = infrared_threshold(N, alpha)
    eps = dispersion_psq(a, lattice.psq)
    tau = np.zeros(lattice.size)
    low = is_low(lattice.pabs, threshold) & lattice.nonzero
    tau[low] = -0.25 * np.log1p(16.0 * math.pi * a / lattice.psq[low])
    return BogoliubovData(
        lattice=lattice,
        a=a,
        threshold=threshold,
        eps=eps,
        tau=tau,
        gamma=np.cosh(tau),
        nu=np.sinh(tau),
    )


def gse_summand(a_N: float, psq) -> np.ndarray:
    """sigma(p) = eps_p - p^2 - 8 pi a_N + (8 pi a_N)^2/(2 p^2) at psq > 0."""
    psq = np.asarray(psq, dtype=float)
    e = dispersion_psq(a_N, psq)
    b = 8.0 * math.pi * a_N
    return e - psq - b + b * b / (2.0 * psq)


def ground_state_energy(
    a_N: float, N: int, lattice: MomentumLattice
) -> tuple[float, float]:
    """Predicted ground-state energy and a tail bound for the omitted modes.

    Returns (value, tail) with

        value = 4 pi a_N (N - 1) + (1/2) sum_{p != 0 in lattice} sigma(p),

    and tail the integral bound (16 pi a_N)^3 / (64 pi^2 P) at P = 2 pi K,
    from the |p|^(-4) asymptotic of sigma.  sigma is positive, so the true
    value exceeds the truncated one by at most roughly the tail.
    """
    if a_N < 0:
        raise ValueError("a_N must be nonnegative")
    if a_N == 0.0:
        return 0.0, 0.0
    on = lattice.nonzero
    value = 4.0 * math.pi * a_N * (N - 1) + 0.5 * float(
        np.sum(gse_summand(a_N, lattice.psq[on]))
    )
    P = TWO_PI * lattice.K
    tail = (16.0 * math.pi * a_N) ** 3 / (64.0 * math.pi ** 2 * P)
    return value, tail


# -- spectrum enumeration ----------------------------------------------------


@dataclass(frozen=True)
class SpectrumReport:
    """Predicted excitation levels below an energy ceiling.

    ``levels`` holds (energy, occupations) sorted by energy then by the
    lexicographic occupation map; occupations map integer momentum triples
    to positive integers.  ``tail_boundary`` is the smallest dispersion
    value outside the lattice cutoff: levels at or above it could receive
    contributions from omitted modes and are cutoff-suspect.
    """

    a: float
    label: str
    max_energy: float
    levels: tuple[tuple[float, tuple[tuple[tuple[int, int, int], int], ...]], ...]
    K: int
    N: Optional[int]
    alpha: Optional[float]
    tail_boundary: float
    sector: Optional[tuple[int, int, int]] = None

    def degenerate_groups(self, rtol: float = 1e-9):
        """Group consecutive levels whose energies agree to rtol."""
        groups: list[tuple[float, int, list]] = []
        for energy, occ in self.levels:
            if groups and abs(energy - groups[-1][0]) <= rtol * (1.0 + abs(energy)):
                groups[-1][2].append(occ)
            else:
                groups.append((energy, len(groups), [occ]))
        return [(e, len(occs), occs) for e, _, occs in groups]


def _occ_sort_key(occ):
    return tuple(sorted(occ))


def excitation_spectrum(
    a: float,
    lattice: MomentumLattice,
    max_energy: float,
    modes: Optional[list[tuple[int, int, int]]] = None,
    sector: Optional[tuple[int, int, int]] = None,
    budget: int = 2_000_000,
    label: str = "bogoliubov",
    N: Optional[int] = None,
    alpha: Optional[float] = None,
) -> SpectrumReport:
    """All occupation maps with sum n_p eps_p <= max_energy, sorted.

    Enumeration is a depth-first branch and bound over modes ordered by
    increasing dispersion; it is exhaustive for the given mode set.  An
    optional ``sector`` keeps only maps with total momentum 2 pi * sector.
    Exceeding ``budget`` raises :class:`EnumerationBudgetError` carrying
    the partial result.
    """
    if max_energy <= 0:
        raise ValueError("max_energy must be positive")
    if modes is None:
        mode_list = [
            tuple(int(c) for c in lattice.n[i])
            for i in range(lattice.size)
            if i != lattice.zero_index
        ]
    else:
        mode_list = [m for m in (_as_triple(m) for m in modes) if m != (0, 0, 0)]
    eps = np.array([dispersion(a, m) for m in mode_list])
    order = sorted(range(len(mode_list)), key=lambda i: (eps[i], mode_list[i]))
    eps_sorted = eps[order]
    modes_sorted = [mode_list[i] for i in order]

    if np.any(eps_sorted <= 0):
        raise ValueError("dispersion must be positive on nonzero modes")

    found: list[tuple[float, tuple]] = []
    stack_occ: list[tuple[tuple[int, int, int], int]] = []

    def record():
        occ = tuple(stack_occ)
        if sector is None or _total_momentum(occ) == sector:
            energy = _occ_energy(occ, a)
            if energy <= max_energy:
                found.append((energy, occ))
                if len(found) > budget:
                    raise _BudgetSignal(energy)

    def dfs(idx: int, used: float):
        if idx == len(modes_sorted):
            record()
            return
        e = eps_sorted[idx]
        nmax = int(math.floor((max_energy - used) / e + 1e-12))
        dfs(idx + 1, used)  # n = 0 branch first, keeps low levels early
        for n in range(1, nmax + 1):
            stack_occ.append((modes_sorted[idx], n))
            dfs(idx + 1, used + n * e)
            stack_occ.pop()

    try:
        dfs(0, 0.0)
    except _BudgetSignal as sig:
        found.sort(key=lambda t: (t[0], _occ_sort_key(t[1])))
        raise EnumerationBudgetError(budget, tuple(found), sig.boundary) from None

    found.sort(key=lambda t: (t[0], _occ_sort_key(t[1])))
    outside = TWO_PI * (lattice.K + 1)
    tail_boundary = float(dispersion_psq(a, outside * outside))
    return SpectrumReport(
        a=a,
        label=label,
        max_energy=max_energy,
        levels=tuple(found),
        K=lattice.K,
        N=N,
        alpha=alpha,
        tail_boundary=tail_boundary,
        sector=sector,
    )


class _BudgetSignal(Exception):
    def __init__(self, boundary: float):
        self.boundary = boundary


def _occ_energy(occ, a: float) -> float:
    ordered = sorted(occ)
    return float(sum(n * dispersion(a, m) for m, n in ordered))


def _total_momentum(occ) -> tuple[int, int, int]:
    t = [0, 0, 0]
    for m, n in occ:
        t[0] += n * m[0]
        t[1] += n * m[1]
        t[2] += n * m[2]
    return tuple(t)


def e_infinity_levels(
    a_N: float,
    lattice: MomentumLattice,
    max_energy: float,
    **kwargs,
) -> SpectrumReport:
    """Spectrum of the diagonal model operator sum_p eps_p a_p^dag a_p.

    Identical enumeration to :func:`excitation_spectrum`, tagged as the
    model-operator reference used in the min-max comparison.
    """
    kwargs.setdefault("label", "model")
    return excitation_spectrum(a_N, lattice, max_energy, **kwargs)
