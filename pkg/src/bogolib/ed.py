"""Eigensolvers and the comparison harness against the predicted spectra.

Low-lying spectra of the assembled Hamiltonian are extracted per
(N, total-momentum) sector and compared with the quasi-free prediction:
excitation energies sum n_p eps_p, the ground-state energy density
approaching 4 pi a_N, and bounded condensate depletion.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh

from ._indicators import infrared_threshold
from .bogoliubov import SpectrumReport, dispersion, excitation_spectrum
from .fock import (
    FockBasis,
    OperatorContext,
    SparseOperator,
    assemble,
    build_named,
    enumerate_basis,
    expectation_nplus,
)
from .lattice import MomentumLattice, PotentialSpec
from .scattering import (
    DEFAULT_ALPHA,
    continuum_scattering_length,
    solve_scattering_equation,
)

Triple = tuple[int, int, int]

DENSE_CUTOFF = 2000
KRYLOV_RESTART = 60
KRYLOV_SEED = 7


class EigenSolveError(RuntimeError):
    pass


@dataclass
class EigenResult:
    sector: Optional[Triple]
    values: np.ndarray
    residuals: np.ndarray
    vectors: Optional[np.ndarray] = None  # (dim, m) when requested

    def as_rows(self):
        return [
            {"level": i, "value": float(v), "residual": float(r)}
            for i, (v, r) in enumerate(zip(self.values, self.residuals))
        ]


def lowest_eigenvalues(
    A,
    m: int,
    tol: float = 1e-9,
    want_vectors: bool = True,
    seed: int = KRYLOV_SEED,
    dense_cutoff: int = DENSE_CUTOFF,
    maxiter: Optional[int] = None,
) -> EigenResult:
    """m smallest eigenvalues of a hermitian sparse operator.

    Below ``dense_cutoff`` the dense symmetric solver is used; above it,
    implicitly restarted Lanczos with full reorthogonalization (seeded
    start vector, restart space of KRYLOV_RESTART vectors).  Residual
    norms ||A v - lambda v|| are always computed and must pass ``tol``.
    """
    if isinstance(A, SparseOperator):
        if A.symmetry != "hermitian":
            raise ValueError("eigensolver requires a hermitian-flagged operator")
        sector = A.basis.sector
        mat = A.matrix
    else:
        sector = None
        mat = sparse.csr_matrix(A)
    n = mat.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= dim, got m={m}, dim={n}")

    if n <= dense_cutoff:
        dense = mat.toarray()
        dense = 0.5 * (dense + dense.T)
        vals, vecs = np.linalg.eigh(dense)
        vals, vecs = vals[:m], vecs[:, :m]
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        try:
            vals, vecs = eigsh(
                mat, k=m, which="SA", v0=v0, tol=tol,
                ncv=min(n, max(KRYLOV_RESTART, 3 * m)),
                maxiter=maxiter or 100 * n,
            )
        except Exception as exc:  # ArpackNoConvergence and friends
            raise EigenSolveError(f"Lanczos failed: {exc}") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    res = np.array([
        float(np.linalg.norm(mat @ vecs[:, i] - vals[i] * vecs[:, i]))
        for i in range(m)
    ])
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.any(res > max(tol, 1e-12) * scale * 100):
        raise EigenSolveError(
            f"eigenpair residual {res.max():.3e} above tolerance"
        )
    return EigenResult(
        sector=sector,
        values=vals,
        residuals=res,
        vectors=vecs if want_vectors else None,
    )


def depletion(ground_vector: np.ndarray, basis: FockBasis) -> tuple[float, float]:
    """(<N_+>, condensate fraction <n_0>/N) of a normalized state."""
    v = np.asarray(ground_vector, dtype=float)
    norm = float(np.linalg.norm(v))
    if not math.isclose(norm, 1.0, rel_tol=1e-8):
        raise ValueError("depletion expects a normalized vector")
    nplus = expectation_nplus(v, basis)
    return nplus, (basis.N - nplus) / basis.N


# -- level matching -----------------------------------------------------------


@dataclass
class LevelRow:
    sector: Triple
    level: int
    ed_gap: float
    predicted: Optional[float]
    occupations: Optional[tuple]
    rel_dev: Optional[float]
    matched: bool


@dataclass
class ComparisonReport:
    N: int
    K: int
    alpha: float
    a_used: float
    a_choice: str
    a_N: float
    a_continuum: float
    ground_energy: float
    e0_per_particle: float
    depletion_nplus: float
    condensate_fraction: float
    rows: list[LevelRow] = field(default_factory=list)

    @property
    def fourpi_aN(self) -> float:
        return 4.0 * math.pi * self.a_N

    @property
    def energy_density_gap(self) -> float:
        return self.e0_per_particle - self.fourpi_aN


def match_levels(
    ed_gaps: Sequence[float],
    predicted: Sequence[tuple[float, tuple]],
    window_fraction: float = 0.25,
) -> list[tuple[Optional[int], Optional[float]]]:
    """Greedy nearest-match of ED gaps onto predicted levels.

    A gap matches the nearest unused predicted level if their distance is
    below ``window_fraction`` of the local predicted level spacing;
    unmatched gaps are reported as such, never force-paired.
    """
    energies = [e for e, _ in predicted]
    distinct = sorted(set(round(e, 9) for e in energies))
    out: list[tuple[Optional[int], Optional[float]]] = []
    used: set[int] = set()
    for g in ed_gaps:
        best, best_d = None, math.inf
        for j, e in enumerate(energies):
            if j in used:
                continue
            d = abs(g - e)
            if d < best_d:
                best, best_d = j, d
        if best is None:
            out.append((None, None))
            continue
        e = energies[best]
        pos = min(range(len(distinct)), key=lambda i: abs(distinct[i] - e))
        spacings = []
        if pos > 0:
            spacings.append(distinct[pos] - distinct[pos - 1])
        if pos + 1 < len(distinct):
            spacings.append(distinct[pos + 1] - distinct[pos])
        local = min(spacings) if spacings else max(abs(e), 1.0)
        if best_d <= window_fraction * local:
            used.add(best)
            out.append((best, e))
        else:
            out.append((None, None))
    return out


# -- the sweep ----------------------------------------------------------------


def _parse_sector(s) -> Triple:
    if isinstance(s, str):
        key = s.strip().lower()
        if key in ("0", "zero"):
            return (0, 0, 0)
        if key in ("e1", "e_1"):
            return (1, 0, 0)
        parts = key.strip("()").split(",")
        return tuple(int(x) for x in parts)  # type: ignore[return-value]
    return tuple(int(c) for c in s)  # type: ignore[return-value]


def _max_threads() -> int:
    env = os.environ.get("BOGOLIB_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def gp_sweep(
    family: str,
    v: float,
    R: float,
    N_list: Sequence[int],
    K: int = 1,
    alpha: float = DEFAULT_ALPHA,
    sectors: Sequence = ("0", "e1"),
    levels: int = 5,
    mode_max_nsq: Optional[int] = 1,
    a_choice: str = "box",
    eig_tol: float = 1e-9,
    basis_budget: int = 2_000_000,
    table=None,
) -> list[ComparisonReport]:
    """Exact spectra along a particle-number sweep, with predictions.

    For each N: solve the mode-consistent scattering equation, assemble the
    Hamiltonian on the requested momentum sectors over the mode set (the
    zero mode plus shells up to ``mode_max_nsq``; None keeps the cube),
    extract the lowest levels, match the gaps to the quasi-free spectrum at
    the chosen scattering length, and record the ground-state depletion.
    """
    if a_choice not in ("box", "continuum"):
        raise ValueError("a_choice must be 'box' or 'continuum'")
    sector_list = [_parse_sector(s) for s in sectors]
    reports = []
    lattice = MomentumLattice(K)
    modes = lattice.modes_shellwise(max_nsq=mode_max_nsq)
    mode_mask = np.zeros(lattice.size, dtype=bool)
    for mde in modes:
        mode_mask[lattice.index_of(mde)] = True
    a_cont_spec = PotentialSpec(family, v, R, N=max(max(N_list), 1), table=table)
    a_cont = continuum_scattering_length(a_cont_spec)

    for N in N_list:
        spec = PotentialSpec(family, v, R, N=N, table=table)
        sol = solve_scattering_equation(lattice, spec, tol=1e-11, mask=mode_mask,
                                        alpha=alpha)
        a_used = sol.a_N if a_choice == "box" else a_cont
        ctx = OperatorContext.from_solution(sol, infrared_threshold(N, alpha))
        ham = build_named("HN", ctx)

        def solve_sector(sector: Triple):
            basis = enumerate_basis(modes, N, sector, budget=basis_budget)
            H = assemble(ham, basis)
            m = min(levels, basis.dim)
            return sector, basis, lowest_eigenvalues(H, m, tol=eig_tol)

        nthreads = min(_max_threads(), len(sector_list))
        if nthreads > 1:
            with ThreadPoolExecutor(max_workers=nthreads) as pool:
                solved = list(pool.map(solve_sector, sector_list))
        else:
            solved = [solve_sector(s) for s in sector_list]
        solved.sort(key=lambda t: t[0])

        by_sector = {sec: (basis, res) for sec, basis, res in solved}
        if (0, 0, 0) not in by_sector:
            raise ValueError("the sweep needs the zero-momentum sector for E_0")
        basis0, res0 = by_sector[(0, 0, 0)]
        e0 = float(res0.values[0])
        npl, frac = depletion(res0.vectors[:, 0], basis0)

        report = ComparisonReport(
            N=N, K=K, alpha=alpha,
            a_used=a_used, a_choice=a_choice,
            a_N=sol.a_N, a_continuum=a_cont,
            ground_energy=e0,
            e0_per_particle=e0 / N,
            depletion_nplus=npl,
            condensate_fraction=frac,
        )
        for sector in sector_list:
            basis, res = by_sector[sector]
            gaps = [float(x) - e0 for x in res.values]
            if sector == (0, 0, 0):
                gaps = gaps[1:]  # the ground state itself is not a gap
            if not gaps:
                continue
            max_gap = max(gaps)
            pred = excitation_spectrum(
                a_used, lattice, max_energy=1.5 * max_gap + 1.0,
                modes=[m for m in modes if m != (0, 0, 0)],
                sector=sector if sector != (0, 0, 0) else None,
                N=N, alpha=alpha,
            )
            pred_levels = [lv for lv in pred.levels if lv[1]]  # drop the vacuum
            matches = match_levels(gaps, pred_levels)
            for i, (g, (j, e)) in enumerate(zip(gaps, matches)):
                occ = pred_levels[j][1] if j is not None else None
                report.rows.append(LevelRow(
                    sector=sector,
                    level=i,
                    ed_gap=g,
                    predicted=e,
                    occupations=occ,
                    rel_dev=abs(g - e) / e if e else None,
                    matched=j is not None,
                ))
        reports.append(report)
    return reports
