"""Occupation-number bases on fixed particle-number (and momentum) sectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np

Triple = tuple[int, int, int]


class BasisSizeError(RuntimeError):
    """Enumeration would exceed the configured state budget."""

    def __init__(self, count: int, budget: int):
        super().__init__(f"basis needs more than {budget} states (>= {count})")
        self.count = count
        self.budget = budget


@dataclass(frozen=True)
class FockBasis:
    """Bosonic occupation basis over an explicit mode list.

    States are occupation vectors aligned with ``modes``, all with total
    particle number N and, if a sector is given, total momentum
    2*pi*sector.  Enumeration order is reverse-lexicographic in the
    occupation vector, so the pure condensate state comes first whenever
    the zero mode heads the list.
    """

    modes: tuple[Triple, ...]
    N: int
    sector: Optional[Triple]
    states: np.ndarray = field(repr=False)
    index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    @property
    def zero_mode_pos(self) -> Optional[int]:
        try:
            return self.modes.index((0, 0, 0))
        except ValueError:
            return None

    def n0(self) -> np.ndarray:
        """Condensate occupation per state (zeros if the list lacks mode 0)."""
        pos = self.zero_mode_pos
        if pos is None:
            return np.zeros(self.dim, dtype=np.int64)
        return self.states[:, pos].astype(np.int64)

    def nplus(self) -> np.ndarray:
        """Number of excited particles per state."""
        return self.N - self.n0()

    def state_index(self, occ: np.ndarray) -> Optional[int]:
        return self.index.get(np.asarray(occ, dtype=np.int16).tobytes())

    def occupation_map(self, i: int) -> dict[Triple, int]:
        row = self.states[i]
        return {m: int(n) for m, n in zip(self.modes, row) if n > 0 and m != (0, 0, 0)}


def enumerate_basis(
    modes: Sequence,
    N: int,
    sector: Optional[Sequence] = None,
    budget: int = 2_000_000,
) -> FockBasis:
    """Enumerate all occupation vectors with the given totals.

    ``sector`` restricts to total momentum 2*pi*sector (an integer triple);
    branch-and-bound pruning keeps sector enumeration affordable on large
    mode lists.  Exceeding ``budget`` raises :class:`BasisSizeError`.
    """
    mode_list = tuple(tuple(int(c) for c in m) for m in modes)
    if len(mode_list) == 0:
        raise ValueError("mode list must not be empty")
    if len(set(mode_list)) != len(mode_list):
        raise ValueError("mode list contains duplicates")
    if N < 0:
        raise ValueError("particle number must be nonnegative")
    sec = None if sector is None else tuple(int(c) for c in sector)

    M = len(mode_list)
    if sec is None and comb(N + M - 1, N) > budget:
        raise BasisSizeError(comb(N + M - 1, N), budget)

    marr = np.array(mode_list, dtype=np.int64)
    # suffix-wise max |component| bounds what later modes can still carry
    suffix_max = np.zeros((M + 1, 3), dtype=np.int64)
    for i in range(M - 1, -1, -1):
        suffix_max[i] = np.maximum(suffix_max[i + 1], np.abs(marr[i]))

    out: list[np.ndarray] = []
    occ = np.zeros(M, dtype=np.int16)

    sec_arr = None if sec is None else np.asarray(sec, dtype=np.int64)

    def rec(i: int, left: int, mom: np.ndarray):
        if i == M - 1:
            occ[i] = left
            total = mom + left * marr[i]
            if sec is None or (total[0], total[1], total[2]) == sec:
                if len(out) >= budget:
                    raise BasisSizeError(len(out) + 1, budget)
                out.append(occ.copy())
            occ[i] = 0
            return
        if sec is not None:
            # remaining modes must be able to steer momentum onto the sector
            need = np.abs(sec_arr - mom)
            if np.any(need > left * suffix_max[i]):
                return
        for n in range(left, -1, -1):
            occ[i] = n
            rec(i + 1, left - n, mom + n * marr[i])
        occ[i] = 0

    rec(0, N, np.zeros(3, dtype=np.int64))
    states = (
        np.array(out, dtype=np.int16) if out else np.zeros((0, M), dtype=np.int16)
    )
    index = {states[i].tobytes(): i for i in range(states.shape[0])}
    return FockBasis(modes=mode_list, N=N, sector=sec, states=states, index=index)
