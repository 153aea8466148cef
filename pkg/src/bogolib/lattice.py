"""Momentum lattice of the unit torus and radial interaction potentials.

Momenta live on 2*pi*Z^3.  A finite computation keeps the cube of integer
triples n with max-norm at most K; the physical momentum of a stored vector
is recovered exactly as p = 2*pi*n, so no floating-point lattice coordinates
are ever stored.  Interaction potentials are nonnegative, radial and
compactly supported; their Fourier transforms are evaluated in closed form
where possible and by adaptive radial quadrature otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate, interpolate
from scipy.signal import fftconvolve

TWO_PI = 2.0 * math.pi

# Relative tolerance for radial Fourier quadrature.  Downstream linear
# solves target 1e-10, so the coefficients are resolved two orders deeper.
QUAD_RTOL = 1e-12


class QuadratureError(RuntimeError):
    """Radial Fourier quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved relative tolerance {achieved:.3e})")
        self.achieved = achieved


class LatticeVector(NamedTuple):
    """Integer momentum label n; the physical momentum is p = 2*pi*n."""

    n: tuple[int, int, int]

    @property
    def p(self) -> tuple[float, float, float]:
        return (TWO_PI * self.n[0], TWO_PI * self.n[1], TWO_PI * self.n[2])

    @property
    def nsq(self) -> int:
        return self.n[0] ** 2 + self.n[1] ** 2 + self.n[2] ** 2

    @property
    def psq(self) -> float:
        return TWO_PI * TWO_PI * self.nsq

    def __neg__(self) -> "LatticeVector":
        return LatticeVector((-self.n[0], -self.n[1], -self.n[2]))


def _as_triple(p) -> tuple[int, int, int]:
    if isinstance(p, LatticeVector):
        return p.n
    t = tuple(int(c) for c in p)
    if len(t) != 3:
        raise ValueError(f"lattice vector must have three components, got {p!r}")
    return t


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """Radial interaction potential V and its particle-number scaling.

    Families:
      * ``step``      V(r) = v for r <= R, 0 beyond (closed-form transform),
      * ``gaussian``  V(r) = v exp(-r^2/(2 sigma^2)) truncated at r = R with
                      sigma = R/3 (quadrature),
      * ``table``     tabulated radial profile, interpolated monotonically
                      (quadrature).

    The scaled interaction used on the torus is V_N(x) = N^2 V(N x); its
    Fourier coefficients are hat(V)(r/N)/N.  Configurations whose scaled
    support would not fit inside the box, i.e. R > N/2, are refused rather
    than periodized ambiguously.
    """

    family: str
    v: float
    R: float
    N: int = 1
    table: Optional[tuple[np.ndarray, np.ndarray]] = None
    _interp: Callable = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.family not in ("step", "gaussian", "table"):
            raise ValueError(f"unknown potential family {self.family!r}")
        if self.v < 0:
            raise ValueError("potential strength v must be nonnegative")
        if self.R <= 0:
            raise ValueError("support radius R must be positive")
        if int(self.N) < 1:
            raise ValueError("particle-number scale N must be a positive integer")
        object.__setattr__(self, "N", int(self.N))
        if self.R > 0.5 * self.N:
            raise ValueError(
                f"scaled support R/N = {self.R / self.N:.4g} exceeds the box "
                "half-width 1/2; refusing ambiguous periodization"
            )
        if self.family == "table":
            if self.table is None:
                raise ValueError("table family requires radial samples")
            r, val = (np.asarray(a, dtype=float) for a in self.table)
            if r.ndim != 1 or r.shape != val.shape or r.size < 4:
                raise ValueError("table must hold two equal-length columns, >= 4 rows")
            if not np.all(np.diff(r) > 0):
                raise ValueError("table radii must be strictly increasing")
            if np.any(val < 0):
                raise ValueError("tabulated potential must be nonnegative")
            object.__setattr__(self, "table", (r, val))
            object.__setattr__(
                self, "_interp", interpolate.PchipInterpolator(r, val, extrapolate=False)
            )

    # -- radial profile -------------------------------------------------

    def radial(self, r: float) -> float:
        """V(r) for a single radius r >= 0."""
        if r > self.R:
            return 0.0
        if self.family == "step":
            return self.v
        if self.family == "gaussian":
            sigma = self.R / 3.0
            return self.v * math.exp(-0.5 * (r / sigma) ** 2)
        lo = self.table[0][0]
        if r < lo:
            r = lo
        out = float(self._interp(min(r, self.table[0][-1])))
        return max(out, 0.0)

    @property
    def support_radius(self) -> float:
        if self.family == "table":
            return float(self.table[0][-1])
        return self.R

    # -- Fourier transform ----------------------------------------------

    def fourier_radial(self, k: float) -> float:
        """hat(V)(k) = int V(x) exp(-i k.x) dx for radial V, k = |k| >= 0."""
        if self.v == 0.0:
            return 0.0
        if self.family == "step":
            return _step_fourier(self.v, self.R, k)
        return self._fourier_quadrature(round(float(k), 14))

    @lru_cache(maxsize=200_000)
    def _fourier_quadrature(self, k: float) -> float:
        rmax = self.support_radius
        if self.family == "table":
            self._check_table_resolution(k)
        if k == 0.0:
            res, err = integrate.quad(
                lambda r: self.radial(r) * r * r, 0.0, rmax,
                epsabs=0.0, epsrel=QUAD_RTOL, limit=400,
            )
            res *= 4.0 * math.pi
            err *= 4.0 * math.pi
        else:
            # 4*pi/k * int_0^R r V(r) sin(kr) dr, oscillatory weight handled
            # by the dedicated sine rule.
            res, err = integrate.quad(
                lambda r: self.radial(r) * r, 0.0, rmax,
                weight="sin", wvar=k,
                epsabs=1e-300, epsrel=QUAD_RTOL, limit=800,
            )
            res *= 4.0 * math.pi / k
            err *= 4.0 * math.pi / k
        scale = max(abs(res), self.v * rmax ** 3)
        if scale > 0 and err > 50 * QUAD_RTOL * scale:
            raise QuadratureError("radial Fourier quadrature stalled", err / scale)
        return res

    def _check_table_resolution(self, k: float) -> None:
        if k == 0.0:
            return
        h = float(np.max(np.diff(self.table[0])))
        # Demand a few samples per oscillation period of sin(kr).
        if k * h > 2.0:
            raise QuadratureError(
                f"tabulated profile too coarse for |p| = {k:.4g}", k * h / math.pi
            )

    def fourier_radial_many(self, k: np.ndarray) -> np.ndarray:
        """Vectorized hat(V)(k); falls back to per-value quadrature."""
        k = np.asarray(k, dtype=float)
        if self.family == "step":
            return _step_fourier_vec(self.v, self.R, k)
        flat = k.ravel()
        out = np.empty(flat.shape)
        for i, kv in enumerate(flat):
            out[i] = self.fourier_radial(float(kv))
        return out.reshape(k.shape)

    def scaled_fourier_radial_many(self, k: np.ndarray) -> np.ndarray:
        """hat(V_N)(k) = hat(V)(k/N)/N, vectorized over |k|."""
        return self.fourier_radial_many(np.asarray(k, dtype=float) / self.N) / self.N

    @property
    def vhat0(self) -> float:
        """hat(V)(0) = int V."""
        return self.fourier_radial(0.0)


def _step_fourier(v: float, R: float, k: float) -> float:
    if k == 0.0:
        return 4.0 * math.pi * v * R ** 3 / 3.0
    x = k * R
    if x < 1e-3:
        # series of (sin x - x cos x)/x^3 to avoid cancellation
        poly = 1.0 / 3.0 - x * x / 30.0 + x ** 4 / 840.0 - x ** 6 / 45360.0
        return 4.0 * math.pi * v * R ** 3 * poly
    return 4.0 * math.pi * v * (math.sin(x) - x * math.cos(x)) / k ** 3


def _step_fourier_vec(v: float, R: float, k: np.ndarray) -> np.ndarray:
    x = k * R
    out = np.empty_like(x)
    small = x < 1e-3
    xs = x[small]
    out[small] = 4.0 * np.pi * v * R ** 3 * (
        1.0 / 3.0 - xs ** 2 / 30.0 + xs ** 4 / 840.0 - xs ** 6 / 45360.0
    )
    xl = x[~small]
    kl = k[~small]
    out[~small] = 4.0 * np.pi * v * (np.sin(xl) - xl * np.cos(xl)) / kl ** 3
    return out


def fourier_coefficient(spec: PotentialSpec, p) -> float:
    """hat(V)(p) for a lattice vector p (given as integer triple or LatticeVector)."""
    n = _as_triple(p)
    k = TWO_PI * math.sqrt(n[0] ** 2 + n[1] ** 2 + n[2] ** 2)
    return spec.fourier_radial(k)


def scaled_coefficient(spec: PotentialSpec, r) -> float:
    """hat(V_N)(r) = hat(V)(r/N)/N at lattice vector r (physical momentum 2*pi*n/N)."""
    n = _as_triple(r)
    k = TWO_PI * math.sqrt(n[0] ** 2 + n[1] ** 2 + n[2] ** 2)
    return spec.fourier_radial(k / spec.N) / spec.N


class MomentumLattice:
    """Cube truncation of 2*pi*Z^3: all integer triples with max-norm <= K.

    Vectors are stored in lexicographic order over (nx, ny, nz); the dense
    index is the row-major position, so flat arrays reshape losslessly to a
    (2K+1, 2K+1, 2K+1) box.  Shells group the nonzero vectors by exact
    integer |n|^2.
    """

    def __init__(self, K: int):
        K = int(K)
        if K < 1:
            raise ValueError("lattice cutoff K must be >= 1")
        self.K = K
        side = 2 * K + 1
        rng = np.arange(-K, K + 1)
        grid = np.stack(np.meshgrid(rng, rng, rng, indexing="ij"), axis=-1)
        self.n = grid.reshape(-1, 3).astype(np.int64)
        self.size = side ** 3
        self.side = side
        self.nsq = np.einsum("ij,ij->i", self.n, self.n)
        self.psq = (TWO_PI ** 2) * self.nsq.astype(float)
        self.pabs = np.sqrt(self.psq)
        self.zero_index = (self.size - 1) // 2
        self._index = {tuple(v): i for i, v in enumerate(self.n)}
        self.nonzero = np.ones(self.size, dtype=bool)
        self.nonzero[self.zero_index] = False

    # -- index bookkeeping ----------------------------------------------

    def index_of(self, p) -> int:
        t = _as_triple(p)
        try:
            return self._index[t]
        except KeyError:
            raise KeyError(f"lattice vector {t} outside cutoff K={self.K}") from None

    def contains(self, p) -> bool:
        t = _as_triple(p)
        return max(abs(t[0]), abs(t[1]), abs(t[2])) <= self.K

    def vector(self, i: int) -> LatticeVector:
        return LatticeVector(tuple(int(c) for c in self.n[i]))

    def negation_index(self, i: int) -> int:
        return self.size - 1 - i  # lexicographic order reverses under n -> -n

    @property
    def shells(self) -> list[tuple[int, np.ndarray]]:
        """Nonzero vectors grouped by integer |n|^2, ascending."""
        if not hasattr(self, "_shells"):
            order: dict[int, list[int]] = {}
            for i, s in enumerate(self.nsq):
                if i == self.zero_index:
                    continue
                order.setdefault(int(s), []).append(i)
            self._shells = [
                (s, np.array(ix, dtype=np.int64)) for s, ix in sorted(order.items())
            ]
        return self._shells

    def modes_shellwise(self, max_nsq: Optional[int] = None) -> list[tuple[int, int, int]]:
        """Mode list for occupation bases: zero first, then shells ascending."""
        modes = [(0, 0, 0)]
        for s, idx in self.shells:
            if max_nsq is not None and s > max_nsq:
                break
            modes.extend(tuple(int(c) for c in self.n[i]) for i in sorted(idx))
        return modes

    # -- arrays and convolution ------------------------------------------

    def to_box(self, flat: np.ndarray) -> np.ndarray:
        return np.asarray(flat).reshape(self.side, self.side, self.side)

    def from_box(self, box: np.ndarray) -> np.ndarray:
        return np.asarray(box).reshape(self.size)

    def difference_box(self, radial: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Evaluate a radial function of |p| on all differences p - q.

        Differences of two in-cube vectors live in the cube of half-width 2K;
        the result is a (4K+1)^3 array indexed by the offset n + 2K per axis.
        """
        m = np.arange(-2 * self.K, 2 * self.K + 1)
        g = np.stack(np.meshgrid(m, m, m, indexing="ij"), axis=-1)
        kabs = TWO_PI * np.sqrt(np.einsum("...i,...i->...", g, g).astype(float))
        return np.asarray(radial(kabs), dtype=float)

    def scaled_potential_difference_box(self, spec: PotentialSpec) -> np.ndarray:
        """hat(V_N) sampled on the difference cube, cached per (spec, K)."""
        key = ("_vdiff", spec)
        cache = getattr(self, "_pot_cache", None)
        if cache is None:
            cache = self._pot_cache = {}
        if key not in cache:
            cache[key] = self.difference_box(spec.scaled_fourier_radial_many)
        return cache[key]

    def scaled_potential_values(self, spec: PotentialSpec) -> np.ndarray:
        """hat(V_N)(p) on the lattice itself (flat order)."""
        key = ("_vlat", spec)
        cache = getattr(self, "_pot_cache", None)
        if cache is None:
            cache = self._pot_cache = {}
        if key not in cache:
            cache[key] = spec.scaled_fourier_radial_many(self.pabs)
        return cache[key]


def convolve(lattice: MomentumLattice, f_diff: np.ndarray, g: np.ndarray) -> np.ndarray:
    """h(p) = sum_q f(p - q) g(q) over the lattice, alias-free.

    ``f_diff`` holds f on the difference cube (shape (4K+1,)^3, e.g. from
    :meth:`MomentumLattice.difference_box`), so f is evaluated analytically
    even where p - q leaves the cutoff cube; ``g`` is a flat coefficient
    array over the lattice.  The result is again a flat lattice array.
    """
    side = lattice.side
    big = 2 * side - 1
    f_diff = np.asarray(f_diff, dtype=float)
    if f_diff.shape != (big, big, big):
        raise ValueError(
            f"difference box must have shape {(big, big, big)}, got {f_diff.shape}"
        )
    g = np.asarray(g, dtype=float)
    if g.shape != (lattice.size,):
        raise ValueError(
            f"coefficient array must have length {lattice.size}, got {g.shape}"
        )
    h = fftconvolve(f_diff, lattice.to_box(g), mode="valid")
    return lattice.from_box(h)
