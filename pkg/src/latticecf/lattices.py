"""Concrete lattice quantizers and self-similar nested chains.

Three families are supported: the integer lattice Z^n, the checkerboard
lattice D4 and the Gosset lattice E8.  Each comes with an exact
nearest-point routine using a deterministic lexicographic tie-break,
dither sampling uniform over the Voronoi cell, and Monte-Carlo second
moment estimation.  Nesting is realized only by integer self-scaling
(coarse = k * fine), so subgroup containment, coset counts and second
moment ratios are exact by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

FAMILY_Z = "IntegerZ_n"
FAMILY_D4 = "D4"
FAMILY_E8 = "E8"

COMMON = "common"
REFINEMENT = "refinement"

# Per-dimension second moment and Voronoi cell volume at unit scale.
_BASE_SECOND_MOMENT = {
    FAMILY_Z: 1.0 / 12.0,
    FAMILY_D4: 13.0 / 120.0,
    FAMILY_E8: 929.0 / 12960.0,
}
_BASE_VOLUME = {FAMILY_Z: 1.0, FAMILY_D4: 2.0, FAMILY_E8: 1.0}
_FIXED_DIMENSION = {FAMILY_D4: 4, FAMILY_E8: 8}

_ALIASES = {
    "integerz_n": FAMILY_Z,
    "zn": FAMILY_Z,
    "z": FAMILY_Z,
    "z^n": FAMILY_Z,
    "d4": FAMILY_D4,
    "e8": FAMILY_E8,
}

_G_D4 = np.array(
    [[2.0, 0.0, 0.0, 0.0],
     [1.0, 1.0, 0.0, 0.0],
     [1.0, 0.0, 1.0, 0.0],
     [1.0, 0.0, 0.0, 1.0]]
)

_G_E8 = np.array(
    [[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
     [-1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
     [0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
     [0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
     [0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0],
     [0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0],
     [0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0],
     [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5]]
)


def canonical_family(name: str) -> str:
    """Map a family name or config alias ("Zn", "D4", "E8") to canonical form."""
    key = str(name).lower()
    if key not in _ALIASES:
        raise ValueError(f"unknown lattice family {name!r}")
    return _ALIASES[key]


@dataclass(frozen=True)
class LatticeSpec:
    """A scaled copy of one of the base lattice families.

    The lattice is ``scale * base_family``; its per-dimension second
    moment is ``scale**2 * base_second_moment`` and its cell volume is
    ``scale**dimension * base_volume``.
    """

    family: str
    dimension: int
    scale: float
    base_second_moment: float
    base_volume: float

    def __post_init__(self):
        if self.family not in _BASE_SECOND_MOMENT:
            raise ValueError(f"unknown lattice family {self.family!r}")
        fixed = _FIXED_DIMENSION.get(self.family)
        if fixed is not None and self.dimension != fixed:
            raise ValueError(
                f"{self.family} is {fixed}-dimensional, got dimension {self.dimension}"
            )
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if not (self.base_second_moment > 0 and self.base_volume > 0):
            raise ValueError("base second moment and volume must be positive")


def make_lattice(family: str, dimension: Optional[int] = None, scale: float = 1.0) -> LatticeSpec:
    """Build a LatticeSpec for a family, filling in its fixed constants."""
    fam = canonical_family(family)
    if dimension is None:
        dimension = _FIXED_DIMENSION.get(fam, 1)
    return LatticeSpec(
        family=fam,
        dimension=int(dimension),
        scale=float(scale),
        base_second_moment=_BASE_SECOND_MOMENT[fam],
        base_volume=_BASE_VOLUME[fam],
    )


def scaled(lattice: LatticeSpec, factor: float) -> LatticeSpec:
    """The same lattice blown up by a positive factor."""
    if not factor > 0:
        raise ValueError("scale factor must be positive")
    return replace(lattice, scale=lattice.scale * factor)


def second_moment(lattice: LatticeSpec) -> float:
    """Analytic per-dimension second moment of the scaled cell."""
    return lattice.scale ** 2 * lattice.base_second_moment


def cell_volume(lattice: LatticeSpec) -> float:
    return lattice.scale ** lattice.dimension * lattice.base_volume


def generator_matrix(lattice: LatticeSpec) -> np.ndarray:
    """Row-generator matrix of the scaled lattice."""
    if lattice.family == FAMILY_Z:
        base = np.eye(lattice.dimension)
    elif lattice.family == FAMILY_D4:
        base = _G_D4
    else:
        base = _G_E8
    return lattice.scale * base


def _as_rows(lattice: LatticeSpec, x) -> tuple[np.ndarray, tuple]:
    x = np.asarray(x, dtype=float)
    n = lattice.dimension
    if n == 1:
        return x.reshape(-1, 1), x.shape
    if x.ndim == 0 or x.shape[-1] != n:
        raise ValueError(
            f"expected vectors with trailing axis {n}, got shape {x.shape}"
        )
    return x.reshape(-1, n), x.shape


def _lex_less(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rowwise: is a lexicographically smaller than b."""
    diff = a != b
    first = diff.argmax(axis=1)
    rows = np.arange(a.shape[0])
    return diff.any(axis=1) & (a[rows, first] < b[rows, first])


def _nearest_zn(x: np.ndarray) -> np.ndarray:
    # round half down, so ties pick the lexicographically smaller vector
    return np.ceil(x - 0.5)


def _nearest_dn(x: np.ndarray) -> np.ndarray:
    """Nearest point of D_n (integer vectors with even coordinate sum).

    Rounds every coordinate to the nearest integer, then repairs an odd
    sum by re-rounding the single coordinate that costs least.  Ties are
    resolved toward the lexicographically smallest of all nearest
    points: prefer the earliest coordinate whose repair rounds down,
    otherwise the latest tied coordinate (whose repair rounds up).
    """
    f = np.ceil(x - 0.5)
    d = x - f
    down = d <= 0.0
    alt = np.where(down, f - 1.0, f + 1.0)
    # extra squared distance incurred by re-rounding coordinate i
    penalty = 1.0 - 2.0 * np.abs(d)
    g = f.copy()
    odd = np.nonzero((f.sum(axis=1) % 2.0) != 0.0)[0]
    if odd.size:
        p = penalty[odd]
        tied = p == p.min(axis=1, keepdims=True)
        tied_down = tied & down[odd]
        has_down = tied_down.any(axis=1)
        first_down = tied_down.argmax(axis=1)
        last_tied = tied.shape[1] - 1 - tied[:, ::-1].argmax(axis=1)
        cols = np.where(has_down, first_down, last_tied)
        g[odd, cols] = alt[odd, cols]
    return g


def _nearest_e8(x: np.ndarray) -> np.ndarray:
    # E8 = D8 union (D8 + 1/2); quantize against both cosets
    c0 = _nearest_dn(x)
    c1 = _nearest_dn(x - 0.5) + 0.5
    d0 = ((x - c0) ** 2).sum(axis=1)
    d1 = ((x - c1) ** 2).sum(axis=1)
    take1 = (d1 < d0) | ((d1 == d0) & _lex_less(c1, c0))
    return np.where(take1[:, None], c1, c0)


_NEAREST = {FAMILY_Z: _nearest_zn, FAMILY_D4: _nearest_dn, FAMILY_E8: _nearest_e8}


def nearest_point(lattice: LatticeSpec, x) -> np.ndarray:
    """Closest lattice point to x in Euclidean distance.

    Accepts a single vector or any array whose trailing axis matches the
    lattice dimension (dimension-1 lattices accept any shape and act
    elementwise).  Equidistant candidates resolve to the
    lexicographically smallest coordinate vector.
    """
    rows, shape = _as_rows(lattice, x)
    out = _NEAREST[lattice.family](rows / lattice.scale) * lattice.scale
    return out.reshape(shape)


def mod_lattice(lattice: LatticeSpec, x) -> np.ndarray:
    """Reduce x into the Voronoi cell: x minus its nearest lattice point."""
    rows, shape = _as_rows(lattice, x)
    out = rows - _NEAREST[lattice.family](rows / lattice.scale) * lattice.scale
    return out.reshape(shape)


class DitherVector(NamedTuple):
    """A point of the Voronoi cell, used as a subtractive dither."""

    values: np.ndarray


def dither_batch(lattice: LatticeSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `count` independent points uniform over the Voronoi cell.

    Uniform samples over the fundamental parallelepiped of the generator
    are folded into the cell by the modulo map; both regions tile space
    under the lattice, so the result is exactly uniform over the cell.
    """
    u = rng.random((count, lattice.dimension))
    return mod_lattice(lattice, u @ generator_matrix(lattice))


def sample_dither(lattice: LatticeSpec, seed) -> DitherVector:
    """One dither vector, uniform over the Voronoi cell, fixed by the seed."""
    rng = np.random.default_rng(seed)
    return DitherVector(values=dither_batch(lattice, 1, rng)[0])


class SecondMomentEstimate(NamedTuple):
    estimate: float
    std_error: float


def second_moment_estimate(lattice: LatticeSpec, n_samples: int, seed) -> SecondMomentEstimate:
    """Monte-Carlo estimate of the per-dimension second moment.

    Averages ||T||^2 / n over dither draws and reports the standard
    error of that mean alongside the estimate.
    """
    n_samples = int(n_samples)
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    rng = np.random.default_rng(seed)
    chunk = 1 << 17
    norms = []
    left = n_samples
    while left > 0:
        m = min(left, chunk)
        t = dither_batch(lattice, m, rng)
        norms.append((t * t).sum(axis=1))
        left -= m
    w = np.concatenate(norms) / lattice.dimension
    return SecondMomentEstimate(
        estimate=float(w.mean()),
        std_error=float(w.std(ddof=1) / math.sqrt(n_samples)),
    )


@dataclass(frozen=True)
class NestedChain:
    """Self-similar nesting around a base lattice.

    Two levels give a quantization lattice (the base) and a shaping
    lattice ``k_mid_to_coarse`` times coarser.  Three levels insert a
    refinement: the base becomes the finest lattice and the middle one
    is ``k_fine_to_mid`` times coarser than it.
    """

    base: LatticeSpec
    k_mid_to_coarse: int
    k_fine_to_mid: int = 1
    levels: int = 2

    def __post_init__(self):
        if self.levels not in (2, 3):
            raise ValueError("levels must be 2 or 3")
        if self.k_mid_to_coarse < 1 or self.k_fine_to_mid < 1:
            raise ValueError("nesting ratios must be positive integers")
        if self.levels == 2 and self.k_fine_to_mid != 1:
            raise ValueError("a two-level chain has no refinement ratio")

    @property
    def fine(self) -> LatticeSpec:
        """The finest lattice in the chain."""
        return self.base

    @property
    def mid(self) -> LatticeSpec:
        """The quantization lattice carrying the common description."""
        if self.levels == 3:
            return scaled(self.base, self.k_fine_to_mid)
        return self.base

    @property
    def coarse(self) -> LatticeSpec:
        """The shaping lattice."""
        return scaled(self.mid, self.k_mid_to_coarse)


class ChainRates(NamedTuple):
    common: float
    refinement: float
    total: float


def chain_rates(chain: NestedChain) -> ChainRates:
    """Coding rates of the chain in bits per dimension.

    The quotient of two self-similar lattices with ratio k has k**n
    cosets, hence log2(k) bits per dimension.
    """
    r_c = math.log2(chain.k_mid_to_coarse)
    r_r = math.log2(chain.k_fine_to_mid) if chain.levels == 3 else 0.0
    return ChainRates(common=r_c, refinement=r_r, total=r_c + r_r)


def _level_pair(chain: NestedChain, level: str) -> tuple[LatticeSpec, LatticeSpec, int]:
    if level == COMMON:
        return chain.mid, chain.coarse, chain.k_mid_to_coarse
    if level == REFINEMENT:
        if chain.levels != 3:
            raise ValueError("refinement level requires a three-level chain")
        return chain.fine, chain.mid, chain.k_fine_to_mid
    raise ValueError(f"unknown level {level!r}, expected {COMMON!r} or {REFINEMENT!r}")


def coset_index(chain: NestedChain, coset_leader, level: str = COMMON) -> int:
    """Index of a coset leader among the k**n cosets of the chosen level.

    The leader must lie in the finer lattice and inside the Voronoi cell
    of the coarser one (its own modulo reduction).  Indexing is mixed
    radix over the integer coordinates in the finer lattice's generator
    frame, so it round-trips exactly with coset_leader_of.
    """
    fine, coarse, k = _level_pair(chain, level)
    v = np.asarray(coset_leader, dtype=float).reshape(-1)
    if v.shape != (fine.dimension,):
        raise ValueError(f"leader must have length {fine.dimension}, got {v.shape}")
    gen = generator_matrix(fine)
    coords = np.linalg.solve(gen.T, v)
    digits = np.rint(coords)
    if not np.allclose(digits @ gen, v, rtol=0.0, atol=1e-6 * fine.scale):
        raise ValueError("point is not a member of the finer lattice")
    if not np.allclose(mod_lattice(coarse, v), v, rtol=0.0, atol=1e-9 * coarse.scale):
        raise ValueError("point is not reduced into the coarser Voronoi cell")
    index = 0
    for digit in np.asarray(digits, dtype=np.int64)[::-1]:
        index = index * k + int(digit) % k
    return index


def coset_leader_of(chain: NestedChain, index: int, level: str = COMMON) -> np.ndarray:
    """Inverse of coset_index: the canonical leader for an index."""
    fine, coarse, k = _level_pair(chain, level)
    n = fine.dimension
    index = int(index)
    if not 0 <= index < k ** n:
        raise ValueError(f"index must lie in [0, {k ** n}), got {index}")
    digits = np.empty(n)
    for i in range(n):
        index, digit = divmod(index, k)
        digits[i] = digit
    point = digits @ generator_matrix(fine)
    return mod_lattice(coarse, point)
