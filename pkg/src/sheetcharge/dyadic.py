"""Exact combinatorics and geometry of dyadic cubes, rectangles, and figures.

Cubes in [0,1]^d are addressed by (generation n, index k) with the child
rule: child l of (n, k) is (n+1, 2^d k + l).  Index bits are interleaved
Morton-style, bit i of the child digit selecting the upper half of axis i,
so parent/child arithmetic is pure bit shifting.  All geometry is exact:
coordinates, volumes, and perimeters are Fractions with power-of-two
denominators; floating point never enters this module.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "DyadicCube",
    "Rectangle",
    "Figure",
    "children",
    "cube_box",
    "figure_volume",
    "figure_perimeter",
    "exposed_faces",
    "morton_decode",
    "morton_encode",
    "lex_to_morton",
    "morton_to_lex",
]


def morton_decode(k: int, dim: int, gen: int) -> tuple[int, ...]:
    """Per-axis integer coordinates of cube index ``k`` at generation ``gen``.

    Bit ``t*dim + i`` of ``k`` is bit ``t`` of the axis-``i`` coordinate.
    """
    coords = [0] * dim
    for t in range(gen):
        digit = (k >> (t * dim)) & ((1 << dim) - 1)
        for i in range(dim):
            coords[i] |= ((digit >> i) & 1) << t
    return tuple(coords)


def morton_encode(coords: Sequence[int], gen: int) -> int:
    """Inverse of :func:`morton_decode`."""
    dim = len(coords)
    k = 0
    for t in range(gen):
        for i, m in enumerate(coords):
            k |= ((m >> t) & 1) << (t * dim + i)
    return k


def lex_to_morton(arr: np.ndarray) -> np.ndarray:
    """Flatten a (2^n,)*d lexicographic cell array into Morton cube order.

    Pure reshape/transpose, so it works for float and object dtypes alike.
    """
    dim = arr.ndim
    n = (arr.shape[0]).bit_length() - 1
    if arr.shape != (1 << n,) * dim:
        raise ValueError(f"expected shape (2^n,)*{dim}, got {arr.shape}")
    if n == 0:
        return arr.reshape(-1)
    bits = arr.reshape((2,) * (n * dim))
    # source axis i*n + t (bit t of axis i, MSB first) goes to t*dim + (dim-1-i)
    perm = [0] * (n * dim)
    for i in range(dim):
        for t in range(n):
            perm[t * dim + (dim - 1 - i)] = i * n + t
    return bits.transpose(perm).reshape(-1)


def morton_to_lex(flat: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`lex_to_morton`."""
    size = flat.shape[0]
    n = (size.bit_length() - 1) // dim
    if size != 1 << (n * dim):
        raise ValueError(f"length {size} is not 2^(n*{dim})")
    if n == 0:
        return flat.reshape((1,) * dim)
    bits = flat.reshape((2,) * (n * dim))
    perm = [0] * (n * dim)
    for i in range(dim):
        for t in range(n):
            perm[i * n + t] = t * dim + (dim - 1 - i)
    return bits.transpose(perm).reshape((1 << n,) * dim)


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned box prod_i [lower_i, upper_i] inside [0,1]^d, exact corners."""

    lower: tuple[Fraction, ...]
    upper: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        lo = tuple(Fraction(x) for x in self.lower)
        hi = tuple(Fraction(x) for x in self.upper)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lower/upper must be nonempty and of equal length")
        for a, b in zip(lo, hi):
            if not (0 <= a < b <= 1):
                raise ValueError(f"need 0 <= a < b <= 1 per axis, got [{a}, {b}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def side_lengths(self) -> tuple[Fraction, ...]:
        return tuple(b - a for a, b in zip(self.lower, self.upper))

    def volume(self) -> Fraction:
        v = Fraction(1)
        for s in self.side_lengths():
            v *= s
        return v

    def corners(self) -> Iterator[tuple[tuple[Fraction, ...], int]]:
        """All 2^d corners with the alternating sign (-1)^{#lower coordinates}."""
        d = self.dim
        for mask in range(1 << d):
            corner = tuple(
                self.upper[i] if (mask >> i) & 1 else self.lower[i] for i in range(d)
            )
            n_lower = d - bin(mask).count("1")
            yield corner, -1 if n_lower % 2 else 1


@dataclass(frozen=True)
class DyadicCube:
    """Dyadic cube of side 2^-gen, Morton-indexed within generation gen."""

    dim: int
    gen: int
    index: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.gen < 0:
            raise ValueError("gen must be >= 0")
        if not 0 <= self.index < 1 << (self.gen * self.dim):
            raise ValueError(
                f"index {self.index} out of range for generation {self.gen}"
            )

    def coords(self) -> tuple[int, ...]:
        return morton_decode(self.index, self.dim, self.gen)

    def box(self) -> Rectangle:
        side = Fraction(1, 1 << self.gen)
        m = self.coords()
        return Rectangle(
            tuple(mi * side for mi in m), tuple((mi + 1) * side for mi in m)
        )

    def children(self) -> list["DyadicCube"]:
        base = self.index << self.dim
        return [
            DyadicCube(self.dim, self.gen + 1, base + l)
            for l in range(1 << self.dim)
        ]

    def child_digit(self) -> int:
        """Which child of its parent this cube is (0 for generation 0)."""
        return self.index & ((1 << self.dim) - 1) if self.gen > 0 else 0

    def ancestor(self, gen: int) -> "DyadicCube":
        if not 0 <= gen <= self.gen:
            raise ValueError("ancestor generation out of range")
        return DyadicCube(self.dim, gen, self.index >> (self.dim * (self.gen - gen)))

    def contains(self, other: "DyadicCube") -> bool:
        return (
            self.dim == other.dim
            and self.gen <= other.gen
            and other.ancestor(self.gen) == self
        )

    def volume(self) -> Fraction:
        return Fraction(1, 1 << (self.gen * self.dim))


def children(cube: DyadicCube) -> list[DyadicCube]:
    """The 2^d children of ``cube``, ordered by child digit."""
    return cube.children()


def cube_box(cube: DyadicCube) -> Rectangle:
    """Exact coordinate box of ``cube``."""
    return cube.box()


@dataclass(frozen=True)
class Figure:
    """Finite union of pairwise almost-disjoint dyadic cubes, mixed generations."""

    dim: int
    cubes: tuple[DyadicCube, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        cubes = tuple(self.cubes)
        object.__setattr__(self, "cubes", cubes)
        seen: set[tuple[int, int]] = set()
        for c in cubes:
            if c.dim != self.dim:
                raise ValueError("all cubes must share the figure dimension")
            if (c.gen, c.index) in seen:
                raise ValueError(f"duplicate cube {(c.gen, c.index)}")
            seen.add((c.gen, c.index))
        # two dyadic cubes overlap iff one is an ancestor of the other
        for c in cubes:
            for g in range(c.gen):
                if (g, c.index >> (self.dim * (c.gen - g))) in seen:
                    raise ValueError(f"cube {(c.gen, c.index)} nested inside another")

    def finest_generation(self) -> int:
        return max((c.gen for c in self.cubes), default=0)

    def volume(self) -> Fraction:
        return sum((c.volume() for c in self.cubes), Fraction(0))

    def to_json(self) -> str:
        return json.dumps(
            {"dim": self.dim, "cubes": [[c.gen, c.index] for c in self.cubes]}
        )

    @classmethod
    def from_json(cls, text: str) -> "Figure":
        obj = json.loads(text)
        return cls(
            obj["dim"], tuple(DyadicCube(obj["dim"], g, k) for g, k in obj["cubes"])
        )


def figure_volume(fig: Figure) -> Fraction:
    """Exact Lebesgue measure of the figure."""
    return fig.volume()


def _occupancy(fig: Figure) -> tuple[np.ndarray, int]:
    """Boolean cell grid at the figure's finest generation, lexicographic axes."""
    h = fig.finest_generation()
    occ = np.zeros((1 << h,) * fig.dim, dtype=bool)
    for c in fig.cubes:
        scale = 1 << (h - c.gen)
        sl = tuple(slice(m * scale, (m + 1) * scale) for m in c.coords())
        occ[sl] = True
    return occ, h


def exposed_faces(fig: Figure) -> tuple[int, list[tuple[int, int, int, tuple[int, ...]]]]:
    """Boundary faces of the figure at its finest generation.

    Returns (h, faces) where each face is (axis, sign, plane, transverse):
    the face lies in the hyperplane x_axis = plane / 2^h, spans the unit
    transverse cell with lower corner transverse / 2^h, and has outward
    normal sign * e_axis.  Interior faces shared by two cells never appear.
    """
    if not fig.cubes:
        return 0, []
    occ, h = _occupancy(fig)
    faces: list[tuple[int, int, int, tuple[int, ...]]] = []
    size = 1 << h
    for axis in range(fig.dim):
        occ_ax = np.moveaxis(occ, axis, 0)
        padded = np.zeros((size + 2,) + occ_ax.shape[1:], dtype=bool)
        padded[1:-1] = occ_ax
        lower, upper = padded[:-1], padded[1:]
        for plane in range(size + 1):
            lo, up = lower[plane], upper[plane]
            out_up = lo & ~up  # occupied below, empty above: normal +e_axis
            out_dn = up & ~lo
            for trans in np.argwhere(out_up):
                faces.append((axis, 1, plane, tuple(int(t) for t in trans)))
            for trans in np.argwhere(out_dn):
                faces.append((axis, -1, plane, tuple(int(t) for t in trans)))
    return h, faces


def figure_perimeter(fig: Figure) -> Fraction:
    """(d-1)-dimensional boundary measure, exact.

    Counts faces of the refined cell grid belonging to exactly one cell and
    multiplies by the exact face area 2^(-h(d-1)).
    """
    if not fig.cubes:
        return Fraction(0)
    h, faces = exposed_faces(fig)
    return len(faces) * Fraction(1, 1 << (h * (fig.dim - 1)))
