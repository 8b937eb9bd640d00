"""The indexing category FI^m: objects, injections, symmetric-group data.

Objects are m-tuples of nonnegative integers; morphisms are tuples of
injective maps between the corresponding finite sets.  The contravariant
functor sending an object n to the coordinate space (Q^r)^n turns every
injection into a surjective selection matrix and every permutation tuple into
a block permutation matrix.

Coordinates of V^n with V = Q^r are ordered block-major: factor j, then point
index within the factor, then vector component.  Points and components are
0-based internally.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Iterator

from .exactlin import LinearMap, RationalMatrix, Subspace, subspace_from_constraints

_ZERO = Fraction(0)
_ONE = Fraction(1)


class MultiIndex(tuple):
    """An object of FI^m: a tuple of nonnegative point counts."""

    def __new__(cls, parts: Iterable[int]):
        data = tuple(int(p) for p in parts)
        if any(p < 0 for p in data):
            raise ValueError("multi-index entries must be nonnegative")
        return super().__new__(cls, data)

    @property
    def m(self) -> int:
        return len(self)

    @property
    def total(self) -> int:
        return sum(self)

    def leq(self, other: "MultiIndex") -> bool:
        """Componentwise order; this is the Hom-nonempty order on objects."""
        if len(self) != len(other):
            raise ValueError("multi-index lengths differ")
        return all(a <= b for a, b in zip(self, other))

    def render(self) -> str:
        return "|".join(str(p) for p in self)

    @classmethod
    def parse(cls, text: str) -> "MultiIndex":
        return cls(int(p) for p in text.split("|"))


def degree_add(c: MultiIndex, d: MultiIndex) -> MultiIndex:
    if len(c) != len(d):
        raise ValueError("multi-index lengths differ")
    return MultiIndex(a + b for a, b in zip(c, d))


def degree_times(i: int, c: MultiIndex) -> MultiIndex:
    if i < 0:
        raise ValueError("multiplier must be nonnegative")
    return MultiIndex(i * a for a in c)


def componentwise_max(values: Iterable[MultiIndex]) -> MultiIndex:
    out: tuple[int, ...] | None = None
    for v in values:
        out = tuple(v) if out is None else tuple(max(a, b) for a, b in zip(out, v))
    if out is None:
        raise ValueError("empty iterable")
    return MultiIndex(out)


def ambient_dim(level: MultiIndex, r: int) -> int:
    return r * level.total


def coord_index(level: MultiIndex, r: int, j: int, i: int, t: int) -> int:
    """Block-major coordinate of component t of point i in factor j."""
    return (sum(level[:j]) + i) * r + t


@dataclass(frozen=True)
class Injection:
    """A morphism of FI^m: componentwise injective maps into ``target``."""

    images: tuple[tuple[int, ...], ...]
    target: MultiIndex

    def __post_init__(self):
        if len(self.images) != self.target.m:
            raise ValueError("component count does not match target")
        for imgs, bound in zip(self.images, self.target):
            if len(set(imgs)) != len(imgs):
                raise ValueError("component map is not injective")
            if any(i < 0 or i >= bound for i in imgs):
                raise ValueError("image point out of range")

    @property
    def source(self) -> MultiIndex:
        return MultiIndex(len(imgs) for imgs in self.images)

    def render(self) -> str:
        return "|".join(",".join(str(i) for i in imgs) for imgs in self.images)

    @classmethod
    def parse(cls, text: str, target: MultiIndex) -> "Injection":
        images = tuple(
            tuple(int(x) for x in chunk.split(",")) if chunk else ()
            for chunk in text.split("|")
        )
        return cls(images, target)


def compose_injections(outer: Injection, inner: Injection) -> Injection:
    """outer o inner, defined when inner's target equals outer's source."""
    if inner.target != outer.source:
        raise ValueError("injections do not compose")
    images = tuple(
        tuple(out_imgs[i] for i in in_imgs)
        for out_imgs, in_imgs in zip(outer.images, inner.images)
    )
    return Injection(images, outer.target)


def enumerate_injections(c: MultiIndex, d: MultiIndex) -> tuple[Injection, ...]:
    """All injections c -> d, lexicographic by component images.

    Empty when some c_j > d_j; the count is the product of falling factorials.
    """
    if len(c) != len(d):
        raise ValueError("multi-index lengths differ")
    if any(cj > dj for cj, dj in zip(c, d)):
        return ()
    factor_choices = [
        tuple(itertools.permutations(range(dj), cj)) for cj, dj in zip(c, d)
    ]
    return tuple(
        Injection(images, d) for images in itertools.product(*factor_choices)
    )


def binomial_set_size(c: MultiIndex, d: MultiIndex) -> int:
    """|Hom(c,d)| divided by |Aut(c)|: the product of binomial coefficients."""
    if len(c) != len(d):
        raise ValueError("multi-index lengths differ")
    return math.prod(math.comb(dj, cj) for cj, dj in zip(c, d))


def binomial_class_key(f: Injection) -> tuple[tuple[int, ...], ...]:
    """Canonical key of the class of f modulo precomposed automorphisms."""
    return tuple(tuple(sorted(imgs)) for imgs in f.images)


def induced_linear_map(f: Injection, r: int) -> LinearMap:
    """The surjection (Q^r)^target -> (Q^r)^source selecting f's coordinates."""
    src_level = f.source
    tgt_level = f.target
    nrows = ambient_dim(src_level, r)
    ncols = ambient_dim(tgt_level, r)
    rows = []
    for j, imgs in enumerate(f.images):
        for i, image_point in enumerate(imgs):
            for t in range(r):
                row = [_ZERO] * ncols
                row[coord_index(tgt_level, r, j, image_point, t)] = _ONE
                rows.append(tuple(row))
    return LinearMap(RationalMatrix(tuple(rows), ncols))


def kernel_subspace(f: Injection, r: int) -> Subspace:
    """ker of the induced map: vectors supported off the image of f."""
    level = f.target
    n = ambient_dim(level, r)
    rows = []
    for j, imgs in enumerate(f.images):
        for image_point in imgs:
            for t in range(r):
                row = [_ZERO] * n
                row[coord_index(level, r, j, image_point, t)] = _ONE
                rows.append(row)
    return subspace_from_constraints(n, rows)


@dataclass(frozen=True)
class PermTuple:
    """An automorphism of an object: one permutation per factor."""

    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for p in self.perms:
            if sorted(p) != list(range(len(p))):
                raise ValueError("component is not a permutation")

    @property
    def level(self) -> MultiIndex:
        return MultiIndex(len(p) for p in self.perms)

    @classmethod
    def identity(cls, level: MultiIndex) -> "PermTuple":
        return cls(tuple(tuple(range(n)) for n in level))

    def compose(self, other: "PermTuple") -> "PermTuple":
        """self o other: apply ``other`` first."""
        if self.level != other.level:
            raise ValueError("levels differ")
        return PermTuple(
            tuple(
                tuple(p[q[i]] for i in range(len(q)))
                for p, q in zip(self.perms, other.perms)
            )
        )

    def inverse(self) -> "PermTuple":
        out = []
        for p in self.perms:
            inv = [0] * len(p)
            for i, image in enumerate(p):
                inv[image] = i
            out.append(tuple(inv))
        return PermTuple(tuple(out))

    def cycle_type(self) -> tuple[tuple[int, ...], ...]:
        types = []
        for p in self.perms:
            seen = [False] * len(p)
            lengths = []
            for start in range(len(p)):
                if seen[start]:
                    continue
                length = 0
                i = start
                while not seen[i]:
                    seen[i] = True
                    i = p[i]
                    length += 1
                lengths.append(length)
            types.append(tuple(sorted(lengths, reverse=True)))
        return tuple(types)

    def conjugacy_class(self) -> "ConjClass":
        return ConjClass(self.cycle_type())


def perm_tuples(level: MultiIndex) -> Iterator[PermTuple]:
    """Every element of the automorphism group of ``level``."""
    factor_groups = [tuple(itertools.permutations(range(n))) for n in level]
    for combo in itertools.product(*factor_groups):
        yield PermTuple(tuple(combo))


def group_order(level: MultiIndex) -> int:
    return math.prod(math.factorial(n) for n in level)


@lru_cache(maxsize=None)
def partitions(n: int) -> tuple[tuple[int, ...], ...]:
    """All partitions of n as weakly decreasing tuples, sorted lexicographically."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out: list[tuple[int, ...]] = []

    def rec(remaining: int, cap: int, acc: list[int]):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for part in range(min(cap, remaining), 0, -1):
            acc.append(part)
            rec(remaining - part, part, acc)
            acc.pop()

    rec(n, n, [])
    return tuple(sorted(out))


def _zee(partition: tuple[int, ...]) -> int:
    mults: dict[int, int] = {}
    for part in partition:
        mults[part] = mults.get(part, 0) + 1
    return math.prod(k**m * math.factorial(m) for k, m in mults.items())


@dataclass(frozen=True)
class ConjClass:
    """A conjugacy class of Aut(n): one partition per factor."""

    parts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for p in self.parts:
            if any(x <= 0 for x in p):
                raise ValueError("partition parts must be positive")
            if any(a < b for a, b in zip(p, p[1:])):
                raise ValueError("partition parts must be weakly decreasing")

    @property
    def level(self) -> MultiIndex:
        return MultiIndex(sum(p) for p in self.parts)

    @cached_property
    def size(self) -> int:
        return math.prod(
            math.factorial(sum(p)) // _zee(p) for p in self.parts
        )

    def is_identity(self) -> bool:
        return all(all(x == 1 for x in p) for p in self.parts)

    def multiplicity(self, j: int, k: int) -> int:
        """Number of k-cycles in factor j (0-based factor index)."""
        return sum(1 for part in self.parts[j] if part == k)

    def render(self) -> str:
        return "|".join("+".join(str(x) for x in p) for p in self.parts)

    @classmethod
    def parse(cls, text: str) -> "ConjClass":
        parts = tuple(
            tuple(int(x) for x in chunk.split("+")) if chunk else ()
            for chunk in text.split("|")
        )
        return cls(parts)

    def __repr__(self):
        return f"ConjClass({self.render()!r})"


def conj_classes(n: MultiIndex) -> tuple[ConjClass, ...]:
    """All conjugacy classes of Aut(n), deterministically ordered."""
    factor_parts = [partitions(nj) for nj in n]
    return tuple(
        ConjClass(combo) for combo in itertools.product(*factor_parts)
    )


def class_representative(c: ConjClass) -> PermTuple:
    """Cycles of the given sizes on consecutive blocks of each factor."""
    perms = []
    for partition in c.parts:
        n = sum(partition)
        perm = [0] * n
        start = 0
        for part in partition:
            for i in range(part):
                perm[start + i] = start + (i + 1) % part
            start += part
        perms.append(tuple(perm))
    return PermTuple(tuple(perms))


def coordinate_permutation(g: PermTuple, r: int) -> tuple[int, ...]:
    """The permutation of block-major coordinates induced by g."""
    level = g.level
    n = ambient_dim(level, r)
    out = [0] * n
    for j, p in enumerate(g.perms):
        for i in range(len(p)):
            for t in range(r):
                out[coord_index(level, r, j, i, t)] = coord_index(
                    level, r, j, p[i], t
                )
    return tuple(out)


def act_on_vector(g: PermTuple, r: int) -> LinearMap:
    """Block permutation matrix permuting points within each factor.

    Satisfies matrix(g o h) = matrix(g) . matrix(h).
    """
    perm = coordinate_permutation(g, r)
    n = len(perm)
    rows = [[_ZERO] * n for _ in range(n)]
    for src, dst in enumerate(perm):
        rows[dst][src] = _ONE
    return LinearMap(RationalMatrix(tuple(tuple(row) for row in rows), n))
