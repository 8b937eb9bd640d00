"""Exact rational linear algebra on small dense matrices.

Everything here is computed over Q with ``fractions.Fraction``; there is no
floating point anywhere.  Subspaces of Q^N are stored in annihilator form: a
reduced-row-echelon constraint matrix whose kernel is the subspace.  With that
convention intersection is concatenate-and-reduce, containment is a row-space
membership test, and set equality of subspaces is literal equality of their
canonical serializations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

Rational = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)

Vector = tuple[Fraction, ...]


def _coerce(value) -> Fraction:
    """Accept ints, 'p/q' strings, and Fractions.  Floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


def format_rational(value: Fraction) -> str:
    """Render as 'p/q', or plain 'p' when the denominator is one."""
    return str(value)


def _rref_rows(
    rows: Iterable[Sequence[Fraction]], cols: int, max_rank: int | None = None
) -> list[tuple[Fraction, ...]] | None:
    """Reduced row echelon form with zero rows dropped.

    Returns None as soon as the rank exceeds ``max_rank`` (used to prune
    lattice intersections past a codimension cutoff).
    """
    mat = [list(row) for row in rows]
    nrows = len(mat)
    pivot_row = 0
    for col in range(cols):
        pivot = None
        for r in range(pivot_row, nrows):
            if mat[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        if pivot != pivot_row:
            mat[pivot_row], mat[pivot] = mat[pivot], mat[pivot_row]
        lead = mat[pivot_row][col]
        if lead != 1:
            inv = _ONE / lead
            mat[pivot_row] = [e * inv for e in mat[pivot_row]]
        prow = mat[pivot_row]
        for r in range(nrows):
            if r == pivot_row:
                continue
            factor = mat[r][col]
            if factor != 0:
                cur = mat[r]
                mat[r] = [a - factor * b for a, b in zip(cur, prow)]
        pivot_row += 1
        if max_rank is not None and pivot_row > max_rank:
            return None
        if pivot_row == nrows:
            break
    return [tuple(row) for row in mat[:pivot_row]]


def _pivot_columns(rref_rows: Sequence[Sequence[Fraction]]) -> list[int]:
    pivots = []
    for row in rref_rows:
        for c, entry in enumerate(row):
            if entry != 0:
                pivots.append(c)
                break
    return pivots


@dataclass(frozen=True)
class RationalMatrix:
    """Dense matrix of exact rationals, stored row-major and immutable."""

    entries: tuple[tuple[Fraction, ...], ...]
    cols: int

    def __post_init__(self):
        if self.cols < 0:
            raise ValueError("negative column count")
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("ragged matrix rows")

    @property
    def rows(self) -> int:
        return len(self.entries)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence], cols: int | None = None) -> "RationalMatrix":
        data = tuple(tuple(_coerce(e) for e in row) for row in rows)
        if cols is None:
            if not data:
                raise ValueError("column count required for an empty matrix")
            cols = len(data[0])
        return cls(data, cols)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(
            tuple(
                tuple(_ONE if i == j else _ZERO for j in range(n)) for i in range(n)
            ),
            n,
        )

    @classmethod
    def zero(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls(tuple(tuple(_ZERO for _ in range(cols)) for _ in range(rows)), cols)

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(
            tuple(
                tuple(self.entries[r][c] for r in range(self.rows))
                for c in range(self.cols)
            ),
            self.rows,
        )

    def matmul(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch: {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        out = []
        for row in self.entries:
            acc = [_ZERO] * other.cols
            for k, a in enumerate(row):
                if a == 0:
                    continue
                brow = other.entries[k]
                acc = [s + a * b for s, b in zip(acc, brow)]
            out.append(tuple(acc))
        return RationalMatrix(tuple(out), other.cols)

    __matmul__ = matmul

    def apply(self, vector: Sequence[Fraction]) -> Vector:
        if len(vector) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(
            sum((a * v for a, v in zip(row, vector) if a != 0), _ZERO)
            for row in self.entries
        )


def rref(m: RationalMatrix) -> RationalMatrix:
    """Unique reduced row echelon form; zero rows dropped, row space preserved."""
    reduced = _rref_rows(m.entries, m.cols)
    assert reduced is not None
    return RationalMatrix(tuple(reduced), m.cols)


def rank(m: RationalMatrix) -> int:
    reduced = _rref_rows(m.entries, m.cols)
    assert reduced is not None
    return len(reduced)


def kernel_basis(m: RationalMatrix) -> tuple[Vector, ...]:
    """Deterministic basis of ker(m), one vector per free column, ascending."""
    reduced = _rref_rows(m.entries, m.cols)
    assert reduced is not None
    pivots = _pivot_columns(reduced)
    pivot_set = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        vec = [_ZERO] * m.cols
        vec[free] = _ONE
        for row, p in zip(reduced, pivots):
            if row[free] != 0:
                vec[p] = -row[free]
        basis.append(tuple(vec))
    return tuple(basis)


def column_space_basis(m: RationalMatrix) -> tuple[Vector, ...]:
    """Canonical basis of the column space (RREF rows of the transpose)."""
    reduced = _rref_rows(m.transpose().entries, m.rows)
    assert reduced is not None
    return tuple(reduced)


def independent_extension(
    base: Sequence[Vector], candidates: Sequence[Vector], cols: int
) -> list[Vector]:
    """Greedily pick candidates that grow the span of ``base``, in order."""
    stack = [list(v) for v in base]
    picked: list[Vector] = []
    current = _rref_rows(stack, cols)
    assert current is not None
    rk = len(current)
    for cand in candidates:
        trial = _rref_rows(list(current) + [list(cand)], cols)
        assert trial is not None
        if len(trial) > rk:
            picked.append(cand)
            current = trial
            rk += 1
    return picked


def solve_in_basis(
    basis: Sequence[Vector], rhs: Sequence[Vector], dim: int
) -> list[list[Fraction]]:
    """Coordinates of each rhs vector in the given independent basis.

    ``basis`` and ``rhs`` are vectors of length ``dim``; every rhs must lie in
    the span of the basis.  Returns coords[k][t] = coefficient of basis[k] in
    rhs[t].
    """
    s = len(basis)
    t = len(rhs)
    if s == 0:
        for v in rhs:
            if any(e != 0 for e in v):
                raise ValueError("vector outside span of empty basis")
        return []
    aug = [
        [basis[k][r] for k in range(s)] + [rhs[j][r] for j in range(t)]
        for r in range(dim)
    ]
    reduced = _rref_rows(aug, s + t)
    assert reduced is not None
    pivots = _pivot_columns(reduced)
    if any(p >= s for p in pivots):
        raise ValueError("vector outside span of basis")
    coords = [[_ZERO] * t for _ in range(s)]
    for row, p in zip(reduced, pivots):
        for j in range(t):
            coords[p][j] = row[s + j]
    return coords


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of Q^N as the kernel of a canonical constraint matrix.

    The constraint matrix is in RREF with no zero rows, so two Subspace values
    describe the same set of points iff they are equal (and iff their
    serializations are byte-identical).  Codimension is the row count.
    """

    ambient_dim: int
    constraints: RationalMatrix

    def __post_init__(self):
        if self.ambient_dim < 0:
            raise ValueError("negative ambient dimension")
        if self.constraints.cols != self.ambient_dim:
            raise ValueError("constraint width does not match ambient dimension")
        pivots = _pivot_columns(self.constraints.entries)
        if len(pivots) != self.constraints.rows:
            raise ValueError("constraint matrix has a zero row")
        if any(b <= a for a, b in zip(pivots, pivots[1:])):
            raise ValueError("constraint matrix is not in RREF order")
        for i, row in enumerate(self.constraints.entries):
            if row[pivots[i]] != 1:
                raise ValueError("pivot entries must be one")
            for k, p in enumerate(pivots):
                if k != i and row[p] != 0:
                    raise ValueError("pivot columns must be cleared")

    @property
    def codim(self) -> int:
        return self.constraints.rows

    @property
    def dim(self) -> int:
        return self.ambient_dim - self.codim

    @classmethod
    def ambient(cls, n: int) -> "Subspace":
        return cls(n, RationalMatrix((), n))

    @cached_property
    def serialization(self) -> str:
        rows = ";".join(
            ",".join(format_rational(e) for e in row) for row in self.constraints.entries
        )
        return f"{self.ambient_dim}:{rows}"

    def serialize(self) -> str:
        return self.serialization

    @classmethod
    def parse(cls, text: str) -> "Subspace":
        head, _, body = text.partition(":")
        n = int(head)
        rows = []
        if body:
            for chunk in body.split(";"):
                rows.append([Fraction(e) for e in chunk.split(",")])
        return cls(n, RationalMatrix.from_rows(rows, n))

    def contains_vector(self, vector: Sequence) -> bool:
        vec = [_coerce(v) for v in vector]
        if len(vec) != self.ambient_dim:
            raise ValueError("vector length mismatch")
        return all(e == 0 for e in self.constraints.apply(vec))

    def basis(self) -> tuple[Vector, ...]:
        """A deterministic spanning set (kernel basis of the constraints)."""
        return kernel_basis(self.constraints)

    def __repr__(self):
        return f"Subspace({self.serialization!r})"


def subspace_from_constraints(n: int, rows: Iterable[Sequence]) -> Subspace:
    """Canonical subspace {v in Q^n : rows . v = 0}."""
    data = [tuple(_coerce(e) for e in row) for row in rows]
    for row in data:
        if len(row) != n:
            raise ValueError(f"constraint row has {len(row)} entries, ambient is {n}")
    reduced = _rref_rows(data, n)
    assert reduced is not None
    return Subspace(n, RationalMatrix(tuple(reduced), n))


def span(n: int, vectors: Iterable[Sequence]) -> Subspace:
    """The subspace of Q^n spanned by the given vectors."""
    data = [tuple(_coerce(e) for e in v) for v in vectors]
    for v in data:
        if len(v) != n:
            raise ValueError("spanning vector length mismatch")
    reduced = _rref_rows(data, n)
    assert reduced is not None
    constraints = kernel_basis(RationalMatrix(tuple(reduced), n))
    return subspace_from_constraints(n, constraints)


def intersect(a: Subspace, b: Subspace, max_codim: int | None = None) -> Subspace | None:
    """Canonical a .. b.  With ``max_codim`` set, returns None past the cutoff."""
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimensions differ")
    reduced = _rref_rows(
        list(a.constraints.entries) + list(b.constraints.entries),
        a.ambient_dim,
        max_rank=max_codim,
    )
    if reduced is None:
        return None
    return Subspace(a.ambient_dim, RationalMatrix(tuple(reduced), a.ambient_dim))


def contains(a: Subspace, b: Subspace) -> bool:
    """True iff b is a subset of a (a's constraints lie in b's row space)."""
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimensions differ")
    brows = b.constraints.entries
    pivots = _pivot_columns(brows)
    for row in a.constraints.entries:
        work = list(row)
        for brow, p in zip(brows, pivots):
            factor = work[p]
            if factor != 0:
                work = [w - factor * e for w, e in zip(work, brow)]
        if any(w != 0 for w in work):
            return False
    return True


@dataclass(frozen=True)
class LinearMap:
    """A linear map Q^source -> Q^target given by its matrix."""

    matrix: RationalMatrix

    @property
    def target_dim(self) -> int:
        return self.matrix.rows

    @property
    def source_dim(self) -> int:
        return self.matrix.cols

    @classmethod
    def identity(cls, n: int) -> "LinearMap":
        return cls(RationalMatrix.identity(n))


def preimage(f: LinearMap, x: Subspace) -> Subspace:
    """The subspace {w : f(w) in x}, canonically reduced."""
    if x.ambient_dim != f.target_dim:
        raise ValueError("subspace does not live in the map's target")
    composed = x.constraints.matmul(f.matrix)
    reduced = _rref_rows(composed.entries, f.source_dim)
    assert reduced is not None
    return Subspace(f.source_dim, RationalMatrix(tuple(reduced), f.source_dim))


def direct_image(f: LinearMap, x: Subspace) -> Subspace:
    """The image f(x), computed by mapping a spanning set of x."""
    if x.ambient_dim != f.source_dim:
        raise ValueError("subspace does not live in the map's source")
    images = [f.matrix.apply(v) for v in x.basis()]
    return span(f.target_dim, images)
