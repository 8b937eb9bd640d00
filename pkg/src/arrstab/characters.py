"""Class functions on products of symmetric groups and character polynomials.

A character polynomial is a rational polynomial in the simultaneous class
functions X_k^{(j)} counting k-cycles in the j-th factor; it evaluates on the
conjugacy classes of every level at once.  Characters of the engine's
cohomology modules are computed classwise from equivariant traces, fitted to
polynomials by an exact linear solve, paired by the usual class-size inner
product, and decomposed against Murnaghan-Nakayama character values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from typing import Mapping, Sequence

from .arrangement import (
    ArrangementSpec,
    LatticeBuilder,
    PrimitiveClass,
    build_lattice,
    orbit_of,
    primitive_classes,
)
from .exactlin import _rref_rows, format_rational
from .fim import (
    ConjClass,
    MultiIndex,
    class_representative,
    conj_classes,
    degree_times,
    group_order,
    partitions,
)
from .homology import LatticeHomology

_ZERO = Fraction(0)
_ONE = Fraction(1)

# A monomial maps (factor j, cycle length k) -> exponent; canonical form is a
# tuple of ((j, k), e) sorted by (j, k) with positive e.  Factors are 0-based.
Monomial = tuple[tuple[tuple[int, int], int], ...]


class FitError(ValueError):
    """Base class for character-polynomial fitting failures."""


class FitInconsistentError(FitError):
    """No polynomial of the requested degree matches the samples."""


class FitUnderdeterminedError(FitError):
    """The samples do not pin the polynomial down; more levels are needed."""


@dataclass(frozen=True, eq=False)
class ClassFunction:
    """A total map from the conjugacy classes of one level to Q."""

    level: MultiIndex
    values: Mapping[ConjClass, Fraction]

    def __post_init__(self):
        domain = set(conj_classes(self.level))
        if set(self.values) != domain:
            raise ValueError("values must cover exactly the conjugacy classes")

    def __call__(self, c: ConjClass) -> Fraction:
        return self.values[c]

    @property
    def identity_value(self) -> Fraction:
        for c, v in self.values.items():
            if c.is_identity():
                return v
        raise AssertionError("no identity class")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClassFunction):
            return NotImplemented
        return self.level == other.level and dict(self.values) == dict(other.values)


def class_function(level: MultiIndex, values: Mapping[ConjClass, Fraction]) -> ClassFunction:
    return ClassFunction(level, dict(values))


def trivial_character(level: MultiIndex) -> ClassFunction:
    return ClassFunction(level, {c: _ONE for c in conj_classes(level)})


def _pointwise(a: ClassFunction, b: ClassFunction, op) -> ClassFunction:
    if a.level != b.level:
        raise ValueError("class functions live on different levels")
    return ClassFunction(a.level, {c: op(a(c), b(c)) for c in a.values})


def sum_characters(level: MultiIndex, items: Sequence[ClassFunction]) -> ClassFunction:
    out = {c: _ZERO for c in conj_classes(level)}
    for chi in items:
        if chi.level != level:
            raise ValueError("class functions live on different levels")
        for c in out:
            out[c] += chi(c)
    return ClassFunction(level, out)


@dataclass(frozen=True)
class CharacterPolynomial:
    """Rational polynomial in the X_k^{(j)}, canonically ordered."""

    m: int
    coeffs: tuple[tuple[Monomial, Fraction], ...]

    @staticmethod
    def _key(mono: Monomial) -> tuple:
        total = sum(k * e for (_, k), e in mono)
        return (total, mono)

    @classmethod
    def from_dict(cls, m: int, data: Mapping[Monomial, Fraction]) -> "CharacterPolynomial":
        cleaned = {mono: v for mono, v in data.items() if v != 0}
        ordered = tuple(sorted(cleaned.items(), key=lambda kv: cls._key(kv[0])))
        return cls(m, ordered)

    @classmethod
    def constant(cls, value, m: int = 1) -> "CharacterPolynomial":
        return cls.from_dict(m, {(): Fraction(value)})

    @classmethod
    def variable(cls, k: int, j: int = 1, m: int = 1) -> "CharacterPolynomial":
        """X_k^{(j)} with 1-based factor index j."""
        if not (1 <= j <= m):
            raise ValueError("factor index out of range")
        if k < 1:
            raise ValueError("cycle length must be positive")
        return cls.from_dict(m, {(((j - 1, k), 1),): _ONE})

    def _as_dict(self) -> dict[Monomial, Fraction]:
        return dict(self.coeffs)

    def __add__(self, other) -> "CharacterPolynomial":
        other = self._coerce(other)
        data = self._as_dict()
        for mono, v in other.coeffs:
            data[mono] = data.get(mono, _ZERO) + v
        return CharacterPolynomial.from_dict(self.m, data)

    def __sub__(self, other) -> "CharacterPolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "CharacterPolynomial":
        return self._coerce(other) + (-self)

    __radd__ = __add__

    def __neg__(self) -> "CharacterPolynomial":
        return CharacterPolynomial.from_dict(
            self.m, {mono: -v for mono, v in self.coeffs}
        )

    def __mul__(self, other) -> "CharacterPolynomial":
        if isinstance(other, (int, Fraction)):
            return CharacterPolynomial.from_dict(
                self.m, {mono: v * Fraction(other) for mono, v in self.coeffs}
            )
        other = self._coerce(other)
        data: dict[Monomial, Fraction] = {}
        for ma, va in self.coeffs:
            for mb, vb in other.coeffs:
                exps: dict[tuple[int, int], int] = dict(ma)
                for key, e in mb:
                    exps[key] = exps.get(key, 0) + e
                mono = tuple(sorted(exps.items()))
                data[mono] = data.get(mono, _ZERO) + va * vb
        return CharacterPolynomial.from_dict(self.m, data)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "CharacterPolynomial":
        return CharacterPolynomial.from_dict(
            self.m, {mono: v / Fraction(scalar) for mono, v in self.coeffs}
        )

    def _coerce(self, other) -> "CharacterPolynomial":
        if isinstance(other, CharacterPolynomial):
            if other.m != self.m:
                raise ValueError("factor counts differ")
            return other
        if isinstance(other, (int, Fraction)):
            return CharacterPolynomial.constant(other, self.m)
        raise TypeError(f"cannot combine with {other!r}")

    def multidegree(self) -> MultiIndex:
        """Componentwise max over monomials of the weighted exponent sums."""
        degs = [0] * self.m
        for mono, _ in self.coeffs:
            current = [0] * self.m
            for (j, k), e in mono:
                current[j] += k * e
            degs = [max(a, b) for a, b in zip(degs, current)]
        return MultiIndex(degs)

    def evaluate(self, c: ConjClass) -> Fraction:
        total = _ZERO
        for mono, coeff in self.coeffs:
            term = coeff
            for (j, k), e in mono:
                term *= Fraction(c.multiplicity(j, k)) ** e
                if term == 0:
                    break
            total += term
        return total

    def as_class_function(self, level: MultiIndex) -> ClassFunction:
        if level.m != self.m:
            raise ValueError("level has wrong number of factors")
        return ClassFunction(level, {c: self.evaluate(c) for c in conj_classes(level)})

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        pieces = []
        for mono, coeff in self.coeffs:
            factors = [
                f"X{k}^({j + 1})" + (f"^{e}" if e > 1 else "")
                for (j, k), e in mono
            ]
            body = "*".join(factors)
            mag = abs(coeff)
            if not body:
                text = format_rational(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{format_rational(mag)}*{body}"
            pieces.append((coeff < 0, text))
        first_neg, first = pieces[0]
        out = ("-" if first_neg else "") + first
        for neg, text in pieces[1:]:
            out += (" - " if neg else " + ") + text
        return out

    @classmethod
    def parse(cls, text: str, m: int = 1) -> "CharacterPolynomial":
        import re

        poly = cls.from_dict(m, {})
        stripped = text.replace(" ", "")
        if not stripped or stripped == "0":
            return poly
        for sign, term in re.findall(r"([+-]?)([^+-]+)", stripped):
            coeff = Fraction(-1 if sign == "-" else 1)
            mono: dict[tuple[int, int], int] = {}
            for factor in term.split("*"):
                match = re.fullmatch(r"X(\d+)\^\((\d+)\)(?:\^(\d+))?", factor)
                if match:
                    k, j, e = int(match[1]), int(match[2]), int(match[3] or 1)
                    if not (1 <= j <= m):
                        raise ValueError(f"factor index {j} out of range")
                    mono[(j - 1, k)] = mono.get((j - 1, k), 0) + e
                else:
                    coeff *= Fraction(factor)
            key = tuple(sorted(mono.items()))
            poly = poly + cls.from_dict(m, {key: coeff})
        return poly

    def __repr__(self):
        return f"CharacterPolynomial({self.render()!r})"


def evaluate(p: CharacterPolynomial, c: ConjClass) -> Fraction:
    """Substitute cycle-count multiplicities of the class into p."""
    return p.evaluate(c)


def _monomials_within(bound: MultiIndex) -> list[Monomial]:
    """All monomials of multidegree <= bound, canonically ordered."""
    per_factor: list[list[tuple[tuple[tuple[int, int], int], ...]]] = []
    for j, cap in enumerate(bound):
        factor_monos: list[tuple] = []

        def rec(k: int, budget: int, acc: list):
            factor_monos.append(tuple(acc))
            for kk in range(k, budget + 1):
                for e in range(1, budget // kk + 1):
                    acc.append(((j, kk), e))
                    rec(kk + 1, budget - kk * e, acc)
                    acc.pop()

        rec(1, cap, [])
        per_factor.append(sorted(set(factor_monos)))
    out = []
    for combo in itertools.product(*per_factor):
        mono = tuple(sorted(e for chunk in combo for e in chunk))
        out.append(mono)
    return sorted(set(out), key=CharacterPolynomial._key)


def fit_character_polynomial(
    samples: Sequence[tuple[MultiIndex, ClassFunction]],
    degree_bound: MultiIndex,
) -> CharacterPolynomial:
    """The unique polynomial of multidegree <= degree_bound through the samples.

    Solved exactly over the monomial basis.  Raises FitInconsistentError when
    no such polynomial exists (a falsification signal) and
    FitUnderdeterminedError when the sampled levels leave free coefficients.
    """
    if len({level for level, _ in samples}) < 2:
        raise ValueError("need samples at two or more distinct levels")
    for level, chi in samples:
        if not degree_bound.leq(level):
            raise ValueError("all sampled levels must dominate the degree bound")
        if chi.level != level:
            raise ValueError("sample level mismatch")
    m = degree_bound.m
    monos = _monomials_within(degree_bound)
    basis = [CharacterPolynomial.from_dict(m, {mono: _ONE}) for mono in monos]
    rows = []
    for level, chi in samples:
        for c in conj_classes(level):
            rows.append([b.evaluate(c) for b in basis] + [chi(c)])
    width = len(monos) + 1
    reduced = _rref_rows(rows, width)
    assert reduced is not None
    pivots = []
    for row in reduced:
        for col, entry in enumerate(row):
            if entry != 0:
                pivots.append(col)
                break
    if any(p == len(monos) for p in pivots):
        raise FitInconsistentError(
            "no character polynomial of this multidegree matches the samples"
        )
    if len(pivots) < len(monos):
        raise FitUnderdeterminedError(
            "samples leave free coefficients; add more levels"
        )
    coeffs = {mono: _ZERO for mono in monos}
    for row, p in zip(reduced, pivots):
        coeffs[monos[p]] = row[-1]
    return CharacterPolynomial.from_dict(m, coeffs)


def binomial_basis_form(p: CharacterPolynomial) -> str:
    """Re-express p in products of binomials choose(X_k^{(j)}, b) and render.

    The binomial basis in the same multidegree box is triangular over the
    monomials, so the change of basis is an exact solve.
    """
    bound = p.multidegree()
    monos = _monomials_within(bound)
    expansions = []
    for mono in monos:
        poly = CharacterPolynomial.constant(1, p.m)
        for (j, k), e in mono:
            x = CharacterPolynomial.variable(k, j + 1, p.m)
            binom = CharacterPolynomial.constant(1, p.m)
            for s in range(e):
                binom = binom * (x - s)
            poly = poly * binom / math.factorial(e)
        expansions.append(poly)
    target = dict(p.coeffs)
    all_monos = monos
    rows = []
    for mono in all_monos:
        row = [dict(exp.coeffs).get(mono, _ZERO) for exp in expansions]
        row.append(target.get(mono, _ZERO))
        rows.append(row)
    reduced = _rref_rows(rows, len(expansions) + 1)
    assert reduced is not None
    coeffs = {}
    for row in reduced:
        pivot = next(col for col, e in enumerate(row) if e != 0)
        if pivot == len(expansions):
            raise AssertionError("binomial basis failed to span")
        coeffs[monos[pivot]] = row[-1]
    pieces = []
    for mono in monos:
        coeff = coeffs.get(mono, _ZERO)
        if coeff == 0:
            continue
        factors = [
            f"binom(X{k}^({j + 1}),{e})" if e > 1 else f"X{k}^({j + 1})"
            for (j, k), e in mono
        ]
        body = "*".join(factors)
        mag = abs(coeff)
        if not body:
            text = format_rational(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{format_rational(mag)}*{body}"
        pieces.append((coeff < 0, text))
    if not pieces:
        return "0"
    first_neg, first = pieces[0]
    out = ("-" if first_neg else "") + first
    for neg, text in pieces[1:]:
        out += (" - " if neg else " + ") + text
    return out


def character_of_cohomology(
    spec: ArrangementSpec,
    n: MultiIndex,
    i: int,
    get_lattice: LatticeBuilder = build_lattice,
) -> ClassFunction:
    """The character of Aut(n) on H^i of the complement at level n.

    H^0 is the trivial character (complex arrangement complements are
    connected); higher degrees evaluate one equivariant trace per class.
    """
    if i == 0:
        return trivial_character(n)
    lat = get_lattice(spec, n, max(1, i))
    ctx = LatticeHomology(lat)
    values: dict[ConjClass, Fraction] = {}
    for c in conj_classes(n):
        if c.is_identity():
            values[c] = Fraction(ctx.betti_report(i).total)
        else:
            values[c] = ctx.trace(class_representative(c), i)
    return ClassFunction(n, values)


def inner_product(a: ClassFunction, b: ClassFunction) -> Fraction:
    """Class-size weighted inner product; cycle types are inversion-invariant,
    so the inverse class equals the class itself."""
    if a.level != b.level:
        raise ValueError("class functions live on different levels")
    order = group_order(a.level)
    if order == 0:
        raise AssertionError("group order vanished")
    total = _ZERO
    for c in conj_classes(a.level):
        total += Fraction(c.size) * a(c) * b(c)
    return total / order


def tensor_char(a: ClassFunction, b: ClassFunction) -> ClassFunction:
    """Pointwise product: the character of the tensor representation."""
    return _pointwise(a, b, lambda x, y: x * y)


def dual_char(a: ClassFunction) -> ClassFunction:
    """Value at the inverse class; the identity map on these real characters,
    kept as an operation so the twisted-Betti contract stays explicit."""
    return ClassFunction(a.level, dict(a.values))


def _sub_cycle_multisets(
    partition: tuple[int, ...], size: int
) -> list[tuple[tuple[int, ...], int]]:
    """Sub-multisets of cycle lengths summing to ``size`` with their counts."""
    mults: dict[int, int] = {}
    for part in partition:
        mults[part] = mults.get(part, 0) + 1
    lengths = sorted(mults)
    out: list[tuple[tuple[int, ...], int]] = []

    def rec(pos: int, remaining: int, chosen: list[int], ways: int):
        if remaining == 0:
            out.append((tuple(sorted(chosen, reverse=True)), ways))
            return
        if pos == len(lengths):
            return
        k = lengths[pos]
        for count in range(0, min(mults[k], remaining // k) + 1):
            rec(
                pos + 1,
                remaining - count * k,
                chosen + [k] * count,
                ways * math.comb(mults[k], count),
            )

    rec(0, size, [], 1)
    return out


def induction_character(
    c: MultiIndex, chi_w: ClassFunction, n: MultiIndex
) -> ClassFunction:
    """Character at level n of the free module generated at c by chi_w.

    An element g stabilizes a binomial class iff the underlying point sets
    are unions of g's cycles, so the value is a sum over sub-multisets of
    cycle lengths of chi_w at the induced class.
    """
    if chi_w.level != c:
        raise ValueError("generating character must live at level c")
    classes_n = conj_classes(n)
    if not c.leq(n):
        return ClassFunction(n, {cls: _ZERO for cls in classes_n})
    values: dict[ConjClass, Fraction] = {}
    for cls in classes_n:
        per_factor = [
            _sub_cycle_multisets(cls.parts[j], c[j]) for j in range(c.m)
        ]
        total = _ZERO
        for combo in itertools.product(*per_factor):
            ways = math.prod(w for _, w in combo)
            induced = ConjClass(tuple(mu for mu, _ in combo))
            total += ways * chi_w(induced)
        values[cls] = total
    return ClassFunction(n, values)


@dataclass(frozen=True)
class FreenessClassSummary:
    degree: MultiIndex
    codim: int
    stabilizer_order: int
    generator_character: ClassFunction
    degree_bound_ok: bool


@dataclass(frozen=True)
class FreenessReport:
    degree: int
    classes: tuple[FreenessClassSummary, ...]
    level_matches: tuple[tuple[MultiIndex, bool], ...]
    degree_bound: MultiIndex

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.level_matches) and all(
            c.degree_bound_ok for c in self.classes
        )


def verify_free_decomposition(
    spec: ArrangementSpec,
    i: int,
    levels: Sequence[MultiIndex],
    get_lattice: LatticeBuilder = build_lattice,
) -> FreenessReport:
    """Check H^i decomposes as induced modules over primitive classes.

    Each contributing class generates, at its own degree, the trace character
    of its stabilizer orbit on the local homology; summing the induced
    characters over classes must reproduce the cohomology character at every
    requested level.  Class degrees are also checked against i times the top
    generator degree.
    """
    bound = degree_times(i, spec.cmax)
    summaries: list[FreenessClassSummary] = []
    if i == 0:
        expected = {level: trivial_character(level) for level in levels}
    else:
        classes = primitive_classes(spec, i, get_lattice)
        contributors: list[tuple[PrimitiveClass, ClassFunction]] = []
        for cls in classes:
            lat = get_lattice(spec, cls.degree, max(1, i))
            ctx = LatticeHomology(lat)
            idx = lat.index_of(cls.subspace)
            members, _ = orbit_of(lat, idx)
            chi_gen = ClassFunction(
                cls.degree,
                {
                    c: ctx.trace(class_representative(c), i, members=members)
                    for c in conj_classes(cls.degree)
                },
            )
            if all(v == 0 for v in chi_gen.values.values()):
                continue
            contributors.append((cls, chi_gen))
            summaries.append(
                FreenessClassSummary(
                    cls.degree,
                    cls.codim,
                    cls.stabilizer_order,
                    chi_gen,
                    cls.degree.leq(bound),
                )
            )
        expected = {
            level: sum_characters(
                level,
                [
                    induction_character(cls.degree, chi, level)
                    for cls, chi in contributors
                ],
            )
            for level in levels
        }
    matches = []
    for level in levels:
        actual = character_of_cohomology(spec, level, i, get_lattice)
        matches.append((level, actual == expected[level]))
    return FreenessReport(i, tuple(summaries), tuple(matches), bound)


def invariants_dim(chi: ClassFunction) -> int:
    """dim of the invariant subspace: the inner product with the constants.

    This is the Betti number of the group quotient by transfer; a non-integer
    value means the input was not a genuine character.
    """
    value = inner_product(chi, trivial_character(chi.level))
    if value.denominator != 1:
        raise ValueError(f"invariant dimension {value} is not an integer")
    return int(value)


def twisted_betti(chi_h: ClassFunction, chi_n: ClassFunction) -> Fraction:
    """Sheaf Betti number of the quotient with coefficients of character chi_n."""
    return inner_product(dual_char(chi_h), chi_n)


@cache
def sym_character(lam: tuple[int, ...], mu: tuple[int, ...]) -> int:
    """Murnaghan-Nakayama value of the S_n irreducible lam at cycle type mu."""
    if sum(lam) != sum(mu):
        raise ValueError("partition sizes differ")
    if not mu:
        return 1
    strip = mu[0]
    rest = mu[1:]
    ell = len(lam)
    beta = [lam[i] + (ell - 1 - i) for i in range(ell)]
    beta_set = set(beta)
    total = 0
    for b in beta:
        nb = b - strip
        if nb < 0 or nb in beta_set:
            continue
        height = sum(1 for c in beta if nb < c < b)
        new_beta = sorted((beta_set - {b}) | {nb}, reverse=True)
        width = len(new_beta)
        new_lam = tuple(
            x
            for x in (new_beta[idx] - (width - 1 - idx) for idx in range(width))
            if x > 0
        )
        total += (-1) ** height * sym_character(new_lam, rest)
    return total


def irreducible_character_value(
    lam_tuple: tuple[tuple[int, ...], ...], c: ConjClass
) -> int:
    return math.prod(
        sym_character(lam, mu) for lam, mu in zip(lam_tuple, c.parts)
    )


def irreducible_multiplicities(
    chi: ClassFunction,
) -> dict[tuple[tuple[int, ...], ...], Fraction]:
    """Inner products against every irreducible of the level's group.

    Guarded to levels with entries at most 8: beyond that the partition count
    makes the exact table pointlessly expensive at desk scale.
    """
    level = chi.level
    if any(nj > 8 for nj in level):
        raise ValueError("irreducible decomposition limited to entries <= 8")
    order = group_order(level)
    out: dict[tuple[tuple[int, ...], ...], Fraction] = {}
    classes = conj_classes(level)
    for lam_tuple in itertools.product(*(partitions(nj) for nj in level)):
        total = _ZERO
        for c in classes:
            total += Fraction(c.size) * chi(c) * irreducible_character_value(lam_tuple, c)
        out[lam_tuple] = total / order
    return out


@dataclass(frozen=True)
class StabilityReport:
    stable_value: Fraction | None
    onsets: tuple[MultiIndex, ...]
    predicted_onset: MultiIndex
    meets_prediction: bool
    violations: tuple[MultiIndex, ...]


def stability_report(
    values: Mapping[MultiIndex, Fraction], predicted_onset: MultiIndex
) -> StabilityReport:
    """Locate the empirical onset of constancy and compare with a prediction.

    The stable value is read off the maximal sampled levels; the onsets are
    the minimal sampled levels above which every sample agrees with it.  The
    prediction holds when no sample at or above it deviates.
    """
    levels = sorted(values)
    if not levels:
        raise ValueError("no sampled values")
    maximal = [
        v for v in levels if not any(v != w and v.leq(w) for w in levels)
    ]
    top_values = {values[v] for v in maximal}
    if len(top_values) != 1:
        return StabilityReport(None, (), predicted_onset, False, tuple(maximal))
    stable = top_values.pop()
    admissible = [
        v
        for v in levels
        if all(values[w] == stable for w in levels if v.leq(w))
    ]
    onsets = tuple(
        v
        for v in admissible
        if not any(w != v and w.leq(v) for w in admissible)
    )
    violations = tuple(
        w for w in levels if predicted_onset.leq(w) and values[w] != stable
    )
    return StabilityReport(
        stable, onsets, predicted_onset, not violations, violations
    )
