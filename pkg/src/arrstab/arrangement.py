"""FI^m-arrangements: generator specs, intersection lattices, normalization.

An arrangement family is given by finitely many generating subspaces, each at
a degree.  At a level n the lattice collects every subspace of bounded
codimension obtainable by intersecting preimages of generators along
injections into n, ordered by reverse inclusion and ranked by codimension.

Construction seeds the lattice with all generator preimages and then closes
under pairwise intersection with codimension pruning; the closure is
confluent, so the result does not depend on iteration order.  Elements are
canonically sorted by (codim, serialization), which fixes every downstream
output byte for byte.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

from .exactlin import (
    RationalMatrix,
    Subspace,
    _rref_rows,
    contains,
    direct_image,
    preimage,
    subspace_from_constraints,
)
from .fim import (
    Injection,
    MultiIndex,
    PermTuple,
    ambient_dim,
    binomial_class_key,
    componentwise_max,
    coordinate_permutation,
    degree_times,
    enumerate_injections,
    induced_linear_map,
    kernel_subspace,
    perm_tuples,
)
from .homology import RankedPoset


class LatticeError(RuntimeError):
    """A lattice failed an internal consistency requirement."""


Witness = tuple[tuple[int, Injection], ...]


@dataclass(frozen=True)
class ArrangementSpec:
    """A finitely-generated arrangement family over point space Q^r.

    Each generator is a subspace of (Q^r)^degree with positive codimension;
    the family at level n consists of intersections of generator preimages
    along injections degree -> n.
    """

    m: int
    r: int
    generators: tuple[tuple[MultiIndex, Subspace], ...]

    def __post_init__(self):
        if self.m < 1 or self.r < 1:
            raise ValueError("m and r must be positive")
        for degree, sub in self.generators:
            if degree.m != self.m:
                raise ValueError("generator degree has wrong number of factors")
            if sub.ambient_dim != ambient_dim(degree, self.r):
                raise ValueError("generator ambient dimension mismatch")
            if sub.codim < 1:
                raise ValueError("generators must have positive codimension")

    @property
    def cmax(self) -> MultiIndex:
        """Componentwise maximum of the generator degrees."""
        if not self.generators:
            return MultiIndex((0,) * self.m)
        return componentwise_max(deg for deg, _ in self.generators)

    def serialize(self) -> str:
        gens = ";".join(
            f"{deg.render()}@{sub.serialize()}" for deg, sub in self.generators
        )
        return f"m={self.m};r={self.r};gens={gens}"


def family_mkr(m: int, k: int, r: int) -> ArrangementSpec:
    """The one-generator family whose points avoid a k-fold common value.

    The generator at degree (k,...,k) is the diagonal where all m*k points of
    Q^r coincide; its codimension is r(mk - 1).
    """
    if m < 1 or k < 1 or r < 1:
        raise ValueError("m, k, r must all be positive")
    degree = MultiIndex((k,) * m)
    points = m * k
    n = r * points
    rows = []
    for p in range(points - 1):
        for t in range(r):
            row = [0] * n
            row[p * r + t] = 1
            row[(p + 1) * r + t] = -1
            rows.append(row)
    return ArrangementSpec(m, r, ((degree, subspace_from_constraints(n, rows)),))


class IntersectionLattice:
    """The ranked poset of arrangement subspaces at one level.

    Only positive-codimension subspaces are stored (the ambient space never
    is), deduplicated and sorted by (codim, serialization).  The poset order
    is reverse inclusion and the rank function is codimension.  Instances are
    immutable once built.
    """

    __slots__ = (
        "level",
        "max_codim",
        "r",
        "elements",
        "provenance",
        "codims",
        "_containing",
        "_index",
    )

    def __init__(
        self,
        level: MultiIndex,
        max_codim: int,
        r: int,
        elements: Sequence[Subspace],
        provenance: Sequence[Witness],
    ):
        order = sorted(range(len(elements)), key=lambda i: (elements[i].codim, elements[i].serialization))
        self.level = level
        self.max_codim = max_codim
        self.r = r
        self.elements: tuple[Subspace, ...] = tuple(elements[i] for i in order)
        self.provenance: tuple[Witness, ...] = tuple(provenance[i] for i in order)
        self.codims: tuple[int, ...] = tuple(e.codim for e in self.elements)
        self._index = {e.serialization: i for i, e in enumerate(self.elements)}
        containing: list[tuple[int, ...]] = []
        for i, low in enumerate(self.elements):
            ups = [
                j
                for j, high in enumerate(self.elements)
                if self.codims[j] < self.codims[i] and contains(high, low)
            ]
            containing.append(tuple(ups))
        self._containing = tuple(containing)

    def __len__(self) -> int:
        return len(self.elements)

    def index_of(self, x: Subspace) -> int:
        idx = self._index.get(x.serialization)
        if idx is None:
            raise KeyError("subspace is not a lattice element")
        return idx

    def __contains__(self, x: Subspace) -> bool:
        return x.serialization in self._index

    def containing(self, idx: int) -> tuple[int, ...]:
        """Indices of elements strictly containing element ``idx``."""
        return self._containing[idx]

    def poset_less(self, a: int, b: int) -> bool:
        """Reverse-inclusion order: a < b iff subspace a strictly contains b."""
        return a in self._containing[b]

    def lower_interval(self, x: Subspace | int) -> RankedPoset:
        """The ranked subposet of elements strictly containing x."""
        idx = x if isinstance(x, int) else self.index_of(x)
        members = self._containing[idx]
        position = {orig: pos for pos, orig in enumerate(members)}
        less = frozenset(
            (position[a], pb)
            for pb, b in enumerate(members)
            for a in self._containing[b]
            if a in position
        )
        return RankedPoset(
            tuple(members), less, tuple(self.codims[i] for i in members)
        )

    def as_ranked_poset(self) -> RankedPoset:
        n = len(self.elements)
        less = frozenset(
            (a, b) for b in range(n) for a in self._containing[b]
        )
        return RankedPoset(tuple(range(n)), less, self.codims)

    def permute_element(self, g: PermTuple, idx: int) -> Subspace:
        """The image of element ``idx`` under the point permutation g."""
        perm = coordinate_permutation(g, self.r)
        inverse = [0] * len(perm)
        for src, dst in enumerate(perm):
            inverse[dst] = src
        rows = [
            [row[inverse[b]] for b in range(len(perm))]
            for row in self.elements[idx].constraints.entries
        ]
        reduced = _rref_rows(rows, len(perm))
        assert reduced is not None
        return Subspace(len(perm), RationalMatrix(tuple(reduced), len(perm)))

    def act(self, g: PermTuple) -> tuple[int, ...]:
        """The permutation of element indices induced by g; order preserving."""
        if g.level != self.level:
            raise ValueError("permutation level does not match lattice level")
        out = []
        for idx in range(len(self.elements)):
            image = self.permute_element(g, idx)
            pos = self._index.get(image.serialization)
            if pos is None:
                raise LatticeError("group action left the lattice; lattice corrupted")
            out.append(pos)
        return tuple(out)


def act(g: PermTuple, lat: IntersectionLattice) -> tuple[int, ...]:
    """Permutation of lat.elements induced by g (rank and order preserving)."""
    return lat.act(g)


def lower_interval(lat: IntersectionLattice, x: Subspace | int) -> RankedPoset:
    return lat.lower_interval(x)


def build_lattice(
    spec: ArrangementSpec, n: MultiIndex, max_codim: int
) -> IntersectionLattice:
    """All arrangement subspaces of codim <= max_codim at level n, saturated.

    Intersecting any two stored elements yields a stored element or exceeds
    max_codim.  An empty lattice is legal (no injection from any generator
    degree, or every seed already exceeds the cutoff).
    """
    if max_codim < 1:
        raise ValueError("max_codim must be at least 1")
    if n.m != spec.m:
        raise ValueError("level has wrong number of factors")
    known: dict[str, tuple[Subspace, Witness]] = {}
    for gi, (degree, sub) in enumerate(spec.generators):
        for f in enumerate_injections(degree, n):
            pre = preimage(induced_linear_map(f, spec.r), sub)
            if pre.codim <= max_codim and pre.serialization not in known:
                known[pre.serialization] = (pre, ((gi, f),))
    frontier = sorted(known)
    while frontier:
        frontier_set = set(frontier)
        everything = sorted(known)
        new: dict[str, tuple[Subspace, Witness]] = {}
        for sa in frontier:
            a, wa = known[sa]
            arows = list(a.constraints.entries)
            for sb in everything:
                if sb == sa:
                    continue
                if sb in frontier_set and sb < sa:
                    continue  # frontier pairs once
                b, wb = known[sb]
                reduced = _rref_rows(
                    arows + list(b.constraints.entries),
                    a.ambient_dim,
                    max_rank=max_codim,
                )
                if reduced is None:
                    continue
                meet = Subspace(a.ambient_dim, RationalMatrix(tuple(reduced), a.ambient_dim))
                key = meet.serialization
                if key not in known and key not in new:
                    seen = set()
                    witness = tuple(
                        w
                        for w in wa + wb
                        if not (w in seen or seen.add(w))
                    )
                    new[key] = (meet, witness)
        known.update(new)
        frontier = sorted(new)
    elements = [known[s][0] for s in sorted(known)]
    provenance = [known[s][1] for s in sorted(known)]
    return IntersectionLattice(n, max_codim, spec.r, elements, provenance)


LatticeBuilder = Callable[[ArrangementSpec, MultiIndex, int], IntersectionLattice]


def is_primitive(spec: ArrangementSpec, degree: MultiIndex, x: Subspace) -> bool:
    """True iff x contains no kernel of a map induced from a smaller degree.

    Among all induced-map kernels the minimal ones are those of corank-one
    injections missing a single point, and those kernels are the coordinate
    spans of single points.  So it suffices to look for a point all of whose
    r constraint columns vanish.
    """
    if x.ambient_dim != ambient_dim(degree, spec.r):
        raise ValueError("subspace ambient does not match the degree")
    rows = x.constraints.entries
    point = 0
    for nj in degree:
        for _ in range(nj):
            base = point * spec.r
            if all(
                all(row[base + t] == 0 for row in rows) for t in range(spec.r)
            ):
                return False
            point += 1
    return True


@dataclass(frozen=True)
class NormalityViolation:
    source: MultiIndex
    target: MultiIndex
    injection: Injection
    element: Subspace
    image: Subspace


@dataclass(frozen=True)
class NormalityReport:
    normal: bool
    checked_degrees: tuple[MultiIndex, ...]
    violation: NormalityViolation | None = None


def verify_normal(
    spec: ArrangementSpec,
    degrees: Sequence[MultiIndex],
    get_lattice: LatticeBuilder = build_lattice,
) -> NormalityReport:
    """Check that kernel-containing elements are preimages from below.

    For every pair c -> d among the listed degrees and every element at d
    containing the kernel of the induced map, the direct image must already
    be a lattice element at c.  The first failure is reported; violations are
    report content, not exceptions.
    """
    degrees = tuple(degrees)
    lattices = {
        d: get_lattice(spec, d, max(1, ambient_dim(d, spec.r))) for d in degrees
    }
    for c in degrees:
        for d in degrees:
            if not c.leq(d):
                continue
            lat_d = lattices[d]
            if not len(lat_d):
                continue
            lat_c = lattices[c]
            for f in enumerate_injections(c, d):
                ker = kernel_subspace(f, spec.r)
                fmap = None
                for x in lat_d.elements:
                    if not contains(x, ker):
                        continue
                    if fmap is None:
                        fmap = induced_linear_map(f, spec.r)
                    image = direct_image(fmap, x)
                    if image not in lat_c:
                        return NormalityReport(
                            False,
                            degrees,
                            NormalityViolation(c, d, f, x, image),
                        )
    return NormalityReport(True, degrees)


def _degrees_below(bound: MultiIndex) -> list[MultiIndex]:
    """All degrees <= bound, sorted by (total size, lex)."""
    grid = itertools.product(*(range(b + 1) for b in bound))
    return sorted((MultiIndex(t) for t in grid), key=lambda e: (e.total, tuple(e)))


def normalize(spec: ArrangementSpec) -> ArrangementSpec:
    """Push each generator down to the smallest degree that carries it.

    Scanning candidate degrees by increasing size (i.e. decreasing kernel
    size), the first injection whose kernel sits inside the generator gives
    the replacement as a direct image.  The result is generated by primitive
    subspaces and the operation is idempotent.
    """
    new_gens = []
    for degree, sub in spec.generators:
        replacement = None
        for e in _degrees_below(degree):
            for f in enumerate_injections(e, degree):
                if contains(sub, kernel_subspace(f, spec.r)):
                    image = direct_image(induced_linear_map(f, spec.r), sub)
                    replacement = (e, image)
                    break
            if replacement is not None:
                break
        assert replacement is not None  # e = degree, f = identity always works
        assert is_primitive(spec, replacement[0], replacement[1])
        new_gens.append(replacement)
    return ArrangementSpec(spec.m, spec.r, tuple(new_gens))


@dataclass(frozen=True)
class PrimitiveClass:
    """An equivalence class of primitive subspaces, by a canonical member."""

    degree: MultiIndex
    subspace: Subspace
    stabilizer_order: int

    @property
    def codim(self) -> int:
        return self.subspace.codim


def orbit_of(lat: IntersectionLattice, idx: int) -> tuple[tuple[int, ...], int]:
    """Indices of the group orbit of element ``idx`` and its stabilizer order."""
    members = set()
    stab = 0
    for g in perm_tuples(lat.level):
        image = lat.permute_element(g, idx)
        pos = lat.index_of(image)
        members.add(pos)
        if pos == idx:
            stab += 1
    return tuple(sorted(members)), stab


def primitive_classes(
    spec: ArrangementSpec,
    max_codim: int,
    get_lattice: LatticeBuilder = build_lattice,
) -> tuple[PrimitiveClass, ...]:
    """Representatives of primitive-subspace classes of codim <= max_codim.

    Scans every degree below max_codim times the top generator degree (no
    primitive of this codimension can occur later), filters lattice elements
    by primitivity, and merges group orbits at each degree.  Requires the
    spec to pass the normality check on its generator degrees.
    """
    if not spec.generators:
        return ()
    gen_degrees = tuple(dict.fromkeys(deg for deg, _ in spec.generators))
    report = verify_normal(spec, gen_degrees, get_lattice)
    if not report.normal:
        raise ValueError("spec is not normal on its generator degrees")
    bound = degree_times(max_codim, spec.cmax)
    classes: list[PrimitiveClass] = []
    for e in _degrees_below(bound):
        if not any(deg.leq(e) for deg, _ in spec.generators):
            continue
        lat = get_lattice(spec, e, max_codim)
        primitive = [
            idx
            for idx in range(len(lat))
            if is_primitive(spec, e, lat.elements[idx])
        ]
        prim_set = set(primitive)
        claimed: set[int] = set()
        for idx in primitive:
            if idx in claimed:
                continue
            members, stab = orbit_of(lat, idx)
            claimed.update(members)
            # primitivity is preserved by the point action, so the whole
            # orbit consists of primitives
            assert prim_set.issuperset(members)
            classes.append(PrimitiveClass(e, lat.elements[members[0]], stab))
    return tuple(classes)


@dataclass(frozen=True)
class OrbitDecomposition:
    """Assignment of each lattice element to one primitive class and one
    binomial class of injections."""

    assignments: tuple[tuple[int, tuple[tuple[int, ...], ...]], ...]

    def blocks(self) -> dict[int, dict[tuple, tuple[int, ...]]]:
        out: dict[int, dict[tuple, list[int]]] = {}
        for idx, (ci, key) in enumerate(self.assignments):
            out.setdefault(ci, {}).setdefault(key, []).append(idx)
        return {
            ci: {key: tuple(v) for key, v in keyed.items()}
            for ci, keyed in out.items()
        }

    def class_sizes(self) -> dict[int, int]:
        sizes: dict[int, int] = {}
        for ci, _ in self.assignments:
            sizes[ci] = sizes.get(ci, 0) + 1
        return sizes


def orbit_decomposition(
    lat: IntersectionLattice, classes: Sequence[PrimitiveClass]
) -> OrbitDecomposition:
    """Split the lattice into orbit blocks indexed by binomial classes.

    Every element must arise from exactly one primitive class and, within it,
    one binomial class of injections; anything else signals a non-normal
    input or an incomplete class list and raises LatticeError.
    """
    table: dict[str, list[tuple[int, tuple]]] = {}
    for ci, cls in enumerate(classes):
        if not cls.degree.leq(lat.level):
            continue
        for f in enumerate_injections(cls.degree, lat.level):
            pre = preimage(induced_linear_map(f, lat.r), cls.subspace)
            table.setdefault(pre.serialization, []).append(
                (ci, binomial_class_key(f))
            )
    assignments = []
    for idx, element in enumerate(lat.elements):
        hits = table.get(element.serialization)
        if not hits:
            raise LatticeError(
                f"element {idx} matched by no primitive class"
            )
        class_ids = {ci for ci, _ in hits}
        if len(class_ids) > 1:
            raise LatticeError(
                f"element {idx} matched by {len(class_ids)} primitive classes"
            )
        keys = {key for _, key in hits}
        if len(keys) > 1:
            raise LatticeError(
                f"element {idx} matched by several binomial classes"
            )
        assignments.append((hits[0][0], hits[0][1]))
    return OrbitDecomposition(tuple(assignments))


@dataclass(frozen=True)
class DownwardStabilityReport:
    stable: bool
    source: MultiIndex
    target: MultiIndex
    failures: tuple[str, ...]


def verify_downward_stability(
    spec: ArrangementSpec,
    c: MultiIndex,
    d: MultiIndex,
    max_codim: int,
    get_lattice: LatticeBuilder = build_lattice,
) -> DownwardStabilityReport:
    """Check lower intervals map isomorphically along injections c -> d.

    One representative injection per binomial class suffices: the others
    differ by automorphisms, which act by poset isomorphisms.
    """
    if not c.leq(d):
        raise ValueError("need c <= d componentwise")
    lat_c = get_lattice(spec, c, max_codim)
    lat_d = get_lattice(spec, d, max_codim)
    failures: list[str] = []
    reps: dict[tuple, Injection] = {}
    for f in enumerate_injections(c, d):
        reps.setdefault(binomial_class_key(f), f)
    for f in reps.values():
        fmap = induced_linear_map(f, spec.r)
        image_index: dict[int, int] = {}
        for idx in range(len(lat_c)):
            img = preimage(fmap, lat_c.elements[idx])
            if img not in lat_d:
                failures.append(
                    f"injection {f.render()}: image of element {idx} missing at {d.render()}"
                )
                continue
            image_index[idx] = lat_d.index_of(img)
        for idx in image_index:
            below_c = lat_c.containing(idx)
            below_d = lat_d.containing(image_index[idx])
            mapped = {image_index[y] for y in below_c if y in image_index}
            if len(mapped) != len(below_c) or mapped != set(below_d):
                failures.append(
                    f"injection {f.render()}: interval of element {idx} not bijective"
                )
                continue
            for y in below_c:
                if lat_c.codims[y] != lat_d.codims[image_index[y]]:
                    failures.append(
                        f"injection {f.render()}: rank not preserved below element {idx}"
                    )
                    break
            for y1 in below_c:
                for y2 in below_c:
                    if lat_c.poset_less(y1, y2) != lat_d.poset_less(
                        image_index[y1], image_index[y2]
                    ):
                        failures.append(
                            f"injection {f.render()}: order not preserved below element {idx}"
                        )
                        break
    return DownwardStabilityReport(not failures, c, d, tuple(failures))
