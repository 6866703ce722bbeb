"""Permutations of {1..d} and finitely generated subgroups of S_d.

One composition convention is used everywhere in this package:
``(a * b)(i) == a(b(i))`` -- the right factor acts first.  Points are
1-based in public signatures and in cycle notation; the packed image
tuples are 0-based and private.

Groups are immutable: the stabilizer chain (full ascending base
1, 2, ..., d) is built once at construction, so instances can be shared
freely across threads.
"""

from __future__ import annotations

import itertools
from enum import Enum
from typing import Iterable, Iterator, Sequence

#: Largest group order for which the naive product-closure oracle is run.
NAIVE_CLOSURE_CAP = 10080


class CycleParseError(ValueError):
    """Malformed cycle notation."""


class DegreeMismatchError(ValueError):
    """Operands act on point sets of different sizes."""


class MembershipError(ValueError):
    """An element required to lie in a group does not."""


# ---------------------------------------------------------------------------
# raw helpers (0-based image tuples)

def _compose(a: tuple, b: tuple) -> tuple:
    """(a o b)(i) = a(b(i)) on 0-based tuples."""
    return tuple(a[x] for x in b)


def _inverse(a: tuple) -> tuple:
    inv = [0] * len(a)
    for i, x in enumerate(a):
        inv[x] = i
    return tuple(inv)


def _is_identity(a: tuple) -> bool:
    return all(i == x for i, x in enumerate(a))


class Permutation:
    """A bijection of {1..d}."""

    __slots__ = ("_raw",)

    def __init__(self, images: Sequence[int]):
        """Build from 1-based images: ``images[i-1]`` is the image of point i."""
        raw = tuple(i - 1 for i in images)
        if sorted(raw) != list(range(len(raw))):
            raise ValueError(f"not a bijection of 1..{len(raw)}: {list(images)!r}")
        self._raw = raw

    @classmethod
    def _from_raw(cls, raw: tuple) -> "Permutation":
        p = object.__new__(cls)
        p._raw = raw
        return p

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        if degree < 1:
            raise ValueError("degree must be positive")
        return cls._from_raw(tuple(range(degree)))

    @classmethod
    def from_cycle(cls, cycle: Sequence[int], degree: int) -> "Permutation":
        """Single cycle over 1-based points, remaining points fixed."""
        raw = list(range(degree))
        pts = [c - 1 for c in cycle]
        for p in pts:
            if not 0 <= p < degree:
                raise ValueError(f"point {p + 1} out of range 1..{degree}")
        if len(set(pts)) != len(pts):
            raise ValueError(f"repeated point in cycle {list(cycle)!r}")
        for a, b in zip(pts, pts[1:]):
            raw[a] = b
        if pts:
            raw[pts[-1]] = pts[0]
        return cls._from_raw(tuple(raw))

    @property
    def degree(self) -> int:
        return len(self._raw)

    @property
    def images(self) -> tuple:
        """1-based image sequence."""
        return tuple(x + 1 for x in self._raw)

    def apply(self, point: int) -> int:
        """Image of a 1-based point."""
        return self._raw[point - 1] + 1

    __call__ = apply

    def __mul__(self, other: "Permutation") -> "Permutation":
        if self.degree != other.degree:
            raise DegreeMismatchError(
                f"degrees {self.degree} and {other.degree} differ")
        return Permutation._from_raw(_compose(self._raw, other._raw))

    def inverse(self) -> "Permutation":
        return Permutation._from_raw(_inverse(self._raw))

    def __pow__(self, n: int) -> "Permutation":
        if n < 0:
            return self.inverse() ** (-n)
        result = tuple(range(self.degree))
        base = self._raw
        while n:
            if n & 1:
                result = _compose(base, result)
            base = _compose(base, base)
            n >>= 1
        return Permutation._from_raw(result)

    def conjugate(self, by: "Permutation") -> "Permutation":
        """by * self * by^-1."""
        return by * self * by.inverse()

    def is_identity(self) -> bool:
        return _is_identity(self._raw)

    def cycles(self, include_fixed: bool = False) -> tuple:
        """Disjoint 1-based cycles, least point first, sorted by least point."""
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            nxt = self._raw[start]
            while nxt != start:
                seen[nxt] = True
                cyc.append(nxt)
                nxt = self._raw[nxt]
            if len(cyc) > 1 or include_fixed:
                out.append(tuple(c + 1 for c in cyc))
        return tuple(out)

    def cycle_type(self) -> tuple:
        """Cycle lengths including fixed points, descending."""
        return tuple(sorted((len(c) for c in self.cycles(include_fixed=True)),
                            reverse=True))

    def is_transposition(self) -> bool:
        cyc = self.cycles()
        return len(cyc) == 1 and len(cyc[0]) == 2

    def sign(self) -> int:
        swaps = sum(len(c) - 1 for c in self.cycles())
        return -1 if swaps % 2 else 1

    def moved_points(self) -> tuple:
        return tuple(i + 1 for i, x in enumerate(self._raw) if x != i)

    def order(self) -> int:
        from math import lcm
        return lcm(*(len(c) for c in self.cycles(include_fixed=True)))

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self._raw == other._raw

    def __hash__(self) -> int:
        return hash(self._raw)

    def __lt__(self, other: "Permutation") -> bool:
        return (self.degree, self._raw) < (other.degree, other._raw)

    def __str__(self) -> str:
        return format_cycles(self)

    def __repr__(self) -> str:
        return f"parse_cycles({format_cycles(self)!r}, {self.degree})"


def compose(a: Permutation, b: Permutation) -> Permutation:
    """(a o b)(i) = a(b(i)); the right factor acts first."""
    return a * b


def format_cycles(p: Permutation) -> str:
    """Canonical cycle string: disjoint cycles, least point first per cycle,
    cycles sorted by least point, fixed points omitted, identity as "id"."""
    cyc = p.cycles()
    if not cyc:
        return "id"
    return "".join("(" + " ".join(str(x) for x in c) + ")" for c in cyc)


def parse_cycles(text: str, degree: int) -> Permutation:
    """Parse cycle notation over points 1..degree.

    Grammar (ASCII): ``perm := "id" | cycle+ ; cycle := "(" int (ws int)* ")"``.
    Cycles must be disjoint.  Round-trips with :func:`format_cycles`.
    """
    if degree < 1:
        raise ValueError("degree must be positive")
    s = text.strip()
    if s == "id":
        return Permutation.identity(degree)
    if not s:
        raise CycleParseError("empty permutation text")
    raw = list(range(degree))
    used: set = set()
    i = 0
    n = len(s)
    saw_cycle = False
    while i < n:
        if s[i].isspace():
            i += 1
            continue
        if s[i] != "(":
            raise CycleParseError(f"expected '(' at position {i} in {text!r}")
        i += 1
        points = []
        while True:
            while i < n and s[i].isspace():
                i += 1
            if i >= n:
                raise CycleParseError(f"unclosed cycle in {text!r}")
            if s[i] == ")":
                i += 1
                break
            j = i
            while j < n and s[j].isdigit():
                j += 1
            if j == i:
                raise CycleParseError(
                    f"expected integer at position {i} in {text!r}")
            pt = int(s[i:j])
            if not 1 <= pt <= degree:
                raise CycleParseError(
                    f"point {pt} out of range 1..{degree} in {text!r}")
            if pt in used:
                raise CycleParseError(f"repeated point {pt} in {text!r}")
            used.add(pt)
            points.append(pt - 1)
            i = j
        if not points:
            raise CycleParseError(f"empty cycle in {text!r}")
        saw_cycle = True
        for a, b in zip(points, points[1:]):
            raw[a] = b
        raw[points[-1]] = points[0]
    if not saw_cycle:
        raise CycleParseError(f"no cycles in {text!r}")
    return Permutation._from_raw(tuple(raw))


# ---------------------------------------------------------------------------
# stabilizer chain (deterministic Schreier-Sims, full ascending base)
#
# Level k holds the strong generators first moved at base point k; the
# generating set of the stabilizer of points 0..k-1 is the union of the
# generator lists of levels k, k+1, ..., d-1.

class _Level:
    __slots__ = ("point", "gens", "transversal")

    def __init__(self, point: int):
        self.point = point
        self.gens: list = []
        # orbit point -> raw u with u(self.point) = orbit point
        self.transversal: dict = {point: None}


def _gens_at(levels: list, i: int) -> list:
    out = []
    for k in range(i, len(levels)):
        out.extend(levels[k].gens)
    return out


def _rebuild_orbit(level: _Level, gens: list, degree: int) -> None:
    ident = tuple(range(degree))
    trans = {level.point: ident}
    frontier = [level.point]
    while frontier:
        nxt = []
        for q in frontier:
            uq = trans[q]
            for g in gens:
                r = g[q]
                if r not in trans:
                    trans[r] = _compose(g, uq)
                    nxt.append(r)
        nxt.sort()
        frontier = nxt
    level.transversal = trans


def _strip_from(h: tuple, levels: list, start: int) -> tuple:
    """Sift h through levels >= start; returns (residue, stuck level) or
    (None, d) when h is a member."""
    for k in range(start, len(levels)):
        p = h[k]
        if p == k:
            continue
        u = levels[k].transversal.get(p)
        if u is None:
            return h, k
        h = _compose(_inverse(u), h)
    return None, len(levels)


def _strip(h: tuple, levels: list) -> tuple:
    return _strip_from(h, levels, 0)


def _complete_level(levels: list, i: int, degree: int) -> None:
    """Establish the strong-generation property at level i, assuming all
    deeper levels already have it (they are kept intact)."""
    while True:
        gens = _gens_at(levels, i)
        _rebuild_orbit(levels[i], gens, degree)
        trans = levels[i].transversal
        added = False
        for q in sorted(trans):
            uq = trans[q]
            for g in gens:
                sg = _compose(_compose(_inverse(trans[g[q]]), g), uq)
                if _is_identity(sg):
                    continue
                residue, k = _strip_from(sg, levels, i + 1)
                if residue is not None:
                    levels[k].gens.append(residue)
                    for j in range(k, i, -1):
                        _complete_level(levels, j, degree)
                    added = True
                    break
            if added:
                break
        if not added:
            return


def _schreier_sims(degree: int, raw_gens: Iterable[tuple]) -> list:
    levels = [_Level(k) for k in range(degree)]
    seen = set()
    for g in raw_gens:
        if _is_identity(g) or g in seen:
            continue
        seen.add(g)
        first_moved = next(i for i in range(degree) if g[i] != i)
        levels[first_moved].gens.append(g)
    for i in range(degree - 1, -1, -1):
        _complete_level(levels, i, degree)
    return levels


class Transitivity(Enum):
    INTRANSITIVE = "intransitive"
    TRANSITIVE = "transitive"
    TWO_TRANSITIVE = "two_transitive"


class GeneratedGroup:
    """Subgroup of S_d given by generators.

    The stabilizer chain, exact order and point-orbit partition are built
    at construction and never change.
    """

    __slots__ = ("degree", "generators", "_levels", "_order", "_orbit_partition")

    def __init__(self, degree: int, generators: Iterable[Permutation]):
        gens = tuple(generators)
        if not gens:
            raise ValueError(
                "generator set must be nonempty (pass the identity for the "
                "trivial group)")
        for g in gens:
            if g.degree != degree:
                raise DegreeMismatchError(
                    f"generator of degree {g.degree} in a group of degree {degree}")
        self.degree = degree
        self.generators = gens
        self._levels = _schreier_sims(degree, (g._raw for g in gens))
        order = 1
        for lev in self._levels:
            order *= len(lev.transversal)
        self._order = order
        self._orbit_partition = orbits(self)

    @classmethod
    def trivial(cls, degree: int) -> "GeneratedGroup":
        return cls(degree, [Permutation.identity(degree)])

    @property
    def order(self) -> int:
        return self._order

    @property
    def orbit_partition(self) -> tuple:
        """Orbits on {1..d}, each sorted, ordered by least element."""
        return self._orbit_partition

    def __contains__(self, p: Permutation) -> bool:
        if not isinstance(p, Permutation) or p.degree != self.degree:
            return False
        residue, _ = _strip(p._raw, self._levels)
        return residue is None

    def elements(self, cap: int | None = None) -> tuple:
        """All elements, sorted by image tuple.  Raises if order exceeds cap."""
        if cap is not None and self._order > cap:
            raise ValueError(f"group order {self._order} exceeds cap {cap}")
        raws = [tuple(range(self.degree))]
        for lev in reversed(self._levels):
            if len(lev.transversal) == 1:
                continue
            us = [lev.transversal[q] for q in sorted(lev.transversal)]
            raws = [_compose(u, h) for u in us for h in raws]
        raws.sort()
        return tuple(Permutation._from_raw(r) for r in raws)

    def __repr__(self) -> str:
        gens = ", ".join(str(g) for g in self.generators)
        return f"GeneratedGroup(d={self.degree}, order={self._order}, <{gens}>)"


def group_order(g: GeneratedGroup) -> int:
    """Exact order via the stabilizer chain."""
    return g.order


def _act(p: Permutation, item):
    if isinstance(item, int):
        return p._raw[item - 1] + 1
    return tuple(p._raw[x - 1] + 1 for x in item)


def orbits(g: GeneratedGroup, domain: Iterable | None = None) -> tuple:
    """Orbit partition of the domain (points 1..d by default, or tuples of
    points under the diagonal action).  Deterministic: orbits are sorted and
    ordered by least element."""
    if domain is None:
        items = list(range(1, g.degree + 1))
    else:
        items = sorted(set(domain))
    seen = set()
    parts = []
    for item in items:
        if item in seen:
            continue
        orbit = {item}
        frontier = [item]
        while frontier:
            nxt = []
            for x in frontier:
                for gen in g.generators:
                    y = _act(gen, x)
                    if y not in orbit:
                        orbit.add(y)
                        nxt.append(y)
            frontier = nxt
        seen |= orbit
        parts.append(tuple(sorted(orbit)))
    return tuple(parts)


def point_stabilizer(g: GeneratedGroup, p: int) -> GeneratedGroup:
    """Stab_g(p) generated by Schreier generators.

    Satisfies order(result) * |orbit(p)| == order(g).
    """
    if not 1 <= p <= g.degree:
        raise ValueError(f"point {p} out of range 1..{g.degree}")
    p0 = p - 1
    ident = tuple(range(g.degree))
    trans = {p0: ident}
    frontier = [p0]
    raw_gens = [gen._raw for gen in g.generators]
    while frontier:
        nxt = []
        for q in frontier:
            uq = trans[q]
            for raw in raw_gens:
                r = raw[q]
                if r not in trans:
                    trans[r] = _compose(raw, uq)
                    nxt.append(r)
        nxt.sort()
        frontier = nxt
    sgens: list = []
    seen = set()
    for q in sorted(trans):
        uq = trans[q]
        for raw in raw_gens:
            w = _compose(_compose(_inverse(trans[raw[q]]), raw), uq)
            if not _is_identity(w) and w not in seen:
                seen.add(w)
                sgens.append(Permutation._from_raw(w))
    if not sgens:
        sgens = [Permutation.identity(g.degree)]
    return GeneratedGroup(g.degree, sgens)


def normal_closure(sub: Iterable[Permutation], g: GeneratedGroup) -> GeneratedGroup:
    """Smallest normal subgroup of g containing sub."""
    elems = list(sub)
    for s in elems:
        if s not in g:
            raise MembershipError(f"{s} is not an element of the ambient group")
    gens: list = []
    closure = GeneratedGroup.trivial(g.degree)
    work = [s for s in elems if not s.is_identity()]
    while work:
        w = work.pop(0)
        if w in closure:
            continue
        gens.append(w)
        closure = GeneratedGroup(g.degree, gens)
        for conj_by in g.generators:
            work.append(w.conjugate(conj_by))
            work.append(w.conjugate(conj_by.inverse()))
    return closure


def joined_group(a: GeneratedGroup, b: GeneratedGroup) -> GeneratedGroup:
    """The subgroup generated by the generators of both groups."""
    if a.degree != b.degree:
        raise DegreeMismatchError("cannot join groups of different degree")
    return GeneratedGroup(a.degree, a.generators + b.generators)


def transitivity(g: GeneratedGroup) -> Transitivity:
    """Transitivity class: one point orbit; two-transitive additionally needs
    a single orbit on ordered distinct pairs (d >= 2)."""
    if len(g.orbit_partition) != 1:
        return Transitivity.INTRANSITIVE
    if g.degree >= 2:
        pairs = itertools.product(range(1, g.degree + 1), repeat=2)
        if len(orbits(g, pairs)) == 2:
            return Transitivity.TWO_TRANSITIVE
    return Transitivity.TRANSITIVE


def naive_closure(generators: Sequence[Permutation],
                  cap: int = NAIVE_CLOSURE_CAP) -> frozenset:
    """Product-closure by breadth-first multiplication; oracle for small
    groups.  Raises ValueError beyond the cap."""
    if not generators:
        raise ValueError("need at least one generator")
    degree = generators[0].degree
    ident = Permutation.identity(degree)
    closure = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for h in frontier:
            for g in generators:
                prod = g * h
                if prod not in closure:
                    closure.add(prod)
                    if len(closure) > cap:
                        raise ValueError(f"naive closure exceeds cap {cap}")
                    nxt.append(prod)
        frontier = nxt
    return frozenset(closure)
