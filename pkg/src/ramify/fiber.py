"""Components of the fiber square Y x_X Y and everything built on them.

The fiber square of a cover with monodromy group G decomposes into
irreducible components indexed by the G-orbits on ordered pairs of fiber
points (the orbitals).  Over each branch point, pairs of local points carry
local branches (orbits of the cyclic group generated by the branch cycle),
and components intersect exactly where one such point carries branches from
two of them.  That intersection pattern is the dual graph.

Genuine ramification is decided two independent ways: group-theoretically
(HN = G for H a point stabilizer and N the normal closure of the branch
cycles) and by connectivity of the dual graph; their agreement is a test in
the suite, never an assumption here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .cover import (
    BranchedCover,
    monodromy_group,
    require_valid,
    total_space_genus,
)
from .graphs import Graph, delete_vertex, is_connected, quotient_by_partition
from .perm import (
    GeneratedGroup,
    Permutation,
    Transitivity,
    format_cycles,
    joined_group,
    normal_closure,
    orbits,
    point_stabilizer,
    transitivity,
)


class TheoremViolationError(RuntimeError):
    """A certified implication of the verified theorems failed; this would be
    a counterexample (i.e. a bug) and is always fatal."""


@dataclass(frozen=True)
class Orbital:
    """G-orbit on ordered pairs of fiber points: one irreducible component
    of the fiber square."""
    id: int
    representative: tuple
    size: int
    is_diagonal: bool


@dataclass(frozen=True)
class LocalBranch:
    orbital_id: int
    size: int
    representative: tuple


@dataclass(frozen=True)
class SchemePoint:
    """A point of the fiber square over branch point j: an ordered pair of
    local points of Y, i.e. of cycles of c_j (fixed points count as
    1-cycles), with its local branches."""
    branch_index: int            # 1-based index of the branch point
    cycle_pair: tuple            # (kappa, kappa') as tuples of 1-based points
    branches: tuple              # LocalBranch entries

    @property
    def ramification_indices(self) -> tuple:
        return (len(self.cycle_pair[0]), len(self.cycle_pair[1]))


@dataclass(frozen=True)
class GenuineRamification:
    genuinely_ramified: bool
    etale_subcover_degree: int   # index [G : HN]; 1 iff genuinely ramified


@dataclass(frozen=True)
class SdCertification:
    """Outcome of the full-symmetric-group certification.

    ``certified`` with a list of verified steps, or a refusal naming the
    failed hypothesis.  Hypotheses holding while a step fails raises
    TheoremViolationError instead of returning.
    """
    certified: bool
    degree: int
    failed_hypothesis: str | None = None
    steps: tuple = ()
    galois_closure_order: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "certified": self.certified,
            "degree": self.degree,
            "failed_hypothesis": self.failed_hypothesis,
            "steps": list(self.steps),
            "galois_closure_order": self.galois_closure_order,
        }


@dataclass(frozen=True)
class ConnectivityFlag:
    connected: bool
    vacuous: bool

    def to_json_dict(self) -> dict:
        return {"connected": self.connected, "vacuous": self.vacuous}


@dataclass(frozen=True, eq=False)
class FiberReport:
    degree: int
    orbitals: tuple
    scheme_points: tuple
    dual_graph: Graph
    fiber_connected: bool
    offdiag_closure_connected: ConnectivityFlag
    offdiag_irreducible: bool
    genuinely_ramified: bool
    etale_subcover_degree: int
    galois_closure_order: int
    sd_certificate: SdCertification

    def to_json_dict(self) -> dict:
        return {
            "schema": "fiber-report/1",
            "degree": self.degree,
            "orbitals": [
                {"id": o.id, "representative": list(o.representative),
                 "size": o.size, "is_diagonal": o.is_diagonal}
                for o in self.orbitals
            ],
            "scheme_points": [
                {
                    "branch_index": sp.branch_index,
                    "cycles": [list(sp.cycle_pair[0]), list(sp.cycle_pair[1])],
                    "branches": [
                        {"orbital": b.orbital_id, "size": b.size,
                         "representative": list(b.representative)}
                        for b in sp.branches
                    ],
                }
                for sp in self.scheme_points
            ],
            "dual_graph": {
                "vertices": list(self.dual_graph.labels),
                "edges": [list(e) for e in self.dual_graph.edges],
            },
            "fiber_connected": self.fiber_connected,
            "offdiag_closure_connected": self.offdiag_closure_connected.to_json_dict(),
            "offdiag_irreducible": self.offdiag_irreducible,
            "genuinely_ramified": self.genuinely_ramified,
            "etale_subcover_degree": self.etale_subcover_degree,
            "galois_closure_order": self.galois_closure_order,
            "sd_certificate": self.sd_certificate.to_json_dict(),
        }


@dataclass(frozen=True)
class LocalInertia:
    branch_index: int            # 1-based
    cycle: tuple                 # cycle of c_j (1-based points), the point of Y
    element: Permutation         # fixes the distinguished point 1


@dataclass(frozen=True, eq=False)
class DerivedCover:
    """The cover q1' : Y' -> Y as a group action with local inertia data.

    No surface presentation of Y is reconstructed; every verdict below only
    needs the stabilizer group and the inertia elements.
    """
    base: BranchedCover
    degree: int                  # d - 1
    group: GeneratedGroup        # Stab_G(1), permuting {2..d}, fixing 1
    local_inertia: tuple         # LocalInertia entries, one per (j, cycle)
    fiber_transitive: bool       # Y' connected over Y
    morse: bool
    genuinely_ramified: bool
    total_space_genus: int | None   # genus of Y' by Riemann-Hurwitz over Y

    def to_json_dict(self) -> dict:
        return {
            "schema": "derived-cover/1",
            "degree": self.degree,
            "group_order": self.group.order,
            "local_inertia": [
                {"branch_index": li.branch_index, "cycle": list(li.cycle),
                 "element": format_cycles(li.element)}
                for li in self.local_inertia
            ],
            "fiber_transitive": self.fiber_transitive,
            "morse": self.morse,
            "genuinely_ramified": self.genuinely_ramified,
            "total_space_genus": self.total_space_genus,
        }


@dataclass(frozen=True, eq=False)
class OracleReport:
    """Cayley-graph oracle at the Galois-closure level, quotiented back down.

    For Galois covers the quotient must coincide with the dual graph; for
    non-Galois covers only quotient-connected => dual-connected is backed by
    the construction, so a strict edge inclusion is flagged for study rather
    than treated as an error.
    """
    skipped: bool
    reason: str | None
    cayley_graph: Graph | None
    quotient: Graph | None
    quotient_connected: bool | None
    matches_dual: bool | None
    quotient_edges_strict_subset: bool | None


# ---------------------------------------------------------------------------

def _pair_orbits(c: BranchedCover) -> tuple:
    group = monodromy_group(c, checked=False)
    domain = itertools.product(range(1, c.degree + 1), repeat=2)
    return orbits(group, domain)


def orbitals(c: BranchedCover, checked: bool = True) -> tuple:
    """Orbitals ordered by least pair; the diagonal comes first for a
    transitive group since (1,1) is the least pair of all."""
    if checked:
        require_valid(c)
    parts = _pair_orbits(c)
    out = []
    for i, part in enumerate(parts):
        rep = part[0]
        out.append(Orbital(
            id=i,
            representative=rep,
            size=len(part),
            is_diagonal=rep[0] == rep[1],
        ))
    return tuple(out)


def _orbital_lookup(c: BranchedCover) -> dict:
    lookup = {}
    for i, part in enumerate(_pair_orbits(c)):
        for pair in part:
            lookup[pair] = i
    return lookup


def scheme_points(c: BranchedCover, checked: bool = True,
                  _lookup: dict | None = None) -> tuple:
    """All points of the fiber square over branch points, with their local
    branches.  A pair of cycles of lengths (e, e') carries gcd(e, e')
    branches, each an orbit of size lcm(e, e')."""
    if checked:
        require_valid(c)
    lookup = _lookup if _lookup is not None else _orbital_lookup(c)
    points = []
    for j, cj in enumerate(c.branch_cycles, start=1):
        cycles = cj.cycles(include_fixed=True)
        for kappa, kappa2 in itertools.product(cycles, repeat=2):
            e, e2 = len(kappa), len(kappa2)
            branches = []
            seen: set = set()
            for a, b in itertools.product(kappa, kappa2):
                if (a, b) in seen:
                    continue
                orbit = [(a, b)]
                seen.add((a, b))
                x, y = cj(a), cj(b)
                while (x, y) != (a, b):
                    orbit.append((x, y))
                    seen.add((x, y))
                    x, y = cj(x), cj(y)
                rep = min(orbit)
                branches.append(LocalBranch(
                    orbital_id=lookup[rep],
                    size=len(orbit),
                    representative=rep,
                ))
            assert len(branches) == math.gcd(e, e2)
            assert all(b.size == math.lcm(e, e2) for b in branches)
            branches.sort(key=lambda b: b.representative)
            points.append(SchemePoint(
                branch_index=j,
                cycle_pair=(kappa, kappa2),
                branches=tuple(branches),
            ))
    return tuple(points)


def dual_graph(c: BranchedCover, checked: bool = True) -> Graph:
    """Simple graph on orbitals; distinct components are joined when some
    scheme point carries local branches of both."""
    if checked:
        require_valid(c)
    lookup = _orbital_lookup(c)
    orbs = orbitals(c, checked=False)
    edges = set()
    for sp in scheme_points(c, checked=False, _lookup=lookup):
        ids = sorted({b.orbital_id for b in sp.branches})
        for a, b in itertools.combinations(ids, 2):
            edges.add((a, b))
    return Graph(range(len(orbs)), edges)


def genuinely_ramified(c: BranchedCover, checked: bool = True) -> GenuineRamification:
    """Group-theoretic test: HN = G for H = Stab_G(1) and N the normal
    closure of the branch cycles.  The witness is the degree [G : HN] of the
    maximal etale subcover."""
    if checked:
        require_valid(c)
    group = monodromy_group(c, checked=False)
    stab = point_stabilizer(group, 1)
    closure = normal_closure(c.branch_cycles, group)
    hn = joined_group(stab, closure)
    index = group.order // hn.order
    return GenuineRamification(
        genuinely_ramified=index == 1,
        etale_subcover_degree=index,
    )


def offdiag_closure_connected(c: BranchedCover,
                              checked: bool = True) -> ConnectivityFlag:
    """Connectivity of the dual graph with the diagonal vertex (and incident
    edges) removed.  Degree 1 leaves nothing: reported vacuous, never
    silently true."""
    if checked:
        require_valid(c)
    graph = dual_graph(c, checked=False)
    diag = next(o.id for o in orbitals(c, checked=False) if o.is_diagonal)
    verdict = is_connected(delete_vertex(graph, diag))
    return ConnectivityFlag(connected=verdict.connected, vacuous=verdict.vacuous)


def galois_closure_order(c: BranchedCover, checked: bool = True) -> int:
    """The Galois closure of the cover has group G and degree |G|."""
    if checked:
        require_valid(c)
    return monodromy_group(c, checked=False).order


def certify_sd(c: BranchedCover, checked: bool = True) -> SdCertification:
    """Certify that a Morse, genuinely ramified cover has full symmetric
    Galois closure, step by step.  Hypothesis failures return a refusal; a
    step failing under satisfied hypotheses raises TheoremViolationError."""
    if checked:
        require_valid(c)
    d = c.degree
    if d < 2:
        return SdCertification(False, d, failed_hypothesis="degree < 2")
    from .cover import is_morse
    if not is_morse(c, checked=False):
        return SdCertification(False, d, failed_hypothesis="not Morse")
    gr = genuinely_ramified(c, checked=False)
    if not gr.genuinely_ramified:
        return SdCertification(
            False, d,
            failed_hypothesis=(
                f"not genuinely ramified (etale subcover of degree "
                f"{gr.etale_subcover_degree})"))

    steps = ["hypotheses: Morse and genuinely ramified (HN = G)"]
    group = monodromy_group(c, checked=False)

    offdiag = offdiag_closure_connected(c, checked=False)
    if not offdiag.connected:
        raise TheoremViolationError(
            "genuinely ramified cover with disconnected off-diagonal closure")
    steps.append("off-diagonal closure of the fiber square is connected")

    orbs = orbitals(c, checked=False)
    if len(orbs) != 2:
        raise TheoremViolationError(
            f"Morse genuinely ramified cover with {len(orbs)} orbitals")
    steps.append("exactly 2 orbitals: the off-diagonal part is irreducible")

    if transitivity(group) is not Transitivity.TWO_TRANSITIVE:
        raise TheoremViolationError(
            "2 orbitals but the monodromy group is not two-transitive")
    steps.append("monodromy group is two-transitive")

    if not any(cyc.is_transposition() for cyc in c.branch_cycles):
        raise TheoremViolationError("Morse cover without a transposition")
    steps.append("a branch cycle is a transposition, so the group contains one")

    order = group.order
    if order != math.factorial(d):
        raise TheoremViolationError(
            f"two-transitive group with a transposition of order {order} != {d}!")
    steps.append(f"galois closure order is {order} = {d}!")

    return SdCertification(True, d, steps=tuple(steps),
                           galois_closure_order=order)


def component_cover(c: BranchedCover, orbital: Orbital,
                    checked: bool = True) -> BranchedCover:
    """The cover of X given by the monodromy action on one orbital's pairs,
    relabeled 1..|orbital|: the normalization of that component over X.  The
    diagonal orbital gives back a cover equal to the input."""
    if checked:
        require_valid(c)
    group = monodromy_group(c, checked=False)
    pairs = next(part for part in orbits(
        group, itertools.product(range(1, c.degree + 1), repeat=2))
        if orbital.representative in part)
    index = {pair: i + 1 for i, pair in enumerate(pairs)}

    def induced(p: Permutation) -> Permutation:
        images = [0] * len(pairs)
        for pair, i in index.items():
            images[i - 1] = index[(p(pair[0]), p(pair[1]))]
        return Permutation(images)

    result = BranchedCover(
        degree=len(pairs),
        base_genus=c.base_genus,
        handles=tuple((induced(a), induced(b)) for a, b in c.handles),
        branch_cycles=tuple(induced(cyc) for cyc in c.branch_cycles),
        labels=c.labels,
    )
    from .cover import validate
    report = validate(result)
    assert report.valid, f"orbital action produced an invalid cover: {report.violations}"
    return result


def derived_cover_q1(c: BranchedCover, checked: bool = True) -> DerivedCover:
    """The restriction of the first projection to the off-diagonal closure,
    as the point stabilizer H = Stab_G(1) acting on {2..d} with local inertia
    u c_j^e u^-1 at the point of Y given by a length-e cycle of c_j (u from
    the breadth-first orbit transversal, mapping the cycle's least point
    to 1)."""
    if checked:
        require_valid(c)
    d = c.degree
    if d < 2:
        raise ValueError("derived cover needs degree >= 2")
    group = monodromy_group(c, checked=False)
    stab = point_stabilizer(group, 1)

    # breadth-first transversal from point 1: v[p] maps 1 to p
    ident = Permutation.identity(d)
    v = {1: ident}
    frontier = [1]
    while frontier:
        nxt = []
        for q in frontier:
            for gen in group.generators:
                r = gen(q)
                if r not in v:
                    v[r] = gen * v[q]
                    nxt.append(r)
        nxt.sort()
        frontier = nxt
    assert len(v) == d

    inertia = []
    for j, cj in enumerate(c.branch_cycles, start=1):
        for kappa in cj.cycles(include_fixed=True):
            i = kappa[0]
            e = len(kappa)
            u = v[i].inverse()
            element = u * (cj ** e) * u.inverse()
            assert element(1) == 1
            assert element in stab
            inertia.append(LocalInertia(branch_index=j, cycle=kappa,
                                        element=element))

    nontrivial = [li.element for li in inertia if not li.element.is_identity()]
    morse = all(t.is_transposition() for t in nontrivial)

    if d == 2:
        fiber_transitive = True
    else:
        fiber_transitive = len(orbits(stab, range(2, d + 1))) == 1

    stab2 = point_stabilizer(stab, 2) if d >= 2 else stab
    closure = normal_closure(nontrivial, stab)
    hn = joined_group(stab2, closure)
    gr = hn.order == stab.order

    genus = None
    if fiber_transitive:
        g_y = total_space_genus(c, checked=False)
        ram = sum(len(cyc) - 1 for t in nontrivial for cyc in t.cycles())
        doubled = (d - 1) * (2 * g_y - 2) + ram
        assert doubled % 2 == 0 and doubled >= -2, "derived Riemann-Hurwitz failed"
        genus = (doubled + 2) // 2

    return DerivedCover(
        base=c,
        degree=d - 1,
        group=stab,
        local_inertia=tuple(inertia),
        fiber_transitive=fiber_transitive,
        morse=morse,
        genuinely_ramified=gr,
        total_space_genus=genus,
    )


def cayley_quotient_oracle(c: BranchedCover, cap: int = 10080,
                           checked: bool = True) -> OracleReport:
    """Galois-closure-level oracle: the graph on the elements of G with an
    edge when gamma . gamma'^-1 lies in a conjugate of some <c_j> minus the
    identity, quotiented along gamma -> orbital of (1, gamma(1))."""
    if checked:
        require_valid(c)
    group = monodromy_group(c, checked=False)
    if group.order > cap:
        return OracleReport(True, f"group order {group.order} exceeds cap {cap}",
                            None, None, None, None, None)
    elements = group.elements(cap=cap)

    connection: set = set()
    for cj in c.branch_cycles:
        powers = []
        p = cj
        while not p.is_identity():
            powers.append(p)
            p = p * cj
        for g in elements:
            for s in powers:
                connection.add(s.conjugate(g))

    labels = {g: format_cycles(g) for g in elements}
    edges = set()
    for g in elements:
        for s in connection:
            h = s * g
            a, b = labels[g], labels[h]
            if a != b:
                edges.add((a, b) if a < b else (b, a))
    cayley = Graph(labels.values(), edges)

    lookup = _orbital_lookup(c)
    parts: dict = {}
    for g in elements:
        parts.setdefault(lookup[(1, g(1))], []).append(labels[g])
    names = sorted(parts)
    quotient = quotient_by_partition(cayley, [parts[n] for n in names],
                                     names=names)
    dual = dual_graph(c, checked=False)
    quotient_edges = set(quotient.edges)
    dual_edges = set(dual.edges)
    return OracleReport(
        skipped=False,
        reason=None,
        cayley_graph=cayley,
        quotient=quotient,
        quotient_connected=is_connected(quotient).connected,
        matches_dual=quotient == dual,
        quotient_edges_strict_subset=quotient_edges < dual_edges,
    )


def analyze(c: BranchedCover) -> FiberReport:
    """Full fiber-square report for a valid cover."""
    require_valid(c)
    orbs = orbitals(c, checked=False)
    lookup = _orbital_lookup(c)
    points = scheme_points(c, checked=False, _lookup=lookup)
    graph = dual_graph(c, checked=False)
    gr = genuinely_ramified(c, checked=False)
    offdiag = offdiag_closure_connected(c, checked=False)
    return FiberReport(
        degree=c.degree,
        orbitals=orbs,
        scheme_points=points,
        dual_graph=graph,
        fiber_connected=is_connected(graph).connected,
        offdiag_closure_connected=offdiag,
        offdiag_irreducible=c.degree >= 2 and len(orbs) == 2,
        genuinely_ramified=gr.genuinely_ramified,
        etale_subcover_degree=gr.etale_subcover_degree,
        galois_closure_order=galois_closure_order(c, checked=False),
        sd_certificate=certify_sd(c, checked=False),
    )
