"""Corpus machinery: exhaustive enumeration of valid covers at tiny
parameters, seeded random (optionally Morse) sampling, and the corpus-wide
theorem-verification driver.

Enumeration fixes every generator except the last branch cycle, which the
surface relation forces; that cuts the search space by |S_d| and keeps the
hard caps honest.  Verification collects violations instead of raising, so a
counterexample (i.e. a bug) surfaces with full context at the end of the run.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterator

from .cover import (
    BranchedCover,
    dumps_cover,
    is_morse,
    monodromy_group,
    relation_product,
    total_space_genus,
    validate,
)
from .fiber import (
    cayley_quotient_oracle,
    certify_sd,
    component_cover,
    derived_cover_q1,
    dual_graph,
    genuinely_ramified,
    offdiag_closure_connected,
    orbitals,
)
from .graphs import is_connected
from .perm import Permutation, Transitivity, transitivity

#: Hard enumeration caps per base genus.
ENUMERATION_CAPS = {0: 5, 1: 3}

#: Rejection-sampling budget for random covers.
REJECTION_BUDGET = 100_000


class CapExceededError(ValueError):
    """Enumeration parameters outside the hard caps."""


class InfeasibleParametersError(ValueError):
    """Rejection sampling exhausted its budget; carries a diagnosis."""


@dataclass(frozen=True)
class CorpusSpec:
    degrees: tuple           # inclusive (lo, hi)
    base_genera: tuple       # inclusive (lo, hi)
    branch_counts: tuple     # inclusive (lo, hi)
    morse_only: bool = False
    samples: int = 0         # 0: exhaustive; > 0: random mode
    seed: int | None = None  # mandatory in random mode
    dedup: bool = False      # conjugation-canonical dedup (exhaustive mode)

    def __post_init__(self):
        for name in ("degrees", "base_genera", "branch_counts"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"empty {name} range {lo}:{hi}")
        if self.samples and self.seed is None:
            raise ValueError("random mode requires a seed")

    @property
    def random_mode(self) -> bool:
        return self.samples > 0


def _perms(d: int) -> list:
    return [Permutation._from_raw(raw)
            for raw in itertools.permutations(range(d))]


def canonical_form(c: BranchedCover) -> tuple:
    """Least relabeling image under simultaneous conjugation by all of S_d;
    idempotent and conjugation-invariant by construction."""
    best = None
    for raw in itertools.permutations(range(c.degree)):
        sigma = Permutation._from_raw(raw)
        key = tuple(
            tuple(p.conjugate(sigma).images for p in (a, b))
            for a, b in c.handles
        ) + tuple(cyc.conjugate(sigma).images for cyc in c.branch_cycles)
        if best is None or key < best:
            best = key
    return (c.degree, c.base_genus, best)


def enumerate_covers(spec: CorpusSpec) -> Iterator[BranchedCover]:
    """All valid covers in deterministic order; the last branch cycle is
    forced by the surface relation."""
    d_lo, d_hi = spec.degrees
    g_lo, g_hi = spec.base_genera
    r_lo, r_hi = spec.branch_counts
    for g in range(g_lo, g_hi + 1):
        if g not in ENUMERATION_CAPS:
            raise CapExceededError(f"no enumeration cap defined for genus {g}")
        if d_hi > ENUMERATION_CAPS[g]:
            raise CapExceededError(
                f"degree cap for genus {g} is {ENUMERATION_CAPS[g]}, "
                f"requested {d_hi}")
    seen: set = set()
    for d in range(d_lo, d_hi + 1):
        all_perms = _perms(d)
        non_identity = [p for p in all_perms if not p.is_identity()]
        cycle_pool = ([p for p in non_identity if p.is_transposition()]
                      if spec.morse_only else non_identity)
        for g in range(g_lo, g_hi + 1):
            for handles in itertools.product(
                    itertools.product(all_perms, repeat=2), repeat=g):
                commutators = Permutation.identity(d)
                for a, b in handles:
                    commutators = commutators * (a * b * a.inverse() * b.inverse())
                for r in range(r_lo, r_hi + 1):
                    if r == 0:
                        if not commutators.is_identity():
                            continue
                        tuples: Iterator = iter([()])
                    else:
                        def forced(free, prod=commutators):
                            for c in free:
                                prod = prod * c
                            return free + (prod.inverse(),)

                        tuples = (forced(free) for free in
                                  itertools.product(cycle_pool, repeat=r - 1))
                    for cycles in tuples:
                        if cycles:
                            last = cycles[-1]
                            if last.is_identity():
                                continue
                            if spec.morse_only and not last.is_transposition():
                                continue
                        cover = BranchedCover(d, g, handles, cycles)
                        if not validate(cover).valid:
                            continue
                        if spec.dedup:
                            key = canonical_form(cover)
                            if key in seen:
                                continue
                            seen.add(key)
                        yield cover


def random_cover(spec: CorpusSpec, seed: int | None = None) -> BranchedCover:
    """One seeded random valid cover: handles uniform, free branch cycles
    uniform over non-identity elements (transpositions in Morse mode), last
    cycle forced, rejection until valid."""
    if not spec.random_mode and seed is None:
        raise ValueError("random_cover needs random mode or an explicit seed")
    rng = random.Random(spec.seed if seed is None else seed)
    d_lo, d_hi = spec.degrees
    g_lo, g_hi = spec.base_genera
    r_lo, r_hi = spec.branch_counts
    d = rng.randint(d_lo, d_hi)
    g = rng.randint(g_lo, g_hi)
    r = rng.randint(r_lo, r_hi)
    return _sample_cover(rng, d, g, r, spec.morse_only)


def _sample_cover(rng: random.Random, d: int, g: int, r: int,
                  morse: bool) -> BranchedCover:
    pairs = list(itertools.combinations(range(1, d + 1), 2))
    for _ in range(REJECTION_BUDGET):
        handles = []
        for _ in range(g):
            im1 = list(range(1, d + 1))
            rng.shuffle(im1)
            im2 = list(range(1, d + 1))
            rng.shuffle(im2)
            handles.append((Permutation(im1), Permutation(im2)))
        handles = tuple(handles)
        frees = []
        for _ in range(max(r - 1, 0)):
            if morse:
                a, b = pairs[rng.randrange(len(pairs))]
                frees.append(Permutation.from_cycle([a, b], d))
            else:
                im = list(range(1, d + 1))
                while True:
                    rng.shuffle(im)
                    if any(v != i + 1 for i, v in enumerate(im)):
                        break
                frees.append(Permutation(im))
        frees = tuple(frees)
        if r > 0:
            prefix = BranchedCover(d, g, handles, frees)
            last = relation_product(prefix).inverse()
            if last.is_identity():
                continue
            if morse and not last.is_transposition():
                continue
            cycles = frees + (last,)
        else:
            cycles = ()
        cover = BranchedCover(d, g, handles, cycles)
        if validate(cover).valid:
            return cover
    diagnosis = ""
    if morse and g == 0 and r % 2 == 1:
        diagnosis = (" (parity: a product of an odd number of transpositions"
                     " is odd and never the identity)")
    raise InfeasibleParametersError(
        f"no valid cover found for d={d} g={g} r={r} morse={morse} within "
        f"{REJECTION_BUDGET} draws{diagnosis}")


# ---------------------------------------------------------------------------
# corpus verification

CHECK_NAMES = (
    "hn_vs_dual_graph",
    "theorem_main",
    "two_transitive_vs_orbitals",
    "sd_cover_order",
    "derived_cover",
    "cayley_oracle",
)


@dataclass
class VerificationReport:
    covers_checked: int = 0
    checks_run: dict = field(default_factory=lambda: {n: 0 for n in CHECK_NAMES})
    vacuous_theorem_main: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "schema": "verification-report/1",
            "covers_checked": self.covers_checked,
            "checks_run": {n: self.checks_run[n] for n in CHECK_NAMES},
            "vacuous_theorem_main": self.vacuous_theorem_main,
            "violations": sorted(self.violations),
            "ok": self.ok,
        }

    def to_text(self) -> str:
        lines = [f"covers checked: {self.covers_checked}"]
        for name in CHECK_NAMES:
            lines.append(f"  {name}: {self.checks_run[name]} checks")
        lines.append(f"  theorem_main vacuous (d=1): {self.vacuous_theorem_main}")
        if self.violations:
            lines.append(f"VIOLATIONS: {len(self.violations)}")
            lines.extend("  " + v for v in sorted(self.violations))
        else:
            lines.append("no violations")
        return "\n".join(lines) + "\n"


def check_cover(cover: BranchedCover, oracle_cap: int = 10080) -> tuple:
    """Run every theorem check on one cover.

    Returns (counters, vacuous_main, violations): which checks ran, whether
    theorem main was vacuous here, and violation strings (each carrying the
    serialized offending cover).
    """
    counters = {n: 0 for n in CHECK_NAMES}
    violations = []
    vacuous_main = 0

    def violation(check: str, text: str) -> None:
        violations.append(
            f"{check}: {text} | cover: {dumps_cover(cover).strip()}")

    group = monodromy_group(cover, checked=False)
    orbs = orbitals(cover, checked=False)
    graph = dual_graph(cover, checked=False)
    gr = genuinely_ramified(cover, checked=False)
    morse = is_morse(cover, checked=False)

    # section 3 equivalence: HN = G iff the fiber square is connected
    counters["hn_vs_dual_graph"] += 1
    if gr.genuinely_ramified != is_connected(graph).connected:
        violation("hn_vs_dual_graph",
                  f"HN test says {gr.genuinely_ramified}, dual graph says "
                  f"{is_connected(graph).connected}")

    # theorem main: genuinely ramified => off-diagonal closure connected
    counters["theorem_main"] += 1
    if gr.genuinely_ramified:
        flag = offdiag_closure_connected(cover, checked=False)
        if flag.vacuous:
            vacuous_main = 1
        elif not flag.connected:
            violation("theorem_main",
                      "genuinely ramified but off-diagonal closure disconnected")

    # two-transitivity iff exactly 2 orbitals
    counters["two_transitive_vs_orbitals"] += 1
    if cover.degree >= 2:
        two_t = transitivity(group) is Transitivity.TWO_TRANSITIVE
        if two_t != (len(orbs) == 2):
            violation("two_transitive_vs_orbitals",
                      f"two_transitive={two_t} but {len(orbs)} orbitals")

    # Morse + genuinely ramified => full symmetric closure
    if morse and gr.genuinely_ramified and cover.degree >= 2:
        counters["sd_cover_order"] += 1
        expected = math.factorial(cover.degree)
        if group.order != expected:
            violation("sd_cover_order",
                      f"order {group.order} != {cover.degree}!")
        else:
            cert = certify_sd(cover, checked=False)
            if not cert.certified:
                violation("sd_cover_order",
                          f"certification refused: {cert.failed_hypothesis}")

    # derived cover invariants for Morse genuinely ramified covers, d >= 3
    if morse and gr.genuinely_ramified and cover.degree >= 3:
        counters["derived_cover"] += 1
        derived = derived_cover_q1(cover, checked=False)
        if not derived.morse:
            violation("derived_cover", "derived cover not Morse")
        if not derived.genuinely_ramified:
            violation("derived_cover", "derived cover not genuinely ramified")
        if derived.degree != cover.degree - 1:
            violation("derived_cover",
                      f"derived degree {derived.degree} != d-1")
        offdiag = [o for o in orbs if not o.is_diagonal]
        if len(offdiag) == 1:
            comp = component_cover(cover, offdiag[0], checked=False)
            comp_genus = total_space_genus(comp, checked=False)
            if comp_genus != derived.total_space_genus:
                violation("derived_cover",
                          f"genus over X {comp_genus} != genus over Y "
                          f"{derived.total_space_genus}")

    # Galois covers: the Cayley quotient is the dual graph exactly
    if group.order == cover.degree and group.order <= oracle_cap:
        counters["cayley_oracle"] += 1
        report = cayley_quotient_oracle(cover, cap=oracle_cap, checked=False)
        if report.skipped or not report.matches_dual:
            violation("cayley_oracle", "quotient graph differs from dual graph")

    return counters, vacuous_main, violations


def verify_corpus(spec: CorpusSpec, oracle_cap: int = 10080,
                  jobs: int = 1) -> VerificationReport:
    """Run every check over the corpus the spec describes.  Violations are
    collected, never raised mid-stream."""
    report = VerificationReport()
    if spec.random_mode:
        rng = random.Random(spec.seed)
        covers: Iterator = (
            _sample_cover(rng,
                          rng.randint(*spec.degrees),
                          rng.randint(*spec.base_genera),
                          rng.randint(*spec.branch_counts),
                          spec.morse_only)
            for _ in range(spec.samples))
    else:
        covers = enumerate_covers(spec)

    if jobs > 1:
        import multiprocessing

        with multiprocessing.Pool(jobs) as pool:
            results = pool.imap(_check_worker,
                                ((c, oracle_cap) for c in covers),
                                chunksize=16)
            for counters, vacuous, violations in results:
                _fold(report, counters, vacuous, violations)
    else:
        for cover in covers:
            _fold(report, *check_cover(cover, oracle_cap))
    return report


def _check_worker(args) -> tuple:
    cover, oracle_cap = args
    return check_cover(cover, oracle_cap)


def _fold(report: VerificationReport, counters: dict, vacuous: int,
          violations: list) -> None:
    report.covers_checked += 1
    for name, v in counters.items():
        report.checks_run[name] += v
    report.vacuous_theorem_main += vacuous
    report.violations.extend(violations)
