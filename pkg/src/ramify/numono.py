"""Numerical monodromy for plane curves.

From an exact bivariate polynomial p(x, y), squarefree in y, this module
computes the critical x-values of the projection (x, y) -> x, tracks the
fiber along closed loops to read off branch cycles, and assembles a
BranchedCover over the line.

Everything algebraic is exact (rational arithmetic; resultants and the
singularity test go through sympy); only root-finding and path tracking are
floating point, and those produce discrete permutations whose defining
relation is checked exactly -- a wrong track cannot pass silently.

Path layout.  All loops share a base point to the right of every critical
value.  Each loop descends to a rail far below the critical values, runs
along the rail, ascends vertically to a small circle around its target,
walks the circle counterclockwise and retraces.  "Vertically" means along a
sweep direction chosen deterministically so that no two targets (nor the
base point) share a sweep coordinate -- real curves often have conjugate
critical pairs with equal real parts, so the default upward direction is
rotated slightly when needed.  With cycles listed in sweep order and the
cycle at infinity tracked along a clockwise circle through the base point,
the relation c_1 ... c_r . c_inf = id holds exactly by construction; it is
verified on every run.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cover import BranchedCover, validate
from .perm import Permutation, format_cycles


class PolyParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NonGenericError(ValueError):
    """The projection violates a genericity hypothesis (multiple
    discriminant root, leading coefficient vanishing at a critical value,
    coincident sweep coordinates beyond repair, ...)."""


class SingularCurveError(ValueError):
    """The affine curve has a singular point (p, dp/dx, dp/dy share a zero)
    or a vertical-line component; out-of-model input."""


class TrackingAmbiguityError(RuntimeError):
    """Root matching failed within the refinement budget; never resolved by
    guessing."""


class RelationViolationError(RuntimeError):
    """The tracked cycles do not satisfy c_1 ... c_r . c_inf = id, even
    after the doubled-precision retry."""


# ---------------------------------------------------------------------------
# exact bivariate polynomials over Q

Coeffs = dict  # (x_power, y_power) -> Fraction


def _p_add(a: Coeffs, b: Coeffs) -> Coeffs:
    out = dict(a)
    for k, v in b.items():
        s = out.get(k, Fraction(0)) + v
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def _p_neg(a: Coeffs) -> Coeffs:
    return {k: -v for k, v in a.items()}


def _p_mul(a: Coeffs, b: Coeffs) -> Coeffs:
    out: Coeffs = {}
    for (i1, j1), v1 in a.items():
        for (i2, j2), v2 in b.items():
            k = (i1 + i2, j1 + j2)
            s = out.get(k, Fraction(0)) + v1 * v2
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return out


def _p_pow(a: Coeffs, n: int) -> Coeffs:
    out: Coeffs = {(0, 0): Fraction(1)}
    for _ in range(n):
        out = _p_mul(out, a)
    return out


class PlanePolynomial:
    """Exact bivariate polynomial, squarefree in y, with y-degree >= 2."""

    __slots__ = ("coeffs", "y_degree", "x_degree")

    def __init__(self, coeffs: Coeffs, check_squarefree: bool = True):
        clean = {k: Fraction(v) for k, v in coeffs.items() if v}
        if not clean:
            raise ValueError("zero polynomial")
        self.coeffs = clean
        self.y_degree = max(j for _, j in clean)
        self.x_degree = max(i for i, _ in clean)
        if self.y_degree < 2:
            raise ValueError(f"y-degree {self.y_degree} < 2")
        if check_squarefree:
            _check_squarefree_in_y(self)

    # -- structure ---------------------------------------------------------

    def y_coefficient(self, j: int) -> Coeffs:
        """Coefficient of y^j, as a univariate polynomial in x (same dict
        encoding with y-power 0)."""
        return {(i, 0): v for (i, jj), v in self.coeffs.items() if jj == j}

    def leading_coefficient(self) -> Coeffs:
        return self.y_coefficient(self.y_degree)

    def dy(self) -> Coeffs:
        return {(i, j - 1): v * j for (i, j), v in self.coeffs.items() if j > 0}

    def dx(self) -> Coeffs:
        return {(i - 1, j): v * i for (i, j), v in self.coeffs.items() if i > 0}

    def shear(self, lam: Fraction) -> "PlanePolynomial":
        """Substitute x <- x + lam*y."""
        lam = Fraction(lam)
        xs = {(1, 0): Fraction(1), (0, 1): lam}
        out: Coeffs = {}
        for (i, j), v in self.coeffs.items():
            out = _p_add(out, _p_mul(_p_pow(xs, i), {(0, j): v}))
        return PlanePolynomial(out)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PlanePolynomial)
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __str__(self) -> str:
        return format_poly(self.coeffs)

    def __repr__(self) -> str:
        return f"parse_poly({str(self)!r})"


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_poly(coeffs: Coeffs) -> str:
    """Canonical printer: terms by (total degree, x-power) descending."""
    keys = sorted(coeffs, key=lambda k: (k[0] + k[1], k[0]), reverse=True)
    pieces = []
    for idx, (i, j) in enumerate(keys):
        v = coeffs[(i, j)]
        sign = "-" if v < 0 else "+"
        mag = abs(v)
        factors = []
        if mag != 1 or (i == 0 and j == 0):
            factors.append(_frac_str(mag))
        if i:
            factors.append("x" if i == 1 else f"x^{i}")
        if j:
            factors.append("y" if j == 1 else f"y^{j}")
        term = "*".join(factors)
        if idx == 0:
            pieces.append(term if sign == "+" else "-" + term)
        else:
            pieces.append(f" {sign} {term}")
    return "".join(pieces)


# -- parser ------------------------------------------------------------------

class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        if self.pos >= len(self.text):
            return ("end", None, self.pos)
        ch = self.text[self.pos]
        if ch.isdigit():
            j = self.pos
            while j < len(self.text) and self.text[j].isdigit():
                j += 1
            return ("num", int(self.text[self.pos:j]), self.pos)
        if ch in "xy":
            return ("var", ch, self.pos)
        if ch in "+-*^/()":
            return (ch, ch, self.pos)
        raise PolyParseError(f"unexpected character {ch!r}", self.pos)

    def take(self):
        kind, value, pos = self.peek()
        if kind == "num":
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
        elif kind != "end":
            self.pos += 1
        return kind, value, pos


def _parse_expr(lx: _Lexer) -> Coeffs:
    kind, _, _ = lx.peek()
    negate = False
    if kind in ("+", "-"):
        lx.take()
        negate = kind == "-"
    acc = _parse_term(lx)
    if negate:
        acc = _p_neg(acc)
    while True:
        kind, _, _ = lx.peek()
        if kind not in ("+", "-"):
            return acc
        lx.take()
        term = _parse_term(lx)
        acc = _p_add(acc, _p_neg(term) if kind == "-" else term)


def _parse_term(lx: _Lexer) -> Coeffs:
    acc = _parse_factor(lx)
    while True:
        kind, _, _ = lx.peek()
        if kind != "*":
            return acc
        lx.take()
        acc = _p_mul(acc, _parse_factor(lx))


def _parse_factor(lx: _Lexer) -> Coeffs:
    base = _parse_atom(lx)
    kind, _, _ = lx.peek()
    if kind == "^":
        lx.take()
        nkind, n, pos = lx.take()
        if nkind != "num":
            raise PolyParseError("exponent must be a non-negative integer", pos)
        return _p_pow(base, n)
    return base


def _parse_atom(lx: _Lexer) -> Coeffs:
    kind, value, pos = lx.take()
    if kind == "num":
        nxt, _, _ = lx.peek()
        if nxt == "/":
            lx.take()
            dkind, den, dpos = lx.take()
            if dkind != "num" or den == 0:
                raise PolyParseError("denominator must be a positive integer",
                                     dpos)
            return {(0, 0): Fraction(value, den)}
        return {(0, 0): Fraction(value)}
    if kind == "var":
        return {(1, 0) if value == "x" else (0, 1): Fraction(1)}
    if kind == "(":
        inner = _parse_expr(lx)
        ckind, _, cpos = lx.take()
        if ckind != ")":
            raise PolyParseError("expected ')'", cpos)
        return inner
    raise PolyParseError("expected number, variable or '('", pos)


def parse_poly(text: str) -> PlanePolynomial:
    """Parse a polynomial in x, y with integer or rational coefficients and
    operators + - * ^ (and a/b rational literals).  The result is validated:
    nonzero, y-degree >= 2, squarefree in y."""
    lx = _Lexer(text)
    coeffs = _parse_expr(lx)
    kind, _, pos = lx.peek()
    if kind != "end":
        raise PolyParseError("trailing input", pos)
    if not coeffs:
        raise ValueError("zero polynomial")
    return PlanePolynomial(coeffs)


# ---------------------------------------------------------------------------
# exact elimination (sympy)

def _sympy_expr(coeffs: Coeffs):
    import sympy

    x, y = sympy.symbols("x y")
    expr = sympy.Integer(0)
    for (i, j), v in sorted(coeffs.items()):
        expr += sympy.Rational(v.numerator, v.denominator) * x**i * y**j
    return expr, x, y


def _univariate_fractions(expr, var) -> list:
    """Ascending coefficient list over Q of a sympy expression in one var."""
    import sympy

    poly = sympy.Poly(expr, var, domain="QQ")
    coeffs = [Fraction(c.p, c.q) for c in poly.all_coeffs()]
    coeffs.reverse()
    return coeffs


def _check_squarefree_in_y(p: PlanePolynomial) -> None:
    import sympy

    expr, x, y = _sympy_expr(p.coeffs)
    g = sympy.gcd(sympy.Poly(expr, y, domain="QQ[x]"),
                  sympy.Poly(expr.diff(y), y, domain="QQ[x]"))
    if g.degree() > 0:
        raise NonGenericError(
            f"polynomial is not squarefree in y (gcd with dp/dy has "
            f"y-degree {g.degree()})")


def y_resultant_with_dy(p: PlanePolynomial) -> list:
    """Exact Res_y(p, dp/dy) as an ascending Fraction coefficient list."""
    import sympy

    expr, x, y = _sympy_expr(p.coeffs)
    res = sympy.resultant(expr, expr.diff(y), y)
    if res == 0:
        raise NonGenericError("resultant vanishes identically; not squarefree in y")
    return _univariate_fractions(sympy.expand(res), x)


def reject_singular(p: PlanePolynomial) -> None:
    """Exact rejection of singular affine curves and vertical-line
    components."""
    import sympy

    expr, x, y = _sympy_expr(p.coeffs)
    content = sympy.Integer(0)
    for j in range(p.y_degree + 1):
        cj = p.y_coefficient(j)
        if cj:
            cexpr, _, _ = _sympy_expr(cj)
            content = sympy.gcd(content, sympy.Poly(cexpr, x, domain="QQ"))
    if sympy.Poly(content, x).degree() > 0:
        raise SingularCurveError(
            "curve contains a vertical-line component (non-constant content)")
    basis = sympy.groebner([expr, expr.diff(x), expr.diff(y)], x, y,
                           order="lex", domain="QQ")
    if list(basis.exprs) != [sympy.Integer(1)]:
        raise SingularCurveError(
            "curve has a singular affine point (p, dp/dx, dp/dy share a zero)")


def _sq_free_univariate(coeffs: list) -> bool:
    import sympy

    x = sympy.Symbol("x")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * x**i
               for i, c in enumerate(coeffs))
    poly = sympy.Poly(expr, x, domain="QQ")
    if poly.degree() <= 0:
        return True
    return sympy.gcd(poly, poly.diff()).degree() == 0


# ---------------------------------------------------------------------------
# numeric helpers

def _horner(coeffs: Sequence[complex], z: complex) -> complex:
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _np_roots_ascending(coeffs: Sequence[complex]) -> list:
    arr = np.array(list(reversed(coeffs)), dtype=complex)
    return [complex(r) for r in np.roots(arr)]


def _polish(coeffs: Sequence[complex], z: complex, steps: int = 3) -> complex:
    deriv = [i * c for i, c in enumerate(coeffs)][1:]
    for _ in range(steps):
        dv = _horner(deriv, z)
        if dv == 0:
            return z
        z = z - _horner(coeffs, z) / dv
    return z


# ---------------------------------------------------------------------------
# configuration and results

@dataclass(frozen=True)
class TrackingConfig:
    working_digits: int = 16       # float64 baseline; the retry doubles this
    step_tolerance: float = 1e-10  # bisection floor on the path parameter
    safety_factor: float = 3.0     # root move must stay under minsep/safety
    max_depth: int = 40            # bisection depth per step
    base_point_strategy: str = "right"   # "right" | "raised"

    def __post_init__(self):
        if self.step_tolerance <= 0:
            raise ValueError("step tolerance must be positive")
        if self.safety_factor <= 1:
            raise ValueError("safety factor must exceed 1")
        if self.max_depth < 1:
            raise ValueError("max refinement depth must be positive")
        if self.base_point_strategy not in ("right", "raised"):
            raise ValueError(f"unknown base-point strategy "
                             f"{self.base_point_strategy!r}")


@dataclass(frozen=True)
class LoopTarget:
    value: complex
    kind: str                  # "critical" | "lc_root"
    residual: float
    sweep_coordinate: float
    argument: float            # arg(value - base point), reported
    radius: float
    cycle: Permutation | None = None
    fiber_pattern: tuple = ()  # root multiplicity pattern at the value
    ordinary: bool | None = None


@dataclass(frozen=True)
class GenericityReport:
    discriminant_squarefree: bool
    min_critical_separation: float | None
    leading_coefficient_constant: bool
    one_double_root_per_critical_fiber: bool
    issues: tuple

    def to_json_dict(self) -> dict:
        return {
            "discriminant_squarefree": self.discriminant_squarefree,
            "min_critical_separation": self.min_critical_separation,
            "leading_coefficient_constant": self.leading_coefficient_constant,
            "one_double_root_per_critical_fiber":
                self.one_double_root_per_critical_fiber,
            "issues": list(self.issues),
        }


@dataclass(frozen=True, eq=False)
class MonodromyResult:
    polynomial: str
    degree: int
    base_point: complex
    sweep_angle: float
    loops: tuple               # LoopTarget entries, in sweep order
    infinity_cycle: Permutation
    genericity: GenericityReport
    cover: BranchedCover
    used_precision_digits: int

    @property
    def branch_cycles(self) -> tuple:
        return tuple(t.cycle for t in self.loops)

    def to_json_dict(self) -> dict:
        return {
            "schema": "monodromy-result/1",
            "polynomial": self.polynomial,
            "degree": self.degree,
            "base_point": [self.base_point.real, self.base_point.imag],
            "sweep_angle": self.sweep_angle,
            "loops": [
                {
                    "value": [t.value.real, t.value.imag],
                    "kind": t.kind,
                    "residual": t.residual,
                    "sweep_coordinate": t.sweep_coordinate,
                    "argument": t.argument,
                    "radius": t.radius,
                    "cycle": format_cycles(t.cycle),
                    "fiber_pattern": list(t.fiber_pattern),
                    "ordinary": t.ordinary,
                }
                for t in self.loops
            ],
            "infinity_cycle": format_cycles(self.infinity_cycle),
            "genericity": self.genericity.to_json_dict(),
            "used_precision_digits": self.used_precision_digits,
            "assembled_cover": _cover_doc(self.cover),
        }


def _cover_doc(cover: BranchedCover) -> dict:
    from .cover import cover_to_json_dict

    return cover_to_json_dict(cover)


# ---------------------------------------------------------------------------
# critical values

@dataclass(frozen=True)
class CriticalData:
    critical: tuple            # complex values, sorted by (re, im)
    residuals: tuple
    lc_roots: tuple
    resultant: tuple           # ascending Fraction coefficients
    discriminant_squarefree: bool


def critical_values(p: PlanePolynomial,
                    cfg: TrackingConfig = TrackingConfig()) -> CriticalData:
    """Roots of the exact y-resultant of (p, dp/dy), found numerically and
    Newton-polished against the exact coefficients.

    Non-generic inputs fail loudly: a non-squarefree resultant (the line is
    not transverse to the dual curve), a pair of roots closer than the step
    tolerance, or the leading y-coefficient vanishing at a critical value.
    """
    res = y_resultant_with_dy(p)
    squarefree = _sq_free_univariate(res)
    if not squarefree:
        raise NonGenericError(
            "discriminant has a multiple root: projection line is not "
            "transverse to the dual curve")
    cres = [complex(c) for c in res]
    degree = len(res) - 1
    roots = _np_roots_ascending(cres) if degree >= 1 else []
    roots = [_polish(cres, z) for z in roots]
    roots.sort(key=lambda z: (z.real, z.imag))
    mins = min((abs(a - b) for i, a in enumerate(roots)
                for b in roots[i + 1:]), default=None)
    if mins is not None and mins <= cfg.step_tolerance:
        raise NonGenericError(
            f"critical values within tolerance of each other "
            f"(separation {mins:g})")
    residuals = tuple(abs(_horner(cres, z)) for z in roots)

    lc = p.leading_coefficient()
    lc_list = [Fraction(0)] * (max(i for i, _ in lc) + 1)
    for (i, _), v in lc.items():
        lc_list[i] = v
    lc_roots = []
    if len(lc_list) > 1:
        lc_roots = _np_roots_ascending([complex(c) for c in lc_list])
        lc_roots.sort(key=lambda z: (z.real, z.imag))
        scale = max([1.0] + [abs(z) for z in roots])
        for z in lc_roots:
            if any(abs(z - c) <= 1e3 * cfg.step_tolerance * scale
                   for c in roots):
                raise NonGenericError(
                    "leading coefficient vanishes at a critical value: the "
                    "projection center lies on the curve closure")
    return CriticalData(
        critical=tuple(roots),
        residuals=residuals,
        lc_roots=tuple(lc_roots),
        resultant=tuple(res),
        discriminant_squarefree=squarefree,
    )


# ---------------------------------------------------------------------------
# path pieces

@dataclass(frozen=True)
class _Seg:
    a: complex
    b: complex

    def at(self, t: float) -> complex:
        return self.a + (self.b - self.a) * t

    initial_steps = 8


@dataclass(frozen=True)
class _Arc:
    center: complex
    radius: float
    theta0: float
    theta1: float              # theta1 > theta0: counterclockwise

    def at(self, t: float) -> complex:
        th = self.theta0 + (self.theta1 - self.theta0) * t
        return self.center + self.radius * cmath.exp(1j * th)

    @property
    def initial_steps(self) -> int:
        return max(8, int(abs(self.theta1 - self.theta0) / (math.pi / 16)) + 1)


def _loop_pieces(x0: complex, target: complex, radius: float,
                 u: complex, p_hat: complex, h_rail: float) -> list:
    def at(s: float, h: float) -> complex:
        return s * p_hat + h * u

    s0 = (x0 * p_hat.conjugate()).real
    st = (target * p_hat.conjugate()).real
    p1 = at(s0, h_rail)
    p2 = at(st, h_rail)
    p3 = target - radius * u
    theta3 = cmath.phase(-u)
    return [_Seg(x0, p1), _Seg(p1, p2), _Seg(p2, p3),
            _Arc(target, radius, theta3, theta3 + 2 * math.pi),
            _Seg(p3, p2), _Seg(p2, p1), _Seg(p1, x0)]


def _infinity_pieces(x0: complex, targets: list, spread: float) -> list:
    if targets:
        center = sum(targets) / len(targets)
    else:
        center = 0j
    reach = max([abs(t - center) for t in targets] + [0.0])
    radius = max(abs(x0 - center), reach + 1 + spread)
    direction = (x0 - center) / abs(x0 - center)
    q = center + radius * direction
    theta_q = cmath.phase(direction)
    # clockwise full turn through q; the stub connects the base point
    return [_Seg(x0, q),
            _Arc(center, radius, theta_q, theta_q - 2 * math.pi),
            _Seg(q, x0)]


# ---------------------------------------------------------------------------
# numeric contexts

class _Float64Context:
    digits = 16

    def __init__(self, p: PlanePolynomial):
        self.d = p.y_degree
        self.coeff_polys = []
        for j in range(p.y_degree + 1):
            cj = p.y_coefficient(j)
            n = max((i for i, _ in cj), default=0)
            arr = [0j] * (n + 1)
            for (i, _), v in cj.items():
                arr[i] = complex(v)
            self.coeff_polys.append(arr)

    def fiber(self, z: complex) -> list:
        coeffs = [_horner(cp, z) for cp in self.coeff_polys]
        lead = coeffs[-1]
        scale = max(abs(c) for c in coeffs)
        if scale == 0 or abs(lead) < 1e-13 * scale:
            raise TrackingAmbiguityError(
                f"leading coefficient numerically vanishes on the path at "
                f"x = {z}")
        return _np_roots_ascending(coeffs)


class _MPContext:
    def __init__(self, p: PlanePolynomial, digits: int):
        import mpmath

        self.mp = mpmath
        self.digits = digits
        self.d = p.y_degree
        self.exact = []
        for j in range(p.y_degree + 1):
            cj = p.y_coefficient(j)
            n = max((i for i, _ in cj), default=0)
            arr = [Fraction(0)] * (n + 1)
            for (i, _), v in cj.items():
                arr[i] = v
            self.exact.append(arr)

    def fiber(self, z: complex) -> list:
        mp = self.mp
        with mp.workdps(self.digits):
            zz = mp.mpc(z.real, z.imag)
            coeffs = []
            for arr in self.exact:
                acc = mp.mpc(0)
                for c in reversed(arr):
                    acc = acc * zz + mp.mpf(c.numerator) / mp.mpf(c.denominator)
                coeffs.append(acc)
            lead = coeffs[-1]
            scale = max(abs(c) for c in coeffs)
            if scale == 0 or abs(lead) < mp.mpf(10) ** (-self.digits + 3) * scale:
                raise TrackingAmbiguityError(
                    f"leading coefficient numerically vanishes on the path "
                    f"at x = {z}")
            roots = mp.polyroots(list(reversed(coeffs)), maxsteps=200,
                                 extraprec=self.digits * 4)
            return [complex(r) for r in roots]


# ---------------------------------------------------------------------------
# tracking

def _min_sep(points: list) -> float:
    return min((abs(a - b) for i, a in enumerate(points)
                for b in points[i + 1:]), default=math.inf)


def _match(old: list, new: list, safety: float):
    """Nearest-neighbor matching: old[i] -> new[perm[i]].  Fails (returns
    None) unless injective and every move is under minsep/safety."""
    threshold = min(_min_sep(old), _min_sep(new)) / safety
    assignment = []
    taken = set()
    for z in old:
        best_j = min(range(len(new)), key=lambda j: abs(z - new[j]))
        if abs(z - new[best_j]) >= threshold or best_j in taken:
            return None
        taken.add(best_j)
        assignment.append(best_j)
    return assignment


def _advance(piece, ta: float, tb: float, fiber: list, ctx, cfg,
             depth: int) -> list:
    new_roots = ctx.fiber(piece.at(tb))
    assignment = _match(fiber, new_roots, cfg.safety_factor)
    if assignment is not None:
        return [new_roots[j] for j in assignment]
    if depth >= cfg.max_depth or (tb - ta) < cfg.step_tolerance:
        raise TrackingAmbiguityError(
            f"root matching failed near x = {piece.at(tb)} after "
            f"depth-{depth} refinement")
    tm = (ta + tb) / 2
    mid = _advance(piece, ta, tm, fiber, ctx, cfg, depth + 1)
    return _advance(piece, tm, tb, mid, ctx, cfg, depth + 1)


def _track_pieces(pieces: list, fiber: list, ctx, cfg) -> list:
    for piece in pieces:
        n = piece.initial_steps
        for k in range(n):
            fiber = _advance(piece, k / n, (k + 1) / n, fiber, ctx, cfg, 0)
    return fiber


def _loop_permutation(pieces: list, base_fiber: list, ctx, cfg) -> Permutation:
    end = _track_pieces(pieces, list(base_fiber), ctx, cfg)
    assignment = _match(end, base_fiber, cfg.safety_factor)
    if assignment is None:
        raise TrackingAmbiguityError(
            "could not identify the transported fiber with the base fiber")
    return Permutation([j + 1 for j in assignment])


# ---------------------------------------------------------------------------
# the pipeline

def _choose_sweep(points: list, r: int) -> tuple:
    """Deterministic sweep direction: candidate angles around pi/2, scored
    by the least pairwise separation of the sweep coordinates."""
    if len(points) <= 1:
        return math.pi / 2, [z.real for z in points]
    count = 2 * r * r + 3
    best = None
    for idx in range(count):
        j = (idx + 1) // 2 * (1 if idx % 2 else -1)  # 0, -1, 1, -2, 2, ...
        psi = math.pi / 2 + j * math.pi / (2 * count)
        p_hat = cmath.exp(1j * (psi - math.pi / 2))
        s = [(z * p_hat.conjugate()).real for z in points]
        score = _min_sep([complex(v, 0) for v in s])
        if best is None or score > best[0]:
            best = (score, psi, s)
    score, psi, s = best
    if score <= 0:
        raise NonGenericError("could not separate loop targets along any "
                              "candidate sweep direction")
    return psi, s


def _fiber_pattern(ctx, value: complex, d: int) -> tuple:
    """Cluster the fiber roots at a point into multiplicity groups (report
    only; the tracked cycles are the authoritative structure)."""
    try:
        roots = ctx.fiber(value)
    except TrackingAmbiguityError:
        return ()
    scale = max([1.0] + [abs(r) for r in roots])
    tol = 1e-5 * scale
    roots = sorted(roots, key=lambda z: (z.real, z.imag))
    groups = []
    for z in roots:
        for g in groups:
            if abs(z - g[0]) < tol:
                g.append(z)
                break
        else:
            groups.append([z])
    return tuple(sorted((len(g) for g in groups), reverse=True))


def track_monodromy(p: PlanePolynomial,
                    cfg: TrackingConfig = TrackingConfig()) -> MonodromyResult:
    """Track the fiber along one loop per critical value (plus any roots of
    the leading coefficient) and around a large clockwise circle, and
    assemble the branched cover over the line.

    The exact relation c_1 ... c_r . c_inf = id is enforced; on failure the
    whole tracking is retried once at doubled working precision (exact
    rational coefficients re-evaluated with mpmath), then raised."""
    reject_singular(p)
    crit = critical_values(p, cfg)

    try:
        return _track_once(p, cfg, crit, _Float64Context(p))
    except (RelationViolationError, TrackingAmbiguityError) as first:
        if isinstance(first, TrackingAmbiguityError):
            raise
        retry = _MPContext(p, 2 * cfg.working_digits)
        try:
            return _track_once(p, cfg, crit, retry)
        except RelationViolationError:
            raise RelationViolationError(
                f"cycle relation still violated at "
                f"{2 * cfg.working_digits} digits") from first


def _track_once(p: PlanePolynomial, cfg: TrackingConfig, crit: CriticalData,
                ctx) -> MonodromyResult:
    d = p.y_degree
    targets = [(z, "critical", res)
               for z, res in zip(crit.critical, crit.residuals)]
    targets += [(z, "lc_root", 0.0) for z in crit.lc_roots]

    values = [t[0] for t in targets]
    spread = max((abs(a - b) for i, a in enumerate(values)
                  for b in values[i + 1:]), default=0.0)
    max_re = max((z.real for z in values), default=0.0)
    x0 = complex(max_re + 1 + spread, 0.0)
    if cfg.base_point_strategy == "raised":
        x0 += 1j * (1 + spread) / 2

    psi, sweep = _choose_sweep(values + [x0], len(values))
    u = cmath.exp(1j * psi)
    p_hat = cmath.exp(1j * (psi - math.pi / 2))
    s_x0 = sweep[-1]

    heights = [(z * u.conjugate()).real for z in values]
    h_rail = min(heights, default=0.0) - (1 + spread)

    radii = {}
    for i, (z, _, _) in enumerate(targets):
        near = min((abs(z - w) for j, (w, _, _) in enumerate(targets)
                    if j != i), default=abs(x0 - z))
        s_gap = min((abs(sweep[i] - sweep[j]) for j in range(len(targets))
                     if j != i), default=abs(s_x0 - sweep[i]))
        radii[i] = min(near, s_gap) / 2

    base_fiber = ctx.fiber(x0)
    base_fiber.sort(key=lambda z: (z.real, z.imag))
    if len(base_fiber) != d:
        raise TrackingAmbiguityError("base fiber does not have d points")

    order = sorted(range(len(targets)), key=lambda i: sweep[i])
    loops = []
    for i in order:
        z, kind, residual = targets[i]
        pieces = _loop_pieces(x0, z, radii[i], u, p_hat, h_rail)
        cycle = _loop_permutation(pieces, base_fiber, ctx, cfg)
        pattern = _fiber_pattern(ctx, z, d) if kind == "critical" else ()
        loops.append(LoopTarget(
            value=z,
            kind=kind,
            residual=residual,
            sweep_coordinate=sweep[i],
            argument=cmath.phase(z - x0),
            radius=radii[i],
            cycle=cycle,
            fiber_pattern=pattern,
            ordinary=(pattern.count(2) == 1 and pattern.count(1) == len(pattern) - 1
                      if pattern else None),
        ))

    inf_pieces = _infinity_pieces(x0, values, spread)
    c_inf = _loop_permutation(inf_pieces, base_fiber, ctx, cfg)

    product = Permutation.identity(d)
    for t in loops:
        product = product * t.cycle
    product = product * c_inf
    if not product.is_identity():
        raise RelationViolationError(
            f"c_1 ... c_r . c_inf = {format_cycles(product)} != id")

    issues = []
    lc_constant = all(i == 0 for i, _ in p.leading_coefficient())
    if crit.lc_roots:
        issues.append("leading coefficient vanishes at "
                      f"{len(crit.lc_roots)} point(s): the projection center "
                      "lies on the curve closure")
    patterns_ok = all(
        t.ordinary for t in loops if t.kind == "critical" and t.fiber_pattern)
    if not patterns_ok:
        issues.append("some critical fiber is not a simple double point")
    genericity = GenericityReport(
        discriminant_squarefree=crit.discriminant_squarefree,
        min_critical_separation=(
            _min_sep(list(crit.critical)) if len(crit.critical) > 1 else None),
        leading_coefficient_constant=lc_constant,
        one_double_root_per_critical_fiber=patterns_ok,
        issues=tuple(issues),
    )

    branch_cycles = []
    labels = []
    for t in loops:
        if not t.cycle.is_identity():
            branch_cycles.append(t.cycle)
            labels.append(f"x={t.value.real:.12g}"
                          + (f"{t.value.imag:+.12g}i" if t.value.imag else ""))
    if not c_inf.is_identity():
        branch_cycles.append(c_inf)
        labels.append("infinity")
    cover = BranchedCover(degree=d, base_genus=0,
                          branch_cycles=tuple(branch_cycles),
                          labels=tuple(labels))
    report = validate(cover)
    if not report.valid:
        if any("intransitive" in v for v in report.violations):
            raise NonGenericError(
                "monodromy group is intransitive: the curve is reducible")
        raise RelationViolationError(
            f"assembled cover is invalid: {report.violations}")

    return MonodromyResult(
        polynomial=str(p),
        degree=d,
        base_point=x0,
        sweep_angle=psi,
        loops=tuple(loops),
        infinity_cycle=c_inf,
        genericity=genericity,
        cover=cover,
        used_precision_digits=getattr(ctx, "digits", cfg.working_digits),
    )


# ---------------------------------------------------------------------------
# certification

@dataclass(frozen=True, eq=False)
class ProjectionReport:
    result: MonodromyResult
    finite_cycles_morse: bool
    infinity_kind: str          # "unramified" | "transposition" | cycle type
    full_morse: bool
    genuinely_ramified: bool
    two_transitive: bool
    group_order: int
    is_full_symmetric: bool
    sd_certificate: object      # fiber.SdCertification

    def to_json_dict(self) -> dict:
        return {
            "schema": "projection-report/1",
            "monodromy": self.result.to_json_dict(),
            "finite_cycles_morse": self.finite_cycles_morse,
            "infinity_kind": self.infinity_kind,
            "full_morse": self.full_morse,
            "genuinely_ramified": self.genuinely_ramified,
            "two_transitive": self.two_transitive,
            "group_order": self.group_order,
            "is_full_symmetric": self.is_full_symmetric,
            "sd_certificate": self.sd_certificate.to_json_dict(),
        }


def certify_projection(p: PlanePolynomial,
                       cfg: TrackingConfig = TrackingConfig(),
                       result: MonodromyResult | None = None) -> ProjectionReport:
    """Morse and full-symmetric-group certification of the projection.

    Over the line the cover is automatically genuinely ramified, so the
    certificate reduces to: all finite cycles transpositions (ordinary
    tangents), the infinity cycle trivial or flagged, and the group order
    d!.  When the infinity cycle spoils Morse-ness the group facts are still
    reported (the S_d conclusion via the order check alone)."""
    from math import factorial

    from .fiber import certify_sd, genuinely_ramified
    from .perm import Transitivity, transitivity
    from .cover import monodromy_group

    if result is None:
        result = track_monodromy(p, cfg)
    finite = [t.cycle for t in result.loops]
    finite_morse = all(c.is_transposition() or c.is_identity() for c in finite)
    c_inf = result.infinity_cycle
    if c_inf.is_identity():
        infinity_kind = "unramified"
    elif c_inf.is_transposition():
        infinity_kind = "transposition"
    else:
        infinity_kind = "cycle type " + str(c_inf.cycle_type())
    full_morse = finite_morse and infinity_kind in ("unramified",
                                                    "transposition")
    group = monodromy_group(result.cover, checked=False)
    gr = genuinely_ramified(result.cover, checked=False)
    cert = certify_sd(result.cover, checked=False)
    return ProjectionReport(
        result=result,
        finite_cycles_morse=finite_morse,
        infinity_kind=infinity_kind,
        full_morse=full_morse,
        genuinely_ramified=gr.genuinely_ramified,
        two_transitive=transitivity(group) is Transitivity.TWO_TRANSITIVE,
        group_order=group.order,
        is_full_symmetric=group.order == factorial(result.degree),
        sd_certificate=cert,
    )
