"""Exact multivariate polynomials over Q: arithmetic, Sylvester resultants,
univariate factorization, Newton polygons and cyclotomic certificates.

All coefficients are `fractions.Fraction`; nothing in this module touches
floating point except the numeric `evaluate` helper.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache

import sympy as sp

from .errors import (
    DegenerateInputError,
    DegreeCapError,
    EdgeNotOnPolygonError,
    NonUnivariateError,
    ParseError,
    WrongArityError,
)

Rat = Fraction

FACTOR_DEGREE_CAP = 64


def _grlex_key(expts):
    return (sum(expts), expts)


class MultiPoly:
    """Sparse multivariate polynomial over Q.

    `variables` is an ordered tuple of names (canonically sorted
    lexicographically by the constructors that build polynomials from
    scratch); `terms` maps exponent tuples to nonzero Fractions.
    """

    __slots__ = ("variables", "terms")

    def __init__(self, variables, terms):
        self.variables = tuple(variables)
        clean = {}
        for ex, c in terms.items():
            c = Fraction(c)
            if c != 0:
                ex = tuple(int(e) for e in ex)
                if len(ex) != len(self.variables):
                    raise ValueError("exponent arity mismatch")
                clean[ex] = clean.get(ex, Fraction(0)) + c
        self.terms = {e: c for e, c in clean.items() if c != 0}

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, c, variables=()):
        variables = tuple(variables)
        z = (0,) * len(variables)
        return cls(variables, {z: Fraction(c)})

    @classmethod
    def variable(cls, name, variables=None):
        if variables is None:
            variables = (name,)
        variables = tuple(variables)
        i = variables.index(name)
        ex = tuple(1 if j == i else 0 for j in range(len(variables)))
        return cls(variables, {ex: Fraction(1)})

    # -- structure ----------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(all(e == 0 for e in ex) for ex in self.terms)

    def constant_value(self):
        return self.terms.get((0,) * len(self.variables), Fraction(0))

    def degree(self, var=None):
        if self.is_zero():
            return -1
        if var is None:
            return max(sum(ex) for ex in self.terms)
        i = self.variables.index(var)
        return max(ex[i] for ex in self.terms)

    def involves(self, var):
        if var not in self.variables:
            return False
        i = self.variables.index(var)
        return any(ex[i] > 0 for ex in self.terms)

    def used_variables(self):
        used = set()
        for ex in self.terms:
            for i, e in enumerate(ex):
                if e > 0:
                    used.add(self.variables[i])
        return sorted(used)

    def support(self):
        return sorted(self.terms, key=_grlex_key)

    # -- ring embedding ------------------------------------------------

    def with_variables(self, variables):
        """Re-express in a superset variable order."""
        variables = tuple(variables)
        pos = [variables.index(v) for v in self.variables]
        terms = {}
        for ex, c in self.terms.items():
            nex = [0] * len(variables)
            for p, e in zip(pos, ex):
                nex[p] = e
            terms[tuple(nex)] = c
        return MultiPoly(variables, terms)

    @staticmethod
    def _common(a, b):
        if a.variables == b.variables:
            return a, b
        joint = tuple(sorted(set(a.variables) | set(b.variables)))
        return a.with_variables(joint), b.with_variables(joint)

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(other, self.variables)
        a, b = MultiPoly._common(self, other)
        terms = dict(a.terms)
        for ex, c in b.terms.items():
            terms[ex] = terms.get(ex, Fraction(0)) + c
        return MultiPoly(a.variables, terms)

    def __neg__(self):
        return MultiPoly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(other, self.variables)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(other, self.variables)
        a, b = MultiPoly._common(self, other)
        terms = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                ex = tuple(x + y for x, y in zip(e1, e2))
                terms[ex] = terms.get(ex, Fraction(0)) + c1 * c2
        return MultiPoly(a.variables, terms)

    __rmul__ = __mul__
    __radd__ = __add__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power")
        out = MultiPoly.constant(1, self.variables)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = MultiPoly._common(self, other)
        return a.terms == b.terms

    def __hash__(self):
        return hash((self.variables, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        return f"MultiPoly({format_poly(self)!r})"

    def leading(self):
        """Leading (exponent, coefficient) in graded-lex order."""
        ex = max(self.terms, key=_grlex_key)
        return ex, self.terms[ex]

    def divexact(self, other):
        """Exact division; raises ValueError when not divisible."""
        a, b = MultiPoly._common(self, other)
        if b.is_zero():
            raise ZeroDivisionError
        rem = dict(a.terms)
        quo = {}
        bex, bc = b.leading()
        while rem:
            r = MultiPoly(a.variables, rem)
            if r.is_zero():
                break
            rex, rc = r.leading()
            qex = tuple(x - y for x, y in zip(rex, bex))
            if any(e < 0 for e in qex):
                raise ValueError("not divisible")
            qc = rc / bc
            quo[qex] = quo.get(qex, Fraction(0)) + qc
            for ex, c in b.terms.items():
                tex = tuple(x + y for x, y in zip(qex, ex))
                rem[tex] = rem.get(tex, Fraction(0)) - qc * c
                if rem[tex] == 0:
                    del rem[tex]
        return MultiPoly(a.variables, quo)

    # -- univariate views ---------------------------------------------

    def univariate_coeffs(self):
        """Coefficients [c_deg, ..., c_0] of a univariate polynomial."""
        used = self.used_variables()
        if len(used) > 1:
            raise NonUnivariateError(f"polynomial in {used} is not univariate")
        if not used:
            return [self.constant_value()]
        i = self.variables.index(used[0])
        d = max(ex[i] for ex in self.terms)
        out = [Fraction(0)] * (d + 1)
        for ex, c in self.terms.items():
            out[d - ex[i]] += c
        return out

    def coeffs_in(self, var):
        """List of MultiPoly coefficients of var^k, k = deg..0."""
        i = self.variables.index(var)
        rest = tuple(v for v in self.variables if v != var)
        d = self.degree(var)
        buckets = [dict() for _ in range(d + 1)]
        for ex, c in self.terms.items():
            rex = tuple(e for j, e in enumerate(ex) if j != i)
            buckets[ex[i]][rex] = buckets[ex[i]].get(rex, Fraction(0)) + c
        return [MultiPoly(rest, buckets[k]) for k in range(d, -1, -1)]

    def evaluate(self, values):
        """Numeric (or exact) evaluation; `values` maps names to numbers."""
        exact = all(isinstance(v, (int, Fraction)) for v in values.values())
        total = Fraction(0) if exact else 0j
        for ex, c in self.terms.items():
            prod = c if exact else complex(c)
            for name, e in zip(self.variables, ex):
                if e:
                    prod = prod * values[name] ** e
            total += prod
        return total

    def coefficient_norm(self):
        return max((abs(c) for c in self.terms.values()), default=Fraction(0))

    def content(self):
        """Positive rational content (gcd of coefficients)."""
        if self.is_zero():
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = math.gcd(num, abs(c.numerator))
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Fraction(num, den)

    def primitive(self):
        """(content*sign, primitive part with positive leading coefficient)."""
        if self.is_zero():
            return Fraction(0), self
        c = self.content()
        _, lead = self.leading()
        if lead < 0:
            c = -c
        return c, MultiPoly(self.variables, {e: v / c for e, v in self.terms.items()})

    def derivative(self, var):
        i = self.variables.index(var)
        terms = {}
        for ex, c in self.terms.items():
            if ex[i] > 0:
                nex = list(ex)
                nex[i] -= 1
                terms[tuple(nex)] = terms.get(tuple(nex), Fraction(0)) + c * ex[i]
        return MultiPoly(self.variables, terms)


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*([+-]|\*|\^|/|\d+|[A-Za-z_][A-Za-z_0-9]*)")


def parse_poly(text, variables=None):
    """Parse `c * x^a * y^b + ...` into a MultiPoly.

    Variables default to the sorted set of names appearing in the text.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError(f"bad token at {text[pos:pos+10]!r}")
            break
        tokens.append(m.group(1))
        pos = m.end()
    if not tokens:
        raise ParseError("empty polynomial text")

    # first pass: collect names
    names = sorted({t for t in tokens if re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", t)})
    if variables is None:
        variables = tuple(names)
    else:
        variables = tuple(variables)
        unknown = [n for n in names if n not in variables]
        if unknown:
            raise ParseError(f"unknown variables {unknown}")

    terms = {}
    i = 0
    n = len(tokens)
    while i < n:
        sign = 1
        while i < n and tokens[i] in "+-":
            if tokens[i] == "-":
                sign = -sign
            i += 1
        if i >= n:
            raise ParseError("dangling sign")
        coeff = Fraction(sign)
        expts = [0] * len(variables)
        saw_factor = False
        while i < n:
            t = tokens[i]
            if t in "+-":
                break
            if t == "*":
                i += 1
                continue
            if t.isdigit():
                num = int(t)
                i += 1
                if i < n and tokens[i] == "/":
                    if i + 1 >= n or not tokens[i + 1].isdigit():
                        raise ParseError("bad rational coefficient")
                    coeff *= Fraction(num, int(tokens[i + 1]))
                    i += 2
                else:
                    coeff *= num
            else:
                j = variables.index(t)
                i += 1
                e = 1
                if i < n and tokens[i] == "^":
                    if i + 1 >= n or not tokens[i + 1].isdigit():
                        raise ParseError("bad exponent")
                    e = int(tokens[i + 1])
                    i += 2
                expts[j] += e
            saw_factor = True
        if not saw_factor:
            raise ParseError("empty term")
        ex = tuple(expts)
        terms[ex] = terms.get(ex, Fraction(0)) + coeff
    return MultiPoly(variables, terms)


def format_poly(p):
    """Canonical printer; round-trips through parse_poly."""
    if p.is_zero():
        return "0"
    parts = []
    for ex in sorted(p.terms, key=_grlex_key, reverse=True):
        c = p.terms[ex]
        factors = []
        for name, e in zip(p.variables, ex):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mag = abs(c)
        cstr = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
        if factors and mag == 1:
            body = " * ".join(factors)
        elif factors:
            body = " * ".join([cstr] + factors)
        else:
            body = cstr
        parts.append(("- " if c < 0 else "+ ") + body)
    out = " ".join(parts)
    return out[2:] if out.startswith("+ ") else "-" + out[2:]


# ---------------------------------------------------------------------------
# resultants (Sylvester + Bareiss)
# ---------------------------------------------------------------------------

def sylvester_matrix(p, q, var):
    pc = p.coeffs_in(var)
    qc = q.coeffs_in(var)
    dp, dq = len(pc) - 1, len(qc) - 1
    n = dp + dq
    rest = tuple(sorted(set(p.variables) | set(q.variables) - {var}))
    rest = tuple(v for v in rest if v != var)
    zero = MultiPoly.constant(0, rest)
    pc = [c.with_variables(rest) if c.variables != rest else c for c in pc]
    qc = [c.with_variables(rest) if c.variables != rest else c for c in qc]
    rows = []
    for i in range(dq):
        rows.append([zero] * i + pc + [zero] * (n - dp - 1 - i))
    for i in range(dp):
        rows.append([zero] * i + qc + [zero] * (n - dq - 1 - i))
    return rows


def _bareiss_det(rows):
    """Fraction-free determinant of a square matrix of MultiPoly."""
    n = len(rows)
    if n == 0:
        return MultiPoly.constant(1)
    a = [list(r) for r in rows]
    sign = 1
    prev = MultiPoly.constant(1, a[0][0].variables)
    for k in range(n - 1):
        if a[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not a[i][k].is_zero()), None)
            if swap is None:
                return MultiPoly.constant(0, a[0][0].variables)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[k][k] * a[i][j] - a[i][k] * a[k][j]
                a[i][j] = num.divexact(prev)
            a[i][k] = MultiPoly.constant(0, a[i][k].variables)
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return -det if sign < 0 else det


def resultant(p, q, var):
    """Sylvester resultant of p, q eliminating `var`."""
    if p.is_zero() or q.is_zero():
        raise DegenerateInputError("resultant of zero polynomial")
    if not p.involves(var) or not q.involves(var):
        raise DegenerateInputError(f"both inputs must involve {var}")
    return _bareiss_det(sylvester_matrix(p, q, var))


# ---------------------------------------------------------------------------
# univariate factorization (delegated to sympy behind the exact contract)
# ---------------------------------------------------------------------------

def _to_sympy(p):
    syms = {v: sp.Symbol(v) for v in p.variables}
    expr = sp.Integer(0)
    for ex, c in p.terms.items():
        t = sp.Rational(c.numerator, c.denominator)
        for v, e in zip(p.variables, ex):
            if e:
                t *= syms[v] ** e
        expr += t
    return expr, syms


def _from_sympy(expr, variables):
    poly = sp.Poly(sp.expand(expr), *[sp.Symbol(v) for v in variables])
    terms = {}
    for mono, coeff in poly.terms():
        coeff = sp.Rational(coeff)
        terms[tuple(int(e) for e in mono)] = Fraction(int(coeff.p), int(coeff.q))
    return MultiPoly(variables, terms)


def univariate_factor(p):
    """Irreducible factorization over Q.

    Returns (content, [(factor, multiplicity), ...]) where each factor is
    primitive with integer coefficients and positive leading coefficient,
    and content * prod(f^m) == p exactly.
    """
    if p.is_zero():
        raise DegenerateInputError("cannot factor the zero polynomial")
    used = p.used_variables()
    if len(used) > 1:
        raise NonUnivariateError(f"polynomial in {used} is not univariate")
    if not used:
        return p.constant_value(), []
    var = used[0]
    if p.degree(var) > FACTOR_DEGREE_CAP:
        raise DegreeCapError(f"degree {p.degree(var)} exceeds cap {FACTOR_DEGREE_CAP}")
    expr, _ = _to_sympy(p)
    content, factors = sp.factor_list(expr)
    content = sp.Rational(content)
    out_content = Fraction(int(content.p), int(content.q))
    out = []
    for f, mult in factors:
        mp = _from_sympy(f, (var,))
        c, prim = mp.primitive()
        out_content *= c ** mult
        out.append((prim, int(mult)))
    out.sort(key=lambda fm: (fm[0].degree(), sorted(fm[0].terms.items())))
    return out_content, out


# ---------------------------------------------------------------------------
# Newton polygons
# ---------------------------------------------------------------------------

class NewtonPolygon:
    """Convex hull of the support of a bivariate polynomial.

    `vertices` are counterclockwise; each edge records its direction
    vector and the lattice points of the support grid lying on it.
    """

    def __init__(self, vertices, edges):
        self.vertices = list(vertices)
        self.edges = list(edges)

    def __repr__(self):
        return f"NewtonPolygon(vertices={self.vertices})"


def _convex_hull(points):
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for pt in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    upper = []
    for pt in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], pt) <= 0:
            upper.pop()
        upper.append(pt)
    return lower[:-1] + upper[:-1]


def newton_polygon(p):
    """Newton polygon of a polynomial in exactly two variables."""
    if p.is_zero():
        raise DegenerateInputError("zero polynomial has no Newton polygon")
    used = p.used_variables()
    if len(used) != 2:
        raise WrongArityError(f"need exactly two variables, got {used}")
    i, j = (p.variables.index(used[0]), p.variables.index(used[1]))
    pts = [(ex[i], ex[j]) for ex in p.terms]
    hull = _convex_hull(pts)
    edges = []
    if len(hull) == 1:
        return NewtonPolygon(hull, [])
    if len(hull) == 2:
        pairs = [(hull[0], hull[1]), (hull[1], hull[0])]
    else:
        pairs = [(hull[k], hull[(k + 1) % len(hull)]) for k in range(len(hull))]
    for a, b in pairs:
        dx, dy = b[0] - a[0], b[1] - a[1]
        g = math.gcd(abs(dx), abs(dy))
        step = (dx // g, dy // g)
        lattice = [(a[0] + k * step[0], a[1] + k * step[1]) for k in range(g + 1)]
        edges.append({"start": a, "end": b, "direction": step, "lattice": lattice})
    return NewtonPolygon(hull, edges)


def edge_polynomial(p, edge, out_var="t"):
    """Univariate polynomial of the coefficients of p along a polygon edge."""
    poly = newton_polygon(p)
    match = None
    for e in poly.edges:
        if (e["start"], e["end"]) == (tuple(edge["start"]), tuple(edge["end"])):
            match = e
            break
    if match is None:
        raise EdgeNotOnPolygonError(f"edge {edge} not on Newton polygon")
    used = p.used_variables()
    i, j = (p.variables.index(used[0]), p.variables.index(used[1]))
    terms = {}
    for k, (x, y) in enumerate(match["lattice"]):
        c = Fraction(0)
        for ex, cc in p.terms.items():
            if ex[i] == x and ex[j] == y:
                c += cc
        if c:
            terms[(k,)] = c
    return MultiPoly((out_var,), terms)


# ---------------------------------------------------------------------------
# cyclotomic certificate
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _cyclotomic(n):
    x = sp.Symbol("x")
    return _from_sympy(sp.cyclotomic_poly(n, x), ("x",))


def _phi_preimages(d):
    """All n with euler_phi(n) == d (phi(n) >= sqrt(n/2) bounds the search)."""
    bound = 2 * d * d + 2
    return [n for n in range(1, bound + 1) if sp.totient(n) == d]


def is_cyclotomic_product(p):
    """True iff every irreducible factor of p (ignoring content and powers
    of the variable) is cyclotomic.

    Returns (bool, certificate). On success the certificate lists the
    cyclotomic indices with multiplicity; on failure it carries the first
    offending factor.
    """
    if p.is_zero():
        raise DegenerateInputError("zero polynomial")
    used = p.used_variables()
    if len(used) > 1:
        raise NonUnivariateError(f"polynomial in {used} is not univariate")
    if not used:
        return True, {"indices": []}
    _, factors = univariate_factor(p)
    var = used[0]
    xpoly = MultiPoly.variable(var)
    indices = []
    for f, mult in factors:
        if f == xpoly:
            continue
        d = f.degree()
        found = None
        for n in _phi_preimages(d):
            cyc = _cyclotomic(n)
            if cyc.univariate_coeffs() == f.univariate_coeffs():
                found = n
                break
        if found is None:
            return False, {"failure_factor": format_poly(f)}
        indices.extend([found] * mult)
    return True, {"indices": sorted(indices)}
