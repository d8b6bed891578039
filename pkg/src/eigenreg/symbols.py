"""K2 symbol algebra: formal Steinberg symbols, the star-product of
commuting SL2 matrices, tame symbols at finite and ideal places, and the
temperedness certificate for eigenvalue curves.

Symbols are syntactic: entries are sympy expressions, bimultiplicativity
is applied only to factorizations sympy can see. All paper-relevant
symbols here are monomial in the curve coordinates, where this suffices.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd, lcm

import sympy as sp

from . import ratpoly
from .errors import (
    IndeterminateValueError,
    NonCommutingInputError,
    NotHandledError,
    UntemperedCurveError,
)
from .ratpoly import format_poly


# ---------------------------------------------------------------------------
# formal symbols
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FormalSymbol:
    """Product of Steinberg symbols prod {f_j, g_j}^{e_j}, possibly times
    an unspecified 2-torsion element (torsion_flag)."""

    factors: tuple = ()           # ((f, g, e), ...) with sympy entries
    torsion_flag: bool = False

    @classmethod
    def identity(cls, torsion=False):
        return cls((), torsion)

    @classmethod
    def single(cls, f, g, e=1):
        return cls(((sp.sympify(f), sp.sympify(g), int(e)),))

    def __mul__(self, other):
        return FormalSymbol(self.factors + other.factors,
                            self.torsion_flag or other.torsion_flag)

    def inverse(self):
        return FormalSymbol(tuple((f, g, -e) for f, g, e in self.factors),
                            self.torsion_flag)

    def __pow__(self, n):
        return FormalSymbol(tuple((f, g, e * n) for f, g, e in self.factors),
                            self.torsion_flag)

    @property
    def is_identity(self):
        return not self.factors

    def __str__(self):
        if not self.factors:
            body = "1"
        else:
            body = " ".join(
                f"{{{f}, {g}}}" + (f"^{e}" if e != 1 else "")
                for f, g, e in self.factors)
        return body + (" * (2-torsion)" if self.torsion_flag else "")


def _split_multiplicative(expr):
    """Syntactic multiplicative decomposition: [(base, integer exponent)].
    Rational constants come out as a single base."""
    expr = sp.sympify(expr)
    const, parts = sp.factor(expr).as_coeff_mul()
    out = []
    if const != 1:
        out.append((const, 1))
    for p in parts:
        base, exp = p.as_base_exp()
        if exp.is_Integer:
            out.append((base, int(exp)))
        else:
            out.append((p, 1))
    return out


def _is_one(expr):
    return sp.simplify(expr - 1) == 0


def symbol_normalize(s):
    """Rewrite to a fixpoint under skew-symmetry ordering, syntactic
    bimultiplicativity, {f,1-f} = {f,-f} = 1, {f,f} = {f,-1}, {1,g} = 1,
    and merging of repeated factors. Idempotent."""
    def rules(f, g, e):
        """None to drop the factor, else a rewritten (f, g, e)."""
        f, g = sp.cancel(f), sp.cancel(g)
        if e == 0 or _is_one(f) or _is_one(g):
            return None
        if sp.simplify(f + g - 1) == 0:          # Steinberg {f, 1-f}
            return None
        if sp.simplify(f + g) == 0:              # {f, -f}
            return None
        if sp.simplify(f - g) == 0:              # {f, f} = {f, -1}
            g = sp.Integer(-1)
        return f, g, e

    expanded = []
    for fac in s.factors:
        fac = rules(*fac)
        if fac is None:
            continue
        f, g, e = fac
        for bf, ef in _split_multiplicative(f):
            for bg, eg in _split_multiplicative(g):
                fac2 = rules(bf, bg, e * ef * eg)
                if fac2 is not None:
                    expanded.append(fac2)

    reduced = []
    for f, g, e in expanded:
        if sp.default_sort_key(g) < sp.default_sort_key(f):
            f, g, e = g, f, -e                   # skew-symmetry
        reduced.append((f, g, e))

    merged = {}
    order = []
    for f, g, e in reduced:
        key = (sp.srepr(f), sp.srepr(g))
        if key not in merged:
            merged[key] = [f, g, 0]
            order.append(key)
        merged[key][2] += e
    out = []
    minus_one = sp.Integer(-1)
    for key in order:
        f, g, e = merged[key]
        if f == minus_one or g == minus_one:
            e %= 2                               # {f, -1} is 2-torsion
        if e != 0:
            out.append((f, g, e))
    return FormalSymbol(tuple(out), s.torsion_flag)


# ---------------------------------------------------------------------------
# star product
# ---------------------------------------------------------------------------

def _exact_sqrt(expr):
    """Square root of a rational-function expression within the field, or
    None. Works through factor_list: all multiplicities even and rational
    content a square."""
    expr = sp.cancel(sp.together(expr))
    if expr == 0:
        return sp.Integer(0)
    num, den = sp.fraction(expr)
    roots = []
    for part in (num, den):
        c, fl = sp.factor_list(part)
        c = sp.Rational(c)
        if c < 0:
            return None
        cr = sp.sqrt(c)
        if not cr.is_rational:
            return None
        acc = cr
        for fct, mult in fl:
            if mult % 2:
                return None
            acc *= fct ** (mult // 2)
        roots.append(acc)
    return sp.cancel(roots[0] / roots[1])


def _eigen_pair(U, V):
    """Paired eigenvalues (lambda, mu) of commuting diagonalizable U, V
    along a shared eigenvector, or None if the splitting field is bigger."""
    t = sp.cancel(sp.trace(U))
    s = _exact_sqrt(t ** 2 - 4)
    if s is None:
        return None
    lam = sp.cancel((t + s) / 2)
    # eigenvector of U for lam
    if sp.simplify(U[0, 1]) != 0:
        v = sp.Matrix([U[0, 1], lam - U[0, 0]])
    elif sp.simplify(U[1, 0]) != 0:
        v = sp.Matrix([lam - U[1, 1], U[1, 0]])
    else:                                        # U already diagonal
        which = 0 if sp.simplify(U[0, 0] - lam) == 0 else 1
        v = sp.Matrix([1 - which, which])
    Vv = V * v
    idx = 0 if sp.simplify(v[0]) != 0 else 1
    mu = sp.cancel(Vv[idx] / v[idx])
    return lam, mu


def star_product(U, V):
    """The pairing of two commuting SL2 matrices over a function field.

    Diagonalizable pair over the field -> {lambda, mu}^2 along a common
    eigenvector. Both trace +2 (unipotent or identity) -> identity symbol.
    Any other trace-+-2 combination -> identity with the 2-torsion flag.
    Conjugation-invariant by construction.
    """
    U, V = sp.Matrix(U), sp.Matrix(V)
    if sp.simplify(U * V - V * U) != sp.zeros(2):
        raise NonCommutingInputError("star product needs commuting matrices")
    for M in (U, V):
        if sp.simplify(sp.det(M) - 1) != 0:
            raise NonCommutingInputError("inputs must lie in SL2")

    tU, tV = sp.simplify(sp.trace(U)), sp.simplify(sp.trace(V))
    u_par = tU in (2, -2)
    v_par = tV in (2, -2)
    if u_par or v_par:
        if tU == 2 and tV == 2:
            return FormalSymbol.identity()
        return FormalSymbol.identity(torsion=True)

    pair = _eigen_pair(U, V)
    if pair is None:
        raise NotHandledError(
            "eigenvalues require a field extension not constructed here")
    lam, mu = pair
    return symbol_normalize(FormalSymbol.single(lam, mu, 2))


# ---------------------------------------------------------------------------
# places and tame symbols
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FinitePlace:
    """A curve point with vanishing orders and leading coefficients of the
    coordinate functions: x = lead_x * t^{order_x} + O(t^{order_x + 1})."""

    point: tuple = ()             # ((name, complex value), ...)
    orders: tuple = ()            # ((name, int), ...)
    leads: tuple = ()             # ((name, complex), ...)

    def order_of(self, name):
        return dict(self.orders).get(name, 0)

    def lead_of(self, name):
        d = dict(self.leads)
        if name in d:
            return complex(d[name])
        return complex(dict(self.point)[name])


@dataclass(frozen=True)
class EdgePlace:
    """Ideal-point cluster attached to a Newton polygon edge.

    `direction` is the primitive valuation vector (w1, w2): the valuation
    of l^a m^b is a*w1 + b*w2. `sigma` is a root of the edge polynomial;
    on the cluster the leading coefficients (cl, cm) of l, m satisfy
    cl^{w2} cm^{-w1} = sigma. `sigma_order` is its exact root-of-unity
    order when known (from the cyclotomic certificate), else None.
    """

    direction: tuple
    sigma: complex
    sigma_order: int = None
    edge: tuple = None            # ((x0,y0), (x1,y1)) provenance


def _monomial_parts(expr, coords):
    """expr as (rational constant, {coord: int exponent}) or None."""
    expr = sp.cancel(sp.sympify(expr))
    const = sp.Integer(1)
    expo = {}
    for base, e in expr.as_powers_dict().items():
        if base.is_Rational:
            const *= base ** e
            continue
        if not e.is_Integer:
            return None
        if base.is_Symbol and base.name in coords:
            expo[base.name] = expo.get(base.name, 0) + int(e)
        else:
            return None
    if not const.is_Rational:
        return None
    return Fraction(int(const.p), int(const.q)), expo


def _finite_factor_value(f, g, place):
    coords = [n for n, _ in place.point]

    declared = [(sp.sympify(name), o) for name, o in place.orders]

    def order_and_lead(expr):
        expr = sp.sympify(expr)
        # declared coordinate functions first (may be non-monomial, e.g. 1-z)
        for key, o in declared:
            if sp.simplify(expr - key) == 0:
                return o, place.lead_of(str(key))
        parts = _monomial_parts(expr, coords)
        if parts is not None:
            c, expo = parts
            order = sum(e * place.order_of(x) for x, e in expo.items())
            lead = complex(c)
            for x, e in expo.items():
                lead *= place.lead_of(x) ** e
            return order, lead
        # non-monomial: only regular nonvanishing entries are supported
        val = complex(sp.sympify(expr).subs(
            {sp.Symbol(n): v for n, v in place.point}))
        if abs(val) < 1e-12:
            raise IndeterminateValueError(
                f"cannot compute vanishing order of non-monomial {expr}")
        return 0, val

    try:
        of, lf = order_and_lead(f)
        og, lg = order_and_lead(g)
        value = (-1.0) ** (of * og) * lf ** og / lg ** of
    except ZeroDivisionError as exc:
        raise IndeterminateValueError(
            f"entries {f}, {g} undefined at {place.point}") from exc
    if not (abs(value) < float("inf")):
        raise IndeterminateValueError(f"tame value of ({f},{g}) diverged")
    return value


def _edge_factor_value(f, g, place):
    parts_f = _monomial_parts(f, ("l", "m"))
    parts_g = _monomial_parts(g, ("l", "m"))
    if parts_f is None or parts_g is None:
        raise NotHandledError(
            "edge-place tame symbols need entries monomial in l, m")
    cf, ef = parts_f
    cg, eg = parts_g
    a, b = ef.get("l", 0), ef.get("m", 0)
    c, d = eg.get("l", 0), eg.get("m", 0)
    w1, w2 = place.direction
    vf = a * w1 + b * w2
    vg = c * w1 + d * w2
    det = a * d - b * c
    value = (-1.0) ** (vf * vg)
    value *= float(cf) ** vg / float(cg) ** vf
    value *= complex(place.sigma) ** det
    return value


def tame_symbol(s, place, curve=None):
    """Tame symbol of a FormalSymbol at a place:
    prod_j [ (-1)^{v(f)v(g)} f^{v(g)}/g^{v(f)} ]|_place ^ e_j."""
    total = 1.0 + 0j
    for f, g, e in s.factors:
        if isinstance(place, EdgePlace):
            val = _edge_factor_value(f, g, place)
        else:
            val = _finite_factor_value(f, g, place)
        total *= val ** e
    return total


def root_of_unity_order(value, max_order=120, tol=1e-10):
    """Least n with value^n = 1 within tol, or None."""
    if abs(abs(value) - 1) > tol:
        return None
    for n in range(1, max_order + 1):
        if abs(value ** n - 1) < tol:
            return n
    return None


# ---------------------------------------------------------------------------
# temperedness certificate
# ---------------------------------------------------------------------------

def temperedness(curve):
    """Cyclotomic certificate for all Newton-polygon edge polynomials of
    the curve. Returns (bool, certificate); certificate has one entry per
    edge with its polynomial and cyclotomic indices or failure factor."""
    poly = curve.poly
    npg = ratpoly.newton_polygon(poly)
    cert = []
    ok = True
    for edge in npg.edges:
        ep = ratpoly.edge_polynomial(poly, edge)
        good, info = ratpoly.is_cyclotomic_product(ep)
        entry = {"edge": (edge["start"], edge["end"]),
                 "direction": edge["direction"],
                 "edge_polynomial": format_poly(ep)}
        if good:
            entry["cyclotomic_indices"] = info["indices"]
        else:
            entry["failure_factor"] = info["failure_factor"]
        cert.append(entry)
        ok = ok and good
    return ok, cert


def edge_places(curve):
    """All ideal places of the curve: one per (edge, edge-polynomial root),
    with exact root-of-unity data when the root is cyclotomic."""
    poly = curve.poly
    npg = ratpoly.newton_polygon(poly)
    places = []
    for edge in npg.edges:
        dx, dy = edge["direction"]
        w = (-dy, dx)
        ep = ratpoly.edge_polynomial(poly, edge)
        _, factors = ratpoly.univariate_factor(ep)
        tvar = ep.used_variables()[0] if ep.used_variables() else None
        for f, _mult in factors:
            if tvar is not None and f == ratpoly.MultiPoly.variable(tvar):
                continue
            good, info = ratpoly.is_cyclotomic_product(f)
            if good and info["indices"]:
                n = info["indices"][0]
                for k in range(1, n + 1):
                    if gcd(k, n) != 1:
                        continue
                    root = cmath.exp(2j * cmath.pi * k / n)
                    if abs(complex(f.evaluate({f.used_variables()[0]: root}))) < 1e-8:
                        places.append(EdgePlace(direction=w, sigma=root,
                                                sigma_order=n,
                                                edge=(edge["start"], edge["end"])))
            else:
                import numpy as np
                coeffs = [complex(c) for c in f.univariate_coeffs()]
                for root in np.roots(coeffs):
                    places.append(EdgePlace(direction=w, sigma=complex(root),
                                            sigma_order=None,
                                            edge=(edge["start"], edge["end"])))
    return places


def symbol_order_candidate(curve):
    """Candidate for the order q of {l, m}^epsilon in K2: the lcm of the
    exact orders of its tame symbols over all ideal (polygon-edge) places.

    For the shipped curves every zero or pole of l and m on the curve lies
    over a polygon edge (the support touches the axes only at hull
    vertices), so the ideal places exhaust the divisor of the symbol.
    """
    ok, _cert = temperedness(curve)
    if not ok:
        raise UntemperedCurveError("symbol order needs a tempered curve")
    s = FormalSymbol.single(sp.Symbol("l"), sp.Symbol("m"), curve.epsilon)
    q = 1
    for place in edge_places(curve):
        a, b = 1, 0     # entries l, m
        c, d = 0, 1
        w1, w2 = place.direction
        vf, vg = w1, w2
        # exact arithmetic: value = (-1)^{w1 w2} sigma^{e}, sigma = zeta_n^k
        n = place.sigma_order
        if n is None:
            val = tame_symbol(s, place)
            order = root_of_unity_order(val)
            if order is None:
                raise UntemperedCurveError(
                    f"tame value {val} at {place} is not a root of unity")
            q = lcm(q, order)
            continue
        k = round(cmath.phase(place.sigma) * n / (2 * cmath.pi)) % n
        frac = Fraction(k, n) * curve.epsilon
        if (vf * vg) % 2:
            frac += Fraction(1, 2) * curve.epsilon
        frac %= 1
        q = lcm(q, frac.denominator)
    return q
