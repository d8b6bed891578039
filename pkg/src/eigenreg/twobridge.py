"""Two-bridge link groups and their eigenvalue curves.

Pipeline: normal-form code (p, q) -> group presentation -> Riley-style
matrix family over Q(m, u) -> Riley polynomial -> elimination of u against
the longitude-eigenvalue equation -> plane curve A(l, m) = 0 through the
discrete faithful basepoint.
"""
from __future__ import annotations

import cmath
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy as sp

from . import ratpoly
from .errors import (
    EliminationCollapseError,
    InconsistentFamilyError,
    InvalidCodeError,
    NoGeometricFactorError,
    NoHyperbolicSolutionError,
    ParseError,
)
from .oracle import bloch_wigner
from .ratpoly import MultiPoly, format_poly, parse_poly


# ---------------------------------------------------------------------------
# codes and words
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoBridgeCode:
    p: int
    q: int
    name: str = ""

    def __post_init__(self):
        if self.p < 2 or not (0 < self.q < self.p):
            raise InvalidCodeError(f"need 0 < q < p, got ({self.p}, {self.q})")
        if math.gcd(self.p, self.q) != 1:
            raise InvalidCodeError(f"gcd({self.p}, {self.q}) != 1")
        if self.q % 2 == 0:
            raise InvalidCodeError(f"q must be odd, got {self.q}")

    @property
    def component_count(self):
        return 1 if self.p % 2 == 1 else 2

    @property
    def is_knot(self):
        return self.component_count == 1


def load_link_file(path):
    """Read a link input file: {"type": "two_bridge", "p": 5, "q": 3, ...}."""
    with open(path) as fh:
        raw = json.load(fh)
    if raw.get("type") != "two_bridge":
        raise ParseError(f"unsupported link type {raw.get('type')!r}")
    return TwoBridgeCode(int(raw["p"]), int(raw["q"]), raw.get("name", ""))


def sign_sequence(code):
    """epsilon_i = (-1)^floor(i q / p), i = 1..p-1."""
    return [(-1) ** ((i * code.q) // code.p) for i in range(1, code.p)]


def word_w(code):
    """The 2-bridge word w = g_1^e_1 ... g_{p-1}^e_{p-1}; odd positions b,
    even positions a. Words are lists of (generator, exponent)."""
    out = []
    for i, e in enumerate(sign_sequence(code), start=1):
        out.append(("b" if i % 2 == 1 else "a", e))
    return out


def _swap_ab(word):
    return [("a" if g == "b" else "b", e) for g, e in word]


def _inverse(word):
    return [(g, -e) for g, e in reversed(word)]


def _compress(word):
    out = []
    for g, e in word:
        if e == 0:
            continue
        if out and out[-1][0] == g:
            out[-1] = (g, out[-1][1] + e)
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append((g, e))
    return out


def exponent_sum(word, gen):
    return sum(e for g, e in word if g == gen)


def presentation(code):
    """(relator_word, longitude_words) for the standard 2-bridge
    presentation <a, b | a w = w c> with c = b for knots, c = a for links.

    Knot longitude: w * swap(w) * a^{-2e}, e the total sign sum (zero
    total meridian exponent). Link longitudes: w * a^{-e_a} for the first
    component and swap(w) * b^{-e_b} for the second.
    """
    w = word_w(code)
    closer = "b" if code.is_knot else "a"
    relator = _compress([("a", 1)] + w + [(closer, -1)] + _inverse(w))
    if code.is_knot:
        e = sum(sign_sequence(code))
        longs = [_compress(w + _swap_ab(w) + [("a", -2 * e)])]
    else:
        swapped = _swap_ab(w)
        longs = [
            _compress(w + [("a", -exponent_sum(w, "a"))]),
            _compress(swapped + [("b", -exponent_sum(swapped, "b"))]),
        ]
    return relator, longs


# ---------------------------------------------------------------------------
# representation families
# ---------------------------------------------------------------------------

@dataclass
class RepFamily:
    """Riley normal form over the rational-function field: a is upper
    triangular, b lower triangular with correlation entry u."""

    code: TwoBridgeCode
    matrices: dict
    relator_word: list
    longitude_words: list
    eigen_symbols: list   # [m] for knots, [m1, m2] for links
    u_symbol: sp.Symbol

    @property
    def parameter_names(self):
        return [s.name for s in self.eigen_symbols] + [self.u_symbol.name]


def rep_family(code):
    u = sp.Symbol("u")
    if code.is_knot:
        m = sp.Symbol("m")
        A = sp.Matrix([[m, 1], [0, 1 / m]])
        B = sp.Matrix([[m, 0], [u, 1 / m]])
        eig = [m]
    else:
        m1, m2 = sp.Symbol("m1"), sp.Symbol("m2")
        A = sp.Matrix([[m1, 1], [0, 1 / m1]])
        B = sp.Matrix([[m2, 0], [u, 1 / m2]])
        eig = [m1, m2]
    relator, longs = presentation(code)
    return RepFamily(code=code, matrices={"a": A, "b": B},
                     relator_word=relator, longitude_words=longs,
                     eigen_symbols=eig, u_symbol=u)


def word_matrix(word, mats):
    """Multiply out a word over a generator->matrix map (sympy or numpy)."""
    numeric = not isinstance(next(iter(mats.values())), sp.MatrixBase)
    M = np.eye(2, dtype=complex) if numeric else sp.eye(2)
    for g, e in word:
        X = mats[g]
        if e < 0:
            if numeric:
                X = np.linalg.inv(X)
            else:
                X = sp.Matrix([[X[1, 1], -X[0, 1]], [-X[1, 0], X[0, 0]]])
        for _ in range(abs(e)):
            M = M @ X if numeric else M * X
    return M


def riley_polynomial(fam):
    """Defining polynomial of the representation variety in the family
    parameters: gcd of the numerators of the relator matrix equation."""
    A, B = fam.matrices["a"], fam.matrices["b"]
    w = word_w(fam.code)
    W = word_matrix(w, fam.matrices)
    C = B if fam.code.is_knot else A
    Rm = A * W - W * C
    gens = fam.eigen_symbols + [fam.u_symbol]
    polys = []
    for entry in Rm:
        num = sp.numer(sp.cancel(sp.together(entry)))
        if num != 0:
            polys.append(sp.Poly(sp.expand(num), *gens))
    if not polys:
        raise InconsistentFamilyError("relator equation vanished identically")
    g = polys[0]
    for pn in polys[1:]:
        g = g.gcd(pn)
    if g.degree(fam.u_symbol) < 1:
        raise InconsistentFamilyError("entry conditions share no factor involving u")
    mp = ratpoly._from_sympy(g.as_expr(), tuple(s.name for s in gens))
    _, prim = mp.primitive()
    return prim


def longitude_entry(fam, i):
    """Rational function l_i = (longitude matrix)[0,0] over the family."""
    L = word_matrix(fam.longitude_words[i - 1], fam.matrices)
    return sp.cancel(sp.together(L[0, 0]))


# ---------------------------------------------------------------------------
# eigenvalue curves
# ---------------------------------------------------------------------------

@dataclass
class EigenCurve:
    """Plane curve A(l, m) = 0 for one component, in canonical variables
    ("l", "m") regardless of component index."""

    component_index: int
    poly: MultiPoly
    slice_signs: tuple = ()
    epsilon: int = 1
    basepoint: tuple = None   # (l0, m0) complex, or None if non-hyperbolic

    def residual(self, l, m):
        """|A(l, m)| scaled by coefficient norm and point magnitude."""
        val = self.poly.evaluate({"l": complex(l), "m": complex(m)})
        scale = float(self.poly.coefficient_norm())
        scale *= max(1.0, abs(l), abs(m)) ** self.poly.degree()
        return abs(val) / scale

    def l_coefficients(self, m):
        """Numeric coefficients [c_d, ..., c_0] of A(., m)."""
        coeffs = self.poly.coeffs_in("l")
        return [c.evaluate({"m": complex(m)}) for c in coeffs]


def _parabolic_values(fam, i, slice_signs):
    subs = {}
    if fam.code.is_knot:
        subs[fam.eigen_symbols[0]] = 1
    else:
        others = [j for j in (1, 2) if j != i]
        if len(slice_signs) != len(others):
            raise InvalidCodeError(
                f"need {len(others)} slice sign(s), got {len(slice_signs)}")
        subs[fam.eigen_symbols[i - 1]] = 1
        for j, s in zip(others, slice_signs):
            if s not in (1, -1):
                raise InvalidCodeError(f"slice signs must be +-1, got {s}")
            subs[fam.eigen_symbols[j - 1]] = s
    return subs


def basepoint(fam, i=1, slice_signs=()):
    """Numerical (l0, m0) of the discrete faithful representation on the
    parabolic locus (all meridian eigenvalues +-1).

    Among the Riley roots u we keep the one maximizing the Bloch-Wigner
    value D(u) — a hyperbolicity proxy: D vanishes exactly on real u
    (reducible/abelian-adjacent solutions) and is maximized at the
    discrete faithful pair for the shipped census cases.
    """
    subs = _parabolic_values(fam, i, slice_signs)
    R = riley_polynomial(fam)
    Rsub = _substitute(R, {k.name: Fraction(v) for k, v in subs.items()})
    coeffs = [complex(c) for c in Rsub.univariate_coeffs()]
    roots = np.roots(coeffs)
    best, best_vol = None, 1e-6
    for uv in roots:
        if uv in (0, 1):
            continue
        vol = bloch_wigner(complex(uv)) if uv.imag != 0 else 0.0
        if vol > best_vol:
            best, best_vol = complex(uv), vol
    if best is None:
        raise NoHyperbolicSolutionError(
            f"no nonreal Riley root with positive volume proxy for {fam.code}")
    mats = _numeric_matrices(fam, subs, best)
    L = word_matrix(fam.longitude_words[i - 1], mats)
    m0 = complex(subs[fam.eigen_symbols[i - 1]])
    return complex(L[0, 0]), m0


def _numeric_matrices(fam, eigen_values, uv):
    vals = dict(eigen_values)
    vals[fam.u_symbol] = uv
    return {g: np.array(M.subs(vals).evalf(), dtype=complex)
            for g, M in fam.matrices.items()}


def _substitute(mp, values):
    """Substitute exact values for a subset of a MultiPoly's variables."""
    keep = tuple(v for v in mp.variables if v not in values)
    terms = {}
    for ex, c in mp.terms.items():
        cc = c
        kex = []
        for v, e in zip(mp.variables, ex):
            if v in values:
                cc *= Fraction(values[v]) ** e
            else:
                kex.append(e)
        if cc:
            kex = tuple(kex)
            terms[kex] = terms.get(kex, Fraction(0)) + cc
    return MultiPoly(keep, terms)


def eigen_curve(fam, i=1, slice_signs=(), require_hyperbolic=False):
    """Eliminate u from {Riley polynomial, longitude-eigenvalue equation}
    on the chosen parabolic slice; return the squarefree geometric factor.

    Factor selection: monomial and single-variable factors (the abelian /
    non-geometric locus) are dropped; among the rest we keep those
    vanishing at the basepoint when one exists, otherwise all of them.
    """
    code = fam.code
    gens = fam.eigen_symbols + [fam.u_symbol]
    R = riley_polynomial(fam)
    lsym = sp.Symbol("l")
    E_expr = sp.expand(sp.numer(sp.cancel(lsym - longitude_entry(fam, i))))
    E = ratpoly._from_sympy(E_expr, tuple([s.name for s in gens] + ["l"]))

    rename = {}
    if not code.is_knot:
        mi = fam.eigen_symbols[i - 1].name
        others = [j for j in (1, 2) if j != i]
        subs = {fam.eigen_symbols[j - 1].name: Fraction(s)
                for j, s in zip(others, slice_signs)}
        if len(subs) != len(others):
            raise InvalidCodeError(
                f"need {len(others)} slice sign(s), got {len(slice_signs)}")
        R = _substitute(R, subs)
        E = _substitute(E, subs)
        rename[mi] = "m"
    if rename:
        R = MultiPoly(tuple(rename.get(v, v) for v in R.variables), R.terms)
        E = MultiPoly(tuple(rename.get(v, v) for v in E.variables), E.terms)

    if not R.involves("u") or not E.involves("u"):
        raise EliminationCollapseError("slice killed the u-dependence")
    res = ratpoly.resultant(R, E, "u")
    if res.is_zero():
        raise EliminationCollapseError(
            "resultant vanished identically (longitude word or slice is wrong)")

    try:
        bp = basepoint(fam, i, slice_signs)
    except NoHyperbolicSolutionError:
        if require_hyperbolic:
            raise
        bp = None

    expr, _ = ratpoly._to_sympy(res)
    _, factors = sp.factor_list(sp.expand(expr))
    kept = []
    candidates = []
    for f, _mult in factors:
        mp = ratpoly._from_sympy(f, ("l", "m"))
        if mp.involves("l") and mp.involves("m"):
            candidates.append(mp)
    if bp is not None:
        l0, m0 = bp
        for mp in candidates:
            scale = float(mp.coefficient_norm())
            if abs(mp.evaluate({"l": l0, "m": m0})) / scale < 1e-8:
                kept.append(mp)
        if not kept:
            raise NoGeometricFactorError(
                f"no resultant factor vanishes at basepoint {bp}")
    else:
        kept = candidates
        if not kept:
            raise NoGeometricFactorError("no bivariate factor in the resultant")

    poly = MultiPoly.constant(1, ("l", "m"))
    for mp in kept:
        poly = poly * mp
    _, poly = poly.primitive()
    return EigenCurve(component_index=i, poly=poly,
                      slice_signs=tuple(slice_signs), basepoint=bp)


def solved_representations(fam, i=1, slice_signs=(), count=20, seed=0,
                           radius=0.25):
    """Sample exact numeric representations on the slice: random m_i near
    the unit circle, u a Riley root, plus the longitude eigenvalue l_i.

    Returns a list of (l, m, mats) used for pointwise curve checks.
    """
    rng = np.random.default_rng(seed)
    subs0 = {}
    if not fam.code.is_knot:
        others = [j for j in (1, 2) if j != i]
        for j, s in zip(others, slice_signs):
            subs0[fam.eigen_symbols[j - 1]] = s
    R = riley_polynomial(fam)
    out = []
    while len(out) < count:
        theta = rng.uniform(0, 2 * np.pi)
        r = 1.0 + rng.uniform(-radius, radius)
        mv = r * cmath.exp(1j * theta)
        subs = dict(subs0)
        msym = fam.eigen_symbols[0] if fam.code.is_knot else fam.eigen_symbols[i - 1]
        subs[msym] = mv

        numeric = {k.name: complex(v) for k, v in subs.items()}
        coeffs = [c.evaluate(numeric) for c in R.coeffs_in("u")]
        roots = [r for r in np.roots([complex(c) for c in coeffs])
                 if abs(r) > 1e-6]   # u = 0 is the reducible locus
        if not roots:
            continue
        uv = roots[rng.integers(0, len(roots))]
        mats = _numeric_matrices(fam, subs, uv)
        W = word_matrix(word_w(fam.code), mats)
        C = mats["b"] if fam.code.is_knot else mats["a"]
        if np.abs(mats["a"] @ W - W @ C).max() > 1e-8 * max(1.0, np.abs(W).max()):
            continue
        L = word_matrix(fam.longitude_words[i - 1], mats)
        out.append((complex(L[0, 0]), mv, mats))
    return out


# ---------------------------------------------------------------------------
# curve files
# ---------------------------------------------------------------------------

def save_curve(curve, path):
    lines = ["# eigenvalue curve v1",
             f"component: {curve.component_index}",
             "slice_signs: " + " ".join(f"{s:+d}" for s in curve.slice_signs),
             f"epsilon: {curve.epsilon}"]
    if curve.basepoint is not None:
        l0, m0 = curve.basepoint
        lines.append(f"basepoint_l: {l0.real!r} {l0.imag!r}")
        lines.append(f"basepoint_m: {m0.real!r} {m0.imag!r}")
    lines.append("poly: " + format_poly(curve.poly))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_curve(path):
    fields = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition(":")
            fields[key.strip()] = val.strip()
    try:
        poly = parse_poly(fields["poly"], variables=("l", "m"))
        comp = int(fields.get("component", 1))
        sl = tuple(int(s) for s in fields.get("slice_signs", "").split())
        eps = int(fields.get("epsilon", 1))
        bp = None
        if "basepoint_l" in fields:
            lre, lim = (float(x) for x in fields["basepoint_l"].split())
            mre, mim = (float(x) for x in fields["basepoint_m"].split())
            bp = (complex(lre, lim), complex(mre, mim))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad curve file {path}: {exc}") from exc
    return EigenCurve(component_index=comp, poly=poly, slice_signs=sl,
                      epsilon=eps, basepoint=bp)
