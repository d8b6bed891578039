"""Path continuation on eigenvalue curves and regulator line integrals.

Tracks (l_i, m_i) along meridian paths with branch-continuous logarithms,
integrates the 1-forms

    eta = sum_i eps_i (log|l_i| d arg m_i - log|m_i| d arg l_i)
    xi  : int xi = -sum_i eps_i int (log|m_i| d log|l_i| + arg l_i d arg m_i)

and evaluates monodromy, the rational quantization of loop integrals, the
volume function V, and the special Chern-Simons function U.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    BranchPointError,
    DivisorCollisionError,
    InsufficientSamplesError,
    OpenPathError,
    ParseError,
    ReconstructionFailureError,
)
from .oracle import load_triangulation, solve_gluing

_DIVISOR_LO, _DIVISOR_HI = 1e-8, 1e8


# ---------------------------------------------------------------------------
# path specifications
# ---------------------------------------------------------------------------

@dataclass
class PathSpec:
    """Meridian paths in log-coordinates, one segment list per component.

    Segment kinds: {"kind": "line", "from": [re, im], "to": [re, im]}
    (straight in log m) and {"kind": "arc", "log_radius": r, "arg_from": a,
    "arg_to": b} (constant |m|). Components are sampled on a common
    uniform grid of `samples` intervals.
    """

    components: list
    samples: int = 800
    closed: bool = False
    branch_hints: tuple = None     # per component: +-1 sign of Im l on the
                                   # first step off a degenerate basepoint

    def log_m(self, comp, t):
        segs = self.components[comp]
        n = len(segs)
        x = min(t * n, n - 1e-15)
        k = int(x)
        s = x - k
        seg = segs[k]
        if seg["kind"] == "line":
            u0 = complex(*seg["from"])
            u1 = complex(*seg["to"])
            return u0 + s * (u1 - u0)
        if seg["kind"] == "arc":
            a = seg["arg_from"] + s * (seg["arg_to"] - seg["arg_from"])
            return complex(seg["log_radius"], a)
        raise ParseError(f"unknown segment kind {seg['kind']!r}")

    def _seg_ends(self, seg):
        if seg["kind"] == "line":
            return complex(*seg["from"]), complex(*seg["to"])
        if seg["kind"] == "arc":
            return (complex(seg["log_radius"], seg["arg_from"]),
                    complex(seg["log_radius"], seg["arg_to"]))
        raise ParseError(f"unknown segment kind {seg['kind']!r}")

    def validate(self):
        for comp in range(len(self.components)):
            segs = self.components[comp]
            for s0, s1 in zip(segs, segs[1:]):
                if abs(self._seg_ends(s0)[1] - self._seg_ends(s1)[0]) > 1e-12:
                    raise ParseError(
                        "path segments must chain continuously in log m "
                        f"(component {comp})")
            if self.closed:
                m0 = cmath.exp(self.log_m(comp, 0.0))
                m1 = cmath.exp(self.log_m(comp, 1.0))
                if abs(m0 - m1) > 1e-12:
                    raise OpenPathError(
                        f"closed spec has |m(0)-m(1)| = {abs(m0 - m1):.2e}")


def constant_path(n_components=1, samples=8, log_m=0j):
    seg = {"kind": "line", "from": [log_m.real, log_m.imag],
           "to": [log_m.real, log_m.imag]}
    return PathSpec(components=[[dict(seg)] for _ in range(n_components)],
                    samples=samples, closed=True)


def meridian_segment_path(a, samples=2000):
    """m = exp(i pi a t), t in [0, 1] — the standard deformation segment."""
    seg = {"kind": "line", "from": [0.0, 0.0], "to": [0.0, math.pi * a]}
    return PathSpec(components=[[seg]], samples=samples, closed=False,
                    branch_hints=(-1,))


def based_loop_path(radius=0.8, turns=1, samples=4000):
    """Non-contractible based loop: walk |m| from 1 to `radius` on the real
    axis, run `turns` full meridian circles, walk back."""
    lr = math.log(radius)
    wind = 2.0 * math.pi * turns
    prefix = {"kind": "line", "from": [0.0, 0.0], "to": [lr, 0.0]}
    circle = {"kind": "arc", "log_radius": lr, "arg_from": 0.0, "arg_to": wind}
    # stay on the accumulated branch of log m on the way home
    back = {"kind": "line", "from": [lr, wind], "to": [0.0, wind]}
    return PathSpec(components=[[prefix, circle, back]], samples=samples,
                    closed=True)


def rectangle_loop_path(center, width, height, samples=2000):
    """Contractible rectangle loop in the log-m chart around `center`."""
    c = complex(center)
    corners = [c + complex(-width / 2, -height / 2),
               c + complex(width / 2, -height / 2),
               c + complex(width / 2, height / 2),
               c + complex(-width / 2, height / 2)]
    segs = [{"kind": "line", "from": [a.real, a.imag], "to": [b.real, b.imag]}
            for a, b in zip(corners, corners[1:] + corners[:1])]
    return PathSpec(components=[segs], samples=samples, closed=True)


def load_path_spec(path):
    with open(path) as fh:
        raw = json.load(fh)
    try:
        spec = PathSpec(components=[c["segments"] for c in raw["components"]],
                        samples=int(raw.get("samples", 800)),
                        closed=bool(raw.get("closed", False)),
                        branch_hints=tuple(raw["branch_hints"])
                        if raw.get("branch_hints") else None)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad path spec {path}: {exc}") from exc
    spec.validate()
    return spec


# ---------------------------------------------------------------------------
# tracking
# ---------------------------------------------------------------------------

@dataclass
class PathState:
    t: float
    l: tuple
    m: tuple
    log_l: tuple
    log_m: tuple
    eta_acc: float = 0.0           # epsilon-weighted running integrals
    xi_acc: float = 0.0


def _nearest_root(roots, pred):
    return min(roots, key=lambda r: abs(r - pred))


def _choose_root(roots, pred, hint=None):
    if hint is not None and len(roots) >= 2:
        r1, r2 = sorted(roots, key=lambda r: abs(r - pred))[:2]
        s1, s2 = r1 - pred, r2 - pred
        # the two branches leave the degenerate point in opposite
        # directions; discriminate on whichever part of the displacement
        # is not drowned in rounding noise
        if abs((s1 - s2).imag) > 0.1 * abs(s1 - s2):
            key = lambda s: s.imag
        else:
            key = lambda s: s.real
        return r1 if math.copysign(1.0, key(s1)) == hint else r2
    return _nearest_root(roots, pred)


def _dpoly(coeffs):
    d = len(coeffs) - 1
    return [c * (d - k) for k, c in enumerate(coeffs[:-1])]


def _polyval(coeffs, x):
    acc = 0j
    for c in coeffs:
        acc = acc * x + c
    return acc


class _Tracker:
    """Branch-continuous continuation of one component."""

    def __init__(self, curve, l0, log_l0, log_m0, hint):
        self.curve = curve
        self.l = complex(l0)
        self.log_l = complex(log_l0)
        self.log_m = complex(log_m0)
        self.l_prev = None
        self.hint = hint
        self.scale = float(curve.poly.coefficient_norm())
        self.first_step = True

    def _roots(self, m):
        coeffs = [complex(c) for c in self.curve.l_coefficients(m)]
        lead = max(abs(c) for c in coeffs)
        return np.roots(coeffs), coeffs

    def advance(self, log_m_new, depth=0, check_ramification=True):
        if depth > 24:
            raise BranchPointError(
                f"branch guard kept tripping near m = {cmath.exp(log_m_new)}")
        m_new = cmath.exp(log_m_new)
        if not (_DIVISOR_LO < abs(m_new) < _DIVISOR_HI):
            raise DivisorCollisionError(f"|m| = {abs(m_new):.3e} left the chart")
        pred = self.l if self.l_prev is None else 2 * self.l - self.l_prev
        roots, coeffs = self._roots(m_new)
        hint = self.hint if self.first_step else None
        l_new = complex(_choose_root(roots, pred, hint))
        dl = cmath.log(l_new / self.l) if self.l != 0 else 0j
        dm = log_m_new - self.log_m
        if abs(dl.imag) > math.pi / 2 and abs(dm) > 0:
            # bisect: route through the midpoint for branch continuity
            mid = self.log_m + dm / 2
            self.advance(mid, depth + 1, check_ramification)
            return self.advance(log_m_new, depth + 1, check_ramification)
        if not (_DIVISOR_LO < abs(l_new) < _DIVISOR_HI):
            raise DivisorCollisionError(f"|l| = {abs(l_new):.3e} left the chart")
        if check_ramification and abs(dm) > 0:
            deriv = _polyval(_dpoly(coeffs), l_new)
            if abs(deriv) < 1e-12 * self.scale:
                raise BranchPointError(
                    f"dA/dl ~ 0 at (l, m) = ({l_new}, {m_new}); path hits a "
                    "ramification point")
        self.l_prev, self.l = self.l, l_new
        self.log_l = self.log_l + dl
        self.log_m = log_m_new
        if abs(dm) > 0:
            self.first_step = False
        return l_new


def track_path(curves, spec, start=None):
    """Continue all components along `spec`; returns a list of PathState.

    `start` overrides the initial (l, log l, log m) tuples; by default each
    curve starts at its basepoint with principal logarithms.
    """
    spec.validate()
    if len(curves) != len(spec.components):
        raise ParseError(
            f"{len(curves)} curves but {len(spec.components)} component paths")
    n = spec.samples
    hints = spec.branch_hints or (None,) * len(curves)
    trackers = []
    for i, curve in enumerate(curves):
        log_m0 = spec.log_m(i, 0.0)
        if start is not None:
            l0, log_l0 = start[i]
        else:
            if curve.basepoint is None:
                raise BranchPointError(
                    "curve has no basepoint; supply an explicit start")
            l0, m0 = curve.basepoint
            if abs(cmath.exp(log_m0) - m0) > 1e-9:
                raise ParseError(
                    f"path starts at m = {cmath.exp(log_m0)}, basepoint has {m0}")
            log_l0 = cmath.log(l0)
        res = curves[i].residual(l0, cmath.exp(log_m0))
        if res > 1e-6:
            raise ParseError(
                f"start point (l, m) = ({l0}, {cmath.exp(log_m0)}) is not on "
                f"curve {i} (residual {res:.2e})")
        trackers.append(_Tracker(curves[i], l0, log_l0, log_m0, hints[i]))

    eps = [c.epsilon for c in curves]
    states = [PathState(t=0.0,
                        l=tuple(tr.l for tr in trackers),
                        m=tuple(cmath.exp(tr.log_m) for tr in trackers),
                        log_l=tuple(tr.log_l for tr in trackers),
                        log_m=tuple(tr.log_m for tr in trackers))]
    eta = xi_raw = 0.0
    for k in range(1, n + 1):
        t = k / n
        prev = states[-1]
        for i, tr in enumerate(trackers):
            # a path may legitimately end on a ramification point (the
            # degenerate basepoint); only interior crossings are fatal
            tr.advance(spec.log_m(i, t), check_ramification=(k < n))
        d_eta = d_xi = 0.0
        for i, tr in enumerate(trackers):
            la0, la1 = prev.log_l[i], tr.log_l
            ma0, ma1 = prev.log_m[i], tr.log_m
            d_arg_m = ma1.imag - ma0.imag
            d_arg_l = la1.imag - la0.imag
            d_log_abs_l = la1.real - la0.real
            d_eta += eps[i] * (0.5 * (la0.real + la1.real) * d_arg_m
                               - 0.5 * (ma0.real + ma1.real) * d_arg_l)
            d_xi += -eps[i] * (0.5 * (ma0.real + ma1.real) * d_log_abs_l
                               + 0.5 * (la0.imag + la1.imag) * d_arg_m)
        eta += d_eta
        xi_raw += d_xi
        states.append(PathState(
            t=t,
            l=tuple(tr.l for tr in trackers),
            m=tuple(cmath.exp(tr.log_m) for tr in trackers),
            log_l=tuple(tr.log_l for tr in trackers),
            log_m=tuple(tr.log_m for tr in trackers),
            eta_acc=eta, xi_acc=xi_raw))
    return states


# ---------------------------------------------------------------------------
# integrals
# ---------------------------------------------------------------------------

def _composite(states, epsilons, integrand):
    total = 0.0
    for a, b in zip(states, states[1:]):
        for i, e in enumerate(epsilons):
            total += e * integrand(a.log_l[i], b.log_l[i],
                                   a.log_m[i], b.log_m[i])
    return total


def _eta_increment(la0, la1, ma0, ma1):
    return (0.5 * (la0.real + la1.real) * (ma1.imag - ma0.imag)
            - 0.5 * (ma0.real + ma1.real) * (la1.imag - la0.imag))


def _xi_increment(la0, la1, ma0, ma1):
    return -(0.5 * (ma0.real + ma1.real) * (la1.real - la0.real)
             + 0.5 * (la0.imag + la1.imag) * (ma1.imag - ma0.imag))


def _richardson(states, epsilons, increment, tol):
    full = _composite(states, epsilons, increment)
    half_states = states[::2]
    if half_states[-1] is not states[-1]:
        half_states = half_states + [states[-1]]
    half = _composite(half_states, epsilons, increment)
    err = abs(full - half) / 3.0
    if err > tol:
        raise InsufficientSamplesError(
            f"quadrature error estimate {err:.2e} exceeds {tol:.1e}; "
            "increase samples")
    return full + (full - half) / 3.0, err


def integrate_eta(states, epsilons, tol=1e-6):
    """Richardson-extrapolated trapezoid integral of eta along the states."""
    value, _err = _richardson(states, epsilons, _eta_increment, tol)
    return value


def integrate_xi(states, epsilons, tol=1e-6):
    """Integral of xi; equals -sum_i eps_i int(log|m| dlog|l| + arg l darg m)."""
    value, _err = _richardson(states, epsilons, _xi_increment, tol)
    return value


def _require_closed(states):
    first, last = states[0], states[-1]
    m_gap = max(abs(a - b) for a, b in zip(first.m, last.m))
    # l closes like sqrt(m - m0) near a degenerate basepoint, so its
    # tolerance is looser than the meridian's
    l_gap = max(abs(a - b) for a, b in zip(first.l, last.l))
    if m_gap > 1e-9 or l_gap > 1e-6:
        raise OpenPathError(
            f"path endpoints differ by m: {m_gap:.2e}, l: {l_gap:.2e}")


def monodromy(states, epsilons):
    """M(gamma) = exp sum_i (-eps_i / 2 pi i) (loop-int log l_i dm_i/m_i
    - log m_i(t0) * loop-int dl_i/l_i), with branch-tracked logs."""
    _require_closed(states)
    expo = 0j
    for i, e in enumerate(epsilons):
        int_a = 0j
        for a, b in zip(states, states[1:]):
            int_a += 0.5 * (a.log_l[i] + b.log_l[i]) * (b.log_m[i] - a.log_m[i])
        int_b = states[0].log_m[i] * (states[-1].log_l[i] - states[0].log_l[i])
        expo += (-e / (2j * math.pi)) * (int_a - int_b)
    return cmath.exp(expo)


def quantization_check(states, epsilons, q_candidate=1, tol=1e-5):
    """Reconstruct -xi/(4 pi^2) over a closed path as a rational p/q with
    denominator <= max(q_candidate, 64). Returns (Fraction, residual)."""
    _require_closed(states)
    val = -integrate_xi(states, epsilons) / (4.0 * math.pi ** 2)
    cap = max(int(q_candidate), 64)
    frac = Fraction(val).limit_denominator(cap)
    residual = abs(val - float(frac))
    if residual > tol:
        raise ReconstructionFailureError(
            f"{val} is not within {tol:.1e} of a rational with denominator "
            f"<= {cap} (best {frac}, residual {residual:.2e})")
    return frac, residual


def volume_along(states, epsilons, complete_volume, tol=1e-6):
    """V at the endpoint: Vol(L) + 2 * eta-integral (calibrated epsilons)."""
    return complete_volume + 2.0 * integrate_eta(states, epsilons, tol=tol)


def special_cs_along(states, epsilons, q, cs_complete=0.0, tol=1e-6):
    """U at the endpoint: 4 pi^2 CS(L) + q * sum_i eps_i int(log|m| dlog|l|
    + arg l d arg m)  (the last sum equals -xi-integral)."""
    return (4.0 * math.pi ** 2 * cs_complete
            - q * integrate_xi(states, epsilons, tol=tol))


# ---------------------------------------------------------------------------
# calibration against the gluing oracle
# ---------------------------------------------------------------------------

def calibrate(curve, triangulation_name="figure-eight", a=0.02, samples=1500,
              tol=1e-5):
    """Fix the orientation sign epsilon and branch hint of a knot curve by
    matching V = Vol + 2 eps int(eta) against the gluing-equation oracle
    along the short deformation m = exp(i pi a t).

    Mutates curve.epsilon; returns (epsilon, branch_hint, mismatch).
    """
    tri = load_triangulation(triangulation_name)
    _, vol0, _ = solve_gluing(tri)
    _, vol1, _ = solve_gluing(tri, [1j * math.pi * a])
    best = None
    for hint in (-1, 1):
        spec = meridian_segment_path(a, samples=samples)
        spec.branch_hints = (hint,)
        states = track_path([curve], spec)
        raw = integrate_eta(states, [1])
        for eps in (1, -1):
            mismatch = abs(vol0 + 2 * eps * raw - vol1)
            if best is None or mismatch < best[2]:
                best = (eps, hint, mismatch)
    eps, hint, mismatch = best
    if mismatch > tol:
        raise InsufficientSamplesError(
            f"calibration mismatch {mismatch:.2e} exceeds {tol:.1e}")
    curve.epsilon = eps
    return eps, hint, mismatch
