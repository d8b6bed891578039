"""Independent hyperbolic-volume oracle.

Lobachevsky and Bloch-Wigner functions to 1e-12, plus ideal-triangulation
gluing equations for the two shipped census cases (figure-eight knot,
Whitehead link). Used to calibrate and cross-check the regulator integrals.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.special import zeta

from .errors import (
    DeformationUnsupportedError,
    DivergenceError,
    SingularInputError,
)


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

_CL2_TERMS = 48


def _clausen2(theta):
    """Cl2 on [0, pi] via the power series
    Cl2(t) = t - t log t + sum_{n>=1} zeta(2n)/(n(2n+1)) t^{2n+1}/(2pi)^{2n}.

    The raw Fourier series converges far too slowly for 1e-12; this
    expansion needs ~40 terms at t = pi.
    """
    if theta == 0.0:
        return 0.0
    acc = theta - theta * math.log(theta)
    r = theta / (2 * math.pi)
    t_pow = theta * r * r
    for n in range(1, _CL2_TERMS + 1):
        acc += zeta(2 * n) / (n * (2 * n + 1)) * t_pow
        t_pow *= r * r
    return acc


def lobachevsky(theta):
    """Lobachevsky function Lambda(theta) = (1/2) Cl2(2 theta).

    Odd, pi-periodic; accurate to ~1e-13 everywhere.
    """
    phi = math.fmod(2.0 * theta, 2.0 * math.pi)
    if phi < 0:
        phi += 2.0 * math.pi
    if phi > math.pi:
        return -0.5 * _clausen2(2.0 * math.pi - phi)
    return 0.5 * _clausen2(phi)


def _bernoulli_floats(n):
    # B_0..B_n via the standard recurrence, exact then floated
    from fractions import Fraction
    B = [Fraction(1)]
    for m in range(1, n + 1):
        s = Fraction(0)
        binom = 1
        for k in range(m):
            s += binom * B[k] / (m - k + 1)
            binom = binom * (m - k) // (k + 1)
        B.append(-s)
    return [float(b) for b in B]


_BERN = _bernoulli_floats(64)


def _li2_series(z):
    """Li2 via the Bernoulli/Debye expansion in u = -log(1-z).

    Valid and fast for |z| <= 1, Re z <= 1/2 (|u| stays well under 2pi).
    """
    u = -cmath.log(1 - z)
    total = 0j
    term = u  # u^{k+1}/(k+1)! at k=0
    for k in range(0, 63):
        total += _BERN[k] * term
        term *= u / (k + 2)
        if abs(term) < 1e-18:
            break
    return total


def bloch_wigner(z):
    """Bloch-Wigner dilogarithm D(z) = Im Li2(z) + arg(1-z) log|z|.

    Single-valued and real-analytic off {0, 1}; D vanishes on the real
    line. Range reduction uses D(z) = -D(1/z) = -D(1-z).
    """
    z = complex(z)
    if z == 0 or z == 1:
        raise SingularInputError(f"D is singular at {z}")
    if z.imag == 0.0:
        return 0.0
    sign = 1.0
    for _ in range(8):
        if abs(z) > 1.0:
            z = 1.0 / z
            sign = -sign
        elif z.real > 0.5:
            z = 1.0 - z
            sign = -sign
        else:
            break
    li2 = _li2_series(z)
    return sign * (li2.imag + cmath.phase(1 - z) * math.log(abs(z)))


# ---------------------------------------------------------------------------
# triangulations
# ---------------------------------------------------------------------------

@dataclass
class Triangulation:
    """Ideal triangulation with gluing data in shape coordinates.

    Exponent rows are triples (a, b, c) per tetrahedron acting on
    (z, z', z'') with z' = 1/(1-z) and z'' = (z-1)/z; an equation reads
    sign * prod_j z_j^a z'_j^b z''_j^c = RHS (1 for edges, m^2 / l^2 for
    cusp equations). Cusp rows may be absent, in which case only the
    complete structure is available for that cusp.
    """

    name: str
    seed: list = field(default_factory=list)
    edges: list = field(default_factory=list)       # [{"rows": [...], "sign": +-1}]
    cusps: list = field(default_factory=list)       # [{"meridian": rows|None, ...}]

    @property
    def num_tetrahedra(self):
        return len(self.seed)

    @property
    def num_cusps(self):
        return len(self.cusps)


def load_triangulation(name_or_path):
    """Load a triangulation by census name ('figure-eight', 'whitehead')
    or from an explicit JSON path."""
    try:
        src = resources.files("eigenreg.data").joinpath(f"{name_or_path}.json")
        raw = json.loads(src.read_text())
    except (FileNotFoundError, ModuleNotFoundError):
        with open(name_or_path) as fh:
            raw = json.load(fh)
    seed = [complex(re, im) for re, im in raw["seed"]]
    return Triangulation(name=raw["name"], seed=seed,
                         edges=raw["edges"], cusps=raw["cusps"])


def _eq_value(shapes, rows, sign):
    val = complex(sign)
    for z, (a, b, c) in zip(shapes, rows):
        if a:
            val *= z ** a
        if b:
            val *= (1.0 / (1.0 - z)) ** b
        if c:
            val *= ((z - 1.0) / z) ** c
    return val


def _eq_dlog(z, row):
    a, b, c = row
    return a / z + b / (1.0 - z) + c * (1.0 / (z - 1.0) - 1.0 / z)


def shapes_volume(shapes):
    """Volume of a shape assignment: sum of Bloch-Wigner values."""
    return sum(bloch_wigner(z) for z in shapes)


def solve_gluing(tri, meridian_logs=None, tol=1e-13, max_iter=80):
    """Solve the gluing equations at prescribed meridian log-holonomies.

    `meridian_logs` is one complex log m per cusp (None or all-zero gives
    the complete structure). The cusp equation imposed is
    (meridian product) = exp(2 log m), matching the eigenvalue convention
    u = 2 log m. Returns (shapes, volume, residual).
    """
    n = tri.num_tetrahedra
    if meridian_logs is None:
        meridian_logs = [0.0] * tri.num_cusps
    if len(meridian_logs) != tri.num_cusps:
        raise DeformationUnsupportedError(
            f"{tri.name}: expected {tri.num_cusps} meridian targets")

    systems = [(e["rows"], e.get("sign", 1), 1.0 + 0j) for e in tri.edges]
    for cusp, lm in zip(tri.cusps, meridian_logs):
        rows = cusp.get("meridian")
        if rows is None:
            if lm != 0:
                raise DeformationUnsupportedError(
                    f"{tri.name}: no cusp equations shipped for deformation")
            continue
        systems.append((rows, cusp.get("sign", 1), cmath.exp(2.0 * complex(lm))))

    shapes = np.array(tri.seed, dtype=complex)

    def residual_vec(s):
        return np.array([_eq_value(s, rows, sg) - rhs for rows, sg, rhs in systems])

    res = residual_vec(shapes)
    for _ in range(max_iter):
        nrm = np.max(np.abs(res))
        if nrm < tol:
            break
        J = np.zeros((len(systems), n), dtype=complex)
        for i, (rows, sg, _rhs) in enumerate(systems):
            val = _eq_value(shapes, rows, sg)
            for j in range(n):
                J[i, j] = val * _eq_dlog(shapes[j], rows[j])
        step, *_ = np.linalg.lstsq(J, -res, rcond=None)
        lam = 1.0
        for _bt in range(30):
            trial = shapes + lam * step
            if np.all(trial.imag > 0):
                tres = residual_vec(trial)
                if np.max(np.abs(tres)) < nrm:
                    shapes, res = trial, tres
                    break
            lam *= 0.5
        else:
            raise DivergenceError(f"{tri.name}: Newton step failed to improve")
    else:
        raise DivergenceError(
            f"{tri.name}: gluing residual {np.max(np.abs(res)):.2e} after {max_iter} iters")

    vol = shapes_volume(shapes)
    return list(shapes), vol, float(np.max(np.abs(residual_vec(shapes))))


def longitude_eigenvalue(tri, shapes, cusp=0):
    """l on the given cusp from the longitude cusp equation (sqrt of the
    product); branch is the principal square root."""
    rows = tri.cusps[cusp].get("longitude")
    if rows is None:
        raise DeformationUnsupportedError(f"{tri.name}: no longitude rows for cusp {cusp}")
    val = _eq_value(shapes, rows, tri.cusps[cusp].get("sign", 1))
    return cmath.sqrt(val)
