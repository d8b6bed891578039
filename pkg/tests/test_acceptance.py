"""Acceptance gate: nine criteria, one printed pass/fail line each.

Run with `pytest -s tests/test_acceptance.py` to see the lines.
"""
import cmath
import json
import math
import time

import numpy as np
import pytest
import sympy as sp

from eigenreg.cli import main as cli_main
from eigenreg.oracle import (bloch_wigner, load_triangulation, lobachevsky,
                             solve_gluing)
from eigenreg.ratpoly import parse_poly
from eigenreg.regulator import (PathSpec, based_loop_path, calibrate,
                                integrate_eta, integrate_xi,
                                meridian_segment_path, monodromy,
                                quantization_check, rectangle_loop_path, track_path, volume_along)
from eigenreg.symbols import (FormalSymbol, star_product, symbol_normalize,
                              symbol_order_candidate, temperedness)
from eigenreg.twobridge import (EigenCurve, TwoBridgeCode, eigen_curve,
                                rep_family, solved_representations)

FIG8_VOL = 2.029883212819307        # 2 D(e^{i pi/3})
WHITEHEAD_VOL = 3.663862376708876   # 8 Lambda(pi/4)


def _report(n, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {n} ({name}): {status}" + (f"  [{detail}]" if detail
                                                  else ""))
    assert ok, f"acceptance criterion {n} ({name}) failed: {detail}"


@pytest.fixture(scope="module")
def fig8():
    fam = rep_family(TwoBridgeCode(5, 3, "figure-eight"))
    curve = eigen_curve(fam)
    eps, hint, mism = calibrate(curve)
    assert abs(mism) < 1e-6
    return fam, curve, eps, hint


@pytest.fixture(scope="module")
def whitehead():
    return rep_family(TwoBridgeCode(8, 3, "whitehead"))


def _rect_states(curve, hint, center, size, samples=2000, lead_samples=800):
    lead = PathSpec(components=[[{"kind": "line", "from": [0.0, 0.0],
                                  "to": [center.real - size / 2,
                                         center.imag - size / 2]}]],
                    samples=lead_samples, branch_hints=(hint,))
    lead_states = track_path([curve], lead)
    start = [(lead_states[-1].l[0], lead_states[-1].log_l[0])]
    spec = rectangle_loop_path(center, size, size, samples=samples)
    return track_path([curve], spec, start=start)


def _random_rect_centers(count=10, seed=0):
    rng = np.random.default_rng(seed)
    return [complex(rng.uniform(-0.30, -0.15), rng.uniform(0.3, 0.8))
            for _ in range(count)]


def test_1_eigenvariety_soundness(fig8, whitehead):
    fam, curve, _, _ = fig8
    worst, runtimes = 0.0, []
    t0 = time.time()
    for l, m, _ in solved_representations(fam, count=20, seed=0):
        worst = max(worst, curve.residual(l, m))
    runtimes.append(time.time() - t0)
    for signs in ((1,), (-1,)):
        c = eigen_curve(whitehead, i=1, slice_signs=signs)
        t0 = time.time()
        for l, m, _ in solved_representations(whitehead, i=1,
                                              slice_signs=signs,
                                              count=20, seed=0):
            worst = max(worst, c.residual(l, m))
        runtimes.append(time.time() - t0)
    ok = worst < 1e-8 and max(runtimes) < 10.0
    _report(1, "eigenvariety soundness", ok,
            f"worst residual {worst:.2e}, slowest {max(runtimes):.1f}s")


def test_2_temperedness(fig8, whitehead):
    _, curve, _, _ = fig8
    ok = temperedness(curve)[0]
    for signs in ((1,), (-1,)):
        ok = ok and temperedness(eigen_curve(whitehead, i=1,
                                             slice_signs=signs))[0]
    control = EigenCurve(component_index=1,
                         poly=parse_poly("l - 2 * m", variables=("l", "m")))
    ok = ok and not temperedness(control)[0]
    _report(2, "temperedness certificates", ok)


def test_3_k2_algebra():
    x, y, z = sp.symbols("x y z")
    S = FormalSymbol.single
    ok = symbol_normalize(S(x, 1 - x)).is_identity
    ok = ok and symbol_normalize(S(x, y) * S(y, x)).is_identity
    ok = ok and (symbol_normalize(S(x * y, z))
                 == symbol_normalize(S(x, z) * S(y, z)))
    ok = ok and symbol_normalize(S(x, -x)).is_identity
    # star-product identities: diagonal pairs, powers, parabolic torsion
    lam, mu = sp.symbols("lam mu", positive=True)
    U, V = sp.diag(lam, 1 / lam), sp.diag(mu, 1 / mu)
    ok = ok and (symbol_normalize(star_product(U, V))
                 == symbol_normalize(S(lam, mu, 2)))
    ok = ok and (symbol_normalize(star_product(U * U, V))
                 == symbol_normalize(star_product(U, V) ** 2))
    ok = ok and star_product(sp.Matrix([[-1, 1], [0, -1]]),
                             sp.Matrix([[1, 3], [0, 1]])).torsion_flag
    # conjugation invariance under 50 random conjugators
    lam0, mu0 = sp.Rational(3, 2), sp.Rational(5, 3)
    base = symbol_normalize(star_product(sp.diag(lam0, 1 / lam0),
                                         sp.diag(mu0, 1 / mu0)))
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = sp.Rational(int(rng.integers(1, 6)), int(rng.integers(1, 6)))
        b = sp.Rational(int(rng.integers(-5, 6)), int(rng.integers(1, 6)))
        c = sp.Rational(int(rng.integers(-5, 6)), int(rng.integers(1, 6)))
        P = sp.Matrix([[a, b], [c, (1 + b * c) / a]])
        s = symbol_normalize(star_product(
            P * sp.diag(lam0, 1 / lam0) * P.inv(),
            P * sp.diag(mu0, 1 / mu0) * P.inv()))
        ok = ok and s == base
        if not ok:
            break
    _report(3, "K2 algebra suite", ok)


def test_4_exactness(fig8):
    _, curve, eps, hint = fig8
    worst = 0.0
    for center in _random_rect_centers():
        states = _rect_states(curve, hint, center, 0.08)
        worst = max(worst, abs(integrate_eta(states, [eps], tol=1e-5)))
    _report(4, "exactness of eta", worst < 1e-7, f"worst |eta| {worst:.2e}")


def test_5_flat_monodromy(fig8):
    _, curve, eps, hint = fig8
    worst = 0.0
    for center in _random_rect_centers():
        states = _rect_states(curve, hint, center, 0.08)
        worst = max(worst, abs(abs(monodromy(states, [eps])) - 1.0))
    spec = based_loop_path(radius=0.8, turns=1, samples=6000)
    spec.branch_hints = (hint,)
    states = track_path([curve], spec)
    worst = max(worst, abs(abs(monodromy(states, [eps])) - 1.0))
    _report(5, "flat monodromy", worst < 1e-8, f"worst ||M|-1| {worst:.2e}")


def test_6_quantization(fig8):
    _, curve, eps, hint = fig8
    q_cand = symbol_order_candidate(curve)
    spec = based_loop_path(radius=0.8, turns=1, samples=6000)
    spec.branch_hints = (hint,)
    states = track_path([curve], spec)
    frac, res = quantization_check(states, [eps], q_cand)
    double = based_loop_path(radius=0.8, turns=2, samples=12000)
    double.branch_hints = (hint,)
    states2 = track_path([curve], double)
    frac2, res2 = quantization_check(states2, [eps], q_cand)
    ok = (res < 1e-5 and res2 < 1e-5 and frac.denominator <= 64
          and frac2.denominator == frac.denominator
          and frac2.numerator == 2 * frac.numerator)
    _report(6, "quantization", ok,
            f"p/q = {frac}, doubled {frac2}, residuals {res:.1e}/{res2:.1e}")


def test_7_volume_reproduction(fig8):
    _, curve, eps, hint = fig8
    tri = load_triangulation("figure-eight")
    _, v_fig8, _ = solve_gluing(tri)
    _, v_wh, _ = solve_gluing(load_triangulation("whitehead"))
    ok = (abs(v_fig8 - FIG8_VOL) < 1e-6 and abs(v_wh - WHITEHEAD_VOL) < 1e-6)
    worst = 0.0
    for a in np.linspace(0.005, 0.05, 10):
        spec = meridian_segment_path(float(a), samples=2000)
        spec.branch_hints = (hint,)
        states = track_path([curve], spec)
        v = volume_along(states, [eps], v_fig8, tol=1e-5)
        _, v_oracle, _ = solve_gluing(tri, [1j * math.pi * float(a)])
        worst = max(worst, abs(v - v_oracle))
    ok = ok and worst < 1e-5
    _report(7, "volume reproduction", ok,
            f"worst pointwise |dV| {worst:.2e}")


def test_8_oracle_self_consistency():
    rng = np.random.default_rng(1)
    worst = 0.0
    for t in rng.uniform(-2.0, 2.0, 40):
        worst = max(worst, abs(lobachevsky(-t) + lobachevsky(t)))
        worst = max(worst, abs(lobachevsky(t + math.pi) - lobachevsky(t)))
        worst = max(worst, abs(lobachevsky(2 * t) / 2 - lobachevsky(t)
                               - lobachevsky(t + math.pi / 2)))
    zs = rng.uniform(-2, 2, 40) + 1j * rng.uniform(0.1, 2, 40)
    for z in zs:
        z = complex(z)
        worst = max(worst, abs(bloch_wigner(z) - bloch_wigner(1 / (1 - z))))
        worst = max(worst, abs(bloch_wigner(z) + bloch_wigner(1 / z)))
    res = max(solve_gluing(load_triangulation("figure-eight"))[2],
              solve_gluing(load_triangulation("whitehead"))[2])
    ok = worst < 1e-11 and res < 1e-12
    _report(8, "oracle self-consistency", ok,
            f"worst identity {worst:.1e}, gluing residual {res:.1e}")


def test_9_determinism(tmp_path, capsys):
    link = tmp_path / "fig8.json"
    link.write_text(json.dumps(
        {"type": "two_bridge", "p": 5, "q": 3, "name": "figure-eight"}))
    spec = tmp_path / "path.json"
    spec.write_text(json.dumps({
        "components": [{"segments": [
            {"kind": "line", "from": [0.0, 0.0],
             "to": [0.0, 0.05 * math.pi]}]}],
        "samples": 400, "closed": False, "branch_hints": [-1]}))
    outputs = []
    for k in (1, 2):
        curve = str(tmp_path / f"c{k}.curve")
        csv = str(tmp_path / f"run{k}.csv")
        assert cli_main(["eigenvariety", str(link), "--out", curve,
                         "--seed", "0"]) == 0
        assert cli_main(["integrate", curve, "--path", str(spec),
                         "--tol", "1e-4", "--seed", "0", "--out", csv]) == 0
        capsys.readouterr()
        outputs.append(open(curve).read() + open(csv).read())
    _report(9, "determinism", outputs[0] == outputs[1])
