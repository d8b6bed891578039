"""CLI: round trips, output formats, error codes, determinism."""
import json

import pytest

from eigenreg.cli import main
from eigenreg.ratpoly import parse_poly
from eigenreg.twobridge import load_curve


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_eigenvariety_round_trip(tmp_path, fig8_link_file, fig8_curve):
    out = str(tmp_path / "c.curve")
    code = main(["eigenvariety", fig8_link_file, "--out", out])
    assert code == 0
    back = load_curve(out)
    assert back.poly == fig8_curve.poly
    text = open(out).read()
    assert "# newton_polygon:" in text


def test_tempered_report(tmp_path, fig8_link_file, capsys):
    out = str(tmp_path / "c.curve")
    main(["eigenvariety", fig8_link_file, "--out", out])
    capsys.readouterr()
    code, stdout, _ = run(capsys, "tempered", out)
    assert code == 0
    assert stdout.splitlines()[0] == "tempered: true"
    assert "cyclotomic_indices" in stdout


def test_symbol_reduce(capsys):
    code, stdout, _ = run(capsys, "symbol-reduce",
                          '[["x", "1 - x", 1], ["x", "y", 2]]')
    assert code == 0
    assert stdout.strip() == "{x, y}^2"


def test_oracle_volume(capsys, fig8_link_file):
    code, stdout, _ = run(capsys, "oracle-volume", fig8_link_file)
    assert code == 0
    vol = float([ln for ln in stdout.splitlines()
                 if ln.startswith("volume:")][0].split()[1])
    assert abs(vol - 2.029883212819307) < 1e-12


def test_integrate_csv_format(tmp_path, fig8_link_file, capsys):
    curve = str(tmp_path / "c.curve")
    main(["eigenvariety", fig8_link_file, "--out", curve])
    spec = tmp_path / "path.json"
    spec.write_text(json.dumps({
        "components": [{"segments": [
            {"kind": "line", "from": [0.0, 0.0],
             "to": [0.0, 0.05 * 3.141592653589793]}]}],
        "samples": 400, "closed": False, "branch_hints": [-1]}))
    out = str(tmp_path / "run.csv")
    code = main(["integrate", curve, "--path", str(spec),
                 "--tol", "1e-4", "--out", out])
    assert code == 0
    lines = open(out).read().splitlines()
    assert lines[0] == "t,l_re,l_im,m_re,m_im,eta_acc,xi_acc,V"
    assert len([ln for ln in lines if not ln.startswith("#")]) == 402
    assert any(ln.startswith("# eta_integral:") for ln in lines)
    row = lines[1].split(",")
    assert len(row) == 8
    assert abs(float(row[0])) == 0.0


def test_error_block_and_exit_codes(tmp_path, capsys):
    trefoil = tmp_path / "trefoil.json"
    trefoil.write_text(json.dumps(
        {"type": "two_bridge", "p": 3, "q": 1, "name": "trefoil"}))
    code, _, stderr = run(capsys, "eigenvariety", str(trefoil),
                          "--require-hyperbolic")
    assert code == 24  # no hyperbolic solution
    block = json.loads(stderr.strip())
    assert block["error"] == "NoHyperbolicSolutionError"
    assert block["exit_code"] == 24

    code, _, stderr = run(capsys, "tempered", str(tmp_path / "missing.curve"))
    assert code == 15  # parse error
    assert json.loads(stderr.strip())["error"] == "ParseError"


def test_determinism(tmp_path, fig8_link_file, capsys):
    outs = []
    for k in (1, 2):
        curve = str(tmp_path / f"c{k}.curve")
        main(["eigenvariety", fig8_link_file, "--out", curve])
        capsys.readouterr()
        code, stdout, _ = run(capsys, "tame", curve, "--seed", "0")
        assert code == 0
        outs.append(open(curve).read() + stdout)
    assert outs[0] == outs[1]
