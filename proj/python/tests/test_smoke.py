import json
import os
import subprocess

import pytest

import qrec


def test_linear_algebra():
    assert qrec.invariant_factors([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == [2, 6, 12]
    assert qrec.rational_rank([[1, 2], [2, 4]]) == 1
    assert qrec.determinant([[1, 2], [3, 4]]) == -2
    big = 10**40
    assert qrec.invariant_factors([[big, 0], [0, 1]]) == [1, big]


def test_complexity():
    assert qrec.mult_complexity([[0, 0, 1]]) == 1
    assert qrec.mult_complexity([[0, 2, 4], [0, 6, 2]]) == 10
    assert qrec.mult_complexity([[0, 1], [0, 1]]) is None
    assert not qrec.hyperplane_fleeing([[0, 1], [0, 1]])


def test_sums_and_bounds():
    assert qrec.poly_sum_magnitude([0, 0, 1], 101) == pytest.approx(101**-0.5, rel=1e-12)
    q0, q = qrec.qbound(2, 1, 1, 0.5, hua_constant=1.0)
    assert q0 >= 1 and q >= 1
    with pytest.raises(qrec.CapExceeded):
        qrec.qbound(3, 1, 1, 1e-9)


def test_orbits():
    assert qrec.gamma0_identity(2, [[3, 0], [-8, 0]]) == [[1, -1], [0, -1]]
    cert = qrec.certify_companion(2, 4)
    assert cert["full_rank"] and cert["index"] == 2 and cert["word_length"] == 3
    assert qrec.fleeing_certificate([[0, 0], [2, 0], [0, 2]], 2)["index"] == 4
    assert qrec.fleeing_certificate([[0, 0], [1, 1], [2, 2]], 2)["index"] is None


def test_scans():
    assert qrec.quadform_image([0], "xy-z2", 10) == [0]
    num, den = qrec.golden_convergent(10000)
    assert den > 10000
    assert abs(num / den - (5**0.5 - 1) / 2) < 1.0 / den**2


def test_run_matches_cli(tmp_path):
    assert "scan.quadform" in qrec.experiments()
    report = qrec.run("scan.quadform", L=300, density=0.3, seed=11)
    assert report["experiment"] == "scan.quadform"
    assert report["verified"] is True
    tool = os.environ.get("QREC_TOOL")
    if tool:
        out = tmp_path / "cli.json"
        subprocess.run([tool, "scan", "quadform", "--L", "300", "--density", "0.3", "--seed", "11",
                        "--out", str(out)], check=True)
        assert json.loads(out.read_text()) == report


def test_run_errors():
    with pytest.raises(qrec.UsageError):
        qrec.run("scan.quadform", L=300, bogus=1)
    with pytest.raises(qrec.UsageError):
        qrec.run("scan.quadform", L=300)
