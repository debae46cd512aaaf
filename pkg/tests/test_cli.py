import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from switchstab.cli import main
from switchstab.io import parse_matrix_set


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, json.loads(out.out), out.err


def write_set(tmp_path, matrices, dim=2, labels=None, name="m.json"):
    doc = {"dim": dim, "matrices": matrices}
    if labels is not None:
        doc["labels"] = labels
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def val(field):
    return field["value"]


def test_bounds_sv(capsys):
    code, rep, _ = run(capsys, "bounds", "stanford-urbano", "--method", "sv", "--t-max", "4")
    assert code == 0
    assert val(rep["payload"]["best"]) == pytest.approx(0.5, abs=1e-12)
    assert rep["payload"]["best"]["status"] == "certified"
    assert rep["input"]["digest"].startswith("sha256:")
    assert "wall_time_s" in rep["timing"]


def test_bounds_best_response(capsys):
    code, rep, _ = run(capsys, "bounds", "stanford-urbano", "--method", "best-response", "--t-bar", "9", "--grid", "8192")
    assert code == 0
    assert abs(val(rep["payload"]["empirical"]) - 0.886) <= 0.005
    assert val(rep["payload"]["certified"]) <= 0.90


def test_bounds_best_response_listed_words(capsys):
    words = "2,21,211,2111,21211,21212,212121,212111,2111211,2121211,21112111,21212111,212121211"
    code, rep, _ = run(capsys, "bounds", "stanford-urbano", "--method", "best-response", "--words", words, "--grid", "8192")
    assert code == 0 and 0.881 <= val(rep["payload"]["empirical"]) <= 0.891
    assert rep["payload"]["arcs"][0]["word"].startswith("A2")


def test_bounds_alg1(capsys):
    code, rep, _ = run(capsys, "bounds", "stanford-urbano", "--method", "alg1", "--t-max", "4", "--grid", "4096")
    assert code == 0
    assert val(rep["payload"]["per_horizon"][3]["certified"]) <= 0.98


def test_bounds_cone_negative_entries_exit_2(capsys, tmp_path):
    path = write_set(tmp_path, [[1, -1, 0, 1]])
    code, rep, err = run(capsys, "bounds", path, "--method", "cone")
    assert code == 2
    assert "cone inapplicable" in err and "cone inapplicable" in rep["error"]["message"]


def test_bounds_cone_positive(capsys, tmp_path):
    path = write_set(tmp_path, [[2, 1, 1, 2]])
    code, rep, _ = run(capsys, "bounds", path, "--method", "cone", "--t-max", "1")
    assert code == 0 and val(rep["payload"]["lambda"]) == pytest.approx(3.0, abs=1e-9)


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"dim": 2, "matrices": [[1, 2, 3]]}, "matrices[0]"),
        ({"dim": 0, "matrices": [[1]]}, "dim"),
        ({"dim": 2, "matrices": []}, "matrices"),
        ({"dim": 1, "matrices": [[1], [2]], "labels": ["a"]}, "labels"),
        ({"dim": 1, "matrices": [[1], [2]], "labels": ["a", "a"]}, "labels"),
        ({"dim": 1, "matrices": [["x"]]}, "matrices[0]"),
    ],
)
def test_malformed_files_exit_1_naming_field(capsys, tmp_path, doc, field):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, rep, err = run(capsys, "bounds", str(path), "--method", "sv")
    assert code == 1
    assert f"'{field}'" in rep["error"]["message"]


def test_unparseable_and_missing_inputs(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(capsys, "bounds", str(path), "--method", "sv")[0] == 1
    assert run(capsys, "bounds", "no-such-thing", "--method", "sv")[0] == 1


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bounds", "stanford-urbano", "--method", "nope"])
    assert exc.value.code == 1


def test_resource_cap_exit_3(capsys):
    code, rep, _ = run(capsys, "bounds", "stanford-urbano", "--method", "sv", "--t-max", "30")
    assert code == 3 and rep["error"]["kind"] == "resource cap"
    code, _, _ = run(capsys, "orbit", "--depth", "12", "--node-cap", "50")
    assert code == 3


def test_lyap_vhat_088_and_080(capsys, tmp_path):
    code, hi, _ = run(capsys, "lyap", "stanford-urbano", "--kind", "vhat", "--lambda", "0.88", "--grid", "4096", "--tol", "1e-6")
    assert code == 0 and hi["payload"]["converged"]
    assert val(hi["payload"]["exceedance_fraction"]) < 0.05
    code, lo, _ = run(capsys, "lyap", "stanford-urbano", "--kind", "vhat", "--lambda", "0.80")
    assert code == 0
    assert val(lo["payload"]["exceedance_fraction"]) > val(hi["payload"]["exceedance_fraction"])


def test_lyap_stable_matrix_table_is_one(capsys, tmp_path):
    path = write_set(tmp_path, [[0.5, 0, 0, 0.5]])
    csv = tmp_path / "table.csv"
    code, rep, _ = run(capsys, "lyap", path, "--kind", "vhat", "--lambda", "0.9", "--csv", str(csv))
    assert code == 0
    assert val(rep["payload"]["value_min"]) == val(rep["payload"]["value_max"]) == 1.0
    lines = csv.read_text().splitlines()
    assert lines[0] == "angle,value" and all(float(l.split(",")[1]) == 1.0 for l in lines[1:])


def test_lyap_divergence_exit_4(capsys, tmp_path):
    path = write_set(tmp_path, [[1, 0, 0, 1]])
    code, rep, err = run(capsys, "lyap", path, "--kind", "vhat", "--lambda", "0.5")
    assert code == 4 and "lambda not certifiable" in err
    code, _, _ = run(capsys, "lyap", path, "--kind", "vlam", "--lambda", "0.5", "--T", "100")
    assert code == 4


def test_lyap_non_planar_exit_2(capsys):
    code, _, _ = run(capsys, "lyap", "prop-different-3d", "--lambda", "0.9")
    assert code == 2


def test_lyap_plots(capsys, tmp_path):
    plot = tmp_path / "level.svg"
    code, rep, _ = run(capsys, "lyap", "stanford-urbano", "--lambda", "0.95", "--grid", "512", "--plot", str(plot))
    assert code == 0
    ratio = tmp_path / "level-ratio.svg"
    assert rep["payload"]["files"] == [str(plot), str(ratio)]
    for f in (plot, ratio):
        root = ET.parse(f).getroot()
        assert root.tag.endswith("svg") and root.get("version") == "1.1"
        assert root.find("{http://www.w3.org/2000/svg}polyline") is not None


def test_orbit_depth_12(capsys, tmp_path):
    edges = tmp_path / "edges.txt"
    code, rep, _ = run(capsys, "orbit", "--depth", "12", "--query", "1/2", "--query", "1/4", "--edges", str(edges))
    p = rep["payload"]
    assert code == 0 and p["node_count"] == 2305 and p["invariant_violations"] == 0
    assert p["queries"] == [{"tangent": "1/2", "present": False}, {"tangent": "1/4", "present": True}]
    first = edges.read_text().splitlines()[0]
    assert first == "0/1 --A1--> 1/1"


def test_orbit_depth_0(capsys):
    code, rep, _ = run(capsys, "orbit", "--depth", "0")
    assert code == 0 and rep["payload"]["node_count"] == 1


def test_orbit_rotation_reports_computed_value(capsys):
    code, rep, _ = run(capsys, "orbit", "--rotation")
    rot = rep["payload"]["rotation"]
    assert code == 0 and "node_count" not in rep["payload"]
    assert val(rot["cos_2theta"]) == pytest.approx(9 / 16, abs=1e-12)
    assert val(rot["eigen_moduli"]) == pytest.approx([1.0, 1.0], abs=1e-12)


def test_orbit_bad_query(capsys):
    assert run(capsys, "orbit", "--query", "x/y")[0] == 1


def test_case_stanford(capsys, tmp_path):
    csv, svg = tmp_path / "f.csv", tmp_path / "f.svg"
    code, rep, _ = run(capsys, "case-stanford", "--grid", "8192", "--csv", str(csv), "--plot", str(svg))
    p = rep["payload"]
    assert code == 0 and len(p["words"]) == 13
    assert abs(val(p["max_F"]) - 0.886) <= 0.005
    assert val(p["sv_lower_bound"]) == pytest.approx(0.5, abs=1e-12)
    assert val(p["subradius_norm_bound"]) >= 1 - 1e-9
    assert val(p["reference_0.9^(1/4)"]) == pytest.approx(0.9**0.25)
    rows = csv.read_text().splitlines()
    assert rows[0] == "alpha,F" and len(rows) == 8193
    ET.parse(svg)


def test_ct_hurwitz(capsys, tmp_path):
    path = write_set(tmp_path, [[-1, 0, 0, -1]])
    csv = tmp_path / "traj.csv"
    code, rep, _ = run(capsys, "ct", path, "--delta", "0.1", "--T", "1", "--x0", "3,4", "--csv", str(csv))
    assert code == 0
    assert val(rep["payload"]["final_norm"]) == pytest.approx(5 * math.exp(-1), rel=1e-9)
    assert val(rep["payload"]["per_step_decay"]) == pytest.approx(math.exp(-0.1), rel=1e-9)
    assert csv.read_text().splitlines()[0] == "time,x1,x2"


def test_ct_shift_check(capsys):
    code, rep, _ = run(capsys, "ct", "stanford-urbano", "--shift-gamma", "1.0")
    sc = rep["payload"]["shift_check"]
    assert code == 0 and sc["passed"] and val(sc["max_rel_error"]) <= 1e-9


def test_ct_rotation_shift_pair(capsys, tmp_path):
    path = write_set(tmp_path, [[0.5, 1, -1, 0.5], [-0.5, 1, -1, -0.5]])
    code, rep, _ = run(capsys, "ct", path, "--delta", "0.1", "--T", "20")
    assert code == 0 and val(rep["payload"]["final_norm"]) < 1e-3


def test_ct_divergence_is_exit_0(capsys, tmp_path):
    path = write_set(tmp_path, [[50, 0, 0, 50]])
    code, rep, _ = run(capsys, "ct", path, "--delta", "1", "--T", "100")
    assert code == 0 and rep["payload"]["diverged"]


def test_ct_bad_x0(capsys):
    assert run(capsys, "ct", "stanford-urbano", "--x0", "1,2,3")[0] == 1


def _strip_timing(text):
    doc = json.loads(text)
    doc.pop("timing")
    return json.dumps(doc)


@pytest.mark.parametrize(
    "argv",
    [
        ["bounds", "stanford-urbano", "--method", "best-response", "--t-bar", "5", "--grid", "1024"],
        ["lyap", "stanford-urbano", "--lambda", "0.95", "--grid", "512"],
        ["orbit", "--depth", "8"],
    ],
)
def test_reports_are_deterministic(capsys, argv):
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    second = capsys.readouterr().out
    a, b = first.split('"timing"')[0], second.split('"timing"')[0]
    assert a == b
    assert _strip_timing(first) == _strip_timing(second)


def test_plot_payloads_are_deterministic(capsys, tmp_path):
    for name in ("a", "b"):
        main(["case-stanford", "--grid", "1024", "--csv", str(tmp_path / f"{name}.csv"), "--plot", str(tmp_path / f"{name}.svg")])
    capsys.readouterr()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("SWITCHSTAB_THREADS", "2")
    code, rep, _ = run(capsys, "orbit", "--depth", "2")
    assert code == 0 and rep["threads"] == 2
    monkeypatch.setenv("SWITCHSTAB_THREADS", "zero")
    code, rep, _ = run(capsys, "orbit", "--depth", "2")
    assert code == 1 and "SWITCHSTAB_THREADS" in rep["error"]["message"]


def test_file_input_digest_is_content_hash(capsys, tmp_path):
    path = write_set(tmp_path, [[0.5, 0, 0, 2]], labels=["X"])
    _, a, _ = run(capsys, "bounds", path, "--method", "sv", "--t-max", "1")
    path2 = write_set(tmp_path, [[0.5, 0, 0, 2]], labels=["X"], name="copy.json")
    _, b, _ = run(capsys, "bounds", path2, "--method", "sv", "--t-max", "1")
    assert a["input"]["digest"] == b["input"]["digest"]
    assert parse_matrix_set((tmp_path / "m.json").read_text()).labels[0] == "X"


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "switchstab", "orbit", "--depth", "3"], capture_output=True, text=True, check=True
    )
    assert json.loads(out.stdout)["payload"]["node_count"] == 8
