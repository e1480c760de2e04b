import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from cantorflat import geometry
from cantorflat.cli import main

SVG = "{http://www.w3.org/2000/svg}"


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_build_generation_two(capsys):
    code, out, _ = _run(capsys, "build", "--depth", "2")
    assert code == 0
    data = json.loads(out)
    assert len(data["generations"][1]["rectangles"]) == 12
    assert len(data["generations"][1]["gaps"]) == 11
    assert data["metrics"][1]["c"] == "7/88" and data["metrics"][1]["d"] == "1/242"


def test_build_depth_one_is_root(capsys):
    code, out, _ = _run(capsys, "build", "--depth", "1")
    data = json.loads(out)
    assert code == 0 and len(data["generations"]) == 1
    assert data["generations"][0]["rectangles"][0]["width"] == "1/1"


def test_eps_at_bound_exits_two(capsys):
    code, _, err = _run(capsys, "build", "--eps", "1/11")
    assert code == 2
    assert "eps < min(1/2, 1/(rs-1))" in err


def test_float_like_garbage_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["build", "--eps", "abc"])
    assert info.value.code == 2


def test_eval_csv(capsys):
    code, out, _ = _run(capsys, "eval", "--x", "0", "--x", "-1", "--x", "7/88")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "x,value,error,classification,depth"
    assert lines[1].split(",")[1] == "0"
    assert lines[2].split(",")[1] == "-1" and lines[2].split(",")[3] == "outside-left"


def test_eval_out_of_domain_exits_two(capsys):
    code, _, _ = _run(capsys, "eval", "--x", "3")
    assert code == 2


def test_dims_lambda(capsys):
    code, out, _ = _run(capsys, "dims")
    data = json.loads(out)
    assert code == 0 and data["lambda"] == "3/11"
    assert data["upper_bound_check"]["passed"]


def test_dims_rejects_schedule(capsys):
    code, _, _ = _run(capsys, "dims", "--schedule", "2:2:1/10")
    assert code == 2


def test_plan_certificate(capsys):
    code, out, _ = _run(capsys, "plan", "--alpha", "1/2", "--eta", "1/5", "--k", "1")
    data = json.loads(out)
    assert code == 0 and data["certificate"]["holds"]
    assert all(v["positive"] for v in data["certificate"]["inequalities"].values())


def test_plan_unreachable_exit_code(capsys):
    code, out, _ = _run(capsys, "plan", "--alpha", "1/10", "--eta", "1/50")
    assert code == 4 and json.loads(out)["near_miss"]["s"] == 64


def test_covers(capsys):
    code, out, _ = _run(capsys, "covers", "--target", "A", "--depth", "2")
    assert code == 0 and json.loads(out)["count"] == 12
    code, out, _ = _run(capsys, "covers", "--target", "level-set", "--rows", "1,3", "--tight")
    assert code == 0 and json.loads(out)["count"] == 16
    code, _, _ = _run(capsys, "covers", "--target", "level-set")
    assert code == 2


def _rects(svg_text):
    root = ET.fromstring(svg_text)
    return root, [r for r in root.iter(SVG + "rect") if r.get("data-generation")]


def test_figure_generation_two(capsys):
    code, out, _ = _run(capsys, "figure", "--depth", "2")
    assert code == 0
    root, rects = _rects(out)
    assert len(rects) == 12
    assert len([p for p in root.iter(SVG + "polyline")]) == 11
    assert root.find(f".//{SVG}path[@class='frame']") is not None


def test_figure_counts_match_inventory(capsys, small_params):
    _, out, _ = _run(capsys, "figure", "--depth", "4", "--r", "2", "--s", "2", "--eps", "1/10")
    root, rects = _rects(out)
    inventory = geometry.geometry_dump(small_params, 4)
    assert len(rects) == sum(len(g["rectangles"]) for g in inventory["generations"][1:])
    assert len(list(root.iter(SVG + "polyline"))) == sum(len(g["gaps"]) for g in inventory["generations"])


def test_figure_true_scale_differs(capsys):
    _, exag, _ = _run(capsys, "figure", "--depth", "3")
    _, true, _ = _run(capsys, "figure", "--depth", "3", "--true-scale")
    assert exag != true
    _, rects = _rects(true)
    heights = {float(r.get("height")) for r in rects if r.get("data-generation") == "3"}
    g3 = geometry.metrics(geometry.ConstructionParams(), 3).a.value
    assert all(abs(h - float(g3)) < 1e-12 for h in heights)


def _link_points(svg_text):
    root = ET.fromstring(svg_text)
    line = root.find(f".//{SVG}polyline")
    pts = [tuple(map(float, p.split(","))) for p in line.get("points").split()]
    return root, line, pts


def test_within_row_link_descends(capsys):
    _, out, _ = _run(capsys, "figure", "--kind", "link", "--link-kind", "within-row")
    _, line, pts = _link_points(out)
    assert line.get("data-kind") == "within-row"
    ys = [y for _, y in pts]
    assert all(b <= a for a, b in zip(ys, ys[1:])) and ys[0] > ys[-1]


def test_row_transition_link_ascends(capsys):
    _, out, _ = _run(capsys, "figure", "--kind", "link", "--gap", ":3")
    _, line, pts = _link_points(out)
    assert line.get("data-kind") == "row-transition"
    ys = [y for _, y in pts]
    assert all(b >= a for a, b in zip(ys, ys[1:])) and ys[-1] > ys[0]


def test_malformed_gap_selector(capsys):
    assert _run(capsys, "figure", "--kind", "link", "--gap", "nonsense")[0] == 2
    assert _run(capsys, "figure", "--kind", "link", "--gap", ":11")[0] == 2
    assert _run(capsys, "figure", "--depth", "1")[0] == 2


def test_verify_default_passes(capsys):
    code, out, _ = _run(capsys, "verify")
    data = json.loads(out)
    assert code == 0 and data["passed"]
    assert all(c["status"] == "pass" for c in data["checks"])


def test_verify_fault_injection(capsys):
    def hook(m):
        if m.n >= 3:
            return geometry.GenerationMetrics(m.n, m.c, m.d, m.a, -m.b, m.step, m.a - m.b, m.r, m.s)
        return m
    geometry.METRICS_HOOK = hook
    code, out, _ = _run(capsys, "verify", "--depth", "4")
    assert code == 1 and not json.loads(out)["passed"]


def test_verify_schedule_skips_closed_forms(capsys):
    code, out, _ = _run(capsys, "verify", "--schedule", "2:2:1/10,4:3:1/22", "--depth", "5")
    data = json.loads(out)
    status = {c["name"]: c["status"] for c in data["checks"]}
    assert code == 0
    assert status["closed-form-dimensions"] == "skip" and status["upper-bound"] == "skip"
    assert status["geometry"] == "pass" and status["gap-endpoints"] == "pass"


def test_geometry_round_trip(capsys, tmp_path):
    path = tmp_path / "geometry.json"
    assert _run(capsys, "build", "--depth", "3", "--r", "2", "--s", "2", "--eps", "1/10", "--out", str(path))[0] == 0
    code, out, _ = _run(capsys, "verify", "--geometry", str(path), "--depth", "4")
    checks = {c["name"]: c for c in json.loads(out)["checks"]}
    assert code == 0 and checks["geometry-round-trip"]["status"] == "pass"
    data = json.loads(path.read_text())
    data["metrics"][1]["c"] = "1/3"
    path.write_text(json.dumps(data))
    assert _run(capsys, "verify", "--geometry", str(path))[0] == 1


@pytest.mark.parametrize("argv", [
    ["build", "--depth", "3"],
    ["eval", "--grid", "0", "1", "17"],
    ["figure", "--depth", "3"],
    ["dims"],
])
def test_outputs_are_deterministic(tmp_path, argv):
    texts = []
    for i in range(2):
        path = tmp_path / f"out{i}"
        assert main(argv + ["--out", str(path)]) == 0
        texts.append(path.read_bytes())
    assert texts[0] == texts[1]
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".tmp-")]


def test_io_error_exit_three(tmp_path):
    assert main(["build", "--out", str(tmp_path / "missing" / "g.json")]) == 3
    assert main(["verify", "--geometry", str(tmp_path / "none.json")]) == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cantorflat", "eval", "--x", "1/2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "1/2,0.5" in proc.stdout
