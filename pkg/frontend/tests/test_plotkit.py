import csv
import subprocess
import sys

import pytest

from plotkit import PlotJob, SchemaError, render
from plotkit.cli import main


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


GROWTH_HEADER = ["r", "sup", "fitted_exponent", "target"]


def growth_csv(tmp_path, rows=None):
    rows = rows if rows is not None else [
        ["0.0625", "0.00074", "2.0549449", "2"],
        ["0.125", "0.0030", "2.0549449", "2"],
        ["0.25", "0.0121", "2.0549449", "2"],
    ]
    return write_csv(tmp_path / "growth.csv", GROWTH_HEADER, rows)


class TestSchemas:
    def test_header_mismatch_rejected(self, tmp_path):
        bad = write_csv(tmp_path / "g.csv", ["radius", "sup"], [["1", "2"]])
        with pytest.raises(SchemaError):
            render(PlotJob("growth", [bad], tmp_path / "g.png"))

    def test_empty_rows_rejected(self, tmp_path):
        empty = write_csv(tmp_path / "g.csv", GROWTH_HEADER, [])
        rc = main(["growth", "--in", str(empty), "--out", str(tmp_path / "g.png")])
        assert rc == 2

    def test_missing_file_rejected(self, tmp_path):
        rc = main(["growth", "--in", str(tmp_path / "none.csv"),
                   "--out", str(tmp_path / "g.png")])
        assert rc == 2


class TestRendering:
    def test_growth_annotation_matches_csv_cell(self, tmp_path):
        path = growth_csv(tmp_path)
        out = tmp_path / "g.png"
        res = render(PlotJob("growth", [path], out))
        assert out.exists()
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert res.annotations["fitted_slope"] == rows[1][2]
        assert res.annotations["target"] == rows[1][3]

    def test_inputs_not_modified_and_deterministic(self, tmp_path):
        path = growth_csv(tmp_path)
        before = path.read_bytes()
        a = render(PlotJob("growth", [path], tmp_path / "a.png"))
        b = render(PlotJob("growth", [path], tmp_path / "b.png"))
        assert path.read_bytes() == before
        assert a.annotations == b.annotations

    def test_all_zero_heatmap_reports_full_dead_core(self, tmp_path):
        rows = []
        for x in [-0.5, 0.0, 0.5]:
            for y in [-0.5, 0.0, 0.5]:
                interior = int(abs(x) < 0.5 and abs(y) < 0.5)
                rows.append([str(x), str(y), "0", str(interior)])
        path = write_csv(tmp_path / "solution.csv", ["x", "y", "u", "interior"], rows)
        res = render(PlotJob("heatmap", [path], tmp_path / "h.png"))
        assert res.annotations["dead_core"] == "dead core = 100.0%"

    def test_game_annotations(self, tmp_path):
        header = ["x0", "y0", "mean", "sd", "ci95", "mean_exit_time", "truncated",
                  "n_walks", "dpp_value", "osc_payoff", "threshold", "consistent"]
        row = ["0", "0", "0.0012345", "0.5", "0.0031", "240.5", "0", "100000",
               "0.0010000", "2", "0.04", "1"]
        path = write_csv(tmp_path / "game.csv", header, [row])
        res = render(PlotJob("game", [path], tmp_path / "game.png"))
        assert res.annotations["mean"] == "0.0012345"
        assert res.annotations["dpp_value"] == "0.0010000"


# --------------------------------------------------------------------------
# end-to-end: drive the primary CLI and render its actual reports


def run_primary(args):
    proc = subprocess.run(
        [sys.executable, "-m", "deadcore.cli", *args],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


SOLVE_CFG = """
[problem]
n = 2
p = 3.0
gamma = 1.0
m = 0.5

[thiele]
variant = constant
lambda0 = 1.0

[grid]
kind = box
lo = -1, -1
hi = 1, 1
h = 0.03125

[boundary]
kind = radial_profile
core_radius = 0.3

[solver]
relax = 1.2
relax_tail = 1.5
"""

LIOUVILLE_CFG = """
[liouville]
mode = II
theta = 0.25
R = 4, 8
probes = 0.5, 0; 1, 0

[problem]
n = 2
p = 2.0
gamma = 0.0
m = 0.0

[thiele]
variant = constant
lambda0 = 1.0

[grid]
kind = ball
radius = 1.0
h = 0.0625
pad = 1

[solver]
relax = 1.2
relax_tail = 1.5
"""

GAME_CFG = """
[game]
p = 4.0
dim = 2
eps = 0.25
n_walks = 3000
payoff = cos_theta
x0 = 0, 0

[grid]
kind = ball
radius = 1.0
h = 0.0625
pad = 5
"""


@pytest.fixture(scope="module")
def primary_outputs(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("primary")
    (tmp / "solve.cfg").write_text(SOLVE_CFG)
    run_primary(["solve", "--config", str(tmp / "solve.cfg"), "--out", str(tmp / "solve")])
    (tmp / "analyze.cfg").write_text(
        f"[analysis]\nsnapshot = {tmp / 'solve'}\nx0 = 0.3, 0\n"
        "radii = 0.0625, 0.09, 0.125, 0.18, 0.25, 0.36, 0.5\n"
    )
    run_primary(["analyze", "--config", str(tmp / "analyze.cfg"), "--out", str(tmp / "analyze")])
    (tmp / "liouville.cfg").write_text(LIOUVILLE_CFG)
    run_primary(["liouville", "--config", str(tmp / "liouville.cfg"), "--out", str(tmp / "liouville")])
    (tmp / "game.cfg").write_text(GAME_CFG)
    run_primary(["game", "--config", str(tmp / "game.cfg"), "--out", str(tmp / "game"),
                 "--seed", "3"])
    return tmp


def test_acceptance_13_all_six_kinds(primary_outputs, tmp_path):
    """[SECONDARY] render every plot kind from real primary reports; the
    annotated fitted slopes must equal the CSV exponent cells exactly."""
    tmp = primary_outputs
    jobs = [
        ("growth", tmp / "analyze" / "growth.csv", tmp / "analyze" / "manifest.json"),
        ("gradient", tmp / "analyze" / "gradient.csv", tmp / "analyze" / "manifest.json"),
        ("l2avg", tmp / "analyze" / "l2avg.csv", tmp / "analyze" / "manifest.json"),
        ("heatmap", tmp / "solve" / "solution.csv", tmp / "solve" / "manifest.json"),
        ("liouville", tmp / "liouville" / "liouville.csv", tmp / "liouville" / "manifest.json"),
        ("game", tmp / "game" / "game.csv", tmp / "game" / "manifest.json"),
    ]
    slope_cols = {"growth": "fitted_exponent", "gradient": "fitted_exponent", "l2avg": "slope"}
    rendered = 0
    for kind, csv_path, manifest in jobs:
        out = tmp_path / f"{kind}.png"
        rc = main([kind, "--in", str(csv_path), "--manifest", str(manifest),
                   "--out", str(out)])
        assert rc == 0, kind
        assert out.exists() and out.stat().st_size > 0
        rendered += 1
        if kind in slope_cols:
            res = render(PlotJob(kind, [csv_path], tmp_path / f"{kind}2.png",
                                 manifest=manifest))
            with open(csv_path) as fh:
                rows = list(csv.reader(fh))
            col = rows[0].index(slope_cols[kind])
            assert res.annotations["fitted_slope"] == rows[1][col]
    print(f"[acceptance 13] PASS - all {rendered} plot kinds rendered; "
          "slope annotations equal the CSV cells exactly")
    assert rendered == 6
