"""The harness aggregates must match an independent recomputation from the
raw CSV rows."""

import os
import subprocess

import pytest

CLI = os.environ.get("KINOCBS_CLI")
AGGREGATE = os.path.join(
    os.path.dirname(__file__), "..", "..", "tools", "aggregate_report.py"
)

SCENE = """
name: agg_check
environment: {min: [0, 0], max: [3, 2], obstacles: []}
robots:
  - {type: double_integrator2, shape: {disk: 0.15},
     start: [0.6, 1.0, 0, 0], goal: [2.4, 1.0, 0, 0]}
"""


@pytest.mark.skipif(CLI is None, reason="KINOCBS_CLI not set")
def test_csv_aggregates_match_independent_script(tmp_path):
    suite = tmp_path / "suite"
    suite.mkdir()
    (suite / "agg_check.yaml").write_text(SCENE)
    csv_path = tmp_path / "report.csv"

    run = subprocess.run(
        [
            CLI, "bench", "--suite", str(suite), "--trials", "3",
            "--out", str(csv_path), "--time-limit", "8",
        ],
        capture_output=True, text=True, check=True,
    )
    harness_lines = [
        line for line in run.stdout.splitlines() if line.startswith("agg_check,")
    ]
    assert len(harness_lines) == 1

    recompute = subprocess.run(
        ["python3", AGGREGATE, str(csv_path)],
        capture_output=True, text=True, check=True,
    )
    script_lines = [
        line for line in recompute.stdout.splitlines()
        if line.startswith("agg_check,")
    ]
    assert len(script_lines) == 1

    def parse(line):
        name, p, t, j = line.split(",")
        return name, float(p), float(t), float(j)

    hn, hp, ht, hj = parse(harness_lines[0])
    sn, sp, st, sj = parse(script_lines[0])
    assert hn == sn
    assert hp == pytest.approx(sp, abs=1e-12)
    assert ht == pytest.approx(st, rel=1e-4)
    assert hj == pytest.approx(sj, rel=1e-6)
