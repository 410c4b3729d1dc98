import csv
import filecmp
import os

from lrwpan_energy.cli import main
from lrwpan_energy.csma import load_table

SMALL = ["--set", "scenario.nodes_per_channel=10"]


def _run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_help_exits_clean(capsys):
    rc, out, _ = _run(capsys, "--help")
    assert rc == 0
    assert "usage" in out


def test_unknown_command_is_usage_error(capsys):
    rc, _, err = _run(capsys, "bogus")
    assert rc == 2
    assert "invalid choice" in err


def test_contention_single_node(tmp_path, capsys):
    rc, out, _ = _run(capsys, "contention", "--nodes", "1", "--load", "1.0",
                      "--payload", "100", "--trials", "400",
                      "--out", str(tmp_path))
    assert rc == 0
    assert "1 nodes" in out
    table = load_table(os.path.join(tmp_path, "contention.csv"))
    assert table.loads == [1.0] and table.payloads == [100]
    st = table.cells[0][0]
    assert st.pr_col == 0.0 and st.pr_caf == 0.0
    assert st.trials == 400


def test_overrides_change_the_simulation(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out_dir, extra in ((a, []), (b, ["--set", "mac.min_be=0"])):
        rc, _, _ = _run(capsys, "contention", "--nodes", "1",
                        "--load", "1.0", "--payload", "100",
                        "--trials", "200", "--out", str(out_dir), *extra)
        assert rc == 0
    slow = load_table(a / "contention.csv").cells[0][0]
    fast = load_table(b / "contention.csv").cells[0][0]
    assert fast.t_cont_mean < slow.t_cont_mean


def test_table_feeds_case_study(tmp_path, capsys):
    rc, _, _ = _run(capsys, "table", "--loads", "0.3,0.5",
                    "--payloads", "120", "--trials", "150",
                    "--out", str(tmp_path), *SMALL)
    assert rc == 0
    table_path = os.path.join(tmp_path, "contention_table.csv")
    rc, out, _ = _run(capsys, "case-study", "--table", table_path,
                      "--out", str(tmp_path), *SMALL)
    assert rc == 0
    assert "average power" in out
    assert os.path.exists(os.path.join(tmp_path, "case_study.csv"))
    assert os.path.exists(os.path.join(tmp_path, "fig9.csv"))


def test_case_study_runs_are_reproducible(tmp_path, capsys):
    dirs = [tmp_path / "r1", tmp_path / "r2"]
    for d in dirs:
        rc, _, _ = _run(capsys, "case-study", "--trials", "200",
                        "--seed", "5", "--out", str(d), *SMALL)
        assert rc == 0
    for name in ("case_study.csv", "fig9.csv"):
        assert filecmp.cmp(dirs[0] / name, dirs[1] / name, shallow=False)


def test_breakdown_prints_phase_table(tmp_path, capsys):
    rc, out, _ = _run(capsys, "breakdown", "--trials", "200",
                      "--out", str(tmp_path), *SMALL)
    assert rc == 0
    for phase in ("contention", "transmission", "beacon_listen"):
        assert phase in out


def test_packet_sweep_prints_points(tmp_path, capsys):
    rc, out, _ = _run(capsys, "packet-sweep", "--sizes", "20,120",
                      "--trials", "150", "--out", str(tmp_path), *SMALL)
    assert rc == 0
    assert os.path.exists(os.path.join(tmp_path, "fig8.csv"))
    assert " 20 B" in out and " 120 B" in out


def test_pathloss_sweep_writes_curves(tmp_path, capsys):
    rc, out, _ = _run(capsys, "pathloss-sweep", "--trials", "150",
                      "--load", "0.3", "--out", str(tmp_path), *SMALL)
    assert rc == 0
    path = os.path.join(tmp_path, "fig7.csv")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {float(r["load"]) for r in rows} == {0.3}
    assert len({r["level"] for r in rows}) == 8


def test_what_if_requires_a_modifier(tmp_path, capsys):
    rc, _, err = _run(capsys, "what-if", "--out", str(tmp_path), *SMALL)
    assert rc == 2
    assert "transition-scale" in err


def test_what_if_reports_signed_delta(tmp_path, capsys):
    rc, out, _ = _run(capsys, "what-if", "--transition-scale", "0.5",
                      "--trials", "200", "--out", str(tmp_path), *SMALL)
    assert rc == 0
    assert "relative delta" in out
    # faster transitions cut power, printed as a negative change
    assert "-" in out.split("relative delta")[1]
    assert os.path.exists(os.path.join(tmp_path, "what_if.csv"))


def test_bad_override_is_a_config_error(tmp_path, capsys):
    rc, _, err = _run(capsys, "case-study", "--set", "scenario.bogus=1",
                      "--out", str(tmp_path))
    assert rc == 1
    assert err.startswith("error: config:")


def test_missing_table_is_a_simulation_error(tmp_path, capsys):
    rc, _, err = _run(capsys, "case-study", "--table",
                      str(tmp_path / "nope.csv"), "--out", str(tmp_path))
    assert rc == 1
    assert err.startswith("error: simulation:")


def test_corrupt_table_names_the_column(tmp_path, capsys):
    rc, _, _ = _run(capsys, "table", "--loads", "0.3,0.5",
                    "--payloads", "120", "--trials", "100",
                    "--out", str(tmp_path), *SMALL)
    assert rc == 0
    src = tmp_path / "contention_table.csv"
    broken = tmp_path / "broken.csv"
    with open(src, newline="") as fh:
        rows = list(csv.reader(fh))
    drop = rows[0].index("n_cca_mean")
    with open(broken, "w", newline="") as fh:
        csv.writer(fh).writerows([r[:drop] + r[drop + 1:] for r in rows])
    rc, _, err = _run(capsys, "case-study", "--table", str(broken),
                      "--out", str(tmp_path), *SMALL)
    assert rc == 1
    assert "n_cca_mean" in err


def test_config_file_round_trips_through_cli(tmp_path, capsys):
    cfg = os.path.join(os.path.dirname(__file__), "..", "examples",
                       "case_study.cfg")
    rc, out, _ = _run(capsys, "case-study", "--config", cfg,
                      "--trials", "200", "--out", str(tmp_path), *SMALL)
    assert rc == 0
    assert "derived load" in out
