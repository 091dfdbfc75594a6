from click.testing import CliRunner

from gifilter.cli import main
from gifilter.harness import read_csv_rows


def run(*args):
    return CliRunner().invoke(main, list(args))


class TestProblem1Command:
    def test_writes_both_csvs(self, tmp_path):
        res = run(
            "problem1", "--runs", "3", "--seed", "1", "--filters", "ekf,gif",
            "--out", str(tmp_path), "--config", _tiny_cfg(tmp_path),
        )
        assert res.exit_code == 0, res.output
        rmse = read_csv_rows(tmp_path / "rmse.csv")
        summary = read_csv_rows(tmp_path / "summary.csv")
        assert {r["filter"] for r in rmse} == {"ekf", "gif"}
        assert len(summary) == 2
        assert "slowest filter:" in res.output

    def test_unknown_filter_is_config_error(self, tmp_path):
        res = run("problem1", "--runs", "2", "--filters", "kalmanx",
                  "--out", str(tmp_path))
        assert res.exit_code == 2
        assert "unknown filter" in res.output

    def test_bad_config_value_is_config_error(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("dt = -1\n")
        res = run("problem1", "--runs", "2", "--out", str(tmp_path),
                  "--config", str(cfg))
        assert res.exit_code == 2
        assert "config error" in res.output

    def test_unknown_config_key_is_config_error(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("nonsense = 3\n")
        res = run("problem1", "--runs", "2", "--out", str(tmp_path),
                  "--config", str(cfg))
        assert res.exit_code == 2


class TestBotCommand:
    def test_xi_sweep_rows(self, tmp_path):
        res = run(
            "bot", "--runs", "3", "--seed", "1", "--filters", "ckf,gif",
            "--xi", "1,7.5", "--out", str(tmp_path), "--config", _tiny_bot_cfg(tmp_path),
        )
        assert res.exit_code == 0, res.output
        summary = read_csv_rows(tmp_path / "summary.csv")
        assert sorted({r["xi"] for r in summary}) == [1.0, 7.5]
        assert len(summary) == 4
        rmse = read_csv_rows(tmp_path / "rmse.csv")
        # RMSE curves are emitted for the first xi only, both components
        assert {r["component"] for r in rmse} == {"position", "velocity"}

    def test_empty_xi_is_config_error(self, tmp_path):
        res = run("bot", "--runs", "2", "--xi", " , ", "--out", str(tmp_path))
        assert res.exit_code == 2

    def test_xi_below_one_is_config_error(self, tmp_path):
        res = run("bot", "--runs", "2", "--xi", "0.5", "--out", str(tmp_path),
                  "--filters", "ekf")
        assert res.exit_code == 2


def _tiny_cfg(tmp_path):
    path = tmp_path / "p1.cfg"
    path.write_text("t_end = 0.2\n")
    return str(path)


def _tiny_bot_cfg(tmp_path):
    path = tmp_path / "p2.cfg"
    path.write_text("n_step = 5\n")
    return str(path)
