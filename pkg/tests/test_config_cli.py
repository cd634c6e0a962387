import csv

import pytest

from svexner.cli import main
from svexner.config import REQUIRED, ConfigError, parse_text, resolve
from svexner.presets import LADDER, PRESETS


class TestConfig:
    def test_parse_text(self):
        d = parse_text("# comment\ninitial = riemann\nM = 50  # cells\nleft_state = 1, 0, 0\n")
        assert d == {"initial": "riemann", "M": 50, "left_state": (1.0, 0.0, 0.0)}

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as e:
            parse_text("nope = 1")
        assert e.value.key == "nope"

    def test_bad_line(self):
        with pytest.raises(ConfigError):
            parse_text("just words")

    def test_empty_lists_required(self):
        with pytest.raises(ConfigError) as e:
            resolve({})
        for k in REQUIRED:
            assert k in str(e.value)

    def test_eno_rejected(self):
        with pytest.raises(ConfigError, match="eno"):
            resolve({"preset": "riemann_fixed", "reconstruction": "eno"})

    def test_centered_is_first_order(self):
        with pytest.raises(ConfigError):
            resolve({"preset": "riemann_fixed", "scheme": "centered", "order": 2})

    def test_riemann_fixed_values(self):
        c = resolve({"preset": "riemann_fixed"})
        assert (c.left_state, c.right_state) == ((1.0, 0.0, 0.0), (0.1, 0.0, 0.0))
        assert (c.A_g, c.M, c.t_final, c.x_left, c.x_right) == (0.0, 100, 2.0, -15.0, 15.0)

    def test_ladder_and_single_grid(self):
        c = resolve({"preset": "convergence_aeno"})
        assert c.convergence_grids == LADDER and c.M == 1280
        c = resolve({"preset": "convergence_aeno", "M": 80})
        assert c.convergence_grids == () and c.M == 80

    def test_non_doubling_ladder(self):
        with pytest.raises(ConfigError):
            resolve({"preset": "convergence_aeno", "convergence_grids": (20, 30)})

    def test_layers_override(self):
        c = resolve({"preset": "riemann_fixed", "M": 40}, {"M": 60})
        assert c.M == 60

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_resolve(self, name):
        resolve({"preset": name})


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


class TestCli:
    def test_solve_writes_outputs(self, tmp_path):
        out = tmp_path / "rf"
        assert main(["solve", "--preset", "riemann_fixed", "--M", "40", "--out", str(out)]) == 0
        rows = read_csv(out / "snapshot_2.csv")
        assert rows[0] == ["x", "h", "q", "eta", "H", "u", "Fr", "qb"]
        assert len(rows) == 41
        assert len(rows[1][1].replace("-", "").replace(".", "").split("e")[0]) >= 16
        summary = (out / "summary.txt").read_text()
        assert "steps = " in summary and "M = 40" in summary
        assert (out / "profiles.png").stat().st_size > 0

    def test_deterministic(self, tmp_path):
        args = ["solve", "--preset", "riemann_movable", "--M", "50", "--set", "plots=false"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        a = (tmp_path / "a" / "snapshot_2.csv").read_bytes()
        assert a == (tmp_path / "b" / "snapshot_2.csv").read_bytes()

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("preset = riemann_fixed\nM = 30\nt_final = 0.5\nplots = no\n")
        assert main(["solve", "--config", str(cfg), "--order", "1", "--out", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "snapshot_0.5.csv").exists()

    def test_ladder_writes_rates(self, tmp_path):
        out = tmp_path / "cv"
        code = main(["solve", "--preset", "convergence_aeno", "--order", "1", "--out", str(out),
                     "--set", "convergence_grids=20,40", "--set", "plots=false"])
        assert code == 0
        rows = read_csv(out / "rates.csv")
        assert rows[0][0] == "M" and [r[0] for r in rows[1:]] == ["20", "40"]

    def test_config_error_exit(self, tmp_path, capsys):
        assert main(["solve", "--out", str(tmp_path)]) == 2
        assert "missing required keys" in capsys.readouterr().err
        assert main(["solve", "--preset", "nope"]) == 2
        assert main(["solve", "--preset", "riemann_fixed", "--set", "cfl=2"]) == 2

    def test_argparse_error_exit(self):
        with pytest.raises(SystemExit) as e:
            main(["solve", "--order", "5"])
        assert e.value.code == 2

    def test_solver_failure_exit(self, tmp_path, capsys):
        code = main(["solve", "--preset", "riemann_fixed", "--M", "40", "--out", str(tmp_path),
                     "--set", "right_state=0.1,-20,0", "--set", "plots=false"])
        assert code == 3
        assert "solver failure" in capsys.readouterr().err

    def test_presets_command(self, capsys):
        assert main(["presets"]) == 0
        assert "riemann_movable" in capsys.readouterr().out
