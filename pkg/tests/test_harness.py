import json

import numpy as np
import pytest

from ipgm.cli import main
from ipgm.harness import (
    ExperimentConfig,
    cmd_compare,
    cmd_generate,
    cmd_sweep_gamma3,
    cmd_verify,
    config_from_mapping,
    load_config_file,
)
from ipgm.problems import load_instance, starting_point
from ipgm.solver import constant_alpha_from_gamma


def small_cfg(**kw):
    base = dict(n=24, m=48, omega=4, seed=11, gamma3=(0.0, 0.2), tol=1e-4)
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.m == 2 * cfg.n
        assert cfg.resolved_density() > 0

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(algo="newton")
        with pytest.raises(ValueError):
            ExperimentConfig(n=10, m=5)
        with pytest.raises(ValueError):
            ExperimentConfig(gamma3=(0.6,))
        with pytest.raises(ValueError):
            ExperimentConfig(beta=(2.0,))
        with pytest.raises(ValueError):
            ExperimentConfig(schedule="exp")

    def test_config_file_roundtrip(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# comment\n"
            "n = 24\n"
            "m = 48\n"
            "omega = 4\n"
            "beta = 0.0,0.5\n"
            "gamma3 = 0.0,0.1\n"
            "max-iter = 500\n"
            "strict = true\n")
        mapping = load_config_file(path)
        cfg = config_from_mapping(mapping)
        assert cfg.n == 24 and cfg.m == 48
        assert cfg.beta == (0.0, 0.5)
        assert cfg.max_iter == 500
        assert cfg.strict is True

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            config_from_mapping({"turbo": 1})

    def test_bad_line_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("this is not a pair\n")
        with pytest.raises(ValueError):
            load_config_file(path)


class TestGenerate:
    def test_deterministic_files(self, tmp_path):
        cfg1 = small_cfg(out=str(tmp_path / "a.bin"))
        cfg2 = small_cfg(out=str(tmp_path / "b.bin"))
        p1, p2 = cmd_generate(cfg1), cmd_generate(cfg2)
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_loadable_and_finite(self, tmp_path):
        cfg = small_cfg(out=str(tmp_path / "i.bin"))
        inst = load_instance(cmd_generate(cfg))
        x0 = starting_point(0.0, inst.n)
        assert np.isfinite(inst.value(x0))

    def test_invalid_rejected(self):
        with pytest.raises(ValueError):
            small_cfg(n=50, m=25)


@pytest.fixture(scope="module")
def sweep_report():
    return cmd_sweep_gamma3(small_cfg())


class TestSweep:
    @pytest.fixture()
    def report(self, sweep_report):
        return sweep_report

    def test_columns_cover_reference_table(self, report):
        for col in ("gamma3", "f", "it", "time_s", "alpha"):
            assert col in report.columns

    def test_alpha_matches_rule(self, report):
        inst = small_cfg().make_instance()
        for row in report.rows:
            expected = constant_alpha_from_gamma(inst.lipschitz_L,
                                                 row["gamma3"])
            assert row["alpha"] == pytest.approx(expected, abs=1e-15)

    def test_alpha_decreases_with_gamma3(self, report):
        alphas = [row["alpha"] for row in report.rows]
        assert all(alphas[i] > alphas[i + 1] for i in range(len(alphas) - 1))

    def test_monitors_pass(self, report):
        assert all(row["monitors"] == "pass" for row in report.rows)

    def test_csv_deterministic_except_time(self, report):
        again = cmd_sweep_gamma3(small_cfg())
        head = report.to_csv().splitlines()[0].split(",")
        t_ix = head.index("time_s")
        for a, b in zip(report.to_csv().splitlines(),
                        again.to_csv().splitlines()):
            a_tok = [t for i, t in enumerate(a.split(",")) if i != t_ix]
            b_tok = [t for i, t in enumerate(b.split(",")) if i != t_ix]
            assert a_tok == b_tok

    def test_requires_constant_algo(self):
        with pytest.raises(ValueError):
            cmd_sweep_gamma3(small_cfg(algo="armijo"))

    def test_phi_selection(self):
        report = cmd_sweep_gamma3(small_cfg(phi="phi2", gamma3=(0.0,)))
        assert report.rows[0]["monitors"] == "pass"
        with pytest.raises(ValueError):
            small_cfg(phi="phi9")


class TestCompare:
    def test_grid_rows(self):
        report = cmd_compare(small_cfg(beta=(0.0, 0.5)))
        assert len(report.rows) == 2
        row = report.rows[0]
        for tag in ("con", "arm"):
            for proj in ("inexact", "exact"):
                assert f"{tag}_{proj}_f" in row
        fs = [row[f"{t}_{p}_f"] for t in ("con", "arm")
              for p in ("inexact", "exact")]
        assert (max(fs) - min(fs)) / max(abs(max(fs)), 1e-12) < 1e-3
        assert row["monitors"] == "pass"
        assert row["con_inexact_p_mean"] is not None


class TestVerify:
    def test_all_checks_pass(self):
        checks = cmd_verify(small_cfg())
        assert checks, "no checks emitted"
        for name, chk in checks.items():
            assert chk["passed"], f"{name}: {chk}"
        assert "boxqp.contraction" in checks
        assert "projection.contract" in checks
        assert checks["projection.contract"]["checked"] > 0


class TestCli:
    def test_usage_error_exit_code(self, capsys):
        assert main(["sweep-gamma3", "--algo", "bogus"]) == 1

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 1

    def test_sweep_to_stdout(self, capsys):
        code = main(["sweep-gamma3", "--n", "24", "--m", "48", "--omega", "4",
                     "--seed", "11", "--gamma3", "0.0"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.splitlines()[0].startswith("gamma3,f,it,time_s,alpha")

    def test_generate_and_reports(self, tmp_path, capsys):
        out = tmp_path / "inst.bin"
        assert main(["generate", "--n", "24", "--m", "48", "--omega", "4",
                     "--seed", "11", "--out", str(out)]) == 0
        assert out.exists()
        base = tmp_path / "report"
        assert main(["compare", "--n", "24", "--m", "48", "--omega", "4",
                     "--seed", "11", "--beta", "0.0",
                     "--out", str(base)]) == 0
        data = json.loads((tmp_path / "report.json").read_text())
        assert data["command"] == "compare"
        assert (tmp_path / "report.csv").read_text().startswith("n,m,omega,beta")

    def test_verify_json(self, tmp_path):
        out = tmp_path / "verify.json"
        code = main(["verify", "--n", "24", "--m", "48", "--omega", "4",
                     "--seed", "11", "--out", str(out)])
        assert code == 0
        checks = json.loads(out.read_text())
        assert all(v["passed"] for v in checks.values())

    def test_config_file_with_override(self, tmp_path, capsys):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("n = 24\nm = 48\nomega = 4\nseed = 11\n"
                           "gamma3 = 0.0,0.2\n")
        code = main(["sweep-gamma3", "--config", str(cfgfile),
                     "--gamma3", "0.1"])
        out = capsys.readouterr().out
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 2  # header plus the single overridden gamma3
        assert lines[1].startswith("0.1,")
