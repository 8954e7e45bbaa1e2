import json
import math
import os

import numpy as np
import pytest

from renyigas import cli
from renyigas import entropy_functions as ef
from renyigas import finite_size as fs
from renyigas import thermo
from renyigas.regions import ball


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path))
    return tmp_path


def results(path, name):
    return cli.load_output(os.path.join(path, name))["results"]


class TestSubcommands:
    def test_sigma(self, out, capsys):
        assert cli.main(["sigma", "--d", "2"]) == 0
        rec = results(out, "sigma.json")[0]
        assert abs(rec["value"] - 0.19798) < 2e-4
        assert "0.19798" in capsys.readouterr().out

    def test_coeff_all_routes(self, out):
        assert cli.main(["coeff", "--method", "all", "--f", "quadratic"]) == 0
        recs = results(out, "coeff.json")
        assert {r["method"] for r in recs} >= {"pv_quadrature", "parseval"}
        vals = [r["value"] for r in recs]
        np.testing.assert_allclose(vals, -1 / (4 * math.sqrt(math.pi)), rtol=1e-6)

    def test_coeff_linear_zero(self, out):
        assert cli.main(["coeff", "--f", "linear", "--method", "pv"]) == 0
        assert results(out, "coeff.json")[0]["value"] == 0.0

    def test_explicit_route_not_applicable(self, out):
        assert cli.main(["coeff", "--f", "renyi:0.5", "--method", "parseval"]) == 2

    def test_density_and_solve_mu(self, out):
        assert cli.main(["density", "--T", "2", "--mu", "0.5"]) == 0
        rho = [r for r in results(out, "density.json") if r["quantity"] == "rho"][0]["value"]
        np.testing.assert_allclose(rho, 2 / (2 * math.pi) * math.log1p(math.exp(0.25)),
                                   rtol=1e-8)
        assert cli.main(["solve-mu", "--T", "2", "--rho", str(rho)]) == 0
        mu = results(out, "solve_mu.json")[0]["value"]
        np.testing.assert_allclose(mu, 0.5, atol=1e-9)

    def test_scan_finite_csv_deterministic(self, out):
        argv = ["scan-finite", "--f", "quadratic", "--alpha", "2,3", "--plot"]
        assert cli.main(argv) == 0
        first = (out / "scan_finite.csv").read_bytes()
        svg = (out / "scan_finite.svg").read_bytes()
        assert cli.main(argv) == 0
        assert (out / "scan_finite.csv").read_bytes() == first
        assert (out / "scan_finite.svg").read_bytes() == svg
        assert first.decode().count("\n") == 3

    def test_scan_temp(self, out):
        assert cli.main(["scan-temp", "--alpha", "2", "--T", "1,4", "--no-plot"]) == 0
        assert (out / "scan_temp.csv").exists() and not (out / "scan_temp.svg").exists()

    def test_ee(self, out):
        assert cli.main(["ee", "--symbol", "limit_fermi-quadratic", "--alpha", "3"]) == 0
        assert results(out, "ee.json")[0]["value"] > 0

    def test_checks(self, out):
        assert cli.main(["checks", "--trials", "20", "--budget", "200", "--n", "4",
                         "--alpha", "2"]) == 0
        recs = results(out, "checks.json")
        assert all(r["passed"] for r in recs)
        assert {r["check"] for r in recs} >= {"davis", "berezin", "midpoint_concavity"}


class TestErrors:
    @pytest.mark.parametrize("argv", [["checks", "--n", "17"], ["sigma", "--d", "5"],
                                      ["coeff", "--symbol", "nonsense"],
                                      ["solve-mu"]])
    def test_config_errors(self, out, argv, capsys):
        assert cli.main(argv) == 2
        assert "config error at $" in capsys.readouterr().err

    def test_node_cap_is_numerical(self, out, capsys):
        assert cli.main(["scan-finite", "--region", "box:4,4", "--alpha", "8",
                         "--f", "quadratic"]) == 3
        assert "numerical failure" in capsys.readouterr().err

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        cfg = cli.build_config("sigma", {}, {"output_dir": str(blocker / "sub")})
        assert cli.run(cfg).status == 2


class TestConfig:
    def test_layering(self, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text("[run]\nd = 3\ntol = 1e-6\nalpha = 2, 4\n")
        cfg = cli.build_config("sigma", cli.read_config_file(str(ini)), {"tol": 1e-7})
        assert cfg.d == 3 and cfg.tol == 1e-7 and cfg.alpha == [2.0, 4.0]

    def test_file_used_by_main(self, out, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text("[run]\nd = 3\n")
        assert cli.main(["sigma", "--config", str(ini)]) == 0
        assert abs(results(out, "sigma.json")[0]["value"] - 0.15419) < 2e-4

    def test_unknown_key(self, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text("[run]\nbogus = 1\n")
        with pytest.raises(cli.ConfigError) as exc:
            cli.read_config_file(str(ini))
        assert "$.bogus" in str(exc.value)

    def test_json_roundtrip(self, out):
        assert cli.main(["density"]) == 0
        data = cli.load_output(os.path.join(out, "density.json"))
        cli.validate_output(json.loads(json.dumps(data)))
        assert data["config"]["subcommand"] == "density"


class TestPlot:
    def _report(self, alphas):
        return fs.scaling_scan("fixed_symbol", ball(1.0), alphas, symbol=thermo.gaussian(2),
                               f=ef.quadratic(),
                               method="sector")

    def test_empty_report(self, tmp_path):
        path = cli.emit_plot(fs.ScalingReport("fixed_symbol"), str(tmp_path / "e.svg"))
        assert open(path).read().startswith("<?xml")

    def test_three_rows_deterministic(self, tmp_path):
        rep = self._report([2.0, 4.0, 6.0])
        a = cli.emit_plot(rep, str(tmp_path / "a.svg"))
        b = cli.emit_plot(rep, str(tmp_path / "b.svg"))
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            cli.emit_plot(self._report([2.0]), str(tmp_path / "missing" / "x.svg"))
