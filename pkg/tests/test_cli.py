"""
Testes de ponta a ponta da linha de comando.
"""
import pandas as pd
import pytest
import yaml

from app.main import main
from app.services.fleet import load_dataset
from app.services.ucsched import instance_from_dict, solve_exact
from conftest import FLEET_YAML

SMALL_INSTANCE = {
    "units": ["J-GT1", "J-GT2", "J-D1"],
    "demand": [30.0, 35.0, 40.0, 30.0],
    "wind_forecast": [0.0, 0.0, 0.0, 0.0],
}


def _write(path, data):
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


class TestUcCommand:
    def test_small_instance_matches_exact(self, tmp_path, capsys):
        inst_file = _write(tmp_path / "inst.yaml", SMALL_INSTANCE)
        out = tmp_path / "uc"
        code = main(["uc", "--config", str(FLEET_YAML), "--instance", inst_file, "--out", str(out), "--gap", "0"])
        assert code == 0

        with open(out / "uc_solution.yaml", "r", encoding="utf-8") as fh:
            written = yaml.safe_load(fh)
        dataset = load_dataset(str(FLEET_YAML))
        exact = solve_exact(instance_from_dict(SMALL_INSTANCE, dataset.units))
        assert written["cost"]["total"] == pytest.approx(exact.total_cost, abs=1e-6)
        assert written["status"] == "optimal"

        dispatch = pd.read_csv(out / "uc_dispatch.csv", index_col="unit")
        assert list(dispatch.columns) == ["h00", "h01", "h02", "h03"]
        assert "cost_total=" in capsys.readouterr().out

        # instância efetiva ecoada com a perda provável de vento resolvida
        with open(out / "uc_instance.yaml", "r", encoding="utf-8") as fh:
            echoed = yaml.safe_load(fh)
        assert echoed["units"] == sorted(SMALL_INSTANCE["units"])
        assert echoed["likely_wind_loss"] == [0.0, 0.0, 0.0, 0.0]
        again = instance_from_dict(echoed, dataset.units)
        assert solve_exact(again).total_cost == pytest.approx(exact.total_cost, abs=1e-6)

    def test_infeasible_instance(self, tmp_path, capsys):
        # 90 MW mais a reserva excedem os 95 MW da frota só na última hora
        data = dict(SMALL_INSTANCE, demand=[30.0, 35.0, 40.0, 90.0])
        inst_file = _write(tmp_path / "inst.yaml", data)
        code = main(["uc", "--config", str(FLEET_YAML), "--instance", inst_file, "--out", str(tmp_path)])
        assert code == 2
        assert "hour 3" in capsys.readouterr().err

    def test_missing_instance(self, tmp_path, capsys):
        code = main(["uc", "--config", str(FLEET_YAML), "--instance", str(tmp_path / "nope.yaml")])
        assert code == 1
        assert "usage:" in capsys.readouterr().err


class TestSimulateCommand:
    def test_missing_config(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.yaml"), "--baseline"]) == 1

    def test_baseline(self, tmp_path, capsys):
        args = ["simulate", "--baseline", "--config", str(FLEET_YAML), "--out", str(tmp_path),
                "--t-end", "10", "--dt", "0.002"]
        assert main(args) == 0
        line = capsys.readouterr().out.strip()
        assert line.startswith("cell=5,3 mode=baseline")
        nadir = float(line.split("nadir=")[1].split()[0])
        assert nadir == pytest.approx(49.4, abs=0.1)

        csv_path = tmp_path / "timeseries_cell_5_3_baseline.csv"
        assert list(pd.read_csv(csv_path).columns) == ["t", "f", "P_T", "P_J", "P_w", "P_d", "shed", "T_m"]
        with open(tmp_path / "timeseries_cell_5_3_baseline_meta.yaml", "r", encoding="utf-8") as fh:
            meta = yaml.safe_load(fh)
        assert meta["config"]["dt"] == 0.002
        assert meta["baseline"]["imbalance"] == 0.1

    def test_rerun_is_byte_identical(self, tmp_path):
        args = ["simulate", "--baseline", "--config", str(FLEET_YAML), "--t-end", "3", "--dt", "0.005"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        name = "timeseries_cell_5_3_baseline.csv"
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_cell_outside_grid(self, tmp_path):
        args = ["simulate", "--config", str(FLEET_YAML), "--cell", "9,9", "--out", str(tmp_path)]
        assert main(args) == 1

    def test_bad_cell_syntax(self):
        with pytest.raises(SystemExit):
            main(["simulate", "--cell", "abc"])


@pytest.mark.slow
class TestSweepCommand:
    def test_default_sweep(self, tmp_path, capsys):
        args = ["sweep", "--config", str(FLEET_YAML), "--out", str(tmp_path), "--jobs", "4"]
        assert main(args) == 0
        results = pd.read_csv(tmp_path / "sweep_results.csv")
        assert len(results) == 30
        summary = pd.read_csv(tmp_path / "summary.csv")
        assert set(summary.setting) == {"without", "with", "baseline"}
        assert len(summary) == 12
        assert (tmp_path / "summary.txt").is_file()
        for name in ("nadir", "rocof", "shed_total"):
            assert (tmp_path / f"plot_{name}_without.dat").is_file()
            assert (tmp_path / f"plot_{name}_with.dat").is_file()

        ok = results[results.status == "ok"]
        assert (ok.with_shed_total <= ok.without_shed_total + 1e-9).all()
        assert ok.with_nadir.mean() > ok.without_nadir.mean()
        assert ok.without_nadir.var(ddof=0) > ok.baseline_nadir.var(ddof=0)

        # métricas recomputáveis a partir das séries gravadas
        from app.services.freqsim import TimeSeries
        from app.services.metrics import nadir

        row = ok.iloc[0]
        ts = TimeSeries.from_csv(tmp_path / "runs" / f"cell_{row['row']}_{row['col']}_without.csv")
        assert nadir(ts) == pytest.approx(row.without_nadir, abs=1e-9)
