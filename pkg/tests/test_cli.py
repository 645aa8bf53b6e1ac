"""CLI runs: artifacts, config validation, determinism, report tools."""

import json

from click.testing import CliRunner

from supplynet.cli import main
from supplynet.messaging import decode

from helpers import write_scenario


def run_cli(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


class TestHeadlessRun:
    def test_both_scenarios_exit_zero_with_artifacts(self, tmp_path):
        scenario = write_scenario(tmp_path, wholesaler_stock=0, reorder_point=5)
        out = tmp_path / "out"
        result = run_cli("run", "--scenario", "both", "--headless", "--speed", "0",
                         "--config", str(scenario), "--out", str(out), "--no-figures")
        assert result.exit_code == 0, result.output
        assert "replenish: " in result.output and "wholesale: " in result.output
        log = (out / "messages.log").read_bytes()
        envelopes = [decode(line) for line in log.splitlines()]
        assert len(envelopes) > 20
        inventory_lines = (out / "inventory.log").read_text().splitlines()
        assert all(json.loads(l)["event"] == "inventory" for l in inventory_lines)
        state = json.loads((out / "inventory_state.json").read_text())
        by_agent = {s["agent"]: s["on_hand"] for s in state}
        assert by_agent["wholesaler"] == 70.0
        assert by_agent["retailer-1"] == 30.0
        reports = list((out / "reports").glob("*.report"))
        assert len(reports) == 2
        stats = list((out / "reports").glob("*.stats.csv"))
        assert len(stats) == 2

    def test_figures_rendered_when_enabled(self, tmp_path):
        scenario = write_scenario(tmp_path, wholesaler_stock=50, reorder_point=5)
        out = tmp_path / "out"
        result = run_cli("run", "--scenario", "wholesale", "--headless", "--speed", "0",
                         "--config", str(scenario), "--out", str(out))
        assert result.exit_code == 0, result.output
        pngs = list((out / "reports").glob("*.png"))
        assert len(pngs) == 1
        assert pngs[0].stat().st_size > 10_000  # a real rendered figure

    def test_wholesale_on_empty_stock_exits_nonzero(self, tmp_path):
        scenario = write_scenario(tmp_path, wholesaler_stock=0)
        out = tmp_path / "out"
        result = run_cli("run", "--scenario", "wholesale", "--headless", "--speed", "0",
                         "--config", str(scenario), "--out", str(out), "--no-figures")
        assert result.exit_code == 1
        assert "order-rejected" in result.output

    def test_missing_trace_is_config_error_before_boot(self, tmp_path):
        scenario = write_scenario(tmp_path)
        (tmp_path / "traces" / "replenish.csv").unlink()
        out = tmp_path / "out"
        result = run_cli("run", "--headless", "--speed", "0",
                         "--config", str(scenario), "--out", str(out))
        assert result.exit_code == 2
        assert "config-error" in result.output
        assert not (out / "messages.log").exists() or \
            (out / "messages.log").read_bytes() == b""

    def test_unknown_scenario_file(self, tmp_path):
        result = run_cli("run", "--headless", "--config", str(tmp_path / "nope.yaml"))
        assert result.exit_code == 2

    def test_determinism_same_seed_byte_identical_logs(self, tmp_path):
        scenario = write_scenario(tmp_path, wholesaler_stock=0, reorder_point=5)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            result = run_cli("run", "--scenario", "both", "--headless", "--speed", "0",
                             "--seed", "77", "--config", str(scenario),
                             "--out", str(out), "--no-figures")
            assert result.exit_code == 0, result.output
            outs.append((out / "messages.log").read_bytes())
        assert outs[0] == outs[1]
        assert len(outs[0]) > 0

class TestHeadlessDeterminismUnderConcurrency:
    def test_interleaved_deliveries_stay_deterministic(self, tmp_path):
        """Auto-triggered replenishment overlaps the wholesale delivery."""
        scenario = write_scenario(tmp_path, trace_points=10, replenish_trace_points=40,
                                  wholesaler_stock=100, reorder_point=80)
        logs = []
        for name in ("x", "y"):
            out = tmp_path / name
            result = run_cli("run", "--scenario", "wholesale", "--headless",
                             "--speed", "0", "--seed", "5", "--config", str(scenario),
                             "--out", str(out), "--no-figures")
            assert result.exit_code == 0, result.output
            logs.append((out / "messages.log").read_bytes())
        assert logs[0] == logs[1]
        # the run really did interleave two deliveries
        envelopes = [decode(line) for line in logs[0].splitlines()]
        bookings = [e for e in envelopes
                    if (e.content or {}).get("task") == "fulfilment-order"]
        assert len(bookings) >= 2


class TestReportCommand:
    def test_report_writes_stats_and_figure(self, tmp_path):
        trace_out = tmp_path / "trace.csv"
        run_cli("synth-trace", "--points", "24", "--seed", "5",
                "--out", str(trace_out))
        assert trace_out.exists()
        report_dir = tmp_path / "reports"
        result = run_cli("report", "--trace", str(trace_out),
                         "--out", str(report_dir), "--tracking", "Demo1")
        assert result.exit_code == 0
        assert (report_dir / "Demo1.report").exists()
        assert (report_dir / "Demo1.stats.csv").exists()
        assert (report_dir / "Demo1.png").exists()
        report = json.loads((report_dir / "Demo1.report").read_text())
        assert report["channels"]["temperature"]["count"] == 24

    def test_synth_trace_output_parses(self, tmp_path):
        from supplynet.telemetry import load_trace

        out = tmp_path / "t.csv"
        result = run_cli("synth-trace", "--points", "10", "--out", str(out))
        assert result.exit_code == 0
        assert len(load_trace(out)) == 10
