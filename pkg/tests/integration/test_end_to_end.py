"""End-to-end tests for the specsense command-line tool."""

import json

import pytest

from specsense.beta.approx import beta_fit_for, pfa, threshold_for_pfa
from specsense.config import Scenario
from specsense.detectors.statistics import DetectorKind
from specsense.main import EXIT_OK, main
from specsense.simulator.engine import MonteCarloEngine, estimate_pfa_mc, roc
from specsense.wishart.core import RngStream

from tests.conftest import HIGH_SNR_SPECTRUM, LOW_SNR_SPECTRUM


def run_to_file(tmp_path, name, argv):
    output = tmp_path / name
    assert main([*argv, "--output", str(output)]) == EXIT_OK
    return output


@pytest.mark.integration
class TestDeterminism:
    """Outputs depend on seed and chunk size only."""

    def test_pfa_curve_independent_of_threads(self, tmp_path):
        """Test simulated curves are byte-identical for 1 and 3 threads."""
        argv = ["pfa-curve", "--K", "4", "--N", "30", "--points", "12", "--simulate",
                "--trials", "6000", "--seed", "17"]
        single = run_to_file(tmp_path, "one.csv", [*argv, "--threads", "1"])
        multi = run_to_file(tmp_path, "three.csv", [*argv, "--threads", "3"])
        assert single.read_bytes() == multi.read_bytes()

    def test_roc_independent_of_threads(self, tmp_path, roc_file):
        """Test ROC files are byte-identical for 1 and 3 threads."""
        argv = ["roc", str(roc_file), "--trials", "3000"]
        run_to_file(tmp_path, "one", [*argv, "--threads", "1"])
        run_to_file(tmp_path, "three", [*argv, "--threads", "3"])
        for name in ("john", "st", "sle"):
            single = (tmp_path / f"one_{name}.csv").read_bytes()
            multi = (tmp_path / f"three_{name}.csv").read_bytes()
            assert single == multi

    def test_same_seed_same_output(self, tmp_path):
        """Test repeated runs reproduce their output and hashes."""
        argv = ["study", "--K", "4", "--N-list", "20,60", "--zeta-lo", "0.25", "--zeta-hi", "0.6",
                "--points", "8", "--trials", "2000", "--seed", "4"]
        first = run_to_file(tmp_path, "a.csv", argv)
        second = run_to_file(tmp_path, "b.csv", argv)
        assert first.read_text() == second.read_text()
        hashes = [
            list(json.loads((tmp_path / f"{name}.manifest.json").read_text())["outputs"].values())
            for name in ("a.csv", "b.csv")
        ]
        assert hashes[0] == hashes[1]

    def test_different_seed_different_output(self, tmp_path):
        """Test the seed actually reaches the simulation."""
        argv = ["pfa-curve", "--K", "4", "--N", "30", "--points", "6", "--simulate", "--trials", "3000"]
        first = run_to_file(tmp_path, "a.csv", [*argv, "--seed", "1"])
        second = run_to_file(tmp_path, "b.csv", [*argv, "--seed", "2"])
        assert first.read_text() != second.read_text()


@pytest.mark.integration
class TestWorkflow:
    """Test the analytic threshold against simulation through the CLI."""

    def test_threshold_then_simulate(self, capsys):
        """Test a threshold computed by the CLI holds up against simulated H0 data."""
        assert main(["threshold", "--K", "4", "--N", "100", "--target-pfa", "0.1", "--format", "json"]) == EXIT_OK
        zeta = json.loads(capsys.readouterr().out)["summary"]["zeta"]
        with MonteCarloEngine(threads=2, chunk_size=2000) as engine:
            estimate = estimate_pfa_mc(DetectorKind.JOHN, zeta, 4, 100, 40_000, RngStream(31), engine=engine)
        assert abs(estimate.value - 0.1) <= 0.01

    def test_white_noise_roc_is_diagonal(self, tmp_path):
        """Test P_d tracks P_fa when no user is present."""
        path = tmp_path / "white.json"
        path.write_text(json.dumps({
            "scenario": {"K": 4, "N": 50, "seed": 12, "trials": 20000},
            "detectors": ["john", "st"],
            "pfa_grid": [0.1, 0.3, 0.5]
        }))
        prefix = tmp_path / "white"
        assert main(["roc", str(path), "--output", str(prefix)]) == EXIT_OK
        for name in ("john", "st"):
            lines = (tmp_path / f"white_{name}.csv").read_text().strip().split("\n")[1:]
            for line in lines:
                target, _, _, pd_value, _ = (float(cell) for cell in line.split(","))
                assert abs(pd_value - target) <= 0.02


@pytest.mark.integration
@pytest.mark.slow
class TestDetectorOrdering:
    """Relative detector performance in the reference scenarios."""

    def _pd(self, scenario, kinds, grid):
        rng = RngStream(scenario.seed)
        with MonteCarloEngine(threads=4, chunk_size=4096) as engine:
            return {
                kind: [point.pd for point in roc(kind, scenario, grid, rng, engine).points]
                for kind in kinds
            }

    @staticmethod
    def _gap(better, worse):
        return better.value - worse.value - 3.0 * (better.stderr ** 2 + worse.stderr ** 2) ** 0.5

    def test_low_snr_john_leads(self):
        """Test John > ST > SLE at low SNR."""
        scenario = Scenario(K=4, N=400, snrs_db=[-6.0, -5.0, -4.0], sigma_spectrum=LOW_SNR_SPECTRUM,
                            seed=101, trials=100_000)
        kinds = [DetectorKind.JOHN, DetectorKind.SPHERICAL_TEST, DetectorKind.SCALED_LARGEST_EIGENVALUE]
        pd = self._pd(scenario, kinds, [0.05, 0.1, 0.2])
        for john, st, sle in zip(*(pd[kind] for kind in kinds)):
            assert self._gap(john, st) > 0
            assert self._gap(st, sle) > 0

    def test_high_snr_spherical_leads(self):
        """Test ST > John > SLE at high SNR."""
        scenario = Scenario(K=4, N=50, snrs_db=[1.0, 2.0, 3.0], sigma_spectrum=HIGH_SNR_SPECTRUM,
                            seed=202, trials=100_000)
        kinds = [DetectorKind.JOHN, DetectorKind.SPHERICAL_TEST, DetectorKind.SCALED_LARGEST_EIGENVALUE]
        pd = self._pd(scenario, kinds, [0.1])
        john, st, sle = (pd[kind][0] for kind in kinds)
        assert self._gap(st, john) > 0
        assert self._gap(john, sle) > 0

    @pytest.mark.parametrize("target", [0.1, 0.01])
    def test_analytic_threshold_full_scale(self, target):
        """Test the analytic threshold at K=4, N=400 against 10^6 H0 trials."""
        fit = beta_fit_for(4, 400)
        zeta = threshold_for_pfa(target, fit)
        assert abs(pfa(zeta, fit) - target) <= 1e-10
        with MonteCarloEngine(threads=4, chunk_size=8192) as engine:
            estimate = estimate_pfa_mc(DetectorKind.JOHN, zeta, 4, 400, 1_000_000, RngStream(303), engine=engine)
        assert abs(estimate.value - target) <= 3.0 * estimate.stderr
