import json

import numpy as np
import pytest

from wavebc.experiments import (ExperimentConfig, ExperimentReport, LevelReport,
                                NoiseModel, add_noise, csv_relative_error,
                                emit_report, experiment1_perturbation,
                                experiment2_perturbation, experiment2_projection,
                                experiment3_density, ground_truth, relative_l2,
                                run_experiment)
from wavebc.recon import FourierCoefficients
from wavebc.traces import BoundaryTrace


class TestGroundTruths:
    def test_experiment1_at_origin(self):
        assert experiment1_perturbation(np.array([0.0]))[0] == pytest.approx(-1.0)

    def test_experiment2_signs(self):
        vals = experiment2_perturbation(np.array([-0.5, 0.0, 0.5]))
        assert vals.tolist() == [1.0, -1.0, 0.0]

    def test_experiment2_projection_mean(self):
        x = np.linspace(-1, 1, 20001)
        w = np.full(x.shape, x[1] - x[0]); w[0] = w[-1] = (x[1] - x[0]) / 2
        mean = np.sum(w * experiment2_projection(x)) / 2.0
        assert mean == pytest.approx(5.0 / 24.0, abs=1e-9)

    def test_experiment2_projection_matches_quadrature_oracle(self):
        # independent oracle: project the step profile numerically on a fine
        # grid and compare mode by mode
        x = np.linspace(-1, 1, 200001)
        w = np.full(x.shape, x[1] - x[0]); w[0] = w[-1] = (x[1] - x[0]) / 2
        step = experiment2_perturbation(x)
        proj = np.full(x.shape, np.sum(w * step) / 2.0)
        for n in range(1, 11):
            c = np.cos(n * np.pi * x)
            s = np.sin(n * np.pi * x)
            proj = proj + np.sum(w * step * c) * c + np.sum(w * step * s) * s
        assert np.abs(proj - experiment2_projection(x)).max() < 1e-4

    def test_experiment3_profile(self):
        x = np.array([0.0])
        # at x = 0: rho = 1 + eps * (-1) + 0
        assert experiment3_density(x, eps=0.001)[0] == pytest.approx(0.999)

    def test_dispatcher(self):
        x = np.linspace(-1, 1, 11)
        assert ground_truth(1, x).shape == x.shape
        step, proj = ground_truth(2, x)
        assert step.shape == proj.shape == x.shape
        assert ground_truth(3, x).shape == x.shape
        with pytest.raises(ValueError):
            ground_truth(4, x)


def _trace(seed, n=25001):
    rng = np.random.default_rng(seed)
    return BoundaryTrace((n - 1) * 0.0004, 0.0004,
                         rng.normal(size=n), rng.normal(size=n))


class TestNoise:
    def test_zero_level_identity(self):
        tr = _trace(0)
        assert add_noise(tr, NoiseModel(0.0, seed=3)) is tr

    def test_seeded_determinism(self):
        tr = _trace(1)
        model = NoiseModel(0.01, seed=7, scope="trace-a")
        a = add_noise(tr, model)
        b = add_noise(tr, model)
        assert np.array_equal(a.left, b.left)
        assert np.array_equal(a.right, b.right)

    def test_scopes_decorrelate(self):
        tr = _trace(2)
        a = add_noise(tr, NoiseModel(0.01, seed=7, scope="a"))
        b = add_noise(tr, NoiseModel(0.01, seed=7, scope="b"))
        assert not np.array_equal(a.left, b.left)

    def test_empirical_level(self):
        tr = _trace(3)
        noisy = add_noise(tr, NoiseModel(0.01, seed=11))
        num = np.sqrt(np.mean(np.concatenate([noisy.left - tr.left,
                                              noisy.right - tr.right]) ** 2))
        den = np.sqrt(np.mean(np.concatenate([tr.left, tr.right]) ** 2))
        assert 0.008 <= num / den <= 0.012

    def test_negative_level_rejected(self):
        with pytest.raises(ValueError):
            NoiseModel(-0.1)


def _fake_report():
    x = np.linspace(-1, 1, 21)
    truth = np.sin(np.pi * x)
    levels = []
    for level, wiggle in ((0.0, 0.0), (0.01, 0.03), (0.05, 0.12)):
        recon = truth + wiggle * np.cos(3 * np.pi * x)
        coeffs = FourierCoefficients(1, 0.0, np.zeros(1), np.array([1.0]))
        err = relative_l2(recon, truth, x[1] - x[0])
        levels.append(LevelReport(level, (0,), (err,), err, recon, coeffs))
    return ExperimentReport(1, x, truth, "perturbation", tuple(levels),
                            {"nx": 20})


class TestEmission:
    def test_file_cardinality_and_shapes(self, tmp_path):
        report = _fake_report()
        written = emit_report(report, tmp_path)
        names = sorted(p.name for p in written)
        assert names == ["recon.csv", "recon_noise0.01.svg", "recon_noise0.05.svg",
                         "recon_noise0.svg", "report.json"]
        rows = (tmp_path / "recon.csv").read_text().strip().splitlines()
        assert len(rows) == 1 + 21

    def test_csv_error_recompute_matches_json(self, tmp_path):
        report = _fake_report()
        emit_report(report, tmp_path)
        payload = json.loads((tmp_path / "report.json").read_text())
        for lv in payload["levels"]:
            recomputed = csv_relative_error(tmp_path / "recon.csv", lv["level"])
            assert recomputed == pytest.approx(lv["errors"][0], abs=1e-10)

    def test_empty_report(self, tmp_path):
        report = ExperimentReport(1, np.array([]), np.array([]), "none", (), {})
        written = emit_report(report, tmp_path)
        assert sorted(p.name for p in written) == ["recon.csv", "report.json"]
        assert (tmp_path / "recon.csv").read_text() == "x,truth\n"
        assert json.loads((tmp_path / "report.json").read_text())["levels"] == []

    def test_report_dict_roundtrip(self):
        report = _fake_report()
        back = ExperimentReport.from_dict(report.to_dict())
        assert np.array_equal(back.x, report.x)
        assert np.array_equal(back.levels[1].recon, report.levels[1].recon)
        assert back.levels[1].coefficients.sin_coeffs[0] == 1.0


@pytest.fixture(scope="module")
def coarse_config():
    return ExperimentConfig(experiment_id=1, nx=100, n_modes=2,
                            noise_levels=(0.0, 0.05), seed=3, n_seeds=2)


@pytest.fixture(scope="module")
def coarse_report(coarse_config):
    return run_experiment(coarse_config)


class TestRunExperiment:
    def test_level_structure(self, coarse_report):
        assert [lv.level for lv in coarse_report.levels] == [0.0, 0.05]
        assert len(coarse_report.levels[0].seeds) == 1
        assert len(coarse_report.levels[1].seeds) == 2

    def test_noise_degrades_median(self, coarse_report):
        assert (coarse_report.levels[1].median_error
                >= coarse_report.levels[0].median_error)

    def test_deterministic_rerun(self, coarse_config, coarse_report):
        again = run_experiment(coarse_config)
        assert again.levels[1].errors == coarse_report.levels[1].errors
        assert np.array_equal(again.levels[1].recon, coarse_report.levels[1].recon)

    def test_bad_config_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(experiment_id=5)
        with pytest.raises(ValueError):
            ExperimentConfig(experiment_id=1, n_seeds=0)
