import math

import numpy as np
import pytest

from gifilter.filters import make_engine, predict, update
from gifilter.problems import (
    DEG3_RAD,
    Problem1,
    Problem1Config,
    Problem2,
    Problem2Config,
    apply_overrides,
    build_models,
    load_config_file,
    simulate_problem1,
    simulate_problem2,
)

ALL_FILTERS = ["gif", "ekf", "ukf", "ckf", "ghf"]


class TestProblem1Sim:
    def test_defaults(self):
        cfg = Problem1Config()
        assert cfg.n_step == 400
        assert cfg.Q == pytest.approx(0.0025)
        assert cfg.R == pytest.approx(1e-4)

    def test_zero_noise_equilibrium(self):
        cfg = Problem1Config(b=0.0, d_meas=0.0, x0_true=1.0)
        traj = simulate_problem1(cfg, 0)
        np.testing.assert_allclose(traj.truth[:, 0], 1.0, atol=1e-12)

    def test_zero_noise_converges_to_stable_point(self):
        cfg = Problem1Config(b=0.0, d_meas=0.0)
        traj = simulate_problem1(cfg, 0)
        assert traj.truth[-1, 0] == pytest.approx(-1.0, abs=1e-6)

    def test_seed_reproducibility(self):
        a = simulate_problem1(Problem1Config(), 123)
        b = simulate_problem1(Problem1Config(), 123)
        np.testing.assert_array_equal(a.truth, b.truth)
        np.testing.assert_array_equal(a.measurements, b.measurements)

    def test_process_polynomial_coefficients(self):
        p1 = Problem1()
        phi = p1.model_for_step(1).process.polys[0]
        assert phi.terms == pytest.approx({(1,): 1.05, (3,): -0.05})
        gamma = p1.model_for_step(1).measurement.polys[0]
        assert gamma.terms == pytest.approx(
            {(2,): 0.01, (1,): -1e-3, (0,): 2.5e-5}
        )


class TestProblem2Sim:
    def test_zero_noise_truth(self):
        cfg = Problem2Config(q=0.0, platform_var=0.0, bearing_std=0.0)
        traj = simulate_problem2(cfg, 0)
        for k in range(cfg.n_step + 1):
            assert traj.truth[k, 0] == pytest.approx(80.0 + 0.2 * k, rel=1e-12)
            assert traj.truth[k, 1] == pytest.approx(1.0)

    def test_noise_free_bearing_value(self):
        cfg = Problem2Config(q=0.0, platform_var=0.0, bearing_std=0.0)
        traj = simulate_problem2(cfg, 0)
        # k=1: target at 80.2, platform at 0.8
        assert traj.measurements[0, 0] == pytest.approx(math.atan(20.0 / 79.4), rel=1e-12)

    def test_composite_noise_value(self):
        p2 = Problem2()
        # platform mean at k=1 is (0.8, 20); target at 80
        r = p2.composite_R(80.0, 1)
        expected = (400.0 + 79.2**2) / (79.2**2 + 400.0) ** 2 + DEG3_RAD**2
        assert r == pytest.approx(expected, rel=1e-12)
        assert r == pytest.approx(1.4987e-4 + 2.742e-3, rel=1e-3)

    def test_composite_noise_floor(self):
        p2 = Problem2()
        for k in range(1, 21):
            for x1 in np.linspace(60.0, 120.0, 13):
                assert p2.composite_R(x1, k) >= DEG3_RAD**2

    def test_process_model_matrices(self):
        p2 = Problem2()
        model = p2.model_for_step(1)
        F = model.process.polys.jacobian([0.0, 0.0])
        np.testing.assert_allclose(F, [[1.0, 0.2], [0.0, 1.0]])
        beta = np.array([0.02, 0.2])
        np.testing.assert_allclose(model.Q, np.outer(beta, beta) * 0.01, atol=1e-15)

    def test_seed_reproducibility(self):
        a = simulate_problem2(Problem2Config(), 7)
        b = simulate_problem2(Problem2Config(), 7)
        np.testing.assert_array_equal(a.truth, b.truth)
        np.testing.assert_array_equal(a.measurements, b.measurements)

    def test_xi_scales_initial_covariance(self):
        p2 = Problem2()
        s1 = p2.init_state(1.0)
        s10 = p2.init_state(10.0)
        np.testing.assert_allclose(s10.cov, 10.0 * s1.cov)
        with pytest.raises(ValueError):
            Problem2Config(xi=0.5)


class TestNoiseFreeConsistency:
    @pytest.mark.parametrize("name", ALL_FILTERS)
    def test_problem1_filters_track_truth(self, name):
        cfg = Problem1Config(b=0.0, d_meas=0.0, x0_true=0.5, x_hat0=0.5)
        p1 = Problem1(cfg)
        traj = p1.simulate(np.random.default_rng(0))
        engine = make_engine(name)
        from gifilter.filters import FilterState

        state = FilterState(np.array([0.5]), np.array([[0.0]]))
        model = p1.model_for_step(1)
        for k in range(1, cfg.n_step + 1):
            state = predict(state, model, engine)
            state = update(state, model, engine, traj.measurements[k - 1])
            assert abs(state.mean[0] - traj.truth[k, 0]) < 1e-6

    @pytest.mark.parametrize("name", ALL_FILTERS)
    def test_problem2_filters_track_truth(self, name):
        cfg = Problem2Config(q=0.0, platform_var=0.0, bearing_std=0.0)
        p2 = Problem2(cfg)
        traj = p2.simulate(np.random.default_rng(0))
        engine = make_engine(name)
        from gifilter.filters import FilterState

        state = FilterState(np.array(cfg.x0_true), np.zeros((2, 2)))
        for k in range(1, cfg.n_step + 1):
            model = p2.model_for_step(k)
            state = predict(state, model, engine)
            state = update(state, model, engine, traj.measurements[k - 1])
            assert np.abs(state.mean - traj.truth[k]).max() < 1e-6


class TestBuildModels:
    def test_dispatch(self):
        assert isinstance(build_models(Problem1Config()), Problem1)
        assert isinstance(build_models(Problem2Config()), Problem2)
        with pytest.raises(TypeError):
            build_models(object())


class TestConfigFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("b = 0.7  # stronger process noise\nx0_true=0.1\n\n")
        overrides = load_config_file(str(path))
        cfg = apply_overrides(Problem1Config(), overrides)
        assert cfg.b == 0.7
        assert cfg.x0_true == 0.1
        assert cfg.d_meas == 0.1  # untouched default

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown config key"):
            apply_overrides(Problem1Config(), {"bogus": "1"})

    def test_bad_line(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("this is not a key value pair\n")
        with pytest.raises(ValueError, match="key=value"):
            load_config_file(str(path))

    def test_tuple_and_int_coercion(self):
        cfg = apply_overrides(
            Problem2Config(), {"x_hat0": "90, 2.0", "n_step": "10", "taylor_order": "2"}
        )
        assert cfg.x_hat0 == (90.0, 2.0)
        assert cfg.n_step == 10
        assert cfg.taylor_order == 2

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            Problem1Config(dt=-1.0)
        with pytest.raises(ValueError):
            Problem2Config(n_step=0)
