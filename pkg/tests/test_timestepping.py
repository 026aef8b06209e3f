import numpy as np
import pytest

from idpfem.timestepping import (TimeControls, TimeSteppingError, compute_dt,
                                 ssp_rk_step)


class TestTimeControls:
    def test_valid(self):
        tc = TimeControls(cfl=0.9, t_end=2.0, scheme="ssp3")
        assert tc.cfl == 0.9

    def test_cfl_out_of_range(self):
        with pytest.raises(TimeSteppingError):
            TimeControls(cfl=1.5, t_end=1.0)
        with pytest.raises(TimeSteppingError):
            TimeControls(cfl=0.0, t_end=1.0)

    def test_unknown_scheme(self):
        with pytest.raises(TimeSteppingError):
            TimeControls(scheme="rk4", t_end=1.0)


class TestComputeDt:
    def test_plain(self):
        assert compute_dt(0.2, 0.5, 0.0, 10.0) == pytest.approx(0.1)

    def test_truncated_to_t_end(self):
        assert compute_dt(1.0, 1.0, 0.95, 1.0) == pytest.approx(0.05)

    def test_dt_max_cap(self):
        assert compute_dt(1.0, 1.0, 0.0, 10.0, dt_max=0.01) == 0.01

    def test_infinite_bound_uses_dt_max(self):
        assert compute_dt(np.inf, 0.5, 0.0, 10.0, dt_max=0.3) == 0.3

    def test_infinite_bound_without_cap_errors(self):
        with pytest.raises(TimeSteppingError):
            compute_dt(np.inf, 0.5, 0.0, 10.0)

    def test_nonpositive_step_errors(self):
        with pytest.raises(TimeSteppingError):
            compute_dt(0.1, 0.5, 1.0, 1.0)


def decay_stage(u, t, dt):
    return u + dt * (-u)


class TestSspRk:
    def test_ssp2_hand_example(self):
        u = np.array([1.0])
        out = ssp_rk_step("ssp2", decay_stage, u, 0.0, 1.0)
        # u1 = 0, u2 = 0, result = (1 + 0) / 2
        assert out[0] == pytest.approx(0.5)

    def test_identity_operator(self):
        u = np.array([2.0, -1.0])
        for scheme in ("euler", "ssp2", "ssp3"):
            out = ssp_rk_step(scheme, lambda u, t, dt: u, u, 0.0, 0.3)
            assert np.array_equal(out, u)

    def test_ssp3_matches_convex_combination_formula(self):
        u, dt = 1.0, 0.1
        u1 = u + dt * (-u)
        u2 = 0.75 * u + 0.25 * (u1 + dt * (-u1))
        u3 = u / 3.0 + (2.0 / 3.0) * (u2 + dt * (-u2))
        out = ssp_rk_step("ssp3", decay_stage, np.array([u]), 0.0, dt)
        assert out[0] == pytest.approx(u3, abs=1e-15)

    @pytest.mark.parametrize("scheme,min_rate", [("euler", 0.9),
                                                 ("ssp2", 1.95),
                                                 ("ssp3", 2.90)])
    def test_order_of_accuracy_on_decay_ode(self, scheme, min_rate):
        def solve(dt):
            u = np.array([1.0])
            t = 0.0
            while t < 1.0 - 1e-12:
                step = min(dt, 1.0 - t)
                u = ssp_rk_step(scheme, decay_stage, u, t, step)
                t += step
            return abs(u[0] - np.exp(-1.0))

        errors = [solve(dt) for dt in (0.1, 0.05, 0.025)]
        rates = [np.log2(errors[i] / errors[i + 1]) for i in range(2)]
        assert min(rates) >= min_rate

    def test_nonfinite_stage_aborts(self):
        def bad(u, t, dt):
            return u * np.nan

        with pytest.raises(TimeSteppingError, match="non-finite"):
            ssp_rk_step("ssp2", bad, np.array([1.0]), 0.0, 0.1)

    def test_on_stage_hook_called_per_stage(self):
        calls = []
        ssp_rk_step("ssp3", decay_stage, np.array([1.0]), 0.0, 0.1,
                    on_stage=lambda u: calls.append(u.copy()))
        assert len(calls) == 3

    def test_unknown_scheme(self):
        with pytest.raises(TimeSteppingError):
            ssp_rk_step("rk4", decay_stage, np.array([1.0]), 0.0, 0.1)
