"""ODE oracle accuracy, convergence order, and the displacement-norm bounds."""

import numpy as np
import pytest
from scipy.linalg import expm

from oscsim import (
    ForcingSpec,
    IntegratorConfig,
    NonlinearOscillatorSystem,
    OscillatorSystem,
    TimeDependentStiffnessSpec,
    check_norm_bounds,
    integrate_forced,
    integrate_linear,
    integrate_nls,
    integrate_nonlinear,
    integrate_time_dependent,
    log_norm_2,
    log_norm_inf,
)
from oscsim.carleman import NLSSystem
from oscsim.errors import Blowup

from conftest import random_pd_system


def harmonic_1d(x0=1.0, v0=0.0):
    return OscillatorSystem([1.0], [[1.0]], [x0], [v0])


class TestLinear:
    def test_harmonic_cosine(self):
        ts = np.array([0.0, 1.0, np.pi, 10.0])
        traj = integrate_linear(harmonic_1d(), ts)
        np.testing.assert_allclose(traj.states[:, 0], np.cos(ts), atol=1e-8)
        np.testing.assert_allclose(traj.states[:, 1], -np.sin(ts), atol=1e-8)

    def test_free_motion(self):
        syst = OscillatorSystem([1.0, 2.0], np.zeros((2, 2)), [1.0, -1.0], [0.5, 0.25])
        ts = np.linspace(0, 4, 9)
        traj = integrate_linear(syst, ts)
        for i, t in enumerate(ts):
            np.testing.assert_allclose(
                traj.states[i, :2], syst.x0 + syst.v0 * t, atol=1e-12
            )

    def test_matches_spectral_solution(self, rng):
        syst = random_pd_system(4, rng)
        a = syst.normal_form()
        w, v = np.linalg.eigh(a)
        sm = np.sqrt(syst.masses)
        y0, dy0 = sm * syst.x0, sm * syst.v0
        ts = np.linspace(0, 10, 11)
        traj = integrate_linear(syst, ts)
        for i, t in enumerate(ts):
            cos = (v * np.cos(np.sqrt(w) * t)) @ v.T
            sinc = (v * (np.sin(np.sqrt(w) * t) / np.sqrt(w))) @ v.T
            x_true = (cos @ y0 + sinc @ dy0) / sm
            np.testing.assert_allclose(traj.states[i, :4], x_true, atol=1e-7)

    def test_energy_conservation(self, rng):
        syst = random_pd_system(3, rng)
        ts = np.linspace(0, 20, 41)
        traj = integrate_linear(syst, ts)
        e0 = syst.energy()
        for row in traj.states:
            x, v = row[:3], row[3:]
            e = 0.5 * (v @ (syst.masses * v) + x @ syst.incidence @ x)
            assert abs(e - e0) <= 1e-8 * e0

    def test_fourth_order_convergence(self):
        ts = np.array([0.0, 1.0])
        ref = np.array([np.cos(1.0), -np.sin(1.0)])
        e1 = np.linalg.norm(
            integrate_linear(harmonic_1d(), ts, IntegratorConfig(step=1 / 32)).states[-1] - ref
        )
        e2 = np.linalg.norm(
            integrate_linear(harmonic_1d(), ts, IntegratorConfig(step=1 / 64)).states[-1] - ref
        )
        assert e1 / e2 == pytest.approx(16.0, rel=0.2)

    def test_adaptive_route(self):
        ts = np.linspace(0, 5, 11)
        traj = integrate_linear(
            harmonic_1d(), ts, IntegratorConfig(method="rk45-adaptive", rtol=1e-11, atol=1e-12)
        )
        np.testing.assert_allclose(traj.states[:, 0], np.cos(ts), atol=1e-7)


class TestForced:
    def test_zero_forcing_matches_linear(self, rng):
        syst = random_pd_system(3, rng)
        ts = np.linspace(0, 5, 21)
        a = integrate_linear(syst, ts)
        b = integrate_forced(syst, ForcingSpec.zero(3), ts)
        np.testing.assert_allclose(a.states, b.states, atol=1e-12)

    def test_steady_state(self):
        # x'' = -x + 0.1 cos 2t with the particular-solution IC
        syst = OscillatorSystem([1.0], [[1.0]], [-0.1 / 3.0], [0.0])
        forcing = ForcingSpec([[0.1]], [[2.0]], [[0.0]])
        ts = np.linspace(0, 5, 26)
        traj = integrate_forced(syst, forcing, ts)
        np.testing.assert_allclose(
            traj.states[:, 0], -(0.1 / 3.0) * np.cos(2 * ts), atol=1e-7
        )

    def test_resonance(self):
        syst = harmonic_1d(x0=0.0, v0=0.0)
        forcing = ForcingSpec([[1.0]], [[1.0]], [[0.0]])
        ts = np.linspace(0, 5, 26)
        traj = integrate_forced(syst, forcing, ts)
        np.testing.assert_allclose(traj.states[:, 0], ts * np.sin(ts) / 2, atol=1e-6)


class TestNonlinear:
    def test_zero_coupling_matches_linear(self, rng):
        syst = random_pd_system(2, rng)
        nl = NonlinearOscillatorSystem(
            syst.masses, syst.incidence, np.zeros((2, 4)), syst.x0, syst.v0
        )
        ts = np.linspace(0, 5, 21)
        a = integrate_linear(syst, ts)
        b = integrate_nonlinear(nl, ts)
        np.testing.assert_allclose(a.states, b.states, atol=1e-10)

    def test_step_halving_consistency(self):
        nl = NonlinearOscillatorSystem([1.0], [[1.0]], [[0.01]], [1.0], [0.0])
        ts = np.array([0.0, 1.0])
        ref = integrate_nonlinear(nl, ts, IntegratorConfig(step=1 / 4096)).states[-1]
        e1 = np.linalg.norm(
            integrate_nonlinear(nl, ts, IntegratorConfig(step=1 / 64)).states[-1] - ref
        )
        e2 = np.linalg.norm(
            integrate_nonlinear(nl, ts, IntegratorConfig(step=1 / 128)).states[-1] - ref
        )
        assert e1 / e2 == pytest.approx(16.0, rel=0.2)

    def test_energy_drift_converges_under_refinement(self, rng):
        k2 = 0.01 * rng.standard_normal((2, 4))
        nl = NonlinearOscillatorSystem(
            [1.0, 1.0], [[2.0, -1.0], [-1.0, 2.0]], k2, [0.5, -0.2], [0.0, 0.1]
        )
        ts = np.linspace(0, 2, 5)
        drifts = []
        for step in (1 / 32, 1 / 64):
            tr = integrate_nonlinear(nl, ts, IntegratorConfig(step=step))
            ref = integrate_nonlinear(nl, ts, IntegratorConfig(step=step / 8))
            drifts.append(np.abs(tr.states[-1] - ref.states[-1]).max())
        assert drifts[1] < drifts[0]

    def test_blowup_detected(self):
        # strong positive feedback escapes quickly
        nl = NonlinearOscillatorSystem([1.0], [[0.01]], [[50.0]], [1.0], [0.0])
        with pytest.raises(Blowup):
            integrate_nonlinear(nl, np.linspace(0, 50, 11))


class TestTimeDependent:
    def test_constant_spec_matches_linear(self):
        syst = OscillatorSystem([1.0], [[1.5]], [1.0], [0.0])
        td = TimeDependentStiffnessSpec.constant([[1.5]])
        ts = np.linspace(0, 5, 21)
        a = integrate_linear(syst, ts)
        b = integrate_time_dependent(syst, td, ts)
        np.testing.assert_allclose(a.states, b.states, atol=1e-10)

    def test_mathieu_step_halving(self):
        syst = OscillatorSystem([1.0], [[2.0]], [1.0], [0.0])
        td = TimeDependentStiffnessSpec(
            [[2.0]], np.full((1, 1, 1), 1.0), np.full((1, 1, 1), 1.0), np.zeros((1, 1, 1))
        )
        ts = np.array([0.0, 1.0])
        ref = integrate_time_dependent(syst, td, ts, config=IntegratorConfig(step=1 / 4096))
        e1 = np.linalg.norm(
            integrate_time_dependent(syst, td, ts, config=IntegratorConfig(step=1 / 64)).states[-1]
            - ref.states[-1]
        )
        e2 = np.linalg.norm(
            integrate_time_dependent(syst, td, ts, config=IntegratorConfig(step=1 / 128)).states[-1]
            - ref.states[-1]
        )
        assert e1 / e2 == pytest.approx(16.0, rel=0.2)

    def test_zero_forcing_limit(self):
        syst = OscillatorSystem([1.0], [[2.0]], [1.0], [0.0])
        td = TimeDependentStiffnessSpec(
            [[2.0]], np.full((1, 1, 1), 0.5), np.full((1, 1, 1), 1.0), np.zeros((1, 1, 1))
        )
        ts = np.linspace(0, 5, 21)
        a = integrate_time_dependent(syst, td, ts)
        b = integrate_time_dependent(syst, td, ts, forcing=ForcingSpec.zero(1))
        np.testing.assert_allclose(a.states, b.states, atol=1e-10)


class TestNLS:
    def test_diagonal_unitary(self):
        ts = np.linspace(0, 3, 13)
        traj = integrate_nls(np.diag([1.0, 2.0]), np.zeros((2, 4)), [1.0, 0.0], ts)
        np.testing.assert_allclose(traj.states[:, 0], np.exp(-1j * ts), atol=1e-9)
        np.testing.assert_allclose(traj.states[:, 1], 0.0, atol=1e-12)

    def test_zero_coupling_matches_expm(self, rng):
        h1 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        h1 = 0.5 * (h1 + h1.conj().T)
        psi0 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        ts = np.linspace(0, 2, 9)
        traj = integrate_nls(h1, np.zeros((3, 9)), psi0, ts)
        for i, t in enumerate(ts):
            np.testing.assert_allclose(
                traj.states[i], expm(-1j * h1 * t) @ psi0, atol=1e-9
            )

    def test_norm_derivative_identity(self):
        # decaying scalar instance: d|psi|^2/dt = 2 Re <psi|H2 psi kron psi>
        nls = NLSSystem(h1=[[0.0]], h2=[[-0.1]], psi0=[0.5])
        ts = np.linspace(0, 2, 401)
        traj = nls.oracle(ts)
        norms = np.abs(traj.states[:, 0]) ** 2
        assert np.all(np.diff(norms) <= 1e-12)           # norm non-increasing
        assert norms.max() <= nls.beta + 1e-12
        ups = np.array(
            [np.real(np.conj(p[0]) * (nls.h2 @ np.kron(p, p))[0]) for p in traj.states]
        )
        dndt = np.gradient(norms, ts)
        assert np.abs(dndt - 2 * ups).max() <= 1e-4

    def test_short_time_taylor(self, rng):
        h1 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        h1 = 0.5 * (h1 + h1.conj().T)
        h2 = 0.05 * (rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4)))
        psi0 = np.array([0.6, 0.3j])
        h = 1e-3
        traj = integrate_nls(h1, h2, psi0, [0.0, h])

        def f(p):
            return -1j * (h1 @ p) + h2 @ np.kron(p, p)

        def df(p, v):
            return -1j * (h1 @ v) + h2 @ (np.kron(v, p) + np.kron(p, v))

        taylor = psi0 + h * f(psi0) + 0.5 * h * h * df(psi0, f(psi0))
        assert np.linalg.norm(traj.states[-1] - taylor) <= 10 * h**3


class TestLogNorm:
    def test_negative_identity(self):
        assert log_norm_inf(-np.eye(3)) == pytest.approx(-1.0)

    def test_rotation_block(self):
        assert log_norm_inf([[0.0, 1.0], [-1.0, 0.0]]) == pytest.approx(1.0)

    @pytest.mark.parametrize("t", [0.1, 1.0])
    def test_exponential_bound(self, t, rng):
        for _ in range(20):
            a = rng.standard_normal((5, 5))
            assert np.linalg.norm(expm(a * t), np.inf) <= np.exp(
                log_norm_inf(a) * t
            ) * (1 + 1e-10)
            assert np.linalg.norm(expm(a * t), 2) <= np.exp(log_norm_2(a) * t) * (
                1 + 1e-10
            )


class TestNormBounds:
    def test_harmonic_bound_holds(self):
        syst = harmonic_1d()
        traj = integrate_linear(syst, np.linspace(0, 10, 51))
        rep = check_norm_bounds(traj, syst)
        assert rep.min_slack >= 0
        # bound = ||T|| ||sqrt(M)|| (||sqrt(A)|| |x0| + |v0|) = 1 for m = k = 1
        assert rep.bound == pytest.approx(1.0)

    def test_zero_state(self):
        syst = harmonic_1d(x0=0.0, v0=0.0)
        traj = integrate_linear(syst, np.linspace(0, 2, 5))
        rep = check_norm_bounds(traj, syst)
        assert rep.bound == pytest.approx(0.0, abs=1e-14)
        assert rep.worst_norm == pytest.approx(0.0, abs=1e-12)

    def test_forced_monte_carlo(self, rng):
        ts = np.linspace(0, 5, 26)
        for _ in range(30):
            syst = random_pd_system(4, rng)
            forcing = ForcingSpec(
                rng.uniform(-1, 1, (4, 2)),
                rng.uniform(0.5, 3.0, (4, 2)),
                rng.uniform(-np.pi, np.pi, (4, 2)),
            )
            traj = integrate_forced(syst, forcing, ts)
            rep = check_norm_bounds(traj, syst, forcing=forcing)
            assert rep.min_slack >= 0


class TestTrajectoryInvariants:
    def test_first_row_is_initial_condition(self, rng):
        syst = random_pd_system(3, rng)
        traj = integrate_linear(syst, np.linspace(0, 1, 5))
        np.testing.assert_allclose(
            traj.states[0], np.concatenate([syst.x0, syst.v0]), atol=1e-14
        )

    def test_rejects_non_increasing_times(self):
        from oscsim.integrators import Trajectory

        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 1.0, 1.0]), np.zeros((3, 2)))


class TestTrajectoryCSV:
    def test_real_round_trip(self, tmp_path):
        syst = harmonic_1d()
        traj = integrate_linear(syst, np.linspace(0, 1, 5))
        path = tmp_path / "traj.csv"
        traj.to_csv(path)
        data = np.genfromtxt(path, delimiter=",", names=True)
        assert set(data.dtype.names) == {"t", "x_0", "v_0"}
        np.testing.assert_allclose(data["x_0"], traj.states[:, 0], rtol=1e-15)

    def test_complex_split_columns(self, tmp_path):
        ts = np.linspace(0, 1, 3)
        traj = integrate_nls([[1.0]], np.zeros((1, 1)), [0.5j], ts)
        path = tmp_path / "traj.csv"
        traj.to_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == "t,re_0,im_0"
