"""Independent ODE oracles for every dynamical system class in the package.

Every pipeline (Hermitian encodings, embeddings, Carleman chains) is verified
against the trajectories produced here.  The default method is fixed-step
classical RK4 with forcing terms evaluated exactly at the substep times; an
adaptive RK45 route (scipy) is available when a step size is awkward to pick.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import Blowup, BoundViolated, NotHermitian, StepLimitExceeded
from .oscillator import ForcingSpec

BLOWUP_FACTOR = 1e6
# Fixed-step accuracy knobs: per-step phase advance h * omega_max and
# h * ||A|| are both capped, keeping the harmonic benchmarks at ~1e-9 global
# error over t = 10.
STEP_PHASE_CAP = 0.005
STEP_NORM_CAP = 0.05


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4-fixed"
    step: float = None          # explicit fixed step; None = pick from spectrum
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 20_000_000

    def __post_init__(self):
        if self.method not in ("rk4-fixed", "rk45-adaptive"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("rtol and atol must be positive")


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class Trajectory:
    """Time grid plus state samples; the exchange object between pipelines."""

    times: np.ndarray
    states: np.ndarray
    kind: str = "position-velocity"   # or "complex-state"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.states)
        if t.ndim != 1 or np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if s.shape[0] != t.size:
            raise ValueError("one state row per time sample required")
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)

    @property
    def dim(self):
        return self.states.shape[1]

    def column_names(self):
        if self.kind == "complex-state":
            names = []
            for i in range(self.dim):
                names += [f"re_{i}", f"im_{i}"]
            return names
        n = self.dim // 2
        return [f"x_{i}" for i in range(n)] + [f"v_{i}" for i in range(n)]

    def to_csv(self, path):
        """Write `t,<name_0>,...` with 17 significant digits; complex entries
        split into re_i,im_i columns."""
        names = self.column_names()
        with open(path, "w") as fh:
            fh.write("t," + ",".join(names) + "\n")
            for t, row in zip(self.times, self.states):
                if self.kind == "complex-state":
                    vals = []
                    for z in row:
                        vals += [z.real, z.imag]
                else:
                    vals = list(row)
                fh.write(",".join(f"{v:.17g}" for v in [t] + vals) + "\n")


def _check_grid(t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or abs(t[0]) > 1e-14 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must increase strictly from 0")
    return t


def _rk4_on_grid(f, y0, t_grid, h_max, max_steps, blow_scale=None):
    """Classical RK4 sampled on t_grid, each interval cut into equal substeps."""
    t_grid = _check_grid(t_grid)
    y = np.array(y0, dtype=complex if np.iscomplexobj(y0) else float)
    out = np.empty((t_grid.size, y.size), dtype=y.dtype)
    out[0] = y
    steps_taken = 0
    for i in range(t_grid.size - 1):
        t0, t1 = t_grid[i], t_grid[i + 1]
        nsub = max(1, int(np.ceil((t1 - t0) / h_max)))
        steps_taken += nsub
        if steps_taken > max_steps:
            raise StepLimitExceeded(
                f"fixed-step integration would need more than {max_steps} steps"
            )
        h = (t1 - t0) / nsub
        t = t0
        for _ in range(nsub):
            k1 = f(t, y)
            k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = f(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
            if blow_scale is not None and np.linalg.norm(y) > blow_scale:
                raise Blowup(f"state norm exceeded blowup threshold at t={t:.6g}")
        out[i + 1] = y
    return t_grid, out


def _rk45_on_grid(f, y0, t_grid, config):
    t_grid = _check_grid(t_grid)
    complex_state = np.iscomplexobj(y0)
    y0 = np.asarray(y0, dtype=complex if complex_state else float)
    sol = solve_ivp(
        f, (t_grid[0], t_grid[-1]), y0, t_eval=t_grid, method="RK45",
        rtol=config.rtol, atol=config.atol, max_step=np.inf,
    )
    if not sol.success:
        raise StepLimitExceeded(f"adaptive integration failed: {sol.message}")
    return t_grid, sol.y.T.copy()


def _default_step(a_norm, config):
    if config.step is not None:
        return config.step
    omega = np.sqrt(max(a_norm, 0.0))
    return min(
        STEP_PHASE_CAP / max(1.0, omega),
        STEP_NORM_CAP / max(1.0, a_norm),
    )


def _second_order_rhs(system, force=None):
    n = system.n
    m = system.masses
    k = system.incidence

    def f(t, y):
        x, v = y[:n], y[n:]
        acc = -(k @ x)
        if force is not None:
            acc = acc + force(t)
        return np.concatenate([v, acc / m])

    return f


def integrate_linear(system, t_grid, config=DEFAULT_CONFIG):
    """Oracle for M x'' = -K x."""
    y0 = np.concatenate([system.x0, system.v0])
    a_norm = np.linalg.norm(system.normal_form(), 2)
    if config.method == "rk45-adaptive":
        t, y = _rk45_on_grid(_second_order_rhs(system), y0, t_grid, config)
    else:
        h = _default_step(a_norm, config)
        t, y = _rk4_on_grid(_second_order_rhs(system), y0, t_grid, h, config.max_steps)
    return Trajectory(t, y)


def integrate_forced(system, forcing, t_grid, config=DEFAULT_CONFIG):
    """Oracle for M x'' = -K x + f(t) with Fourier forcing."""
    y0 = np.concatenate([system.x0, system.v0])
    a_norm = np.linalg.norm(system.normal_form(), 2)
    rhs = _second_order_rhs(system, force=forcing.force_at)
    if config.method == "rk45-adaptive":
        t, y = _rk45_on_grid(rhs, y0, t_grid, config)
    else:
        w_max = forcing.frequencies.max() if forcing.amplitudes.size else 1.0
        h = min(_default_step(a_norm, config), STEP_PHASE_CAP / max(1.0, w_max))
        if config.step is not None:
            h = config.step
        t, y = _rk4_on_grid(rhs, y0, t_grid, h, config.max_steps)
    return Trajectory(t, y)


def integrate_nonlinear(system, t_grid, config=DEFAULT_CONFIG):
    """Oracle for M x'' = -K1 x + K2 (x kron x)."""
    n = system.n
    m = system.masses
    k1, k2 = system.k1, system.k2
    y0 = np.concatenate([system.x0, system.v0])
    blow = BLOWUP_FACTOR * max(np.linalg.norm(y0), 1e-30)

    def f(t, y):
        x, v = y[:n], y[n:]
        acc = -(k1 @ x) + k2 @ np.kron(x, x)
        return np.concatenate([v, acc / m])

    a_norm = np.linalg.norm(system.normal_form(), 2)
    if config.method == "rk45-adaptive":
        t, y = _rk45_on_grid(f, y0, t_grid, config)
        if np.linalg.norm(y[-1]) > blow:
            raise Blowup("state norm exceeded blowup threshold")
    else:
        h = _default_step(a_norm, config)
        t, y = _rk4_on_grid(f, y0, t_grid, h, config.max_steps, blow_scale=blow)
    return Trajectory(t, y)


def integrate_time_dependent(system, td, t_grid, forcing=None, config=DEFAULT_CONFIG):
    """Oracle for M x'' = -K(t) x (+ f(t))."""
    n = system.n
    m = system.masses
    td.check_psd_on_horizon(np.asarray(t_grid)[-1])
    force = forcing.force_at if forcing is not None else None

    def f(t, y):
        x, v = y[:n], y[n:]
        acc = -(td.incidence_at(t) @ x)
        if force is not None:
            acc = acc + force(t)
        return np.concatenate([v, acc / m])

    y0 = np.concatenate([system.x0, system.v0])
    s = 1.0 / np.sqrt(m)
    a_norm = max(
        np.linalg.norm(td.incidence_at(t) * np.outer(s, s), 2)
        for t in np.linspace(0.0, np.asarray(t_grid)[-1], 40)
    )
    w_max = td.frequencies.max()
    if forcing is not None:
        w_max = max(w_max, forcing.frequencies.max())
    if config.method == "rk45-adaptive":
        t, y = _rk45_on_grid(f, y0, t_grid, config)
    else:
        h = min(_default_step(a_norm, config), STEP_PHASE_CAP / max(1.0, w_max))
        if config.step is not None:
            h = config.step
        t, y = _rk4_on_grid(f, y0, t_grid, h, config.max_steps)
    return Trajectory(t, y)


def integrate_nls(h1, h2, psi0, t_grid, config=DEFAULT_CONFIG):
    """Oracle for psi' = -i H1 psi + H2 (psi kron psi)."""
    h1 = np.asarray(h1, dtype=complex)
    scale = max(np.linalg.norm(h1), 1e-300)
    if np.linalg.norm(h1 - h1.conj().T) > 1e-12 * scale:
        raise NotHermitian("H1 must be Hermitian")
    n = h1.shape[0]
    h2 = np.asarray(h2, dtype=complex)
    if h2.shape != (n, n * n):
        raise ValueError(f"H2 must have shape ({n}, {n * n})")
    psi0 = np.asarray(psi0, dtype=complex)
    blow = BLOWUP_FACTOR * max(np.linalg.norm(psi0), 1e-30)

    def f(t, psi):
        return -1j * (h1 @ psi) + h2 @ np.kron(psi, psi)

    h1_norm = np.linalg.norm(h1, 2)
    h2_norm = np.linalg.norm(h2, 2)
    rate = h1_norm + h2_norm * np.linalg.norm(psi0)
    if config.method == "rk45-adaptive":
        t, y = _rk45_on_grid(f, psi0, t_grid, config)
        if np.linalg.norm(y[-1]) > blow:
            raise Blowup("state norm exceeded blowup threshold")
    else:
        h = config.step if config.step is not None else STEP_PHASE_CAP / max(1.0, rate)
        t, y = _rk4_on_grid(f, psi0, t_grid, h, config.max_steps, blow_scale=blow)
    return Trajectory(t, y, kind="complex-state")


# -- norm functionals and bound checks ----------------------------------------

def log_norm_inf(a):
    """Logarithmic infinity-norm: max_i (Re a_ii + sum_{j != i} |a_ij|)."""
    a = np.asarray(a)
    diag = np.real(np.diag(a))
    absrow = np.abs(a).sum(axis=1) - np.abs(np.diag(a))
    return float(np.max(diag + absrow))


def log_norm_2(a):
    """Logarithmic 2-norm: lambda_max((A + A*) / 2)."""
    a = np.asarray(a, dtype=complex)
    return float(np.linalg.eigvalsh(0.5 * (a + a.conj().T))[-1])


@dataclass(frozen=True)
class NormBoundReport:
    bound: float
    worst_norm: float
    min_slack: float
    worst_time: float
    checked: int = 0


def _sqrt_psd(mat, pseudo=False, tol=1e-12):
    w, v = np.linalg.eigh(mat)
    scale = max(abs(w).max(), 1e-300)
    w = np.clip(w, 0.0, None)
    s = np.sqrt(w)
    if pseudo:
        inv = np.where(w > tol * scale, 1.0 / np.maximum(s, 1e-300), 0.0)
        return (v * s) @ v.conj().T, (v * inv) @ v.conj().T
    return (v * s) @ v.conj().T


def displacement_bound_terms(system):
    """Norm factors of the conservative displacement bound.

    Returns (||T||, ||sqrt(M)||, ||sqrt(A)||) with T the block map recovering
    (x, v) from the rotated first-order state.  Requires K positive definite.
    """
    a = system.normal_form()
    w = np.linalg.eigvalsh(a)
    if w[0] <= 1e-12 * max(w[-1], 1e-300):
        raise BoundViolated("displacement bound requires positive definite K")
    sqrt_a, inv_sqrt_a = _sqrt_psd(a, pseudo=True)
    inv_sqrt_m = np.diag(1.0 / np.sqrt(system.masses))
    t_norm = max(
        np.linalg.norm(inv_sqrt_m @ inv_sqrt_a, 2),
        np.linalg.norm(inv_sqrt_m, 2),
    )
    return t_norm, np.sqrt(system.masses.max()), np.linalg.norm(sqrt_a, 2)


def check_norm_bounds(traj, system, forcing=None):
    """Assert the conservative (and forced) displacement-norm bounds on every
    trajectory sample; returns the slack report."""
    n = system.n
    t_norm, sqrt_m_norm, sqrt_a_norm = displacement_bound_terms(system)
    x0n = np.linalg.norm(system.x0)
    v0n = np.linalg.norm(system.v0)
    base = t_norm * sqrt_m_norm * (sqrt_a_norm * x0n + v0n)
    inv_sqrt_m = 1.0 / np.sqrt(system.masses)
    if forcing is not None:
        fhat_max = np.linalg.norm(inv_sqrt_m * forcing.max_force_bound())
        # forced variant keeps the conservative part and adds t * max ||Fhat||
        base_f = t_norm * (
            sqrt_a_norm * sqrt_m_norm * x0n + sqrt_m_norm * v0n
        )
    min_slack = np.inf
    worst_norm = 0.0
    worst_time = 0.0
    for t, row in zip(traj.times, traj.states):
        xn = np.linalg.norm(row[:n])
        bound = base if forcing is None else base_f + t * t_norm * fhat_max
        slack = bound - xn
        if slack < min_slack:
            min_slack, worst_norm, worst_time = slack, xn, t
        if slack < -1e-9 * max(bound, 1.0):
            raise BoundViolated(
                f"displacement norm {xn:.6g} exceeds bound {bound:.6g} at t={t:.6g}"
            )
    final_bound = base if forcing is None else base_f + worst_time * t_norm * fhat_max
    return NormBoundReport(
        bound=float(final_bound),
        worst_norm=float(worst_norm),
        min_slack=float(min_slack),
        worst_time=float(worst_time),
        checked=traj.times.size,
    )
