"""Forced oscillator -> larger conservative oscillator embedding.

Each Fourier term of the force becomes an auxiliary oscillator of mass m_f
whose free motion injects the desired cosine through a weak spring.  The
back-action on the auxiliaries scales as gamma = 1/m_f; the perturbation
bound picks the smallest m_f that certifies a target projection error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundViolated, EmptySubset, ZeroWallSpring
from .integrators import (
    DEFAULT_CONFIG,
    Trajectory,
    integrate_forced,
    integrate_linear,
)
from .oscillator import OscillatorSystem


@dataclass(frozen=True)
class ForcedEmbedding:
    enlarged: OscillatorSystem
    original: OscillatorSystem
    forcing: object             # ForcingSpec
    n: int                      # size of the physical block (first coordinates)
    terms: int                  # Fourier terms per mass
    m_f: float
    gamma: float
    epsilon_target: float
    t_horizon: float
    xi0: float
    bound_terms: dict
    k0_prime: np.ndarray        # upper-triangular gamma=0 generator
    k_hat: np.ndarray           # perturbation block, K' = K0' + gamma * K_hat scaled


def _require_wall_springs(system, forcing):
    forced = np.abs(forcing.amplitudes).sum(axis=1) > 0
    bad = [j for j in range(system.n) if forced[j] and system.stiffness_graph[j, j] <= 0]
    if bad:
        raise ZeroWallSpring(
            f"forced masses {bad} need a positive wall spring (auxiliary "
            "initial positions divide by it)"
        )


def _forced_mask(forcing):
    return np.abs(forcing.amplitudes).sum(axis=1) > 0


def _enlarged_graph(system, forcing, m_f):
    """Forced masses get their wall spring halved and the other half spread
    over their l auxiliaries; unforced masses stay untouched (their
    auxiliaries are free oscillators at rest, so the zero-forcing limit is
    exact at any m_f)."""
    n, l = system.n, forcing.terms
    dim = n * (l + 1)
    g = np.zeros((dim, dim))
    g0 = system.stiffness_graph
    forced = _forced_mask(forcing)
    g[:n, :n] = g0.copy()
    for j in range(n):
        if not forced[j]:
            continue
        g[j, j] = 0.5 * g0[j, j]
        cpl = g0[j, j] / (2.0 * l)
        for a in range(l):
            q = n + j * l + a
            g[j, q] = g[q, j] = cpl
    for j in range(n):
        for a in range(l):
            q = n + j * l + a
            g[q, q] = m_f * forcing.frequencies[j, a] ** 2
    return g


def _aux_initial_conditions(system, forcing):
    n, l = system.n, forcing.terms
    y0 = np.zeros(n * l)
    dy0 = np.zeros(n * l)
    g0 = system.stiffness_graph
    for j in range(n):
        for a in range(l):
            f = forcing.amplitudes[j, a]
            if f == 0.0:
                continue
            w = forcing.frequencies[j, a]
            phi = forcing.phases[j, a]
            amp = 2.0 * l * f / g0[j, j]
            y0[j * l + a] = amp * np.cos(phi)
            dy0[j * l + a] = -amp * w * np.sin(phi)
    return y0, dy0


def _decomposition(system, forcing):
    """K0' (upper triangular, gamma = 0) and K_hat with
    Mhat z'' = -(K0' + gamma K_hat) z equivalent to M' z'' = -K' z."""
    n, l = system.n, forcing.terms
    dim = n * (l + 1)
    g_unit = _enlarged_graph(system, forcing, 1.0)   # couplings only; walls fixed below
    k0 = np.zeros((dim, dim))
    k_hat = np.zeros((dim, dim))
    # physical rows of the incidence do not involve m_f
    kp_rows = -g_unit
    np.fill_diagonal(kp_rows, g_unit.sum(axis=1))
    k0[:n] = kp_rows[:n]
    g0 = system.stiffness_graph
    forced = _forced_mask(forcing)
    for j in range(n):
        for a in range(l):
            q = n + j * l + a
            k0[q, q] = forcing.frequencies[j, a] ** 2
            if forced[j] and g0[j, j] > 0:
                cpl = g0[j, j] / (2.0 * l)
                k_hat[q, j] = -cpl
                k_hat[q, q] = cpl
    return k0, k_hat


def build_embedding(system, forcing, m_f, epsilon_target=np.nan, t_horizon=np.nan):
    """Assemble the enlarged conservative system for a given auxiliary mass."""
    if m_f <= 0:
        raise ZeroWallSpring("auxiliary mass must be positive")
    if forcing.n != system.n:
        raise ValueError("forcing size does not match the system")
    _require_wall_springs(system, forcing)
    n, l = system.n, forcing.terms
    g = _enlarged_graph(system, forcing, m_f)
    masses = np.concatenate([system.masses, np.full(n * l, m_f)])
    y0, dy0 = _aux_initial_conditions(system, forcing)
    enlarged = OscillatorSystem(
        masses=masses,
        stiffness_graph=g,
        x0=np.concatenate([system.x0, y0]),
        v0=np.concatenate([system.v0, dy0]),
    )
    k0, k_hat = _decomposition(system, forcing)
    # consistency: Mhat^-1 (K0' + gamma K_hat) must equal M'^-1 K' exactly
    gamma = 1.0 / m_f
    mhat_inv = np.ones(n * (l + 1))
    mhat_inv[:n] = 1.0 / system.masses
    lhs = (k0 + gamma * k_hat) * mhat_inv[:, None]
    rhs = enlarged.incidence / masses[:, None]
    scale = max(np.abs(rhs).max(), 1.0)
    assert np.abs(lhs - rhs).max() <= 1e-12 * scale, "K' decomposition mismatch"
    terms = _bound_terms(system, forcing, k_hat)
    return ForcedEmbedding(
        enlarged=enlarged,
        original=system,
        forcing=forcing,
        n=n,
        terms=l,
        m_f=float(m_f),
        gamma=gamma,
        epsilon_target=float(epsilon_target),
        t_horizon=float(t_horizon),
        xi0=_xi0(system, forcing, terms),
        bound_terms=terms,
        k0_prime=k0,
        k_hat=k_hat,
    )


def _bound_terms(system, forcing, k_hat):
    a_x = system.normal_form()
    wa = np.linalg.eigvalsh(a_x)
    if wa[0] <= 1e-12 * max(wa[-1], 1e-300):
        raise ZeroWallSpring("perturbation bound requires positive definite K")
    omegas = forcing.frequencies.ravel()
    # block-diagonal PD part of the gamma=0 generator
    sqrt_a_norm = max(np.sqrt(wa[-1]), omegas.max())
    w_vec, v = np.linalg.eigh(a_x)
    inv_sqrt_ax = (v * (1.0 / np.sqrt(w_vec))) @ v.T
    inv_sqrt_m_x = np.diag(1.0 / np.sqrt(system.masses))
    t_norm = max(
        np.linalg.norm(inv_sqrt_m_x @ inv_sqrt_ax, 2),
        1.0 / omegas.min(),
        np.linalg.norm(inv_sqrt_m_x, 2),
        1.0,
    )
    inv_sqrt_m_norm = max(np.max(1.0 / np.sqrt(system.masses)), 1.0)
    sqrt_m_norm = max(np.sqrt(system.masses.max()), 1.0)
    return {
        "norm_Kp": float(np.linalg.norm(k_hat, 2)),
        "norm_T": float(t_norm),
        "norm_inv_sqrt_M": float(inv_sqrt_m_norm),
        "norm_sqrt_M": float(sqrt_m_norm),
        "norm_sqrt_A": float(sqrt_a_norm),
    }


def _xi0(system, forcing, terms):
    y0, dy0 = _aux_initial_conditions(system, forcing)
    z0 = np.concatenate([system.x0, y0])
    dz0 = np.concatenate([system.v0, dy0])
    return float(
        terms["norm_sqrt_A"] * terms["norm_sqrt_M"] * np.linalg.norm(z0)
        + terms["norm_sqrt_M"] * np.linalg.norm(dz0)
    )


def select_m_f(system, forcing, t_horizon, epsilon):
    """Smallest auxiliary mass certified by the perturbation inequality.

    m_f = t ||K_hat|| ||T|| ||sqrt(M)^-1|| (1 + Xi(0) / eps), all norms taken
    on the enlarged gamma = 0 block structure.
    """
    if epsilon <= 0 or t_horizon <= 0:
        raise ValueError("epsilon and t_horizon must be positive")
    _require_wall_springs(system, forcing)
    _, k_hat = _decomposition(system, forcing)
    terms = _bound_terms(system, forcing, k_hat)
    xi0 = _xi0(system, forcing, terms)
    m_f = (
        t_horizon
        * terms["norm_Kp"]
        * terms["norm_T"]
        * terms["norm_inv_sqrt_M"]
        * (1.0 + xi0 / epsilon)
    )
    terms = dict(terms, xi0=xi0)
    return m_f, terms


@dataclass(frozen=True)
class EmbeddingReport:
    m_f: float
    xi0: float
    norm_Kp: float
    max_error: float
    epsilon_target: float
    ok: bool

    def as_dict(self):
        return {
            "m_f": self.m_f,
            "xi0": self.xi0,
            "norm_Kp": self.norm_Kp,
            "max_error": self.max_error,
            "epsilon_target": self.epsilon_target,
            "pass": self.ok,
        }


def verify_embedding(embedding, t_grid, config=DEFAULT_CONFIG):
    """Integrate the enlarged conservative system against the forced reference
    and report max_t ||P z(t) - x(t)||."""
    t_end = float(np.asarray(t_grid)[-1])
    if np.isfinite(embedding.t_horizon) and t_end > embedding.t_horizon * (1 + 1e-12):
        raise ValueError(
            f"t_grid reaches {t_end:.6g}, beyond the certified horizon "
            f"{embedding.t_horizon:.6g}"
        )
    n = embedding.n
    traj_big = integrate_linear(embedding.enlarged, t_grid, config)
    traj_ref = integrate_forced(embedding.original, embedding.forcing, t_grid, config)
    err = np.linalg.norm(
        traj_big.states[:, :n] - traj_ref.states[:, :n], axis=1
    )
    max_err = float(err.max())
    eps = embedding.epsilon_target
    ok = bool(max_err <= eps) if np.isfinite(eps) else True
    return EmbeddingReport(
        m_f=embedding.m_f,
        xi0=embedding.xi0,
        norm_Kp=embedding.bound_terms["norm_Kp"],
        max_error=max_err,
        epsilon_target=eps,
        ok=ok,
    )


def embedding_error_sweep(system, forcing, m_f_values, t_grid, config=DEFAULT_CONFIG):
    """Measured projection error and Thm-style bound for each auxiliary mass.

    Returns rows (m_f, gamma, max_error, bound); the bound is the summed
    perturbation series Xi(0) * q / (1 - q), q = gamma t ||K_hat|| ||T||
    ||sqrt(M)^-1|| (infinite when q >= 1).
    """
    t_end = float(np.asarray(t_grid)[-1])
    rows = []
    for m_f in m_f_values:
        emb = build_embedding(system, forcing, m_f, t_horizon=t_end)
        rep = verify_embedding(emb, t_grid, config)
        q = (
            emb.gamma
            * t_end
            * emb.bound_terms["norm_Kp"]
            * emb.bound_terms["norm_T"]
            * emb.bound_terms["norm_inv_sqrt_M"]
        )
        bound = emb.xi0 * q / (1.0 - q) if q < 1 else np.inf
        rows.append((float(m_f), emb.gamma, rep.max_error, float(bound)))
    return rows


def kinetic_energy_fraction(traj, subset, system, e_sys=None):
    """Time series of the kinetic energy in a mass subset over E_sys."""
    subset = list(subset)
    if not subset:
        raise EmptySubset("kinetic energy subset must be nonempty")
    if min(subset) < 0 or max(subset) >= system.n:
        raise EmptySubset("subset indices out of range")
    nv = traj.dim // 2
    if max(subset) >= nv:
        raise BoundViolated("trajectory does not carry the requested velocities")
    e_sys = system.energy() if e_sys is None else float(e_sys)
    if e_sys <= 0:
        raise ZeroWallSpring("reference energy must be positive")
    v = traj.states[:, [nv + i for i in subset]].real
    m = system.masses[subset]
    return 0.5 * np.sum(m * v**2, axis=1) / e_sys
