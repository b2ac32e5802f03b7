"""Quadratic oscillator -> quadratic Schrodinger system.

With u = sqrt(M) x the oscillator M x'' = -K1 x + K2 (x kron x) becomes
u'' = -A1 u + A2 (u kron u).  The state [u'; -i B' u] then obeys a quadratic
Schrodinger equation whose linear part is the block Hamiltonian of the
conservative encoding and whose coupling H2bar routes the (lower kron lower)
sub-block through -A2 D2, where D2 undoes the wall-spring scaling of the
diagonal pair components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .carleman import (
    NLSSystem,
    build_carleman_generator,
    build_symmetrized,
    select_eta,
    select_truncation_order,
    symmetrization_error,
)
from .errors import SingularK1, ZeroWallSpring
from .integrators import DEFAULT_CONFIG, Trajectory, integrate_nonlinear
from .oscillator import OscillatorSystem, build_b_factor, iter_pairs, pair_count


@dataclass(frozen=True)
class NLSReduction:
    nls: NLSSystem
    system: object               # the source NonlinearOscillatorSystem
    n: int
    m_cols: int                  # pair-column count N(N+1)/2
    b: np.ndarray
    d2: np.ndarray               # (N^2, m_cols^2), ||D2|| = 1/kappa_min
    p2: np.ndarray               # index map: (psi kron psi)[p2] groups quadrants
    kappa: np.ndarray            # wall spring / mass ratios G(j,j)/m_j
    certificates: dict
    inv_sqrt_m: np.ndarray
    a1_pinv_b: np.ndarray

    def decode(self, psi_t):
        """(x, v) from the physical Schrodinger state."""
        n = self.n
        v = self.inv_sqrt_m * psi_t[:n].real
        z = (1j * psi_t[n:]).real        # B' u
        x = self.inv_sqrt_m * (self.a1_pinv_b @ z)
        return x, v


def p2_permutation(n, m_cols):
    """Index map grouping (psi kron psi) into the four register quadrants
    [upper x upper, upper x lower, lower x upper, lower x lower]."""
    p = n + m_cols
    perm = np.empty(p * p, dtype=int)
    off_ul = n * n
    off_lu = off_ul + n * m_cols
    off_ll = off_lu + m_cols * n
    for a in range(p):
        for b in range(p):
            src = a * p + b
            if a < n and b < n:
                dst = a * n + b
            elif a < n:
                dst = off_ul + a * m_cols + (b - n)
            elif b < n:
                dst = off_lu + (a - n) * n + b
            else:
                dst = off_ll + (a - n) * m_cols + (b - n)
            perm[dst] = src
    return perm


def reduce_to_nls(system, check_vectors=8, seed=42):
    """Build the Schrodinger form of a quadratic oscillator system.

    Requires strictly positive wall springs (D2 divides by them) and positive
    definite K1 (the decoder inverts the mass-normalized stiffness).
    """
    n = system.n
    m = system.masses
    graph = system.stiffness_graph()
    a1 = system.normal_form()
    w1 = np.linalg.eigvalsh(a1)
    if w1[0] <= 1e-12 * max(w1[-1], 1e-300):
        raise SingularK1("reduction requires positive definite K1")
    kappa = np.diag(graph) / m
    if kappa.min() <= 0:
        raise ZeroWallSpring("reduction requires positive wall springs on K1")

    inv_sqrt_m = 1.0 / np.sqrt(m)
    a2 = (system.k2 * inv_sqrt_m[:, None]) * np.kron(inv_sqrt_m, inv_sqrt_m)[None, :]

    osc_view = OscillatorSystem(m, graph, system.x0, system.v0)
    b = build_b_factor(osc_view)
    m_cols = pair_count(n)
    diag_cols = {j: c for c, (j, k) in enumerate(iter_pairs(n)) if j == k}

    d2 = np.zeros((n * n, m_cols * m_cols))
    for j in range(n):
        for k in range(n):
            col = diag_cols[j] * m_cols + diag_cols[k]
            d2[j * n + k, col] = 1.0 / np.sqrt(kappa[j] * kappa[k])

    a2d2 = a2 @ d2
    p = n + m_cols
    h1 = np.zeros((p, p), dtype=complex)
    h1[:n, n:] = b
    h1[n:, :n] = b.T
    h2 = np.zeros((p, p * p), dtype=complex)
    for pa in range(m_cols):
        for pb in range(m_cols):
            col = (n + pa) * p + (n + pb)
            h2[:n, col] = -a2d2[:, pa * m_cols + pb]

    sqrt_m = np.sqrt(m)
    psi0 = np.concatenate(
        [sqrt_m * system.v0, -1j * (b.T @ (sqrt_m * system.x0))]
    )
    nls = NLSSystem(h1=h1, h2=h2, psi0=psi0)

    wa, va = np.linalg.eigh(a1)
    a1_pinv = (va * (1.0 / wa)) @ va.T

    d = 0
    nz = system.k2 != 0
    if nz.any():
        d = max(int(nz.sum(axis=0).max()), int(nz.sum(axis=1).max()))
    d = max(d, 1)
    k2_max = float(np.abs(system.k2).max())
    certificates = {
        "norm_A2": float(np.linalg.norm(a2, 2)),
        "norm_A2_bound": float(
            np.linalg.norm(system.k2, 2) * np.max(inv_sqrt_m) ** 3
        ),
        "norm_H2": float(np.linalg.norm(h2, 2)),
        "norm_H2_bound": float(
            d * k2_max / (kappa.min() * m.min() ** 1.5)
        ),
        "k2_sparsity": d,
        "k2_max": k2_max,
        "kappa_min": float(kappa.min()),
    }

    red = NLSReduction(
        nls=nls,
        system=system,
        n=n,
        m_cols=m_cols,
        b=b,
        d2=d2,
        p2=p2_permutation(n, m_cols),
        kappa=kappa,
        certificates=certificates,
        inv_sqrt_m=inv_sqrt_m,
        a1_pinv_b=a1_pinv @ b,
    )
    if check_vectors:
        dev = check_d2_identity(red, check_vectors, seed=seed)
        assert dev <= 1e-10, f"D2 identity violated: deviation {dev:.3e}"
    return red


def check_d2_identity(reduction, n_vectors=100, seed=42):
    """Max deviation of D2 ((i B'u) kron (-i B'u)) from u kron u over random u."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_vectors):
        u = rng.standard_normal(reduction.n)
        lower = reduction.b.T @ u
        lhs = reduction.d2 @ np.kron(1j * lower, -1j * lower)
        worst = max(worst, float(np.linalg.norm(lhs - np.kron(u, u))))
    return worst


@dataclass(frozen=True)
class NonlinearRunReport:
    k: int
    eta: float
    max_error: float
    symmetrization_slack: float
    epsilon: float
    diagnostics: dict
    certificates: dict
    ok: bool

    def as_dict(self):
        out = {
            "k": self.k,
            "eta": self.eta,
            "max_error": self.max_error,
            "symmetrization_slack": self.symmetrization_slack,
            "epsilon": self.epsilon,
            "pass": self.ok,
        }
        out.update({k: v for k, v in self.diagnostics.items()})
        out.update(self.certificates)
        return out


def simulate_nonlinear_oscillator(
    system, t_grid, epsilon, regime="small-t", k=None, eta=None,
    config=DEFAULT_CONFIG,
):
    """Full pipeline: reduce, linearize, symmetrize, evolve, decode, compare.

    Returns (decoded trajectory, report).  The decoded trajectory carries
    (x, v) rows; max_error is measured against integrate_nonlinear.
    """
    red = reduce_to_nls(system)
    t_end = float(np.asarray(t_grid)[-1])
    if k is None:
        k, diagnostics = select_truncation_order(red.nls, t_end, epsilon, regime)
    else:
        diagnostics = {"regime": regime, "k_forced": True}
    if eta is None:
        eta = select_eta(red.nls, k, t_end, epsilon)
    gen = build_carleman_generator(red.nls, k)
    sym = build_symmetrized(gen, eta)
    traj_hat = sym.evolve(t_grid)
    first = sym.block_slice(1)
    psi_tilde = traj_hat.states[:, first] * eta ** (k - 1)

    n = system.n
    rows = np.empty((len(psi_tilde), 2 * n))
    for i, psi in enumerate(psi_tilde):
        x, v = red.decode(psi)
        rows[i, :n] = x
        rows[i, n:] = v
    decoded = Trajectory(np.asarray(t_grid, dtype=float), rows)

    oracle = integrate_nonlinear(system, t_grid, config)
    max_error = float(
        np.linalg.norm(decoded.states - oracle.states, axis=1).max()
    )
    slack = symmetrization_error(gen, sym, t_grid)
    report = NonlinearRunReport(
        k=k,
        eta=float(eta),
        max_error=max_error,
        symmetrization_slack=slack,
        epsilon=float(epsilon),
        diagnostics=diagnostics,
        certificates=red.certificates,
        ok=bool(max_error <= epsilon + slack),
    )
    return decoded, report
