"""Classical oscillator system definitions and derived matrices.

A system is a set of point masses joined by springs.  The spring constants
live in a symmetric stiffness graph G (diagonal entries are wall springs);
the restoring-force operator K is the incidence matrix of that weighted
graph.  The rectangular factor B satisfies B @ B.T == sqrt(M^-1) K sqrt(M^-1)
exactly, which is the property every Hermitian encoding downstream relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidIncidence,
    NegativeEntry,
    NonSymmetric,
    ZeroFrequency,
)

SYM_RTOL = 1e-12
PSD_RTOL = 1e-10


def _as_readonly(a, dtype=float):
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


def iter_pairs(n):
    """Ordered index pairs (j, k), j <= k, in lexicographic order.

    The order fixes the column layout of the B factor and the auxiliary
    register layout of the time-dependent embeddings.
    """
    for j in range(n):
        for k in range(j, n):
            yield j, k


def pair_count(n):
    return n * (n + 1) // 2


def check_symmetric(g, name="stiffness_graph"):
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise NonSymmetric(f"{name} must be square, got shape {g.shape}")
    scale = max(np.abs(g).max(), 1.0)
    if np.abs(g - g.T).max() > SYM_RTOL * scale:
        raise NonSymmetric(f"{name} is not symmetric within tolerance")
    return 0.5 * (g + g.T)


def build_incidence(g):
    """Incidence matrix K of the weighted stiffness graph G.

    K[j, j] = sum_i G[j, i] (wall spring included), K[j, i] = -G[j, i] for
    i != j.  K is symmetric positive semidefinite.
    """
    g = check_symmetric(g)
    if g.min() < 0:
        raise NegativeEntry("stiffness graph entries must be nonnegative")
    k = -g.copy()
    np.fill_diagonal(k, g.sum(axis=1))
    return k


def graph_from_incidence(k, tol=1e-10):
    """Recover the stiffness graph G from an incidence matrix K.

    Off-diagonal entries of K must be <= 0 and row sums (wall springs)
    nonnegative; otherwise K is not the incidence matrix of any spring graph.
    """
    k = check_symmetric(np.asarray(k, dtype=float), name="incidence")
    scale = max(np.abs(k).max(), 1.0)
    off = k - np.diag(np.diag(k))
    if off.max() > tol * scale:
        raise InvalidIncidence("incidence matrix has positive off-diagonal entries")
    g = -off
    walls = np.diag(k) - g.sum(axis=1)
    if walls.min() < -tol * scale:
        raise InvalidIncidence("incidence matrix implies negative wall springs")
    g = g + np.diag(np.clip(walls, 0.0, None))
    return g


def min_eig_ratio(k):
    """min eigenvalue normalized by the spectral norm; >= -PSD_RTOL means PSD."""
    w = np.linalg.eigvalsh(k)
    scale = max(abs(w[0]), abs(w[-1]), 1e-300)
    return w[0] / scale


@dataclass(frozen=True)
class OscillatorSystem:
    """Masses + stiffness graph + initial conditions."""

    masses: np.ndarray
    stiffness_graph: np.ndarray
    x0: np.ndarray
    v0: np.ndarray
    incidence: np.ndarray = field(init=False)

    def __post_init__(self):
        m = _as_readonly(self.masses)
        if m.ndim != 1 or m.size == 0 or m.min() <= 0:
            raise NegativeEntry("masses must be a nonempty vector of positive reals")
        g = _as_readonly(check_symmetric(self.stiffness_graph))
        if g.shape[0] != m.size:
            raise NonSymmetric("stiffness graph size does not match mass count")
        if g.min() < 0:
            raise NegativeEntry("stiffness graph entries must be nonnegative")
        x0 = _as_readonly(self.x0)
        v0 = _as_readonly(self.v0)
        if x0.shape != (m.size,) or v0.shape != (m.size,):
            raise NonSymmetric("initial conditions must match the mass count")
        k = build_incidence(g)
        if min_eig_ratio(k) < -PSD_RTOL:
            raise NegativeEntry("incidence matrix is not positive semidefinite")
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "stiffness_graph", g)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "v0", v0)
        object.__setattr__(self, "incidence", _as_readonly(k))

    @property
    def n(self):
        return self.masses.size

    def mass_matrix(self):
        return np.diag(self.masses)

    def normal_form(self):
        """A = sqrt(M^-1) K sqrt(M^-1), the mass-normalized stiffness operator."""
        s = 1.0 / np.sqrt(self.masses)
        return self.incidence * np.outer(s, s)

    def energy(self):
        """Total mechanical energy 0.5 (v0' M v0 + x0' K x0)."""
        return 0.5 * (
            self.v0 @ (self.masses * self.v0) + self.x0 @ self.incidence @ self.x0
        )


def build_b_factor(system):
    """Rectangular factor B with B @ B.T == sqrt(M^-1) K sqrt(M^-1) exactly.

    One column per ordered pair (j, k), j <= k:

      column (j, j) = sqrt(G[j, j] / m_j) * e_j
      column (j, k) = sqrt(G[j, k]) * (e_j / sqrt(m_j) - e_k / sqrt(m_k))

    Pair columns carry per-endpoint 1/sqrt(m) so the product reconstructs the
    mass-normalized incidence for arbitrary masses.
    """
    g = system.stiffness_graph
    m = system.masses
    n = system.n
    b = np.zeros((n, pair_count(n)))
    for col, (j, k) in enumerate(iter_pairs(n)):
        if j == k:
            b[j, col] = np.sqrt(g[j, j] / m[j])
        else:
            w = np.sqrt(g[j, k])
            b[j, col] = w / np.sqrt(m[j])
            b[k, col] = -w / np.sqrt(m[k])
    return b


def amplitude_phase_from_ic(x0, v0, omega):
    """(A, phi) with x(t) = A cos(omega t + phi) matching x(0)=x0, x'(0)=v0."""
    if omega <= 0:
        raise ZeroFrequency(f"frequency must be positive, got {omega}")
    a = np.hypot(x0, v0 / omega)
    phi = -np.arctan2(v0 / omega, x0)
    return a, phi


@dataclass(frozen=True)
class ForcingSpec:
    """Per-mass Fourier forcing f_i(t) = sum_j f_ij cos(w_ij t + phi_ij).

    amplitudes, frequencies, phases: arrays of shape (N, l).  Every mass
    carries the same number of terms; use zero amplitude (any positive
    frequency) to pad.
    """

    amplitudes: np.ndarray
    frequencies: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        a = _as_readonly(np.atleast_2d(self.amplitudes))
        w = _as_readonly(np.atleast_2d(self.frequencies))
        p = _as_readonly(np.atleast_2d(self.phases))
        if not (a.shape == w.shape == p.shape):
            raise NonSymmetric("forcing term arrays must share one (N, l) shape")
        if w.min() <= 0:
            raise ZeroFrequency("all forcing frequencies must be strictly positive")
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "phases", p)

    @property
    def n(self):
        return self.amplitudes.shape[0]

    @property
    def terms(self):
        return self.amplitudes.shape[1]

    def force_at(self, t):
        """f(t) as an (N,) vector; t may also be an array -> (N, T)."""
        t = np.asarray(t, dtype=float)
        phase = self.frequencies[..., None] * t + self.phases[..., None]
        f = np.sum(self.amplitudes[..., None] * np.cos(phase), axis=1)
        return f if t.ndim else f[:, 0]

    def max_force_bound(self):
        """Entrywise bound max_t |f_i(t)| <= sum_j |f_ij|."""
        return np.abs(self.amplitudes).sum(axis=1)

    @staticmethod
    def zero(n, terms=1):
        return ForcingSpec(
            np.zeros((n, terms)), np.ones((n, terms)), np.zeros((n, terms))
        )


@dataclass(frozen=True)
class NonlinearOscillatorSystem:
    """Quadratic oscillator M x'' = -K1 x + K2 (x kron x).

    k1 must be a valid PSD incidence matrix (the stiffness graph is recovered
    from it); k2 is the N x N^2 quadratic coupling.  energy is the budget
    E >= 0.5 (v0' M v0 + x0' K1 x0).
    """

    masses: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    x0: np.ndarray
    v0: np.ndarray
    energy: float = None

    def __post_init__(self):
        m = _as_readonly(self.masses)
        if m.min() <= 0:
            raise NegativeEntry("masses must be positive")
        n = m.size
        k1 = _as_readonly(check_symmetric(self.k1, name="k1"))
        if min_eig_ratio(k1) < -PSD_RTOL:
            raise NegativeEntry("k1 is not positive semidefinite")
        graph_from_incidence(k1)  # raises InvalidIncidence if malformed
        k2 = _as_readonly(np.asarray(self.k2, dtype=float))
        if k2.shape != (n, n * n):
            raise NonSymmetric(f"k2 must have shape ({n}, {n * n}), got {k2.shape}")
        x0 = _as_readonly(self.x0)
        v0 = _as_readonly(self.v0)
        e_min = 0.5 * (v0 @ (m * v0) + x0 @ k1 @ x0)
        e = e_min if self.energy is None else float(self.energy)
        if e < e_min * (1 - 1e-12) - 1e-12:
            raise NegativeEntry("energy bound is below the initial mechanical energy")
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "k1", k1)
        object.__setattr__(self, "k2", k2)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "v0", v0)
        object.__setattr__(self, "energy", e)

    @property
    def n(self):
        return self.masses.size

    def stiffness_graph(self):
        return graph_from_incidence(self.k1)

    def normal_form(self):
        s = 1.0 / np.sqrt(self.masses)
        return self.k1 * np.outer(s, s)


@dataclass(frozen=True)
class TimeDependentStiffnessSpec:
    """k_ij(t) = const_ij + sum_l amp_ijl cos(w_ijl t + phi_ijl).

    constants: (N, N) symmetric, zero off the diagonal (only wall springs may
    carry a constant part).  amplitudes/frequencies/phases: (N, N, L) arrays,
    symmetric in the first two axes; the amplitude already includes any
    coupling coefficient.  Pad unused terms with zero amplitude and unit
    frequency so L is uniform.
    """

    constants: np.ndarray
    amplitudes: np.ndarray
    frequencies: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        c = check_symmetric(self.constants, name="td constants")
        n = c.shape[0]
        off = c - np.diag(np.diag(c))
        if np.abs(off).max() > 0:
            raise NonSymmetric("off-diagonal constant stiffness terms must be zero")
        a = np.asarray(self.amplitudes, dtype=float)
        w = np.asarray(self.frequencies, dtype=float)
        p = np.asarray(self.phases, dtype=float)
        if not (a.shape == w.shape == p.shape) or a.shape[:2] != (n, n):
            raise NonSymmetric("td term arrays must share one (N, N, L) shape")
        for arr, name in ((a, "amplitudes"), (w, "frequencies"), (p, "phases")):
            if np.abs(arr - arr.transpose(1, 0, 2)).max() > 0:
                raise NonSymmetric(f"td {name} must be symmetric in (i, j)")
        if w.min() <= 0:
            raise ZeroFrequency("td frequencies must be strictly positive")
        object.__setattr__(self, "constants", _as_readonly(c))
        object.__setattr__(self, "amplitudes", _as_readonly(a))
        object.__setattr__(self, "frequencies", _as_readonly(w))
        object.__setattr__(self, "phases", _as_readonly(p))

    @property
    def n(self):
        return self.constants.shape[0]

    @property
    def terms(self):
        return self.amplitudes.shape[2]

    def stiffness_graph_at(self, t):
        phase = self.frequencies * t + self.phases
        return self.constants + np.sum(self.amplitudes * np.cos(phase), axis=2)

    def incidence_at(self, t):
        g = self.stiffness_graph_at(t)
        k = -g
        np.fill_diagonal(k, g.sum(axis=1))
        return k

    def check_psd_on_horizon(self, t_max, samples=200):
        """Verify K(t) stays PSD on a sampled grid of [0, t_max]."""
        for t in np.linspace(0.0, t_max, max(samples, 200)):
            if min_eig_ratio(self.incidence_at(t)) < -PSD_RTOL:
                raise NegativeEntry(
                    f"time-dependent incidence loses positive semidefiniteness at t={t:.6g}"
                )

    @staticmethod
    def constant(graph):
        g = check_symmetric(graph)
        n = g.shape[0]
        # constant off-diagonal springs are not representable; only walls
        if np.abs(g - np.diag(np.diag(g))).max() > 0:
            raise NonSymmetric("constant spec only supports wall springs")
        return TimeDependentStiffnessSpec(
            g, np.zeros((n, n, 1)), np.ones((n, n, 1)), np.zeros((n, n, 1))
        )
