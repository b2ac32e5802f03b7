"""Carleman linearization of the quadratic Schrodinger flow and its
Hermitian symmetrization.

The nonlinear equation psi' = -i H1 psi + H2 (psi kron psi) is unrolled onto
stacked tensor powers [psi; psi^2; ...; psi^k].  The truncated generator C is
block upper-bidiagonal and non-normal; the symmetrized surrogate Qhat(eta) is
Hermitian, exact as eta -> infinity, with O(1/eta^2) error at finite eta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import (
    DimensionBudget,
    DimensionMismatch,
    NotHermitian,
    NotHermitianObservable,
    RegimeViolated,
)
from .integrators import DEFAULT_CONFIG, Trajectory, integrate_nls

VECTOR_BUDGET = 65536


@dataclass(frozen=True)
class NLSSystem:
    """psi' = -i H1 psi + H2 (psi kron psi)."""

    h1: np.ndarray
    h2: np.ndarray
    psi0: np.ndarray

    def __post_init__(self):
        h1 = np.asarray(self.h1, dtype=complex)
        scale = max(np.linalg.norm(h1), 1e-300)
        if np.linalg.norm(h1 - h1.conj().T) > 1e-12 * scale:
            raise NotHermitian("H1 must be Hermitian")
        n = h1.shape[0]
        h2 = np.asarray(self.h2, dtype=complex)
        if h2.shape != (n, n * n):
            raise DimensionMismatch(f"H2 must have shape ({n}, {n * n})")
        psi0 = np.asarray(self.psi0, dtype=complex)
        if psi0.shape != (n,):
            raise DimensionMismatch("psi0 dimension mismatch")
        if np.linalg.norm(psi0) == 0:
            raise DimensionMismatch("psi0 must be nonzero")
        for a in (h1, h2, psi0):
            a.setflags(write=False)
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "h2", h2)
        object.__setattr__(self, "psi0", psi0)

    @property
    def n(self):
        return self.h1.shape[0]

    @property
    def beta(self):
        return float(np.vdot(self.psi0, self.psi0).real)

    @property
    def h2_norm(self):
        return float(np.linalg.norm(self.h2, 2))

    @property
    def h_max(self):
        return float(max(np.abs(self.h1).max(), np.abs(self.h2).max()))

    @property
    def sparsity(self):
        """Max nonzero count over rows/columns of H1 and H2."""
        d = 0
        for m in (self.h1, self.h2):
            nz = m != 0
            d = max(d, int(nz.sum(axis=0).max(initial=0)),
                    int(nz.sum(axis=1).max(initial=0)))
        return max(d, 1)

    def rhs(self, psi):
        return -1j * (self.h1 @ psi) + self.h2 @ np.kron(psi, psi)

    def oracle(self, t_grid, config=DEFAULT_CONFIG):
        return integrate_nls(self.h1, self.h2, self.psi0, t_grid, config)


def kron_sum(h1, factors):
    """sum_j I^(j-1) kron H1 kron I^(factors-j), an N^factors square matrix."""
    n = h1.shape[0]
    out = np.zeros((n**factors, n**factors), dtype=complex)
    for j in range(factors):
        out += np.kron(
            np.kron(np.eye(n**j), h1), np.eye(n ** (factors - 1 - j))
        )
    return out


def kron_pad_h2(h2, blocks):
    """sum_j I^(j-1) kron H2 kron I^(blocks-j): maps N^(blocks+1) -> N^blocks."""
    n = h2.shape[0]
    rows, cols = n**blocks, n ** (blocks + 1)
    out = np.zeros((rows, cols), dtype=complex)
    for j in range(blocks):
        out += np.kron(
            np.kron(np.eye(n**j), h2), np.eye(n ** (blocks - 1 - j))
        )
    return out


def tensor_powers(psi, k):
    """[psi, psi^2, ..., psi^k] as a list of vectors."""
    out = [psi]
    for _ in range(k - 1):
        out.append(np.kron(out[-1], psi))
    return out


def stacked_state(psi, k, eta=None):
    """Unrolled vector [psi; psi^2; ...; psi^k]; block i scaled by
    eta^{-(k-i)} when eta is given."""
    blocks = tensor_powers(psi, k)
    if eta is not None:
        blocks = [b / eta ** (k - i) for i, b in enumerate(blocks, start=1)]
    return np.concatenate(blocks)


@dataclass(frozen=True)
class CarlemanGenerator:
    nls: NLSSystem
    k: int
    matrix: np.ndarray          # unpadded generator, block upper-bidiagonal
    offsets: tuple              # block start offsets, len k+1

    @property
    def dim(self):
        return self.matrix.shape[0]

    def block_slice(self, i):
        """Slice of tensor-power block i (1-based)."""
        return slice(self.offsets[i - 1], self.offsets[i])

    def diag_block(self, i):
        s = self.block_slice(i)
        return self.matrix[s, s]

    def super_block(self, i):
        return self.matrix[self.block_slice(i), self.block_slice(i + 1)]

    def initial_state(self):
        return stacked_state(self.nls.psi0, self.k)

    def evolve(self, t_grid):
        """exp(C t) applied to the stacked initial state on each grid time."""
        p0 = self.initial_state()
        ts = np.asarray(t_grid, dtype=float)
        out = np.empty((ts.size, self.dim), dtype=complex)
        for i, t in enumerate(ts):
            out[i] = p0 if t == 0.0 else expm(self.matrix * t) @ p0
        return Trajectory(ts, out, kind="complex-state")


def build_carleman_generator(nls, k):
    """Truncated generator C with d/dt [psi; ...; psi^k] = C [psi; ...; psi^k]
    exact except for the dropped coupling of the last block."""
    if k < 1:
        raise DimensionBudget("truncation order must be >= 1")
    n = nls.n
    sizes = [n**i for i in range(1, k + 1)]
    if sum(sizes) > VECTOR_BUDGET:
        raise DimensionBudget(
            f"stacked dimension {sum(sizes)} exceeds the budget {VECTOR_BUDGET}"
        )
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    dim = offsets[-1]
    c = np.zeros((dim, dim), dtype=complex)
    for i in range(1, k + 1):
        s = slice(offsets[i - 1], offsets[i])
        c[s, s] = -1j * kron_sum(nls.h1, i)
        if i < k:
            s_next = slice(offsets[i], offsets[i + 1])
            c[s, s_next] = kron_pad_h2(nls.h2, i)
    return CarlemanGenerator(nls=nls, k=k, matrix=c, offsets=tuple(int(o) for o in offsets))


def padded_layout(gen):
    """The register-shaped layout: k blocks of size N^k, tensor power i
    zero-padded into the first N^i coordinates of block i.

    Returns (p0_padded, generator_padded); used to validate the block
    indexing conventions, not for evolution.
    """
    nls, k = gen.nls, gen.k
    n = nls.n
    blk = n**k
    if k * blk > VECTOR_BUDGET:
        raise DimensionBudget(
            f"padded dimension {k * blk} exceeds the budget {VECTOR_BUDGET}"
        )
    powers = tensor_powers(nls.psi0, k)
    p0 = np.zeros(k * blk, dtype=complex)
    for i in range(1, k + 1):
        p0[(i - 1) * blk : (i - 1) * blk + n**i] = powers[i - 1]
    c_pad = np.zeros((k * blk, k * blk), dtype=complex)
    for i in range(1, k + 1):
        a_small = -1j * kron_sum(nls.h1, i)
        a_big = np.zeros((blk, blk), dtype=complex)
        a_big[: n**i, : n**i] = a_small
        r = slice((i - 1) * blk, i * blk)
        c_pad[r, r] = a_big
        if i < k:
            b_small = kron_pad_h2(nls.h2, i)
            b_big = np.zeros((blk, blk), dtype=complex)
            b_big[: n**i, : n ** (i + 1)] = b_small
            c_pad[r, slice(i * blk, (i + 1) * blk)] = b_big
    return p0, c_pad


@dataclass(frozen=True)
class SymmetrizedGenerator:
    nls: NLSSystem
    k: int
    eta: float
    qhat: np.ndarray
    offsets: tuple
    aleph: float
    hhat_norm_bound: float

    @property
    def dim(self):
        return self.qhat.shape[0]

    def block_slice(self, i):
        return slice(self.offsets[i - 1], self.offsets[i])

    def rescale_diagonal(self):
        """The diagonal D = diag(eta^{k-1} I, ..., I) as a vector."""
        d = np.empty(self.dim)
        for i in range(1, self.k + 1):
            d[self.block_slice(i)] = self.eta ** (self.k - i)
        return d

    def initial_state(self):
        """phat(0): tensor powers scaled by eta^{-(k-i)}."""
        return stacked_state(self.nls.psi0, self.k, eta=self.eta)

    def evolve(self, t_grid):
        """exp(-i Qhat t) phat(0) via one Hermitian eigendecomposition."""
        w, v = np.linalg.eigh(self.qhat)
        coeff = v.conj().T @ self.initial_state()
        ts = np.asarray(t_grid, dtype=float)
        return Trajectory(
            ts,
            (v @ (np.exp(-1j * np.outer(w, ts)) * coeff[:, None])).T,
            kind="complex-state",
        )


def aleph_normalization(beta, eta, k):
    """aleph^2 = sum_i beta^i / eta^(2(k-i)) by direct summation (safe at
    beta * eta^2 == 1)."""
    total = 0.0
    for i in range(1, k + 1):
        total += beta**i / eta ** (2 * (k - i))
    return float(np.sqrt(total))


def build_symmetrized(gen, eta):
    """Hermitian Qhat(eta): Kronecker-sum diagonal blocks, i*H2-padding/eta on
    the off-diagonals.  For k = 1, Qhat = H1 exactly."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    nls, k = gen.nls, gen.k
    dim = gen.dim
    qhat = np.zeros((dim, dim), dtype=complex)
    for i in range(1, k + 1):
        s = gen.block_slice(i)
        qhat[s, s] = kron_sum(nls.h1, i)
        if i < k:
            s_next = gen.block_slice(i + 1)
            u = 1j * kron_pad_h2(nls.h2, i)
            qhat[s, s_next] = u / eta
            qhat[s_next, s] = u.conj().T / eta
    hhat_bound = nls.h2_norm * k * (k + 1) / 2.0
    return SymmetrizedGenerator(
        nls=nls,
        k=k,
        eta=float(eta),
        qhat=qhat,
        offsets=gen.offsets,
        aleph=aleph_normalization(nls.beta, eta, k),
        hhat_norm_bound=float(hhat_bound),
    )


def select_eta(nls, k, t, epsilon):
    """Symmetrization strength certifying ||D phat(t) - p(t)|| <= eps:
    eta = sqrt(Hhat_bound * (1 + S/eps) * t), S = sum_i beta^i."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if nls.h2_norm == 0.0:
        return 1.0     # no coupling: symmetrized system is exact at any eta
    beta = nls.beta
    s = sum(beta**i for i in range(1, k + 1))
    hhat_bound = nls.h2_norm * k * (k + 1) / 2.0
    return float(np.sqrt(hhat_bound * (1.0 + s / epsilon) * t))


def compute_delta(eigenvalues, order_cap):
    """Resonance gap: min over |lambda_k - sum_j m_j lambda_j| with integer
    m_j >= 0 and 2 <= sum m_j <= order_cap, by exhaustive enumeration."""
    if order_cap < 2:
        raise ValueError("order_cap must be >= 2")
    lam = np.asarray(eigenvalues, dtype=float)
    n = lam.size
    best = np.inf
    for total in range(2, order_cap + 1):
        for combo in _compositions(total, n):
            s = float(np.dot(combo, lam))
            best = min(best, float(np.min(np.abs(lam - s))))
    return best


def _compositions(total, slots):
    """All tuples of nonnegative ints of length `slots` summing to `total`."""
    if slots == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, slots - 1):
            yield (head,) + rest


def select_truncation_order(nls, t, epsilon, regime, delta_cap=None):
    """Smallest truncation order meeting the cited error bound.

    regime "small-t": requires ||H2|| t < 1 and beta ||H2|| t < 1;
    k >= log(1/eps) / log(1/(||H2|| t)).
    regime "no-resonance": requires Delta > 0 and R_r = 4 e beta ||H2||/Delta < 1;
    k >= log(C t / eps) / log(1/R_r) with C = ||H2|| beta^2.
    """
    if regime not in ("small-t", "no-resonance"):
        raise RegimeViolated(f"unknown regime {regime!r}")
    beta = nls.beta
    h2n = nls.h2_norm
    diagnostics = {"beta": beta, "h2_norm": h2n, "regime": regime}
    if h2n == 0.0:
        diagnostics["bound"] = 0.0
        return 1, diagnostics
    if regime == "small-t":
        if h2n * t >= 1.0:
            raise RegimeViolated(
                f"small-t regime needs ||H2|| t < 1, got {h2n * t:.6g}"
            )
        if beta * h2n * t >= 1.0:
            raise RegimeViolated(
                f"small-t regime needs beta ||H2|| t < 1, got {beta * h2n * t:.6g}"
            )
        bound = np.log(1.0 / epsilon) / np.log(1.0 / (h2n * t))
        k = max(1, int(np.ceil(bound)))
        diagnostics.update(bound=float(bound), h2_t=float(h2n * t))
        return k, diagnostics
    lam = np.linalg.eigvalsh(nls.h1)
    cap = 4 if delta_cap is None else delta_cap
    k = 1
    for _ in range(6):            # grow the enumeration cap with k until stable
        delta = compute_delta(lam, cap)
        if delta <= 0.0:
            raise RegimeViolated("no-resonance regime needs Delta > 0")
        r_r = 4.0 * np.e * beta * h2n / delta
        if r_r >= 1.0:
            raise RegimeViolated(
                f"no-resonance regime needs R_r < 1, got R_r = {r_r:.6g}"
            )
        c = h2n * beta**2
        arg = c * t / epsilon
        bound = np.log(arg) / np.log(1.0 / r_r) if arg > 1.0 else 0.0
        k_new = max(1, int(np.ceil(bound)))
        diagnostics.update(
            delta=float(delta), r_r=float(r_r), c=float(c),
            bound=float(bound), delta_cap=cap,
        )
        if delta_cap is not None or k_new <= k:
            k = max(k, k_new)
            break
        k = k_new
        if cap >= 2 * k:
            break
        cap = 2 * k
    return k, diagnostics


@dataclass(frozen=True)
class CarlemanRun:
    decoded: Trajectory          # first-block estimate of psi(t)
    p1: np.ndarray               # first-block projection probability
    p1_closed_t0: float
    max_error: float             # vs integrate_nls
    eta: float
    k: int
    aleph: float


def evolve_and_decode(sym, t_grid, config=DEFAULT_CONFIG, oracle=None):
    """Evolve the symmetrized system, decode the physical block, and compare
    against the nonlinear oracle."""
    nls, k, eta = sym.nls, sym.k, sym.eta
    traj = sym.evolve(t_grid)
    first = sym.block_slice(1)
    psi_tilde = traj.states[:, first] * eta ** (k - 1)
    aleph = sym.aleph
    p1 = np.sum(np.abs(psi_tilde) ** 2, axis=1) / (eta ** (2 * (k - 1)) * aleph**2)
    denom = sum(nls.beta**i * eta ** (2 * (i - 1)) for i in range(1, k + 1))
    p1_closed = nls.beta / denom
    ref = nls.oracle(t_grid, config) if oracle is None else oracle
    err = np.linalg.norm(psi_tilde - ref.states, axis=1)
    return CarlemanRun(
        decoded=Trajectory(traj.times, psi_tilde, kind="complex-state"),
        p1=p1,
        p1_closed_t0=float(p1_closed),
        max_error=float(err.max()),
        eta=eta,
        k=k,
        aleph=aleph,
    )


def symmetrization_error(gen, sym, t_grid):
    """max_t || D phat(t) - p(t) || with p solving the truncated non-Hermitian
    system; isolates the symmetrization error from the truncation error."""
    ts = np.asarray(t_grid, dtype=float)
    p = gen.evolve(ts)
    phat = sym.evolve(ts)
    d = sym.rescale_diagonal()
    diff = phat.states * d[None, :] - p.states
    return float(np.linalg.norm(diff, axis=1).max())


def truncation_error_study(nls, k_list, t, samples=33, config=DEFAULT_CONFIG):
    """Measured truncation error against the stated analytic bound.

    For each k: error = || exp(Ct) p(0) - [psi; ...; psi^k](t) || at the final
    time, the analytic bound k beta^k ||H2|| (exp(at) - 1)/a with
    a = 2 k d max|H2|, and a corrected variant using beta^((k+1)/2) (the
    forcing term's true norm scale).  first_block_error tracks only the
    physical block; convergence_ok flags exp(2 d max|H2| t) beta < 1.
    """
    ts = np.linspace(0.0, t, samples)
    oracle = nls.oracle(ts, config)
    d = nls.sparsity
    h2_absmax = float(np.abs(nls.h2).max())
    beta = nls.beta
    conv = bool(np.exp(2.0 * d * h2_absmax * t) * beta < 1.0)
    rows = []
    for k in k_list:
        gen = build_carleman_generator(nls, k)
        p_t = expm(gen.matrix * t) @ gen.initial_state()
        truth = np.concatenate(tensor_powers(oracle.states[-1], k))
        measured = float(np.linalg.norm(p_t - truth))
        first = float(
            np.linalg.norm(p_t[gen.block_slice(1)] - oracle.states[-1])
        )
        if nls.h2_norm == 0.0:
            bound = bound_corrected = 0.0
        else:
            a = 2.0 * k * d * h2_absmax
            growth = (np.exp(a * t) - 1.0) / a
            bound = float(k * beta**k * nls.h2_norm * growth)
            bound_corrected = float(
                k * beta ** ((k + 1) / 2.0) * nls.h2_norm * growth
            )
        rows.append(
            {
                "k": k,
                "measured_error": measured,
                "first_block_error": first,
                "bound": bound,
                "bound_corrected": bound_corrected,
                "convergence_ok": conv,
            }
        )
    return rows


def expectation_value(sym, stacked_t, observable):
    """<phi| (|0><0| kron O') |phi> on the normalized stacked state, plus the
    rescaled physical value <psi~|O|psi~>.

    stacked_t is an un-normalized phat(t) sample; O acts on the physical
    block (dimension N of the underlying system).
    """
    o = np.asarray(observable, dtype=complex)
    scale = max(np.linalg.norm(o), 1e-300)
    if o.shape != (sym.nls.n, sym.nls.n):
        raise DimensionMismatch("observable must act on the physical block")
    if np.linalg.norm(o - o.conj().T) > 1e-12 * scale:
        raise NotHermitianObservable("observable must be Hermitian")
    first = stacked_t[sym.block_slice(1)]
    phi_first = first / sym.aleph
    raw = complex(np.vdot(phi_first, o @ phi_first))
    psi_tilde = first * sym.eta ** (sym.k - 1)
    physical = complex(np.vdot(psi_tilde, o @ psi_tilde))
    return raw, physical
