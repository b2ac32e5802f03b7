"""Resource formula evaluation and numerical block-encoding contracts.

Query-count expressions are evaluated with explicit constants set to 1 and
labeled asymptotic; subnormalization constants are checked against computed
spectral norms; encodability itself is exercised by an explicit unitary
dilation at small dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .carleman import (
    build_carleman_generator,
    build_symmetrized,
    select_eta,
    select_truncation_order,
)
from .errors import SubnormalizationViolated


@dataclass(frozen=True)
class ResourceReport:
    k: int
    eta: float
    aleph: float
    alpha: float                 # d * max entry of (H1, H2)
    sparsity: int
    g_queries: float             # asymptotic estimate, constants set to 1
    alpha_constants: dict        # name -> (constant, dominated spectral norm)
    regime: dict
    note: str = "asymptotic estimate: O(.) constants set to 1"

    def as_dict(self):
        out = {
            "k": self.k,
            "eta": self.eta,
            "aleph": self.aleph,
            "alpha": self.alpha,
            "sparsity": self.sparsity,
            "G_queries": self.g_queries,
            "note": self.note,
        }
        for name, (const, norm) in self.alpha_constants.items():
            out[f"alpha_{name}"] = const
            out[f"norm_{name}"] = norm
        out.update(self.regime)
        return out


def estimate_resources(nls, t, epsilon, regime="small-t"):
    """Evaluate the query/qubit formulas for a Carleman simulation and verify
    the subnormalization constants on the constructed operators."""
    k, diagnostics = select_truncation_order(nls, t, epsilon, regime)
    eta = select_eta(nls, k, t, epsilon)
    gen = build_carleman_generator(nls, k)
    sym = build_symmetrized(gen, eta)
    alpha = nls.sparsity * nls.h_max
    beta = nls.beta
    s = sum(beta**i for i in range(1, k + 1))
    log_arg = nls.h2_norm * k * (k + 1) / 2.0 * (1.0 + s / epsilon) * t
    g = alpha * k * k * t
    if k > 1 and log_arg > 1.0:
        g += 0.5 * (k - 1) * np.log(log_arg)

    consts = {}
    norms_ai = [np.linalg.norm(gen.diag_block(i), 2) for i in range(1, k + 1)]
    consts["block_diag"] = (2.0 * alpha * k, float(max(norms_ai)))
    if k > 1:
        norms_bi = [np.linalg.norm(gen.super_block(i), 2) for i in range(1, k)]
        consts["block_coupling"] = (2.0 * alpha * k, float(max(norms_bi)))
    consts["qhat"] = (6.0 * alpha * k * k, float(np.linalg.norm(sym.qhat, 2)))
    for name, (const, norm) in consts.items():
        if norm > const * (1 + 1e-12):
            raise SubnormalizationViolated(
                f"claimed constant {const:.6g} for {name} is below the "
                f"spectral norm {norm:.6g}"
            )
    return ResourceReport(
        k=k,
        eta=float(eta),
        aleph=sym.aleph,
        alpha=float(alpha),
        sparsity=nls.sparsity,
        g_queries=float(g),
        alpha_constants=consts,
        regime=diagnostics,
    )


def oscillator_alpha(system):
    """max over nonzero springs of G(j, k) / min(m_j, m_k); dominates every
    mass-normalized stiffness entry."""
    g = system.stiffness_graph
    m = system.masses
    best = 0.0
    n = system.n
    for j in range(n):
        for k in range(n):
            if g[j, k] != 0.0:
                best = max(best, g[j, k] / min(m[j], m[k]))
    return best


def oscillator_sparsity(system):
    nz = system.stiffness_graph != 0
    return max(int(nz.sum(axis=1).max(initial=0)), 1)


def hamiltonian_subnormalization(system):
    """(sqrt(2 alpha d), ||H||) for the conservative block Hamiltonian; the
    constant must dominate the norm."""
    from .schrodingerize import encode

    enc = encode(system)
    alpha = oscillator_alpha(system)
    d = oscillator_sparsity(system)
    const = float(np.sqrt(2.0 * alpha * d))
    norm = float(np.linalg.norm(enc.hamiltonian, 2))
    if norm > const * (1 + 1e-12):
        raise SubnormalizationViolated(
            f"sqrt(2 alpha d) = {const:.6g} is below ||H|| = {norm:.6g}"
        )
    return const, norm


def _sqrt_psd_clamped(mat):
    w, v = np.linalg.eigh(mat)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def dilation_block_encode(a, alpha):
    """Unitary dilation U with top-left block A / alpha.

    U = [[A~, sqrt(I - A~ A~*)], [sqrt(I - A~* A~), -A~*]], A~ = A / alpha.
    Tiny negative eigenvalues of the Gram complements are clamped to zero.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SubnormalizationViolated("dilation expects a square matrix")
    norm = np.linalg.norm(a, 2)
    if norm > alpha * (1 + 1e-12):
        raise SubnormalizationViolated(
            f"||A|| = {norm:.6g} exceeds the subnormalization alpha = {alpha:.6g}"
        )
    n = a.shape[0]
    at = a / alpha
    eye = np.eye(n)
    top_right = _sqrt_psd_clamped(eye - at @ at.conj().T)
    bottom_left = _sqrt_psd_clamped(eye - at.conj().T @ at)
    u = np.block([[at, top_right], [bottom_left, -at.conj().T]])
    return u


def dilation_defects(a, alpha):
    """(unitarity defect, block-recovery defect) of the dilation."""
    u = dilation_block_encode(a, alpha)
    n = np.asarray(a).shape[0]
    unitary = np.linalg.norm(u.conj().T @ u - np.eye(2 * n), 2)
    block = np.linalg.norm(u[:n, :n] - np.asarray(a, dtype=complex) / alpha, 2)
    return float(unitary), float(block)
