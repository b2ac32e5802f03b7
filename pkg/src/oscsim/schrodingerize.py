"""Conservative oscillator <-> Hermitian evolution map.

The state [sqrt(M) v; i B' sqrt(M) x] / sqrt(2E) evolves under the block
Hamiltonian H = -[[0, B], [B', 0]], so positions and velocities ride a
unitary flow.  Encoding requires positive definite K (the decoder inverts
the mass-normalized stiffness on its range).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian, SingularStiffness, ZeroEnergy
from .integrators import Trajectory
from .oscillator import build_b_factor

HERM_RTOL = 1e-12


def check_hermitian(h, rtol=HERM_RTOL):
    h = np.asarray(h, dtype=complex)
    scale = max(np.linalg.norm(h), 1e-300)
    if np.linalg.norm(h - h.conj().T) > rtol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return h


@dataclass(frozen=True)
class QuantumEncoding:
    hamiltonian: np.ndarray
    psi0: np.ndarray
    energy: float
    n: int
    b: np.ndarray
    inv_sqrt_m: np.ndarray       # 1/sqrt(masses), diagonal as vector
    a_pinv_b: np.ndarray         # A^+ B on the positive eigenspace of A

    def decode(self, psi_t):
        return decode(self, psi_t)


def encode(system):
    """Build the Hermitian encoding of a positive definite oscillator system."""
    a = system.normal_form()
    w = np.linalg.eigvalsh(a)
    if w[0] <= 1e-12 * max(w[-1], 1e-300):
        raise SingularStiffness("encoding requires positive definite stiffness")
    e = system.energy()
    if e <= 0:
        raise ZeroEnergy("zero initial energy cannot be normalized")
    b = build_b_factor(system)
    n, mcols = b.shape
    h = np.zeros((n + mcols, n + mcols), dtype=complex)
    h[:n, n:] = -b
    h[n:, :n] = -b.T
    sqrt_m = np.sqrt(system.masses)
    psi0 = np.concatenate(
        [sqrt_m * system.v0, 1j * (b.T @ (sqrt_m * system.x0))]
    ) / np.sqrt(2.0 * e)
    wa, va = np.linalg.eigh(a)
    inv = np.where(wa > 1e-12 * wa[-1], 1.0 / wa, 0.0)
    a_pinv = (va * inv) @ va.T
    return QuantumEncoding(
        hamiltonian=h,
        psi0=psi0,
        energy=float(e),
        n=n,
        b=b,
        inv_sqrt_m=1.0 / sqrt_m,
        a_pinv_b=a_pinv @ b,
    )


def evolve_hermitian(h, psi0, t):
    """exp(-i H t) psi0 through one eigendecomposition; t may be an array."""
    h = check_hermitian(h)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (h.shape[0],):
        raise DimensionMismatch("state dimension does not match the Hamiltonian")
    w, v = np.linalg.eigh(h)
    coeff = v.conj().T @ psi0
    t = np.asarray(t, dtype=float)
    if t.ndim == 0:
        return v @ (np.exp(-1j * w * float(t)) * coeff)
    return (v @ (np.exp(-1j * np.outer(w, t)) * coeff[:, None])).T


def decode(encoding, psi_t):
    """Recover (x, v) from an encoded state."""
    psi_t = np.asarray(psi_t, dtype=complex)
    if psi_t.shape != (encoding.hamiltonian.shape[0],):
        raise DimensionMismatch("state dimension does not match the encoding")
    scale = np.sqrt(2.0 * encoding.energy)
    n = encoding.n
    v = scale * encoding.inv_sqrt_m * psi_t[:n].real
    z = (-1j * psi_t[n:]) * scale          # = B' sqrt(M) x
    x = encoding.inv_sqrt_m * (encoding.a_pinv_b @ z).real
    return x, v


def harmonic_pipeline(system, t_grid):
    """encode -> evolve -> decode over a full grid; returns a Trajectory."""
    enc = encode(system)
    psis = evolve_hermitian(enc.hamiltonian, enc.psi0, np.asarray(t_grid))
    rows = np.empty((len(t_grid), 2 * enc.n))
    for i, psi in enumerate(psis):
        x, v = decode(enc, psi)
        rows[i, : enc.n] = x
        rows[i, enc.n :] = v
    return Trajectory(np.asarray(t_grid, dtype=float), rows)
