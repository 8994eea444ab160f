"""Shared fixtures and independent oracle implementations.

The oracles here deliberately avoid the library's code paths: entropies
are summed with plain loops over eigenvalues, dephasing runs the explicit
projector sum, and partial traces walk basis indices.  Expected values in
the tests were computed with these before the corresponding operations
were implemented, then frozen.
"""
from __future__ import annotations

import math

import numpy as np
import pytest


# frozen reference numbers (computed from the oracle formulas below)
ENTROPY_3_4 = 0.8112781244591328          # H(3/4, 1/4) in bits
JSD_PURE_VS_MIXED_D2 = 0.31127812445913283  # divergence of |0><0| vs I/2
DIST_PURE_VS_MIXED_D2 = 0.5579230452841438  # its square root
PURE_COHERENCE = {
    2: 0.5579230452841439,
    4: 0.7408069523805771,
    8: 0.8467096235951848,
    16: 0.9102391804277364,
}
BELL_COHERENCE = 0.740806952380577          # equals PURE_COHERENCE[4]
BELL_SEPARABLE_CANDIDATE = 0.5579230452841438


def shannon_bits(probs) -> float:
    """Plain-loop Shannon entropy in bits; 0 log 0 = 0."""
    total = 0.0
    for p in np.asarray(probs, dtype=float).ravel():
        if p > 0.0:
            total -= p * math.log2(p)
    return total


def entropy_oracle(mat: np.ndarray) -> float:
    """von Neumann entropy from raw eigenvalues, no clamping refinements."""
    w = np.linalg.eigvalsh(mat)
    return shannon_bits(w[w > 1e-14])


def jsd_oracle(a: np.ndarray, b: np.ndarray) -> float:
    return entropy_oracle((a + b) / 2.0) - (entropy_oracle(a) + entropy_oracle(b)) / 2.0


def dist_oracle(a: np.ndarray, b: np.ndarray) -> float:
    return math.sqrt(max(jsd_oracle(a, b), 0.0))


def dephase_oracle(mat: np.ndarray, columns: np.ndarray) -> np.ndarray:
    """Explicit projector sum over the basis kets."""
    d = mat.shape[0]
    out = np.zeros_like(mat)
    for n in range(d):
        ket = columns[:, n]
        proj = np.outer(ket, ket.conj())
        out += proj @ mat @ proj
    return out


def partial_trace_oracle(mat: np.ndarray, dims, keep) -> np.ndarray:
    """Index-walking partial trace."""
    dims = list(dims)
    keep = sorted(keep)
    traced = [i for i in range(len(dims)) if i not in keep]
    dk = int(np.prod([dims[i] for i in keep]))
    out = np.zeros((dk, dk), dtype=complex)
    for row in np.ndindex(*dims):
        for col in np.ndindex(*dims):
            if any(row[t] != col[t] for t in traced):
                continue
            r = np.ravel_multi_index([row[k] for k in keep], [dims[k] for k in keep])
            c = np.ravel_multi_index([col[k] for k in keep], [dims[k] for k in keep])
            out[r, c] += mat[np.ravel_multi_index(row, dims),
                             np.ravel_multi_index(col, dims)]
    return out


def random_density(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_ket(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
