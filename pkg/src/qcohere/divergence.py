"""Classical and quantum statistical divergences.

The workhorse is the square-root quantum Jensen-Shannon divergence
`metric`, which every coherence measure in this package is built on.
The quantum Jensen-Shannon value is always evaluated through its entropy
form, S((rho+sigma)/2) - (S(rho)+S(sigma))/2, which is defined for every
pair of states; the relative-entropy form exists for cross-checking only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadParameter,
    DimensionMismatch,
    LengthMismatch,
    NumericError,
    SupportViolation,
)
from .qstate import DensityMatrix, eig_entropy_bits, entropy_many, spectrum

PROB_SUM_TOL = 1e-10
SUPPORT_EIG_TOL = 1e-10
EQUALITY_TOL = 1e-12
NEGATIVE_JSD_GUARD = 1e-9


@dataclass(frozen=True, eq=False)
class ProbDist:
    """A probability vector: entries in [0, 1], summing to 1 within 1e-10."""

    probs: np.ndarray


def prob_dist(p) -> ProbDist:
    v = np.array(p, dtype=float).reshape(-1)
    if v.size == 0:
        raise BadParameter("empty probability vector")
    if float(v.min()) < -PROB_SUM_TOL or float(v.max()) > 1.0 + PROB_SUM_TOL:
        raise BadParameter(f"probabilities outside [0, 1]: min {v.min()!r}, max {v.max()!r}")
    if abs(float(v.sum()) - 1.0) > PROB_SUM_TOL:
        raise BadParameter(f"probabilities sum to {float(v.sum())!r}, not 1")
    v = np.clip(v, 0.0, 1.0)
    out = v / v.sum()
    out.flags.writeable = False
    return ProbDist(out)


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    pv = p.probs if isinstance(p, ProbDist) else prob_dist(p).probs
    qv = q.probs if isinstance(q, ProbDist) else prob_dist(q).probs
    if pv.shape != qv.shape:
        raise LengthMismatch(f"distributions have lengths {pv.size} and {qv.size}")
    return pv, qv


def lp_distance(p, q, n: int) -> float:
    """(sum_i |p_i - q_i|^n)^(1/n)."""
    pv, qv = _pair(p, q)
    if int(n) < 1:
        raise BadParameter(f"norm order must be >= 1, got {n}")
    return float((np.abs(pv - qv) ** n).sum() ** (1.0 / n))


def shannon_entropy(p) -> float:
    """-sum p log2 p with 0 log 0 = 0, in bits."""
    pv = p.probs if isinstance(p, ProbDist) else prob_dist(p).probs
    return float(eig_entropy_bits(pv))


def relative_entropy(p, q) -> float:
    """sum_i p_i log2(p_i / q_i); requires supp(p) within supp(q)."""
    pv, qv = _pair(p, q)
    live = pv > 0.0
    if np.any(live & (qv <= 0.0)):
        raise SupportViolation("some p_i > 0 where q_i = 0")
    return float(max((pv[live] * np.log2(pv[live] / qv[live])).sum(), 0.0))


def j_divergence(p, q) -> float:
    """Symmetrized relative entropy; requires equal supports."""
    pv, qv = _pair(p, q)
    if np.any((pv > 0.0) != (qv > 0.0)):
        raise SupportViolation("equal supports required")
    return 0.5 * (relative_entropy(pv, qv) + relative_entropy(qv, pv))


def s_divergence(p, q) -> float:
    """sum_i p_i log2(2 p_i / (p_i + q_i)); defined for any supports."""
    pv, qv = _pair(p, q)
    live = pv > 0.0
    return float((pv[live] * np.log2(2.0 * pv[live] / (pv[live] + qv[live]))).sum())


def classical_jsd(p, q) -> float:
    """Jensen-Shannon divergence via the entropy form, in [0, 1] bits."""
    pv, qv = _pair(p, q)
    val = (
        float(eig_entropy_bits((pv + qv) / 2.0))
        - (float(eig_entropy_bits(pv)) + float(eig_entropy_bits(qv))) / 2.0
    )
    return max(val, 0.0)


# ---------------------------------------------------------------------------
# quantum


def _same_dim(rho: DensityMatrix, sigma: DensityMatrix) -> None:
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"state dims differ: {rho.dim} vs {sigma.dim}")


def quantum_relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Tr(rho log2 rho - rho log2 sigma) via both spectral decompositions.

    Raises SupportViolation when rho has weight outside sigma's support
    (eigenvalue threshold 1e-10).
    """
    _same_dim(rho, sigma)
    wr, vr = spectrum(rho)
    ws, vs = spectrum(sigma)
    overlap = np.abs(vr.conj().T @ vs) ** 2
    r_live = wr > SUPPORT_EIG_TOL
    s_dead = ws <= SUPPORT_EIG_TOL
    leaked = float((wr[r_live, None] * overlap[np.ix_(r_live, s_dead)]).sum())
    if leaked > SUPPORT_EIG_TOL:
        raise SupportViolation(f"weight {leaked:.3e} of rho lies outside supp(sigma)")
    s_live = ~s_dead
    cross = float(
        (wr[r_live, None] * overlap[np.ix_(r_live, s_live)] * np.log2(ws[s_live])[None, :]).sum()
    )
    return float(max(-eig_entropy_bits(wr) - cross, 0.0))


def qjsd(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Quantum Jensen-Shannon divergence in bits, in [0, 1].

    Returns exactly 0 when the two matrices agree elementwise to 1e-12,
    so downstream square roots never see -0.
    """
    _same_dim(rho, sigma)
    if float(np.abs(rho.mat - sigma.mat).max()) <= EQUALITY_TOL:
        return 0.0
    mid = entropy_many((rho.mat + sigma.mat) / 2.0)
    val = float(mid - (entropy_many(rho.mat) + entropy_many(sigma.mat)) / 2.0)
    if val < -NEGATIVE_JSD_GUARD:
        raise NumericError(f"Jensen-Shannon value {val!r} is negative beyond guard")
    return max(val, 0.0)


def metric(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Square root of the quantum Jensen-Shannon divergence."""
    return float(np.sqrt(qjsd(rho, sigma)))


# ---------------------------------------------------------------------------
# batched kernels (internal fast paths; identical math to the scalar ops)


def entropy_stack(mats: np.ndarray) -> np.ndarray:
    """Entropies for a (..., d, d) stack."""
    return entropy_many(mats)


def metric_stack(rhos: np.ndarray, sigmas: np.ndarray,
                 s_rhos: np.ndarray | None = None,
                 s_sigmas: np.ndarray | None = None) -> np.ndarray:
    """sqrt-JSD for paired stacks, broadcasting either side.

    Precomputed entropies can be passed to avoid repeating eigensolves.
    """
    if s_rhos is None:
        s_rhos = entropy_many(rhos)
    if s_sigmas is None:
        s_sigmas = entropy_many(sigmas)
    j = entropy_many((rhos + sigmas) / 2.0) - (s_rhos + s_sigmas) / 2.0
    return np.sqrt(np.clip(j, 0.0, None))
