"""Total coherence measures.

The basis-independent coherence of a state is its sqrt-JSD distance to the
maximally mixed state I/d, which is closed-form (no optimization) and
invariant under every unitary.  The basis-dependent variant minimizes the
distance over all states diagonal in a chosen basis; the gap between the
two pictures is `delta_coherence`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import optim
from .divergence import metric
from .errors import BadDimension, BadParameter, DimensionMismatch, NotUnitary
from .qstate import (
    DensityMatrix,
    UnitaryMatrix,
    conjugate,
    dephase,
    eig_entropy_bits,
    entropy_many,
    maximally_mixed,
    von_neumann_entropy,
    _wrap,
)

GRAM_TOL = 1e-10
_LOG_FLOOR = 1e-18  # weight floor when encoding a simplex point as logits


@dataclass(frozen=True, eq=False)
class BasisSpec:
    """An ordered orthonormal basis; column n of `columns` is the n-th ket."""

    columns: np.ndarray
    label: str = ""

    @property
    def dim(self) -> int:
        return self.columns.shape[0]


def basis_spec(columns, label: str = "") -> BasisSpec:
    cols = np.array(columns, dtype=complex)
    if cols.ndim != 2 or cols.shape[0] != cols.shape[1]:
        raise DimensionMismatch(f"basis must be a square matrix, got {cols.shape}")
    gram_dev = float(np.abs(cols.conj().T @ cols - np.eye(cols.shape[0])).max())
    if gram_dev > GRAM_TOL:
        raise NotUnitary(f"basis Gram matrix deviates from identity by {gram_dev:.3e}")
    cols.flags.writeable = False
    return BasisSpec(cols, label)


def computational_basis(d: int) -> BasisSpec:
    if d < 1:
        raise BadDimension(f"dimension must be >= 1, got {d}")
    return basis_spec(np.eye(d), "computational")


def hadamard_basis(n_qubits: int) -> BasisSpec:
    """|+/-> product basis on n qubits."""
    if n_qubits < 1:
        raise BadDimension(f"qubit count must be >= 1, got {n_qubits}")
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    cols = np.array([[1.0]], dtype=complex)
    for _ in range(n_qubits):
        cols = np.kron(cols, h)
    return basis_spec(cols, "hadamard")


def named_basis(name: str, d: int) -> BasisSpec:
    if name == "computational":
        return computational_basis(d)
    if name == "hadamard":
        n = int(round(np.log2(d)))
        if 2**n != d:
            raise BadDimension(f"hadamard basis needs a power-of-two dimension, got {d}")
        return hadamard_basis(n)
    raise BadParameter(f"unknown basis name {name!r}; expected 'computational' or 'hadamard'")


def basis_from_json(path_or_obj, d: int | None = None) -> BasisSpec:
    """Load a basis from a JSON unitary: {"re": [[...]], "im": [[...]]}."""
    if isinstance(path_or_obj, dict):
        obj = path_or_obj
    else:
        with open(path_or_obj, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    cols = np.array(obj["re"], dtype=float) + 1j * np.array(obj.get("im", 0.0), dtype=float)
    spec = basis_spec(cols, str(obj.get("label", "custom")))
    if d is not None and spec.dim != d:
        raise DimensionMismatch(f"basis dim {spec.dim} != state dim {d}")
    return spec


def resolve_basis(basis, rho: DensityMatrix) -> BasisSpec:
    """Accept a BasisSpec, a built-in name, or a JSON path/dict."""
    if isinstance(basis, BasisSpec):
        if basis.dim != rho.dim:
            raise DimensionMismatch(f"basis dim {basis.dim} != state dim {rho.dim}")
        return basis
    if basis is None:
        return computational_basis(rho.dim)
    if isinstance(basis, str) and basis in ("computational", "hadamard"):
        return named_basis(basis, rho.dim)
    return basis_from_json(basis, rho.dim)


# ---------------------------------------------------------------------------
# basis-independent coherence


def total_coherence(rho: DensityMatrix) -> float:
    """sqrt-JSD distance from rho to the maximally mixed state."""
    return metric(rho, maximally_mixed(rho.dim))


def unitary_invariance_check(rho: DensityMatrix, u: UnitaryMatrix) -> float:
    """|C(U^dag rho U) - C(rho)|; zero up to eigensolver noise."""
    return abs(total_coherence(conjugate(rho, u)) - total_coherence(rho))


def pure_coherence_closed_form(d: int) -> float:
    """Total coherence of any pure state in dimension d."""
    if d < 2:
        raise BadDimension(f"dimension must be >= 2, got {d}")
    inner = 1.0 + 0.5 * (np.log2(d) - (1.0 + 1.0 / d) * np.log2(d + 1.0))
    return float(np.sqrt(max(inner, 0.0)))


def werner_coherence_closed_form(mu: float, d: int) -> float:
    """Total coherence of (1-mu) I/d + mu |psi><psi| for any pure |psi|.

    Uses 0 log 0 = 0 at the mu = 1 endpoint.  The 1/(2d) factor sits under
    the square root; the acceptance suite pins this against direct
    computation of the distance to I/d.
    """
    if d < 2:
        raise BadDimension(f"dimension must be >= 2, got {d}")
    if not (0.0 <= mu <= 1.0):
        raise BadParameter(f"mixing weight must lie in [0, 1], got {mu}")

    def xlog2(x: float) -> float:
        return 0.0 if x <= 0.0 else x * np.log2(x)

    k = d - 1.0
    bracket = (
        xlog2(1.0 + mu * k)
        - (2.0 + mu * k) * np.log2(1.0 + 0.5 * mu * k)
        + k * xlog2(1.0 - mu)
        - (2.0 - mu) * k * np.log2(1.0 - 0.5 * mu)
    )
    return float(np.sqrt(max(bracket / (2.0 * d), 0.0)))


# ---------------------------------------------------------------------------
# basis-dependent coherence


def weights_to_logits(p: np.ndarray) -> np.ndarray:
    return np.log(np.asarray(p, dtype=float) + _LOG_FLOOR)


def _diag_objective(rho: DensityMatrix, basis: BasisSpec):
    """Batched distance from rho to basis-diagonal states given as logits."""
    rot = basis.columns.conj().T @ rho.mat @ basis.columns
    s_rho = von_neumann_entropy(rho)
    d = rho.dim
    eye = np.arange(d)

    def _scalar(logits: np.ndarray) -> float:
        z = logits - logits.max()
        p = np.exp(z)
        p /= p.sum()
        mid = rot / 2.0
        mid[eye, eye] += p / 2.0
        j = float(entropy_many(mid)) - (s_rho + float(eig_entropy_bits(p))) / 2.0
        return max(j, 0.0)

    def objective(logits: np.ndarray):
        # returns the divergence, not its root: smooth at the minimum
        if logits.ndim == 1:
            return _scalar(logits)
        p = optim.softmax(logits)
        mids = np.repeat(rot[None] / 2.0, p.shape[0], axis=0)
        mids[:, eye, eye] += p / 2.0
        j = entropy_many(mids) - (s_rho + eig_entropy_bits(p)) / 2.0
        return np.clip(j, 0.0, None)

    return objective, rot


def basis_coherence(rho: DensityMatrix, basis=None,
                    cfg: optim.OptimizerConfig | None = None):
    """Minimal distance from rho to the states diagonal in `basis`.

    Returns (value, minimizer).  The dephased state and the flat spectrum
    are always used as starts, so the value never exceeds the distance to
    either of them.
    """
    basis = resolve_basis(basis, rho)
    objective, rot = _diag_objective(rho, basis)
    d = rho.dim
    dephased_diag = np.clip(np.diagonal(rot).real, 0.0, None)
    dephased_diag = dephased_diag / dephased_diag.sum()
    starts = [weights_to_logits(dephased_diag), np.zeros(d)]
    result = optim.minimize(objective, [optim.Block("simplex", d)], cfg, starts)
    p = optim.softmax(result.params[None])[0]
    minimizer = _wrap((basis.columns * p) @ basis.columns.conj().T, rho.dims)
    value = min(metric(rho, minimizer), float(np.sqrt(max(result.value, 0.0))))
    return value, minimizer, result


def delta_coherence(rho: DensityMatrix, basis=None,
                    cfg: optim.OptimizerConfig | None = None,
                    minimizer: DensityMatrix | None = None,
                    use_dephased: bool = False) -> float:
    """Distance from the closest basis-diagonal state to I/d.

    By default the diagonal state is the minimizer found by
    `basis_coherence` (pass it in to skip re-optimizing); with
    ``use_dephased=True`` the dephased matrix is used instead.
    """
    basis = resolve_basis(basis, rho)
    if use_dephased:
        ref = dephase(rho, basis)
    elif minimizer is not None:
        ref = minimizer
    else:
        _, ref, _ = basis_coherence(rho, basis, cfg)
    return metric(ref, maximally_mixed(rho.dim))
