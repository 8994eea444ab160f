"""Density-matrix core: validation, tensor algebra, spectra, entropy,
named-state factory and random ensembles.

Everything is dense complex128.  States are frozen after construction and
every function is pure, so concurrent use is safe as long as random
generators are not shared between workers.  All entropies are in bits.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BadRecipe,
    BadSubsystemIndex,
    DimensionMismatch,
    EigenFailure,
    NotHermitian,
    NotNormalized,
    NotPSD,
    NotUnitTrace,
    NotUnitary,
)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
KET_NORM_TOL = 1e-12
UNITARY_TOL = 1e-10


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, PSD, unit-trace d x d matrix with its subsystem split."""

    mat: np.ndarray
    dims: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm complex ket."""

    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def to_density_matrix(self, dims=None) -> DensityMatrix:
        rho = np.outer(self.amplitudes, self.amplitudes.conj())
        return _wrap(rho, dims if dims is not None else (self.dim,))


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    mat: np.ndarray

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _as_square(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def _check_dims(dims, d: int) -> tuple[int, ...]:
    dims = tuple(int(x) for x in dims)
    if not dims or any(x < 1 for x in dims):
        raise DimensionMismatch(f"subsystem dims must be positive, got {dims}")
    if int(np.prod(dims)) != d:
        raise DimensionMismatch(
            f"subsystem dims {dims} have product {int(np.prod(dims))}, matrix side is {d}"
        )
    return dims


def _wrap(mat: np.ndarray, dims) -> DensityMatrix:
    """Build a DensityMatrix from an already-trusted matrix (symmetrize only)."""
    mat = np.asarray(mat, dtype=complex)
    mat = (mat + mat.conj().T) / 2
    return DensityMatrix(_freeze(mat), _check_dims(dims, mat.shape[0]))


def validate(m, subsystem_dims) -> DensityMatrix:
    """Check Hermiticity, unit trace and positivity, then freeze.

    Deviations within tolerance are repaired (Hermitian symmetrization,
    trace renormalization); anything beyond raises the matching error.
    """
    a = _as_square(m)
    dims = _check_dims(subsystem_dims, a.shape[0])

    herm_dev = float(np.abs(a - a.conj().T).max())
    if herm_dev > HERMITIAN_TOL:
        raise NotHermitian(f"max |rho_ij - conj(rho_ji)| = {herm_dev:.3e} > {HERMITIAN_TOL}")
    a = (a + a.conj().T) / 2

    tr = float(np.trace(a).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotUnitTrace(f"trace {tr!r} deviates from 1 by more than {TRACE_TOL}")
    a = a / tr

    wmin = float(_eigvalsh(a).min())
    if wmin < -PSD_TOL:
        raise NotPSD(f"minimum eigenvalue {wmin:.3e} < -{PSD_TOL}")
    return DensityMatrix(_freeze(a), dims)


def pure_state(amplitudes, normalize: bool = False) -> PureState:
    """Wrap a complex vector as a ket; norm must be 1 within 1e-12."""
    v = np.array(amplitudes, dtype=complex).reshape(-1)
    n = float(np.linalg.norm(v))
    if normalize:
        if n == 0.0:
            raise NotNormalized("cannot normalize the zero vector")
        v = v / n
    elif abs(n - 1.0) > KET_NORM_TOL:
        raise NotNormalized(f"ket norm {n!r} deviates from 1 by more than {KET_NORM_TOL}")
    else:
        v = v / n
    return PureState(_freeze(v))


def unitary(m) -> UnitaryMatrix:
    a = _as_square(m)
    dev = float(np.abs(a.conj().T @ a - np.eye(a.shape[0])).max())
    if dev > UNITARY_TOL:
        raise NotUnitary(f"max |(U^dag U - I)_ij| = {dev:.3e} > {UNITARY_TOL}")
    return UnitaryMatrix(_freeze(a))


# ---------------------------------------------------------------------------
# algebra


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Kronecker product; subsystem dims concatenate."""
    return _wrap(np.kron(a.mat, b.mat), a.dims + b.dims)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state over the kept subsystems (original order)."""
    keep = sorted(set(int(k) for k in keep))
    n = rho.n_subsystems
    if not keep:
        raise BadSubsystemIndex("keep set is empty")
    if keep[0] < 0 or keep[-1] >= n:
        raise BadSubsystemIndex(f"keep indices {keep} out of range for {n} subsystems")
    dims = list(rho.dims)
    r = rho.mat.reshape(dims + dims)
    for idx in sorted(set(range(n)) - set(keep), reverse=True):
        r = np.trace(r, axis1=idx, axis2=idx + len(dims))
        dims.pop(idx)
    dkeep = int(np.prod(dims))
    return _wrap(r.reshape(dkeep, dkeep), dims)


def conjugate(rho: DensityMatrix, u: UnitaryMatrix) -> DensityMatrix:
    """Basis change U^dag rho U."""
    if u.dim != rho.dim:
        raise DimensionMismatch(f"unitary dim {u.dim} != state dim {rho.dim}")
    return _wrap(u.mat.conj().T @ rho.mat @ u.mat, rho.dims)


def dephase(rho: DensityMatrix, basis) -> DensityMatrix:
    """Zero all off-diagonal elements in the given orthonormal basis.

    `basis` is a BasisSpec or a raw unitary whose columns are the basis kets.
    """
    cols = np.asarray(getattr(basis, "columns", basis), dtype=complex)
    if cols.shape != (rho.dim, rho.dim):
        raise DimensionMismatch(f"basis shape {cols.shape} != ({rho.dim}, {rho.dim})")
    diag = np.einsum("in,ij,jn->n", cols.conj(), rho.mat, cols)
    return _wrap((cols * diag.real) @ cols.conj().T, rho.dims)


def maximally_mixed(d: int, dims=None) -> DensityMatrix:
    if d < 1:
        raise DimensionMismatch(f"dimension must be >= 1, got {d}")
    return _wrap(np.eye(d) / d, dims if dims is not None else (d,))


# ---------------------------------------------------------------------------
# spectra and entropy


def _eigvalsh(mat: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(mat)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - library failure
        raise EigenFailure(str(exc)) from exc


def spectrum(rho: DensityMatrix):
    """Eigenvalues (descending, clamped to [0,1], renormalized) and vectors."""
    try:
        w, v = np.linalg.eigh(rho.mat)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - library failure
        raise EigenFailure(str(exc)) from exc
    if float(w.min()) < -PSD_TOL:
        raise NotPSD(f"minimum eigenvalue {float(w.min()):.3e} < -{PSD_TOL}")
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    w = np.clip(w, 0.0, 1.0)
    w = w / w.sum()
    return w, v


def eig_entropy_bits(w: np.ndarray) -> np.ndarray:
    """Shannon entropy in bits of eigenvalue arrays, summed over the last axis.

    Negative dust is clamped to zero and each spectrum is renormalized, the
    same repair `spectrum` applies; 0 log 0 counts as 0.
    """
    w = np.clip(np.asarray(w, dtype=float), 0.0, None)
    w = w / w.sum(axis=-1, keepdims=True)
    safe = np.where(w > 0.0, w, 1.0)
    return -(w * np.log2(safe)).sum(axis=-1)


def entropy_many(mats: np.ndarray) -> np.ndarray:
    """von Neumann entropy in bits for a stack (..., d, d) of density matrices."""
    return eig_entropy_bits(_eigvalsh(mats))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -Tr rho log2 rho, in [0, log2 d]."""
    return float(max(entropy_many(rho.mat), 0.0))


# ---------------------------------------------------------------------------
# random ensembles


def as_rng(seed) -> np.random.Generator:
    """Accept an int seed, a SeedSequence, or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_pure_batch(d: int, n: int, rng) -> np.ndarray:
    """(n, d) Haar-random kets via normalized complex Gaussians."""
    rng = as_rng(rng)
    z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def random_pure_state(d: int, rng) -> PureState:
    return PureState(_freeze(random_pure_batch(d, 1, rng)[0]))


def random_density_batch(d: int, n: int, rng) -> np.ndarray:
    """(n, d, d) Hilbert-Schmidt-distributed density matrices (Ginibre G G^dag)."""
    rng = as_rng(rng)
    g = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    rho = g @ g.conj().transpose(0, 2, 1)
    tr = np.trace(rho, axis1=1, axis2=2).real
    return rho / tr[:, None, None]


def random_density_matrix(d: int, rng, dims=None) -> DensityMatrix:
    return _wrap(random_density_batch(d, 1, rng)[0], dims if dims is not None else (d,))


def random_unitary(d: int, rng) -> UnitaryMatrix:
    """Haar-distributed unitary via QR with phase-fixed R diagonal."""
    rng = as_rng(rng)
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return UnitaryMatrix(_freeze(q * phases))


# ---------------------------------------------------------------------------
# named states


RECIPE_KINDS = (
    "ghz",
    "w",
    "bell",
    "ising_ground",
    "plus_product",
    "werner_mix",
    "random_pure",
    "random_mixed",
    "explicit",
)


@dataclass(frozen=True)
class StateRecipe:
    """Declarative description of a state; see `make_state`.

    Angles are radians.  `mu` is the Werner mixing weight in [0, 1];
    `inner` supplies the pure state a `werner_mix` recipe mixes toward.
    """

    kind: str
    theta: float = 0.0
    phi: float = 0.0
    xi: float = 0.0
    mu: float | None = None
    qubits: int | None = None
    dim: int | None = None
    seed: int = 0
    inner: "StateRecipe | None" = None
    matrix: tuple | None = None  # ((re rows), (im rows)) for kind="explicit"
    matrix_dims: tuple | None = None

    def with_param(self, name: str, value: float) -> "StateRecipe":
        """Copy with one swept parameter replaced; `mu` stays at this level,
        the angles are routed into `inner` when present."""
        if name == "mu":
            return replace(self, mu=float(value))
        if name not in ("theta", "phi", "xi"):
            raise BadRecipe(f"unknown sweep parameter {name!r}")
        if self.inner is not None:
            return replace(self, inner=self.inner.with_param(name, value))
        return replace(self, **{name: float(value)})

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "seed": self.seed}
        for key in ("theta", "phi", "xi"):
            val = getattr(self, key)
            if val != 0.0:
                out[key] = val
        for key in ("mu", "qubits", "dim"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.inner is not None:
            out["inner"] = self.inner.to_dict()
        if self.matrix is not None:
            out["matrix"] = self.matrix
            out["matrix_dims"] = self.matrix_dims
        return out

    @staticmethod
    def from_dict(obj: dict) -> "StateRecipe":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise BadRecipe("recipe must be an object with a 'kind' field")
        known = {
            "kind", "theta", "phi", "xi", "mu", "qubits", "dim", "seed",
            "inner", "matrix", "matrix_dims",
        }
        extra = set(obj) - known
        if extra:
            raise BadRecipe(f"unknown recipe fields {sorted(extra)}")
        kwargs = dict(obj)
        if "inner" in kwargs and kwargs["inner"] is not None:
            kwargs["inner"] = StateRecipe.from_dict(kwargs["inner"])
        return StateRecipe(**kwargs)


def _qubit_count(recipe: StateRecipe, default: int | None = None) -> int:
    n = recipe.qubits if recipe.qubits is not None else default
    if n is None or n < 1:
        raise BadRecipe(f"recipe {recipe.kind!r} needs a positive qubit count")
    return int(n)


def _recipe_dim(recipe: StateRecipe) -> int:
    if recipe.dim is not None:
        if recipe.dim < 1:
            raise BadRecipe(f"dim must be positive, got {recipe.dim}")
        return int(recipe.dim)
    if recipe.qubits is not None:
        return 2 ** _qubit_count(recipe)
    raise BadRecipe(f"recipe {recipe.kind!r} needs 'dim' or 'qubits'")


def make_ket(recipe: StateRecipe) -> PureState:
    """Build the ket for a pure recipe kind."""
    kind = recipe.kind
    if kind == "bell":
        v = np.zeros(4, dtype=complex)
        v[0] = v[3] = 1 / np.sqrt(2)
        return PureState(_freeze(v))
    if kind == "ghz":
        n = _qubit_count(recipe, default=3)
        v = np.zeros(2**n, dtype=complex)
        v[0] = np.cos(recipe.theta)
        v[-1] = np.sin(recipe.theta)
        return pure_state(v, normalize=True)
    if kind == "w":
        if recipe.qubits not in (None, 3):
            raise BadRecipe("the W recipe is defined on 3 qubits")
        v = np.zeros(8, dtype=complex)
        v[0b001] = np.sin(recipe.theta) * np.sin(recipe.phi)
        v[0b010] = np.sin(recipe.theta) * np.cos(recipe.phi)
        v[0b100] = np.cos(recipe.theta)
        return pure_state(v, normalize=True)
    if kind == "ising_ground":
        # two-site transverse-field ground state; exact -2 eigenvector for all xi
        c, s = np.cos(recipe.xi), np.sin(recipe.xi)
        v = np.array([c, 1 - s, 1 - s, c], dtype=complex)
        return pure_state(v, normalize=True)
    if kind == "plus_product":
        n = _qubit_count(recipe, default=2)
        v = np.full(2**n, 2 ** (-n / 2), dtype=complex)
        return PureState(_freeze(v))
    if kind == "random_pure":
        return random_pure_state(_recipe_dim(recipe), recipe.seed)
    raise BadRecipe(f"recipe kind {kind!r} does not describe a pure state")


def _recipe_subsystem_dims(recipe: StateRecipe) -> tuple[int, ...]:
    kind = recipe.kind
    if kind == "bell":
        return (2, 2)
    if kind == "ising_ground":
        return (2, 2)
    if kind == "w":
        return (2, 2, 2)
    if kind == "ghz":
        return (2,) * _qubit_count(recipe, default=3)
    if kind == "plus_product":
        return (2,) * _qubit_count(recipe, default=2)
    if kind in ("random_pure", "random_mixed"):
        if recipe.qubits is not None:
            return (2,) * _qubit_count(recipe)
        return (_recipe_dim(recipe),)
    raise BadRecipe(f"no subsystem split for recipe kind {kind!r}")


def _mix_toward_identity(rho: DensityMatrix, mu: float) -> DensityMatrix:
    if not (0.0 <= mu <= 1.0):
        raise BadRecipe(f"mixing weight mu must lie in [0, 1], got {mu!r}")
    return _wrap((1 - mu) * np.eye(rho.dim) / rho.dim + mu * rho.mat, rho.dims)


def make_state(recipe: StateRecipe) -> DensityMatrix:
    """Construct the density matrix a recipe describes.

    A `mu` on any recipe kind mixes the base state toward I/d with weight
    mu; `werner_mix` is the explicit form of the same thing around an
    `inner` recipe (a fresh Haar-random ket when no inner is given).
    """
    kind = recipe.kind
    if kind not in RECIPE_KINDS:
        raise BadRecipe(f"unknown recipe kind {kind!r}; expected one of {RECIPE_KINDS}")
    if kind == "explicit":
        if recipe.matrix is None or recipe.matrix_dims is None:
            raise BadRecipe("explicit recipe needs 'matrix' and 'matrix_dims'")
        re, im = recipe.matrix
        base = validate(np.array(re, dtype=float) + 1j * np.array(im, dtype=float),
                        recipe.matrix_dims)
    elif kind == "werner_mix":
        if recipe.mu is None:
            raise BadRecipe("werner_mix needs mu in [0, 1]")
        if recipe.inner is not None:
            base = make_state(recipe.inner)
        else:
            d = _recipe_dim(recipe)
            dims = (2,) * recipe.qubits if recipe.qubits is not None else (d,)
            base = random_pure_state(d, recipe.seed).to_density_matrix(dims)
        return _mix_toward_identity(base, recipe.mu)
    elif kind == "random_mixed":
        dims = _recipe_subsystem_dims(recipe)
        base = random_density_matrix(int(np.prod(dims)), recipe.seed, dims)
    else:
        base = make_ket(recipe).to_density_matrix(_recipe_subsystem_dims(recipe))
    if recipe.mu is not None:
        return _mix_toward_identity(base, recipe.mu)
    return base


# ---------------------------------------------------------------------------
# JSON wire format for explicit matrices


def matrix_to_json_dict(rho: DensityMatrix) -> dict:
    return {
        "dims": list(rho.dims),
        "re": rho.mat.real.tolist(),
        "im": rho.mat.imag.tolist(),
    }


def matrix_from_json_dict(obj: dict) -> DensityMatrix:
    if not isinstance(obj, dict) or not {"dims", "re", "im"} <= set(obj):
        raise DimensionMismatch("matrix JSON must carry 'dims', 're' and 'im'")
    re = np.array(obj["re"], dtype=float)
    im = np.array(obj["im"], dtype=float)
    if re.shape != im.shape:
        raise DimensionMismatch(f"'re' shape {re.shape} != 'im' shape {im.shape}")
    return validate(re + 1j * im, obj["dims"])


def load_matrix_json(path) -> DensityMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DimensionMismatch(f"malformed matrix JSON: {exc}") from exc
    return matrix_from_json_dict(obj)
