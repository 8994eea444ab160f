"""Multi-start derivative-free minimizer over structured parameter vectors.

Parameter vectors are concatenations of blocks; each block is either

  * ``simplex``: unconstrained logits mapped through a softmax to a point
    on the probability simplex, or
  * ``sphere``: real coordinates renormalized to the unit Euclidean sphere
    (interleaved re/im pairs when encoding complex kets).

The search is a coordinate pattern search with a shrinking step schedule:
poll all +/- single-coordinate moves, accept the best strict improvement,
ride improving directions with geometrically longer probes, shrink the
step when a poll fails.  An optional Nelder-Mead stage polishes the
multi-start winner.  Objectives are *batched*: given an (m, n) array of
candidate parameter vectors they return m values, which lets the poll
amortize eigensolves across candidates; given a single 1-D vector they
return a scalar (the polish path).

Results are deterministic for a given config seed regardless of how the
caller schedules concurrent work: starts are reduced by (value, start
index) and each start's random state derives only from the config.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BadParameter, NonFiniteObjective, OptimizerFailure


@dataclass(frozen=True)
class Block:
    kind: str  # "simplex" | "sphere"
    size: int


@dataclass(frozen=True)
class OptimizerConfig:
    starts: int = 8
    max_evals: int = 5000
    tol: float = 1e-10
    seed: int = 0
    step_init: float = 0.25
    step_shrink: float = 0.5
    step_min: float = 1e-7
    polish_evals: int = 0  # extra Nelder-Mead budget on the multi-start winner

    def check(self) -> "OptimizerConfig":
        if self.starts < 1 or self.max_evals < 1:
            raise BadParameter("starts and max_evals must be positive")
        if not (0.0 < self.tol < 1.0):
            raise BadParameter(f"tol must lie in (0, 1), got {self.tol}")
        if not (0.0 < self.step_shrink < 1.0) or self.step_init <= 0 or self.step_min <= 0:
            raise BadParameter("step schedule parameters must be positive (shrink in (0,1))")
        if self.polish_evals < 0:
            raise BadParameter("polish_evals must be >= 0")
        return self


@dataclass
class OptimizerResult:
    value: float
    params: np.ndarray
    evaluations: int
    converged: bool
    start_values: list[float] = field(default_factory=list)


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@lru_cache(maxsize=256)
def _block_slices_cached(blocks: tuple) -> tuple:
    out, off = [], 0
    for b in blocks:
        if b.kind not in ("simplex", "sphere"):
            raise BadParameter(f"unknown block kind {b.kind!r}")
        if b.size < 1:
            raise BadParameter("block size must be positive")
        out.append((b, slice(off, off + b.size)))
        off += b.size
    return tuple(out)


def _block_slices(blocks):
    return _block_slices_cached(tuple(blocks))


def total_size(blocks) -> int:
    return sum(b.size for b in blocks)


def project(x: np.ndarray, blocks) -> np.ndarray:
    """Map raw vectors (rows) onto the feasible encoding.

    Sphere blocks renormalize to unit length; simplex logits are recentred
    so they cannot drift to overflow.
    """
    x = np.array(x, dtype=float)
    flat = x.ndim == 1
    if flat:
        x = x[None]
    for b, sl in _block_slices(blocks):
        if b.kind == "sphere":
            norms = np.linalg.norm(x[:, sl], axis=1, keepdims=True)
            norms[norms == 0.0] = 1.0
            x[:, sl] /= norms
        else:
            x[:, sl] -= x[:, sl].mean(axis=1, keepdims=True)
    return x[0] if flat else x


def random_start(blocks, rng: np.random.Generator) -> np.ndarray:
    """Dirichlet(1) weights for simplex blocks, Haar-like sphere points."""
    parts = []
    for b in blocks:
        if b.kind == "simplex":
            parts.append(np.log(rng.exponential(size=b.size)))
        else:
            parts.append(rng.standard_normal(b.size))
    return project(np.concatenate(parts), blocks)


def _poll_points(x: np.ndarray, step: float, blocks) -> np.ndarray:
    n = x.size
    pts = np.repeat(x[None], 2 * n, axis=0)
    idx = np.arange(n)
    pts[2 * idx, idx] += step
    pts[2 * idx + 1, idx] -= step
    return project(pts, blocks)


def _descend(objective, x0, blocks, cfg: OptimizerConfig):
    x = project(np.asarray(x0, dtype=float), blocks)
    fx = float(objective(x[None])[0])
    if not np.isfinite(fx):
        raise NonFiniteObjective(f"objective is {fx!r} at a start point")
    evals = 1
    step = cfg.step_init
    converged = False
    n = x.size
    while evals + 2 * n <= cfg.max_evals:
        pts = _poll_points(x, step, blocks)
        vals = np.asarray(objective(pts), dtype=float)
        evals += len(pts)
        if not np.all(np.isfinite(vals)):
            raise NonFiniteObjective("objective returned a non-finite value")
        best = int(np.argmin(vals))
        if vals[best] < fx:
            gain = fx - vals[best]
            direction = pts[best] - x
            x, fx = pts[best], float(vals[best])
            # ride the improving direction with geometrically longer probes
            while evals + 3 <= cfg.max_evals:
                probes = project(x[None] + np.outer([1.0, 2.0, 4.0], direction), blocks)
                pvals = np.asarray(objective(probes), dtype=float)
                evals += 3
                if not np.all(np.isfinite(pvals)):
                    raise NonFiniteObjective("objective returned a non-finite value")
                k = int(np.argmin(pvals))
                if pvals[k] >= fx:
                    break
                gain += fx - pvals[k]
                x, fx = probes[k], float(pvals[k])
                direction = direction * (1.0, 2.0, 4.0)[k]
            if gain < cfg.tol and step <= cfg.step_min:
                converged = True
                break
            step = min(step / cfg.step_shrink, cfg.step_init)
        else:
            if step <= cfg.step_min:
                converged = True
                break
            step *= cfg.step_shrink
    return fx, x, evals, converged


def minimize(objective, blocks, cfg: OptimizerConfig | None = None,
             explicit_starts=()) -> OptimizerResult:
    """Run pattern search from explicit plus random starts; keep the best.

    Every explicit start is always used, so the result never exceeds the
    objective at any of them.  Random starts top the list up to
    ``cfg.starts``.  A start that spends its evaluation budget is reported
    with ``converged=False`` rather than raised.
    """
    cfg = (cfg or OptimizerConfig()).check()
    blocks = list(blocks)
    n = total_size(blocks)
    rng = np.random.default_rng(cfg.seed)
    starts = [project(np.asarray(s, dtype=float), blocks) for s in explicit_starts]
    for s in starts:
        if s.size != n:
            raise BadParameter(f"explicit start has {s.size} parameters, expected {n}")
    for _ in range(max(cfg.starts - len(starts), 0)):
        starts.append(random_start(blocks, rng))
    if not starts:
        raise OptimizerFailure("no starts supplied and cfg.starts is 0")

    best = None
    start_values: list[float] = []
    total_evals = 0
    all_converged = True
    for i, s in enumerate(starts):
        fx, x, evals, conv = _descend(objective, s, blocks, cfg)
        start_values.append(fx)
        total_evals += evals
        all_converged = all_converged and conv
        if best is None or fx < best[0]:
            best = (fx, x, i)
    if best is None or not np.isfinite(best[0]):  # pragma: no cover - guarded above
        raise OptimizerFailure("no finite objective value was found")
    value, params = best[0], best[1]
    if cfg.polish_evals > 0 and value > _POLISH_FLOOR:
        value, params, used = _polish(objective, params, value, blocks, cfg)
        total_evals += used
    return OptimizerResult(
        value=value,
        params=params,
        evaluations=total_evals,
        converged=all_converged,
        start_values=start_values,
    )


# below this value a divergence objective is effectively at its floor and
# simplex refinement would only crawl along the zero plateau
_POLISH_FLOOR = 1e-14


def _polish(objective, x0, f0, blocks, cfg: OptimizerConfig):
    """Restarted Nelder-Mead refinement of the multi-start winner.

    Simplex moves handle the curved valleys that stall coordinate polls
    near a minimum; rebuilding the simplex between rounds escapes the
    contraction stagnation a single long run suffers from.  The result is
    kept only when it improves on the pattern-search value.
    """
    from scipy.optimize import minimize as _nm_minimize

    count = 0

    def scalar(x):
        nonlocal count
        count += 1
        val = objective(project(x, blocks))
        return float(np.asarray(val).reshape(-1)[0])

    best_f, best_x = f0, x0
    round_budget = max(min(cfg.polish_evals, 200 * total_size(blocks)), 500)
    while count < cfg.polish_evals and best_f > _POLISH_FLOOR:
        out = _nm_minimize(
            scalar, best_x, method="Nelder-Mead",
            options={"maxfev": min(round_budget, cfg.polish_evals - count),
                     "fatol": 1e-14, "xatol": 1e-9, "adaptive": True},
        )
        improved = np.isfinite(out.fun) and out.fun < best_f
        if improved:
            gain = best_f - float(out.fun)
            best_f, best_x = float(out.fun), project(out.x, blocks)
            if gain < 1e-13:
                break
        else:
            break
    return best_f, best_x, count
