"""Experiment runner: parameter sweeps and Monte-Carlo verification campaigns.

Sweeps evaluate the full coherence decomposition on a parameter grid and
emit one CSV row per grid point with a fixed column order.  Campaigns
sample random states to probe the metric triangle inequality and the
closest-product-state property, reporting worst-case slacks instead of
asserting them.

Determinism: every stochastic step derives its seed from the spec seed and
the grid/sample index, so reruns are byte-identical (wall-time column
aside) no matter how many workers run.  Worker count is capped by the
QCOHERE_THREADS environment variable.
"""
from __future__ import annotations

import concurrent.futures
import json
import os
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .coherence import BasisSpec, basis_coherence, resolve_basis
from .decompose import (
    DecompositionReport,
    assemble_report,
    intrinsic_coherence,
    verify_closest_product,
)
from .divergence import metric, metric_stack
from .errors import BadParameter, BadRecipe
from .optim import OptimizerConfig
from .qstate import (
    DensityMatrix,
    StateRecipe,
    _wrap,
    make_state,
    maximally_mixed,
    random_density_batch,
    random_pure_batch,
)

CSV_COLUMNS = (
    "param", "C", "C_c", "C_l", "C_I", "C_L", "C_basis", "delta_C",
    "slack29", "slack36", "slack37", "slack41", "slack42",
    "converged", "walltime_ms",
)

SLACK_WARN = -1e-9

_SWEEPABLE_ANGLES = {"ghz": {"theta"}, "w": {"theta", "phi"}, "ising_ground": {"xi"}}


def worker_count() -> int:
    raw = os.environ.get("QCOHERE_THREADS", "")
    try:
        return max(int(raw), 1) if raw else 1
    except ValueError:
        return 1


def _point_seed(root: int, index: int) -> int:
    return int(np.random.SeedSequence([root, index]).generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    recipe: StateRecipe
    param: str
    start: float
    stop: float
    points: int
    basis: str = "computational"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    seed: int = 0
    output: str = "sweep.csv"
    n_terms: int | None = None

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    def check(self) -> "SweepSpec":
        if self.points < 2:
            raise BadParameter(f"sweep needs at least 2 grid points, got {self.points}")
        if self.param not in ("theta", "phi", "xi", "mu"):
            raise BadParameter(f"unknown sweep parameter {self.param!r}")
        if self.param != "mu":
            target = self.recipe
            if target.kind == "werner_mix" and target.inner is not None:
                target = target.inner
            if self.param not in _SWEEPABLE_ANGLES.get(target.kind, set()):
                raise BadRecipe(
                    f"parameter {self.param!r} does not steer recipe kind {target.kind!r}"
                )
        self.optimizer.check()
        return self

    @staticmethod
    def from_dict(obj: dict) -> "SweepSpec":
        if not isinstance(obj, dict):
            raise BadParameter("sweep spec must be a JSON object")
        try:
            recipe = StateRecipe.from_dict(obj["recipe"])
            sweep = obj["sweep"]
            opt = OptimizerConfig(**obj.get("optimizer", {}))
            return SweepSpec(
                recipe=recipe,
                param=str(sweep["param"]),
                start=float(sweep["start"]),
                stop=float(sweep["stop"]),
                points=int(sweep["points"]),
                basis=str(obj.get("basis", "computational")),
                optimizer=opt,
                seed=int(obj.get("seed", 0)),
                output=str(obj.get("output", "sweep.csv")),
                n_terms=obj.get("n_terms"),
            ).check()
        except KeyError as exc:
            raise BadParameter(f"sweep spec is missing field {exc}") from exc
        except TypeError as exc:
            raise BadParameter(f"bad sweep spec: {exc}") from exc

    @staticmethod
    def from_json(path) -> "SweepSpec":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise BadParameter(f"malformed sweep spec JSON: {exc}") from exc
        return SweepSpec.from_dict(obj)


@dataclass
class SweepPoint:
    """One evaluated grid point, carrying the argmin states so sweep-level
    refinement can tighten the optimization-based columns."""

    param: float
    rho: DensityMatrix
    c_i: float
    sigma_min: DensityMatrix
    c_basis: float
    diag_min: DensityMatrix
    starts: int
    evaluations: int
    converged: bool
    walltime_ms: float


@dataclass
class SweepRecord:
    param: float
    report: DecompositionReport
    walltime_ms: float


def _evaluate_point(spec: SweepSpec, basis: BasisSpec, value: float, index: int) -> SweepPoint:
    t0 = time.perf_counter()
    recipe = spec.recipe.with_param(spec.param, value)
    rho = make_state(recipe)
    cfg = replace(spec.optimizer, seed=_point_seed(spec.seed, index))
    c_i, ansatz, sep_res = intrinsic_coherence(rho, cfg, spec.n_terms)
    c_b, diag_min, diag_res = basis_coherence(rho, basis, cfg)
    return SweepPoint(
        param=float(value),
        rho=rho,
        c_i=c_i,
        sigma_min=ansatz.to_density_matrix(),
        c_basis=c_b,
        diag_min=diag_min,
        starts=len(sep_res.start_values) + len(diag_res.start_values),
        evaluations=sep_res.evaluations + diag_res.evaluations,
        converged=sep_res.converged and diag_res.converged,
        walltime_ms=(time.perf_counter() - t0) * 1e3,
    )


def _refine_mixing_sweep(points: list[SweepPoint]) -> None:
    """Tighten optimization columns along a mixing-weight sweep.

    A state family rho(mu) = mu * rho_1 + (1-mu) * I/d admits candidate
    propagation: any feasible intermediate found at mu_j, mixed toward I/d
    by mu_i/mu_j, is feasible at mu_i < mu_j and can only shrink the
    distance (joint convexity of the divergence).  Walking the grid from
    high to low mu and keeping the better of {own optimum, propagated
    candidate} therefore yields upper estimates that are monotone in mu up
    to eigensolver noise, independent of optimizer quality.
    """
    order = sorted(range(len(points)), key=lambda i: points[i].param, reverse=True)
    prev: SweepPoint | None = None
    for i in order:
        pt = points[i]
        if prev is not None and prev.param > 0.0:
            t = pt.param / prev.param
            eye = maximally_mixed(pt.rho.dim).mat
            sep_cand = _wrap(t * prev.sigma_min.mat + (1 - t) * eye, pt.rho.dims)
            v = metric(pt.rho, sep_cand)
            if v < pt.c_i:
                pt.c_i, pt.sigma_min = v, sep_cand
            diag_cand = _wrap(t * prev.diag_min.mat + (1 - t) * eye, pt.rho.dims)
            v = metric(pt.rho, diag_cand)
            if v < pt.c_basis:
                pt.c_basis, pt.diag_min = v, diag_cand
        prev = pt


def run_sweep(spec: SweepSpec) -> list[SweepRecord]:
    """Evaluate the grid (in parallel when QCOHERE_THREADS > 1)."""
    spec = spec.check()
    probe = make_state(spec.recipe.with_param(spec.param, spec.grid()[0]))
    basis = resolve_basis(spec.basis, probe)
    values = spec.grid()
    workers = worker_count()
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(
                lambda iv: _evaluate_point(spec, basis, iv[1], iv[0]),
                enumerate(values),
            ))
    else:
        points = [_evaluate_point(spec, basis, v, i) for i, v in enumerate(values)]
    if spec.param == "mu":
        _refine_mixing_sweep(points)
    records = []
    for pt in points:
        report = assemble_report(
            pt.rho, basis, pt.c_i, pt.sigma_min, pt.c_basis, pt.diag_min,
            starts=pt.starts, evaluations=pt.evaluations, converged=pt.converged,
        )
        records.append(SweepRecord(pt.param, report, pt.walltime_ms))
    return records


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def sweep_rows(records: list[SweepRecord]) -> list[str]:
    rows = [",".join(CSV_COLUMNS)]
    for rec in records:
        r = rec.report
        rows.append(",".join([
            _fmt(rec.param),
            _fmt(r.C), _fmt(r.C_c), _fmt(r.C_l), _fmt(r.C_I), _fmt(r.C_L),
            _fmt(r.C_basis), _fmt(r.delta_C),
            _fmt(r.slack29), _fmt(r.slack36), _fmt(r.slack37),
            _fmt(r.slack41), _fmt(r.slack42),
            str(int(r.converged)),
            format(rec.walltime_ms, ".3f"),
        ]))
    return rows


def check_records(records: list[SweepRecord]) -> list[str]:
    """Bound checks on emitted rows; returns human-readable complaints."""
    problems = []
    for rec in records:
        for name, val in rec.report.coherence_values().items():
            if not (-1e-12 <= val <= 1.0 + 1e-12):
                problems.append(f"param={rec.param!r}: {name}={val!r} outside [0, 1]")
        for name, val in rec.report.slacks().items():
            if val < SLACK_WARN:
                problems.append(f"param={rec.param!r}: {name}={val!r} < {SLACK_WARN}")
    return problems


def write_sweep_csv(records: list[SweepRecord], path) -> None:
    """Atomically write the CSV; a failed run never leaves partial output."""
    for problem in check_records(records):
        print(f"warning: {problem}", file=sys.stderr)
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(sweep_rows(records)) + "\n")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


# ---------------------------------------------------------------------------
# verification campaigns


def _sample_triples(d: int, n: int, ensemble: str, rng) -> tuple[np.ndarray, ...]:
    if ensemble == "mixed":
        return tuple(random_density_batch(d, n, rng) for _ in range(3))
    if ensemble == "pure":
        out = []
        for _ in range(3):
            kets = random_pure_batch(d, n, rng)
            out.append(np.einsum("ni,nj->nij", kets, kets.conj()))
        return tuple(out)
    raise BadParameter(f"unknown ensemble {ensemble!r}; expected 'mixed' or 'pure'")


_SAMPLE_BLOCK = 2048  # triples are drawn in fixed seeded blocks, so the
                      # stream at a given index depends only on (seed, dim)


def verify_metric_campaign(dims, triples: int, ensemble: str = "mixed",
                           seed: int = 0) -> dict:
    """Min triangle slack D(a,b) + D(b,c) - D(a,c) over random triples.

    Never asserts; the caller decides what a negative slack means.  The
    worst triple is reproducible from (seed, dim, index).
    """
    if triples < 1:
        raise BadParameter(f"triples must be >= 1, got {triples}")
    per_dim = []
    for d in dims:
        done = 0
        min_slack, worst_index = np.inf, -1
        while done < triples:
            n = min(_SAMPLE_BLOCK, triples - done)
            block = done // _SAMPLE_BLOCK
            rng = np.random.default_rng(
                np.random.SeedSequence([seed, int(d), block])
            )
            a, b, c = _sample_triples(int(d), n, ensemble, rng)
            slack = (
                metric_stack(a, b)
                + metric_stack(b, c)
                - metric_stack(a, c)
            )
            i = int(np.argmin(slack))
            if float(slack[i]) < min_slack:
                min_slack, worst_index = float(slack[i]), done + i
            done += n
        per_dim.append({"dim": int(d), "min_slack": min_slack, "worst_index": worst_index})
    return {
        "ensemble": ensemble,
        "triples": triples,
        "seed": seed,
        "per_dim": per_dim,
        "min_slack": min(row["min_slack"] for row in per_dim),
    }


def verify_product_campaign(qubit_counts, states: int, trials: int,
                            seed: int = 0) -> dict:
    """Max closest-product violation over random mixed states.

    For each state, `trials` random product states are tested against the
    product of the marginals; positive numbers would contradict the
    closest-product property.
    """
    if states < 1 or trials < 1:
        raise BadParameter("states and trials must be >= 1")
    per_n = []
    for n in qubit_counts:
        n = int(n)
        dims = (2,) * n
        d = 2**n
        worst, worst_state = -np.inf, -1
        for i in range(states):
            ss = np.random.SeedSequence([seed, n, i])
            rng = np.random.default_rng(ss)
            rho = _wrap(random_density_batch(d, 1, rng)[0], dims)
            v = verify_closest_product(rho, trials, rng)
            if v > worst:
                worst, worst_state = v, i
        per_n.append({"qubits": n, "max_violation": worst, "worst_state": worst_state})
    return {
        "states": states,
        "trials": trials,
        "seed": seed,
        "per_qubits": per_n,
        "max_violation": max(row["max_violation"] for row in per_n),
    }
