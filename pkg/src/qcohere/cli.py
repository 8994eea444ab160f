"""Command-line interface.

Subcommands: coherence, sweep, verify-metric, verify-product, sample.
Exit codes: 0 ok, 2 input/validation error, 3 optimizer failure,
4 internal numeric failure.  Any flag can be preloaded from a JSON config
file via --config; explicit flags win over the file.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import harness
from .coherence import basis_coherence, delta_coherence, resolve_basis, total_coherence
from .decompose import check_inequalities
from .errors import (
    NumericError,
    OptimizerFailure,
    QcohereError,
    ValidationError,
)
from .optim import OptimizerConfig
from .qstate import (
    StateRecipe,
    load_matrix_json,
    make_state,
    matrix_to_json_dict,
    random_density_matrix,
    random_pure_state,
    random_unitary,
)

RECIPE_ALIASES = {
    "ghz": "ghz",
    "w": "w",
    "bell": "bell",
    "ising": "ising_ground",
    "ising_ground": "ising_ground",
    "plus": "plus_product",
    "plus_product": "plus_product",
    "werner": "werner_mix",
    "werner_mix": "werner_mix",
    "random-pure": "random_pure",
    "random_pure": "random_pure",
    "random-mixed": "random_mixed",
    "random_mixed": "random_mixed",
}


def _load_config(path) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed config JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("config file must hold a JSON object")
    return obj


def _merged(args, config: dict, name: str, default=None):
    """Flag value if given, else config-file value, else default."""
    val = getattr(args, name.replace("-", "_"), None)
    if val is not None:
        return val
    if name in config:
        return config[name]
    return default


def _recipe_from_args(args, config: dict) -> StateRecipe:
    name = _merged(args, config, "recipe")
    if name is None:
        raise ValidationError("specify a state via --recipe or --matrix")
    if name not in RECIPE_ALIASES:
        raise ValidationError(
            f"unknown recipe {name!r}; expected one of {sorted(set(RECIPE_ALIASES))}"
        )
    return StateRecipe(
        kind=RECIPE_ALIASES[name],
        theta=float(_merged(args, config, "theta", 0.0)),
        phi=float(_merged(args, config, "phi", 0.0)),
        xi=float(_merged(args, config, "xi", 0.0)),
        mu=(lambda m: None if m is None else float(m))(_merged(args, config, "mu")),
        qubits=(lambda q: None if q is None else int(q))(_merged(args, config, "qubits")),
        dim=(lambda d: None if d is None else int(d))(_merged(args, config, "dim")),
        seed=int(_merged(args, config, "seed", 0)),
    )


def _optimizer_from_args(args, config: dict) -> OptimizerConfig:
    return OptimizerConfig(
        starts=int(_merged(args, config, "starts", 8)),
        max_evals=int(_merged(args, config, "max-evals", 5000)),
        tol=float(_merged(args, config, "tol", 1e-10)),
        seed=int(_merged(args, config, "opt-seed", 0)),
        polish_evals=int(_merged(args, config, "polish-evals", 0)),
    ).check()


def _emit(obj: dict, out_path) -> None:
    text = json.dumps(obj, indent=2)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_coherence(args) -> int:
    config = _load_config(args.config)
    if _merged(args, config, "matrix"):
        rho = load_matrix_json(_merged(args, config, "matrix"))
    else:
        rho = make_state(_recipe_from_args(args, config))
    basis = resolve_basis(_merged(args, config, "basis", "computational"), rho)
    cfg = _optimizer_from_args(args, config)
    n_terms = _merged(args, config, "n-terms")
    n_terms = None if n_terms is None else int(n_terms)

    out = {
        "dims": list(rho.dims),
        "basis": basis.label or "custom",
        "C": total_coherence(rho),
    }
    if rho.n_subsystems >= 2:
        report = check_inequalities(rho, basis, cfg, n_terms)
        out.update(report.to_dict())
    else:
        c_b, diag_min, result = basis_coherence(rho, basis, cfg)
        delta = delta_coherence(rho, basis, minimizer=diag_min)
        out.update(
            C_basis=c_b,
            delta_C=delta,
            delta_C_dephased=delta_coherence(rho, basis, use_dephased=True),
            delta_convention="argmin",
            slack41=c_b + delta - out["C"],
            starts=len(result.start_values),
            evaluations=result.evaluations,
            converged=result.converged,
        )
    _emit(out, args.out)
    return 0


def cmd_sweep(args) -> int:
    spec = harness.SweepSpec.from_json(args.spec)
    if args.output is not None:
        spec = replace(spec, output=args.output)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    records = harness.run_sweep(spec)
    harness.write_sweep_csv(records, spec.output)
    print(f"wrote {len(records)} rows to {spec.output}")
    return 0


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated integer list, got {text!r}") from exc


def cmd_verify_metric(args) -> int:
    dims = _int_list(args.dims)
    if not dims:
        raise ValidationError("--dims must name at least one dimension")
    summary = harness.verify_metric_campaign(
        dims, args.triples, args.ensemble, args.seed
    )
    _emit(summary, args.out)
    return 0


def cmd_verify_product(args) -> int:
    qubits = _int_list(args.qubits)
    if not qubits or any(q < 2 for q in qubits):
        raise ValidationError("--qubits must name counts >= 2")
    summary = harness.verify_product_campaign(
        qubits, args.states, args.trials, args.seed
    )
    _emit(summary, args.out)
    return 0


def cmd_sample(args) -> int:
    if args.dim < 1:
        raise ValidationError(f"--dim must be >= 1, got {args.dim}")
    if args.count < 1:
        raise ValidationError(f"--count must be >= 1, got {args.count}")
    rng = np.random.default_rng(args.seed)
    draws = []
    for _ in range(args.count):
        if args.kind == "pure":
            rho = random_pure_state(args.dim, rng).to_density_matrix()
            draws.append(matrix_to_json_dict(rho))
        elif args.kind == "mixed":
            draws.append(matrix_to_json_dict(random_density_matrix(args.dim, rng)))
        else:
            u = random_unitary(args.dim, rng)
            draws.append({
                "dims": [args.dim],
                "re": u.mat.real.tolist(),
                "im": u.mat.imag.tolist(),
            })
    _emit(draws[0] if args.count == 1 else draws, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcohere",
        description="Basis-independent quantum coherence and its distribution.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coherence", help="coherence report for one state (JSON on stdout)")
    p.add_argument("--recipe", help="ghz | w | bell | ising | plus | werner | "
                                    "random-pure | random-mixed")
    p.add_argument("--matrix", help="path to a {dims, re, im} JSON density matrix")
    p.add_argument("--theta", type=float)
    p.add_argument("--phi", type=float)
    p.add_argument("--xi", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--qubits", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--basis", help="computational | hadamard | path to JSON unitary")
    p.add_argument("--starts", type=int)
    p.add_argument("--max-evals", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--opt-seed", type=int)
    p.add_argument("--polish-evals", type=int)
    p.add_argument("--n-terms", type=int)
    p.add_argument("--config", help="JSON file of flag defaults (flags win)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("sweep", help="run a parameter sweep from a JSON spec to CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--output", help="override the spec's output path")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify-metric", help="triangle-inequality slack campaign")
    p.add_argument("--dims", default="2,3,4,8")
    p.add_argument("--triples", type=int, default=100000)
    p.add_argument("--ensemble", choices=("mixed", "pure"), default="mixed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_metric)

    p = sub.add_parser("verify-product", help="closest-product-state violation campaign")
    p.add_argument("--qubits", default="2,3")
    p.add_argument("--states", type=int, default=100)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_product)

    p = sub.add_parser("sample", help="draw random states as matrix JSON")
    p.add_argument("--kind", choices=("pure", "mixed", "unitary"), default="mixed")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OptimizerFailure as exc:
        print(f"optimizer failure: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except QcohereError as exc:  # pragma: no cover - catch-all for new kinds
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:  # console-script shim
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
