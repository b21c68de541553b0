"""Command-line front end: reproducible runs with file-based inputs and
machine-readable outputs.

Exit codes: 0 success (including the expected negative result),
2 input/configuration error, 10 a counterexample to the negative
result was found (so pipelines cannot miss it).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import dual as dual_mod
from . import inverse as inverse_mod
from .errors import TspdualError
from .formulation import build_formulation, encode_tour, objective
from .instance import (
    DistanceMatrix,
    brute_force_optimum,
    load_instance,
    random_euclidean_instance,
)
from .reduction import reduce_formulation, reduced_to_dict

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_COUNTEREXAMPLE = 10


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _write_csv_matrix(path: Path, mat: np.ndarray) -> None:
    lines = [",".join(repr(float(v)) for v in row) for row in np.atleast_2d(mat)]
    path.write_text("\n".join(lines) + "\n")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    payload = json.loads(Path(path).read_text())
    if not isinstance(payload, dict):
        raise TspdualError("config file must hold a JSON object")
    return payload


def _get_instance(args) -> tuple[str, DistanceMatrix]:
    if args.instance is not None:
        d, _ = load_instance(args.instance)
        return Path(args.instance).stem, d
    n = args.n if args.n is not None else 4
    seed = args.seed if args.seed is not None else 0
    d, _ = random_euclidean_instance(n, seed)
    return f"euclidean-n{n}-seed{seed}", d


def cmd_formulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    instance_id, d = _get_instance(args)
    f = build_formulation(d)
    _write_csv_matrix(out / "A.csv", f.A)
    _write_csv_matrix(out / "C.csv", f.C)
    _write_csv_matrix(out / "D.csv", f.D)
    oracle = brute_force_optimum(d)
    _write_json(
        out / "summary.json",
        {
            "instance": instance_id,
            "n": d.n,
            "symmetric": bool(np.array_equal(f.A, f.A.T)),
            "oracle_tour": list(oracle.best_tour.order),
            "oracle_length": oracle.best_length,
            "oracle_tour_objective": objective(f, encode_tour(oracle.best_tour)),
            "config": _effective_instance_config(args, instance_id),
        },
    )
    return EXIT_OK


def _paper_structure_match(d: DistanceMatrix, r) -> bool:
    # n=4 closed forms: A_r block-tridiagonal in d2, b_r = (-d1; 0; -d1),
    # E_r the fixed 5x9 binary pattern
    d1 = d.entries[0, 1:]
    d2 = d.entries[1:, 1:]
    z = np.zeros((3, 3))
    A_expect = np.block([[z, d2, z], [d2, z, d2], [z, d2, z]])
    b_expect = np.concatenate([-d1, np.zeros(3), -d1])
    E_expect = np.array(
        [
            [1, 1, 1, 0, 0, 0, 0, 0, 0],
            [0, 0, 0, 1, 1, 1, 0, 0, 0],
            [0, 0, 0, 0, 0, 0, 1, 1, 1],
            [1, 0, 0, 1, 0, 0, 1, 0, 0],
            [0, 1, 0, 0, 1, 0, 0, 1, 0],
        ],
        dtype=float,
    )
    return (
        np.array_equal(r.A_r, A_expect)
        and np.array_equal(r.b_r, b_expect)
        and np.array_equal(r.E_r, E_expect)
    )


def cmd_reduce(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    instance_id, d = _get_instance(args)
    r = reduce_formulation(build_formulation(d))
    payload = reduced_to_dict(r)
    if d.n == 4:
        payload["paper_match"] = _paper_structure_match(d, r)
    payload["instance"] = instance_id
    payload["config"] = _effective_instance_config(args, instance_id)
    _write_json(out / "reduced.json", payload)
    return EXIT_OK


def cmd_dual(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    instance_id, d = _get_instance(args)
    cfg = dual_mod.AscentConfig.from_dict(_load_config(args.config))
    r = reduce_formulation(build_formulation(d))
    result = dual_mod.dual_ascent(r, cfg=cfg)
    oracle = brute_force_optimum(d)
    verdict = dual_mod.verify_global(r, result.best_point, oracle)

    lines = ["iteration,g,gradient_norm,min_eig"]
    for it, (g, gn, lo) in enumerate(result.trajectory):
        lines.append(f"{it},{g!r},{gn!r},{lo!r}")
    (out / "trace.csv").write_text("\n".join(lines) + "\n")

    gap = oracle.best_length - result.best_value
    _write_json(
        out / "gap_record.json",
        {
            "instance": instance_id,
            "n": d.n,
            "seed": args.seed if args.seed is not None else 0,
            "oracle_optimum": oracle.best_length,
            "dual_bound": result.best_value,
            "gap": gap,
            "iterations": result.iterations,
            "termination": result.termination.value,
            "verdict": verdict.value,
            "config": {
                **_effective_instance_config(args, instance_id),
                "ascent": asdict(cfg),
            },
        },
    )
    if verdict is dual_mod.Verdict.ConfirmsTheorem2:
        print(
            "COUNTEREXAMPLE: dual critical point recovered a binary optimal "
            "tour; see gap_record.json",
            file=sys.stderr,
        )
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK


def cmd_inverse(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = _load_config(args.config)
    if args.seed is not None:
        payload["seed"] = args.seed
    cfg = inverse_mod.SearchConfig.from_dict(payload)
    report = inverse_mod.inverse_search(cfg=cfg)
    doc = report.to_dict()
    doc["config"] = cfg.to_dict()
    _write_json(out / "report.json", doc)
    if report.verdict == "FeasibleCounterexample":
        print(
            "COUNTEREXAMPLE: feasible (d, lambda, mu) found; see report.json",
            file=sys.stderr,
        )
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK


def cmd_experiment(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = _load_config(args.config)
    if args.seed is not None:
        payload["seed"] = args.seed
    k = int(payload.get("k", 10))
    ns = [int(v) for v in payload.get("ns", [4, 5])]
    seed = int(payload.get("seed", 0))
    cfg = dual_mod.AscentConfig.from_dict(payload.get("ascent", {}))

    effective = {"k": k, "ns": ns, "seed": seed, "ascent": asdict(cfg)}
    lines = [
        "# config: " + json.dumps(effective),
        "instance_id,n,seed,oracle_optimum,dual_bound,gap,iterations,termination",
    ]
    gaps = []
    for n in ns:
        for i in range(k):
            inst_seed = seed + i
            d, _ = random_euclidean_instance(n, inst_seed)
            r = reduce_formulation(build_formulation(d))
            result = dual_mod.dual_ascent(r, cfg=cfg)
            oracle = brute_force_optimum(d)
            gap = oracle.best_length - result.best_value
            gaps.append(gap)
            lines.append(
                f"euclidean-n{n}-seed{inst_seed},{n},{inst_seed},"
                f"{oracle.best_length!r},{result.best_value!r},{gap!r},"
                f"{result.iterations},{result.termination.value}"
            )
    if gaps:
        arr = np.array(gaps)
        lines.append(
            f"# summary: mean={arr.mean()!r} min={arr.min()!r} max={arr.max()!r}"
        )
    (out / "gaps.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _effective_instance_config(args, instance_id: str) -> dict:
    return {
        "instance": args.instance,
        "instance_id": instance_id,
        "n": args.n,
        "seed": args.seed if args.seed is not None else 0,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tspdual",
        description="TSP quadratic formulation, Lagrangian dual, and inverse "
        "feasibility search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance=True):
        if instance:
            p.add_argument("--instance", help="instance JSON path")
            p.add_argument("--n", type=int, help="generate an n-city instance")
        p.add_argument("--config", help="config JSON path")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="random seed")

    p = sub.add_parser("formulate", help="write A/C/D matrices and a summary")
    common(p)
    p.set_defaults(func=cmd_formulate)

    p = sub.add_parser("reduce", help="write the reduced problem JSON")
    common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("dual", help="run dual ascent, write trace and gap record")
    common(p)
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("inverse", help="run the inverse feasibility search")
    common(p, instance=False)
    p.set_defaults(func=cmd_inverse)

    p = sub.add_parser("experiment", help="duality-gap sweep over random instances")
    common(p, instance=False)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TspdualError, OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
