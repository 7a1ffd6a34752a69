"""Command-line front end: inject, impute, select, run, sweep, compare.

Exit codes: 0 success, 2 configuration error, 3 numerical failure. Every
command accepts --config pointing at a JSON file whose keys mirror the flag
names; explicit flags override file values. `run` persists the effective
configuration next to its outputs so results can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .dataset import (DEFAULT_MISSING_TOKENS, IncompleteDataset, apply_normalizer,
                      fit_normalizer, load_csv, save_csv)
from .errors import NumericalError
from .evaluation import EvalReport, run_protocol, wilcoxon_signed_rank
from .ewmc import EwmcConfig, normalize_weights, run_m_stage
from .framework import FrameworkConfig, run as run_framework
from .imputers import ImputerConfig, build_ensemble, impute
from .missingness import MissingSpec, inject
from .relief import ReliefConfig, mu_relief_a, rank_features, relieff
from .seeding import child_seed

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

DEFAULT_METHODS = ["ewmc+mu-reliefa", "knn+mu-reliefa", "svd+mu-reliefa", "em+mu-reliefa"]


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x) -> str:
    return repr(float(x))


def _load_config_file(args: argparse.Namespace, argv: list[str]) -> None:
    """Fill argparse values from a JSON config; explicitly given flags win."""
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            values = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read config {args.config}: {exc}") from exc
    explicit = {a.split("=", 1)[0] for a in argv if a.startswith("--")}
    for key, value in values.items():
        flag = "--" + key.replace("_", "-")
        if hasattr(args, key) and flag not in explicit:
            setattr(args, key, value)


def _framework_config(args) -> FrameworkConfig:
    return FrameworkConfig(
        ewmc=EwmcConfig(rank=args.rank, gamma=args.gamma, eta=args.eta, seed=args.seed),
        relief=ReliefConfig(seed=args.seed),
        delta=args.delta,
        max_outer_iter=args.max_outer,
        imputer_cfg=ImputerConfig(knn_k=args.knn_k, svd_rank=args.rank),
    )


def _read_dataset(args) -> IncompleteDataset:
    return load_csv(args.dataset, args.label_column, frozenset(args.missing_tokens))


def cmd_inject(args) -> int:
    data = _read_dataset(args)
    spec = MissingSpec(args.mechanism, args.rate, args.seed)
    injected = inject(data, spec)
    save_csv(injected, args.output, args.label_column)
    print(f"wrote {args.output} with {injected.n_missing} masked cells")
    return 0


def cmd_impute(args) -> int:
    data = _read_dataset(args)
    params = fit_normalizer(data)
    normalized = apply_normalizer(data, params)
    if args.method == "ewmc":
        if args.weights:
            with open(args.weights, "r", encoding="utf-8") as fh:
                rows = list(csv.reader(fh))[1:]
            by_name = {name: float(w) for name, w in rows}
            v = np.array([by_name[name] for name in data.feature_names])
        else:
            v = np.ones(data.n_features)
        cfg = _framework_config(args)
        ensemble = build_ensemble(normalized, cfg.imputer_methods, cfg.imputer_cfg)
        stage = run_m_stage(normalized, ensemble, normalize_weights(v), cfg.ewmc)
        matrix = stage.z
        if args.trace:
            _write_csv(Path(args.trace), ["iteration", "objective"],
                       [[i + 1, _fmt(o)] for i, o in enumerate(stage.objective_trace)])
    else:
        matrix = impute(normalized, args.method, ImputerConfig(knn_k=args.knn_k, svd_rank=args.rank))
    complete = IncompleteDataset(matrix, np.ones_like(normalized.mask), data.labels,
                                 data.feature_names)
    save_csv(complete, args.output, args.label_column)
    print(f"wrote {args.output} (values are on the normalized [0,1] scale)")
    return 0


def cmd_select(args) -> int:
    data = _read_dataset(args)
    if not data.is_complete:
        raise ValueError("select requires a complete dataset; impute first")
    params = fit_normalizer(data)
    normalized = apply_normalizer(data, params)
    select = mu_relief_a if args.method == "mu-reliefa" else relieff
    weights = select(normalized.values, normalized.labels, ReliefConfig(seed=args.seed))
    order = rank_features(weights)
    _write_csv(Path(args.output), ["feature_name", "weight"],
               [[data.feature_names[j], _fmt(weights[j])] for j in order])
    print(f"wrote {args.output}")
    return 0


def cmd_run(args) -> int:
    data = _read_dataset(args)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = _framework_config(args)
    spec = MissingSpec(args.mechanism, args.rate, args.seed) if args.mechanism else None

    # persist the effective configuration for exact reruns
    persisted = {k: getattr(args, k) for k in
                 ("dataset", "label_column", "mechanism", "rate", "methods", "rank", "gamma",
                  "eta", "delta", "max_outer", "k", "knn_k", "runs", "folds", "seed")}
    with open(outdir / "config.json", "w", encoding="utf-8") as fh:
        json.dump(persisted, fh, indent=2, sort_keys=True)

    # full-dataset fit: weights, imputed matrix, zeta trace
    fit_data = data
    if spec is not None:
        fit_data = inject(fit_data, dataclasses.replace(spec, seed=child_seed(args.seed, 0, 0, 10)))
    params = fit_normalizer(fit_data)
    normalized = apply_normalizer(fit_data, params)
    ensemble = build_ensemble(normalized, cfg.imputer_methods, cfg.imputer_cfg)
    result = run_framework(normalized, ensemble, cfg)
    order = rank_features(result.v)
    _write_csv(outdir / "weights.csv", ["feature_name", "weight"],
               [[data.feature_names[j], _fmt(result.v[j])] for j in order])
    _write_csv(outdir / "zeta_trace.csv", ["outer_iter", "zeta"],
               [[i + 1, _fmt(z)] for i, z in enumerate(result.zeta_trace)])
    imputed = IncompleteDataset(result.z, np.ones_like(normalized.mask),
                                normalized.labels, normalized.feature_names)
    save_csv(imputed, outdir / "imputed.csv", args.label_column)

    # cross-validation protocol
    report = run_protocol(data, spec, list(args.methods), runs=args.runs, folds=args.folds,
                          seed=args.seed, cfg=cfg, k=args.k, dataset_name=Path(args.dataset).stem)
    _write_csv(outdir / "accuracy.csv", EvalReport.HEADER,
               [row[:-1] + [_fmt(row[-1])] for row in report.to_rows()])
    # one row per dataset/mechanism/rate, one column per pipeline
    _write_csv(outdir / "summary.csv",
               ["dataset", "mechanism", "rate"] + list(args.methods),
               [[Path(args.dataset).stem, spec.mechanism.value if spec else "real",
                 spec.rate if spec else _fmt((~data.mask).mean())]
                + [_fmt(report.mean_accuracy(m)) for m in args.methods]])
    for m in args.methods:
        print(f"{m}: mean accuracy {report.mean_accuracy(m):.4f}")
    print(f"outputs in {outdir}")
    return 0


def cmd_sweep(args) -> int:
    data = _read_dataset(args)
    spec = MissingSpec(args.mechanism, args.rate, args.seed)
    rows = []
    for r in args.ranks:
        for gamma in args.gammas:
            cfg = FrameworkConfig(
                ewmc=EwmcConfig(rank=r, gamma=gamma, eta=args.eta, seed=args.seed),
                relief=ReliefConfig(seed=args.seed),
                delta=args.delta,
                imputer_cfg=ImputerConfig(knn_k=args.knn_k, svd_rank=r),
            )
            report = run_protocol(data, spec, ["ewmc+mu-reliefa"], runs=args.runs,
                                  folds=args.folds, seed=args.seed, cfg=cfg, k=args.k,
                                  dataset_name=Path(args.dataset).stem)
            acc = report.mean_accuracy("ewmc+mu-reliefa")
            rows.append([r, _fmt(gamma), _fmt(acc)])
            print(f"rank={r} gamma={gamma}: {acc:.4f}")
    _write_csv(Path(args.output), ["rank", "gamma", "accuracy"], rows)
    print(f"wrote {args.output}")
    return 0


def cmd_compare(args) -> int:
    def read_accuracies(path):
        with open(path, "r", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or "accuracy" not in rows[0]:
            raise ValueError(f"{path}: expected an accuracy column")
        return np.array([float(r["accuracy"]) for r in rows])

    a = read_accuracies(args.a)
    b = read_accuracies(args.b)
    if len(a) != len(b):
        raise ValueError(f"paired files differ in length: {len(a)} vs {len(b)}")
    res = wilcoxon_signed_rank(a, b)
    pair = f"{Path(args.a).stem} vs {Path(args.b).stem}"
    _write_csv(Path(args.output),
               ["pair", "n_effective", "r_plus", "r_minus", "p_value", "significant"],
               [[pair, res.n_effective, _fmt(res.r_plus), _fmt(res.r_minus),
                 _fmt(res.p_value), "yes" if res.p_value < 0.05 else "no"]])
    print(f"{pair}: n_eff={res.n_effective} R+={res.r_plus} R-={res.r_minus} "
          f"p={res.p_value:.6g}")
    return 0


def _add_common(p: argparse.ArgumentParser, needs_label: bool = True) -> None:
    p.add_argument("--config", help="JSON file with default values for the flags")
    p.add_argument("--seed", type=int, default=0)
    if needs_label:
        p.add_argument("--dataset", required=True, help="input CSV path")
        p.add_argument("--label-column", default="class")
        p.add_argument("--missing-tokens", nargs="*", default=sorted(DEFAULT_MISSING_TOKENS))


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rank", type=int, default=5)
    p.add_argument("--gamma", type=float, default=20.0)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--max-outer", type=int, default=20)
    p.add_argument("--k", type=int, default=5, help="classifier neighbors")
    p.add_argument("--knn-k", type=int, default=5, help="imputer neighbors")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="incfs",
                                     description="Feature selection on incomplete datasets")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inject", help="inject artificial missing values")
    _add_common(p)
    p.add_argument("--mechanism", required=True, choices=["mcar", "mnar"])
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_inject)

    p = sub.add_parser("impute", help="impute missing values with one method")
    _add_common(p)
    p.add_argument("--method", required=True, choices=["mean", "knn", "em", "svd", "ewmc"])
    p.add_argument("--weights", help="feature-weights CSV for the ewmc method")
    p.add_argument("--trace", help="write the objective trace CSV here (ewmc only)")
    p.add_argument("--output", required=True)
    _add_model_flags(p)
    p.set_defaults(fn=cmd_impute)

    p = sub.add_parser("select", help="rank features on a complete dataset")
    _add_common(p)
    p.add_argument("--method", default="mu-reliefa", choices=["mu-reliefa", "relieff"])
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_select)

    p = sub.add_parser("run", help="full experiment: fit, protocol, summary tables")
    _add_common(p)
    p.add_argument("--mechanism", choices=["mcar", "mnar"])
    p.add_argument("--rate", type=float, default=0.05)
    p.add_argument("--methods", nargs="*", default=DEFAULT_METHODS)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--output-dir", required=True)
    _add_model_flags(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("sweep", help="rank/gamma grid on one dataset")
    _add_common(p)
    p.add_argument("--mechanism", default="mcar", choices=["mcar", "mnar"])
    p.add_argument("--rate", type=float, default=0.10)
    p.add_argument("--ranks", type=int, nargs="*", default=[1, 2, 3, 4, 5])
    p.add_argument("--gammas", type=float, nargs="*", default=[0.1, 1.0, 10.0, 20.0, 100.0])
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("compare", help="Wilcoxon signed-rank test on paired accuracy files")
    p.add_argument("--config", help="JSON file with default values for the flags")
    p.add_argument("--a", required=True, help="accuracy CSV of method A")
    p.add_argument("--b", required=True, help="accuracy CSV of method B")
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _load_config_file(args, sys.argv[1:] if argv is None else list(argv))
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
