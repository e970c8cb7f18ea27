"""Command-line interface.

Subcommands: fit (grid search on a CSV), hfit (recursive dendrogram),
synth (write a seeded synthetic dataset), bench (shared-subsample
comparison), ari (agreement of two label files). Exit codes: 0 success,
1 input error, 2 search failure. The summary goes to stdout, diagnostics
to stderr.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import io as gio
from .datasets import KINDS, SyntheticSpec, generate
from .errors import InputError, SearchFailure
from .gmm import CONSTRAINTS, CRITERIA, EmSettings
from .hierarchy import cut_at_depth, fit_dendrogram, leaf_count, tree_depth
from .init_methods import AFFINITIES, LINKAGES
from .metrics import adjusted_rand_index, subsample_benchmark
from .search import SearchConfig, run_search

_DEFAULTS = SearchConfig()
_EM_DEFAULTS = EmSettings()


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; keep 2 reserved for search failure
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _csv_list(value):
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _add_search_flags(p, k_flags=True):
    if k_flags:
        p.add_argument("--kmin", type=int, default=_DEFAULTS.kmin)
        p.add_argument("--kmax", type=int, default=_DEFAULTS.kmax)
    p.add_argument("--affinities", type=_csv_list, default=_DEFAULTS.affinities,
                   help=f"comma-separated subset of {','.join(AFFINITIES)}")
    p.add_argument("--linkages", type=_csv_list, default=_DEFAULTS.linkages,
                   help=f"comma-separated subset of {','.join(LINKAGES)}")
    p.add_argument("--constraints", type=_csv_list, default=_DEFAULTS.constraints,
                   help=f"comma-separated subset of {','.join(CONSTRAINTS)}")
    p.add_argument("--criterion", choices=CRITERIA, default=_DEFAULTS.criterion)
    p.add_argument("--subset-cap", type=int, default=_DEFAULTS.subset_cap)
    p.add_argument("--kmeans-reps", type=int, default=_DEFAULTS.kmeans_reps)
    p.add_argument("--max-iter", type=int, default=_EM_DEFAULTS.max_iter)
    p.add_argument("--tol", type=float, default=_EM_DEFAULTS.tol)
    p.add_argument("--seed", type=int, default=_DEFAULTS.seed)
    # threads never change the answer, only wall-clock; >1 pays off once the
    # jitted kernels dominate (large n), so opt in rather than default in
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--header", action="store_true", help="skip the first data row")
    p.add_argument("--out-dir", default=".")


def _config_from_args(args, kmin=None, kmax=None):
    return SearchConfig(
        kmin=kmin if kmin is not None else args.kmin,
        kmax=kmax if kmax is not None else args.kmax,
        affinities=args.affinities,
        linkages=args.linkages,
        constraints=args.constraints,
        criterion=args.criterion,
        subset_cap=args.subset_cap,
        kmeans_reps=args.kmeans_reps,
        em=EmSettings(max_iter=args.max_iter, tol=args.tol),
        seed=args.seed,
    )


def build_parser():
    parser = _Parser(prog="gmmsearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", parents=[], help="grid-search a CSV and write labels/model/grid")
    p_fit.add_argument("data")
    _add_search_flags(p_fit)

    p_hfit = sub.add_parser("hfit", help="recursive fit; writes dendrogram and depth cuts")
    p_hfit.add_argument("data")
    _add_search_flags(p_hfit, k_flags=False)
    p_hfit.add_argument("--max-components", type=int, default=2)
    p_hfit.add_argument("--min-split", type=int, default=None)
    p_hfit.add_argument("--max-depth", type=int, default=None)

    p_synth = sub.add_parser("synth", help="write a seeded synthetic dataset and its truth")
    p_synth.add_argument("--kind", choices=KINDS, required=True)
    p_synth.add_argument("--n", type=int, default=None)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", default="data.csv")
    p_synth.add_argument("--truth-out", default=None)

    p_bench = sub.add_parser("bench", help="shared-subsample benchmark of one or more configs")
    p_bench.add_argument("data")
    p_bench.add_argument("truth")
    _add_search_flags(p_bench)
    p_bench.add_argument("--reps", type=int, default=10)
    p_bench.add_argument("--frac", type=float, default=0.8)
    p_bench.add_argument("--configs", default=None,
                         help="JSON file with a list of config-override objects")

    p_ari = sub.add_parser("ari", help="print the adjusted Rand index of two label files")
    p_ari.add_argument("labels_a")
    p_ari.add_argument("labels_b")
    return parser


def _cmd_fit(args):
    x = gio.read_matrix(args.data, has_header=args.header)
    config = _config_from_args(args)
    result = run_search(x, config, threads=args.threads)
    paths = gio.write_outputs(result, args.out_dir)
    best = result.best
    print(
        f"k={best.k} constraint={best.constraint} init={best.method} "
        f"criterion={config.criterion} value={best.criterion_value:.6f} "
        f"reg_covar={best.reg_covar:g}"
    )
    print(f"wrote {paths['labels']} {paths['model']} {paths['grid']}", file=sys.stderr)
    return 0


def _cmd_hfit(args):
    x = gio.read_matrix(args.data, has_header=args.header)
    config = _config_from_args(args, kmin=1, kmax=args.max_components)
    root = fit_dendrogram(x, config, min_split=args.min_split, max_depth=args.max_depth)
    os.makedirs(args.out_dir, exist_ok=True)
    dpath = os.path.join(args.out_dir, "dendrogram.json")
    gio.write_dendrogram_json(root, dpath, criterion=config.criterion)
    depth = tree_depth(root)
    cuts = [cut_at_depth(root, d) for d in range(depth + 1)]
    cpath = os.path.join(args.out_dir, "cuts.csv")
    gio.write_cuts_csv(np.asarray(cuts), cpath)
    print(f"depth={depth} leaves={leaf_count(root)} cuts={len(cuts)}")
    print(f"wrote {dpath} {cpath}", file=sys.stderr)
    return 0


def _cmd_synth(args):
    spec = SyntheticSpec(kind=args.kind, n=args.n, seed=args.seed)
    x, truth = generate(spec)
    gio.write_matrix(x, args.out)
    truth_path = args.truth_out
    if truth_path is None:
        stem, ext = os.path.splitext(args.out)
        truth_path = f"{stem}_truth{ext or '.csv'}"
    gio.write_cuts_csv(np.atleast_2d(truth.T), truth_path)
    print(f"n={x.shape[0]} d={x.shape[1]} kind={args.kind} seed={args.seed}")
    print(f"wrote {args.out} {truth_path}", file=sys.stderr)
    return 0


def _cmd_bench(args):
    x = gio.read_matrix(args.data, has_header=args.header)
    truth = gio.read_labels(args.truth)
    base = _config_from_args(args)
    configs = [base]
    names = ["default"]
    if args.configs:
        try:
            with open(args.configs, "r", encoding="utf-8") as handle:
                overrides = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read {args.configs}: {exc}") from exc
        configs, names = [], []
        for i, entry in enumerate(overrides):
            name = entry.pop("name", f"config{i}")
            em = EmSettings(
                max_iter=entry.pop("max_iter", args.max_iter),
                tol=entry.pop("tol", args.tol),
            )
            fields = {f: getattr(base, f) for f in
                      ("kmin", "kmax", "affinities", "linkages", "constraints",
                       "criterion", "subset_cap", "kmeans_reps", "seed")}
            for key, value in entry.items():
                if key not in fields:
                    raise InputError(f"unknown config field {key!r} in {args.configs}")
                fields[key] = tuple(value) if isinstance(value, list) else value
            configs.append(SearchConfig(em=em, **fields))
            names.append(name)
    report = subsample_benchmark(
        x, truth, configs, reps=args.reps, frac=args.frac, seed=args.seed,
        names=names, threads=args.threads,
    )
    paths = gio.write_outputs(report, args.out_dir)
    ok = sum(1 for r in report.records if r.status == "ok")
    print(f"records={len(report.records)} ok={ok} tests={len(report.tests)}")
    print(f"wrote {paths['records']} {paths['summary']}", file=sys.stderr)
    return 0


def _cmd_ari(args):
    a = gio.read_labels(args.labels_a)
    b = gio.read_labels(args.labels_b)
    print(adjusted_rand_index(a, b))
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "hfit": _cmd_hfit,
    "synth": _cmd_synth,
    "bench": _cmd_bench,
    "ari": _cmd_ari,
}


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SearchFailure as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
