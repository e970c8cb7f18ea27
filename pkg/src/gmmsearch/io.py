"""CSV/JSON ingestion and emission.

Formats are stable contracts:
  labels      one integer per line, input row order
  model       JSON object {criterion, criterion_value, k, d, n, constraint,
              reg_covar, init: {affinity, linkage}, weights, means,
              covariances, seed}
  grid        CSV with columns affinity,linkage,constraint,k,status,
              criterion_value,reg_covar
  dendrogram  nested JSON {depth, size, children, model, leaf_reason}
  benchmark   flat CSV of per-subsample records plus a JSON summary

Floats serialize via repr (shortest round-trip form), so reading a file back
reproduces the exact double-precision values.
"""

import json
import os

import numpy as np

from .errors import InputError, ParseError
from .gmm import GmmModel
from .hierarchy import DendrogramNode
from .metrics import BenchmarkReport
from .search import SearchResult


def read_matrix(path, has_header=False):
    """Parse a rectangular numeric CSV into an (n, d) matrix."""
    rows = []
    width = None
    try:
        handle = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, 1):
            if lineno == 1 and has_header:
                continue
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ParseError(
                    f"{path}: line {lineno} has {len(cells)} columns, expected {width}"
                )
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def read_labels(path):
    """Parse a one-integer-per-line label file."""
    labels = []
    try:
        handle = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(float(line.split(",")[0])))
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
    if not labels:
        raise ParseError(f"{path}: no labels")
    return np.asarray(labels, dtype=np.int64)


def write_labels(labels, path):
    with open(path, "w", encoding="utf-8") as out:
        for l in labels:
            out.write(f"{int(l)}\n")


def write_matrix(x, path):
    with open(path, "w", encoding="utf-8") as out:
        for row in np.atleast_2d(x):
            out.write(",".join(repr(float(v)) for v in row) + "\n")


def _json_float(v):
    return float(v)


def model_to_dict(model, *, criterion=None, criterion_value=None, n=None,
                  reg_covar=None, method=None, seed=None):
    """Model record following the stable JSON schema."""
    init = {"affinity": None, "linkage": None}
    if method is not None:
        init = {"affinity": method.affinity, "linkage": method.linkage}
    return {
        "criterion": criterion,
        "criterion_value": _json_float(criterion_value) if criterion_value is not None else None,
        "k": int(model.k),
        "d": int(model.d),
        "n": int(n) if n is not None else None,
        "constraint": model.constraint,
        "reg_covar": _json_float(reg_covar if reg_covar is not None else model.reg_covar),
        "init": init,
        "weights": model.weights.tolist(),
        "means": model.means.tolist(),
        "covariances": model.covariances.tolist(),
        "seed": seed,
    }


def model_from_dict(record):
    try:
        return GmmModel(
            np.asarray(record["weights"], dtype=np.float64),
            np.asarray(record["means"], dtype=np.float64),
            np.asarray(record["covariances"], dtype=np.float64),
            record["constraint"],
            float(record["reg_covar"]),
        )
    except KeyError as exc:
        raise ParseError(f"model record is missing field {exc}") from exc


def search_result_to_model_dict(result):
    best = result.best
    return model_to_dict(
        best.fit.model,
        criterion=result.config.criterion,
        criterion_value=best.criterion_value,
        n=result.n,
        reg_covar=best.reg_covar,
        method=best.method,
        seed=result.config.seed,
    )


def write_model_json(result, path):
    with open(path, "w", encoding="utf-8") as out:
        json.dump(search_result_to_model_dict(result), out, indent=2)
        out.write("\n")


def read_model_json(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_grid_csv(grid, path):
    with open(path, "w", encoding="utf-8") as out:
        out.write("affinity,linkage,constraint,k,status,criterion_value,reg_covar\n")
        for cand in grid:
            linkage = cand.method.linkage or ""
            value = repr(float(cand.criterion_value)) if cand.converged else ""
            reg = repr(float(cand.reg_covar)) if cand.converged else ""
            out.write(
                f"{cand.method.affinity},{linkage},{cand.constraint},{cand.k},"
                f"{cand.status},{value},{reg}\n"
            )


def dendrogram_to_dict(node, *, criterion=None):
    best = node.best
    model = None
    if best is not None and best.converged:
        model = model_to_dict(
            best.fit.model,
            criterion=criterion,
            criterion_value=best.criterion_value,
            n=node.size,
            reg_covar=best.reg_covar,
            method=best.method,
        )
    return {
        "depth": int(node.depth),
        "size": node.size,
        "children": [dendrogram_to_dict(c, criterion=criterion) for c in node.children],
        "model": model,
        "leaf_reason": node.leaf_reason,
    }


def write_dendrogram_json(root, path, *, criterion=None):
    with open(path, "w", encoding="utf-8") as out:
        json.dump(dendrogram_to_dict(root, criterion=criterion), out, indent=2)
        out.write("\n")


def write_cuts_csv(cuts, path):
    """Depth cuts as comma-separated integer columns, one row per sample."""
    cuts = np.atleast_2d(np.asarray(cuts))
    with open(path, "w", encoding="utf-8") as out:
        for row in cuts.T:
            out.write(",".join(str(int(v)) for v in row) + "\n")


def write_benchmark_report(report, csv_path, json_path):
    with open(csv_path, "w", encoding="utf-8") as out:
        out.write("config,rep,status,ari,seconds\n")
        for rec in report.records:
            ari = repr(float(rec.ari)) if rec.ari is not None else ""
            out.write(f"{rec.config},{rec.rep},{rec.status},{ari},{repr(rec.seconds)}\n")
    summary = {
        "meta": report.meta,
        "tests": [
            {
                "config_a": t.config_a,
                "config_b": t.config_b,
                "metric": t.metric,
                "statistic": t.statistic,
                "p_value": t.p_value,
                "note": t.note,
            }
            for t in report.tests
        ],
    }
    with open(json_path, "w", encoding="utf-8") as out:
        json.dump(summary, out, indent=2)
        out.write("\n")


def write_outputs(result, out_dir):
    """Write the canonical files for a search result, dendrogram or
    benchmark report into out_dir; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    if isinstance(result, SearchResult):
        paths = {
            "labels": os.path.join(out_dir, "labels.csv"),
            "model": os.path.join(out_dir, "model.json"),
            "grid": os.path.join(out_dir, "grid.csv"),
        }
        write_labels(result.best.fit.labels, paths["labels"])
        write_model_json(result, paths["model"])
        write_grid_csv(result.grid, paths["grid"])
        return paths
    if isinstance(result, DendrogramNode):
        paths = {"dendrogram": os.path.join(out_dir, "dendrogram.json")}
        write_dendrogram_json(result, paths["dendrogram"])
        return paths
    if isinstance(result, BenchmarkReport):
        paths = {
            "records": os.path.join(out_dir, "benchmark.csv"),
            "summary": os.path.join(out_dir, "benchmark.json"),
        }
        write_benchmark_report(result, paths["records"], paths["summary"])
        return paths
    raise InputError(f"no writer for {type(result).__name__}")
