"""CSV tables and JSON run summaries.

CSV floats carry 4 decimals; summaries keep full precision.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from typing import Iterable, Sequence

import numpy as np

from .fields import FIELD_ORDER
from .reports import Comparison, IndicatorReport, PcaMap, WealthPoint, ranked
from .stats import Dendrogram, RegressionResult

RANKINGS_HEADER = ["rank", "entity", "gro", "rro", "n_docs", "citations", "q"]
PROFILE_HEADER = ["entity", "field", "gro_r", "rro_r", "share"]
WEALTH_HEADER = ["entity", "ln_wth", "ln_gro", "excluded", "reason"]
PCA_HEADER = ["entity", "pc1", "pc2", "quadrant"]
COMPARISON_HEADER = ["entity", "n", "c", "gro", "h", "p", "cq", "top_decile"]


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


def table(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def rankings_table(reports: Sequence[IndicatorReport]) -> str:
    return table(RANKINGS_HEADER, (
        [r.gro_rank, r.code, r.indexes.gro, r.indexes.rro, r.totals.n_docs,
         r.totals.citations, r.indexes.quality_q]
        for r in ranked(reports)
    ))


def profile_table(report: IndicatorReport) -> str:
    rows = []
    for f in sorted(report.by_field, key=FIELD_ORDER.__getitem__):
        v = report.by_field[f]
        rows.append([report.code, f.value, v.gro_r, v.rro_r, report.shares.get(f)])
    return table(PROFILE_HEADER, rows)


def wealth_table(points: Sequence[WealthPoint]) -> str:
    return table(WEALTH_HEADER, (
        [p.entity, p.ln_wth, p.ln_gro, p.excluded, p.reason] for p in points
    ))


def pca_table(pmap: PcaMap) -> str:
    rows = []
    for i, code in enumerate(pmap.codes):
        if pmap.result is None:
            pc1 = pc2 = 0.0
        else:
            pc1 = pmap.result.scores[i, 0]
            pc2 = pmap.result.scores[i, 1] if pmap.result.scores.shape[1] > 1 else 0.0
        rows.append([code, pc1, pc2, pmap.quadrants[i]])
    return table(PCA_HEADER, rows)


def comparison_table(cmp: Comparison) -> str:
    return table(COMPARISON_HEADER, (
        [r.entity, r.n, r.c, r.gro, r.h, r.p, r.cq, r.top_decile] for r in cmp.rows
    ))


def regression_summary(fit: RegressionResult) -> dict:
    return {"slope": fit.slope, "intercept": fit.intercept,
            "r_squared": fit.r_squared, "n_points": fit.n_points}


def pca_summary(pmap: PcaMap) -> dict:
    out = {
        "columns": list(pmap.columns),
        "n_entities": len(pmap.codes),
        "dropped": list(pmap.dropped),
        "degenerate": pmap.degenerate,
        "first_two_explained": pmap.first_two_fraction,
        "explained_threshold": pmap.threshold,
        "meets_explained_threshold": pmap.meets_threshold,
        "eigenvalues_above_one": pmap.n_eigen_above_one,
    }
    if pmap.result is not None:
        out["eigenvalues"] = pmap.result.eigenvalues.tolist()
        out["explained_fraction"] = pmap.result.explained_fraction.tolist()
        out["loadings"] = {
            col: pmap.result.components[i].tolist() for i, col in enumerate(pmap.columns)
        }
        out["jacobi_sweeps"] = pmap.result.sweeps
    return out


def dendrogram_summary(dendro: Dendrogram, names: Sequence[str]) -> list[dict]:
    def label(c):
        return names[c] if c < dendro.n_leaves else f"#{c}"
    return [{"id": dendro.n_leaves + i, "a": label(m.a), "b": label(m.b),
             "height": m.height, "size": m.size} for i, m in enumerate(dendro.merges)]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def summary_json(summary: dict) -> str:
    return json.dumps(_clean(summary), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_text(directory, name: str, text: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
