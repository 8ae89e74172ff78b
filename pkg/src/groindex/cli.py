"""Command-line entry point.

Every subcommand writes its table(s) plus ``<command>_summary.json`` to the
output directory. Failures print one ``ERROR <exit code>: message`` line on
stderr.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, fields as dc_fields
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import output as out
from .dataset import (DEFAULT_MIN_DOCS, Dataset, EntityId, EntityMetrics, ParseError,
                      apply_threshold, parse_corpus, parse_econ, parse_entity_metrics, parse_exclusions, parse_world_baseline)
from .fields import FIELDS
from .reports import (AnalysisError, build_reports, default_scheme, indicator_comparison,
                      linearity_study, load_scheme, pca_map, ranked, wealth_study)
from .stats import Distance, Linkage, StatsError, hcluster
from .synthetic import citation_corpus, world_proportional_sample

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_ANALYSIS = 0, 2, 3, 4

log = logging.getLogger("groindex")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    world: Optional[str] = None
    entities: Optional[str] = None
    econ: Optional[str] = None
    exclude: Optional[str] = None
    min_docs: int = DEFAULT_MIN_DOCS
    linkage: str = Linkage.AVERAGE.value
    distance: str = Distance.ONE_MINUS_PEARSON.value
    scheme: Optional[str] = None
    out: str = "out"
    seed: int = 0
    clusters: int = 5
    standardize: bool = False
    corpus: Optional[str] = None
    bands: Optional[str] = None
    workers: int = 1


CONFIG_KEYS = {f.name for f in dc_fields(RunConfig)}
INT_KEYS = {"min_docs", "seed", "clusters", "workers"}
BOOL_KEYS = {"standardize"}


def read_config(path) -> dict:
    """Parse a ``key = value`` file. ``#`` starts a comment; dashes in keys are allowed."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(EXIT_USAGE, f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in CONFIG_KEYS:
                raise CliError(EXIT_USAGE, f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(key, value, f"{path}:{lineno}")
    return values


def _coerce(key, value, where):
    if key in INT_KEYS:
        try:
            v = int(value)
        except ValueError:
            raise CliError(EXIT_USAGE, f"{where}: {key} must be an integer") from None
        if v < 0:
            raise CliError(EXIT_USAGE, f"{where}: {key} must be nonnegative")
        return v
    if key in BOOL_KEYS:
        if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise CliError(EXIT_USAGE, f"{where}: {key} must be true or false")
        return value.lower() in ("true", "1", "yes")
    return value


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    merged = {}
    if getattr(args, "config", None):
        if not os.path.isfile(args.config):
            raise CliError(EXIT_USAGE, f"config file not found: {args.config}")
        merged.update(read_config(args.config))
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    cfg = RunConfig(**merged)
    try:
        Linkage(cfg.linkage)
        Distance(cfg.distance)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    if cfg.clusters < 1:
        raise CliError(EXIT_USAGE, "clusters must be at least 1")
    return cfg


# -- loading ------------------------------------------------------------------


def _need(path: Optional[str], flag: str) -> str:
    if not path:
        raise CliError(EXIT_USAGE, f"{flag} is required")
    if not os.path.isfile(path):
        raise CliError(EXIT_USAGE, f"file not found: {path}")
    return path


def _world(cfg: RunConfig):
    if cfg.world is None:
        with resources.as_file(resources.files("groindex.data") / "world_fields.csv") as p:
            return parse_world_baseline(p)
    return parse_world_baseline(_need(cfg.world, "--world"))


def _exclusions(cfg: RunConfig) -> set:
    return parse_exclusions(_need(cfg.exclude, "--exclude")) if cfg.exclude else set()


def _scheme(cfg: RunConfig):
    if cfg.scheme is None:
        return default_scheme()
    try:
        return load_scheme(_need(cfg.scheme, "--scheme"))
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None


def load_inputs(cfg: RunConfig, with_econ: bool = False):
    """Parse inputs and apply the document threshold.

    Returns (dataset, included entities, threshold-excluded codes, listed exclusions).
    """
    world = _world(cfg)
    entities = parse_entity_metrics(_need(cfg.entities, "--entities"))
    if not entities:
        raise CliError(EXIT_ANALYSIS, "no entities")
    econ = None
    if with_econ:
        econ = parse_econ(_need(cfg.econ, "--econ"), known_ids=[e.code for e in entities])
    ds = Dataset(world, tuple(entities), econ, cfg.min_docs)
    included, below = apply_threshold(ds, cfg.min_docs)
    if not included:
        raise CliError(EXIT_ANALYSIS, f"no entities with more than {cfg.min_docs} documents")
    return ds, included, [e.code for e in below], _exclusions(cfg)


def _inputs_summary(cfg: RunConfig) -> dict:
    return {k: getattr(cfg, k) for k in sorted(CONFIG_KEYS) if k != "out"}


def _finish(cfg: RunConfig, command: str, files: dict, summary: dict) -> None:
    for name, text in files.items():
        out.write_text(cfg.out, name, text)
    summary = {"command": command, "config": _inputs_summary(cfg), **summary}
    out.write_text(cfg.out, f"{command}_summary.json", out.summary_json(summary))
    for name in list(files) + [f"{command}_summary.json"]:
        print(os.path.join(cfg.out, name))


# -- commands ---------------------------------------------------------------


def cmd_index(cfg: RunConfig) -> None:
    ds, included, below, excluded = load_inputs(cfg)
    kept = [e for e in included if e.code not in excluded]
    if not kept:
        raise CliError(EXIT_ANALYSIS, "no entities left after exclusions")
    reports = build_reports(kept, ds.world, workers=cfg.workers)
    files = {"rankings.csv": out.rankings_table(reports)}
    if cfg.bands:
        try:
            cuts = sorted((float(b) for b in cfg.bands.split(",") if b.strip()), reverse=True)
        except ValueError:
            raise CliError(EXIT_USAGE, f"bands must be comma-separated numbers: {cfg.bands}") from None
        rows = []
        for r in ranked(reports):
            band = sum(1 for c in cuts if r.indexes.gro <= c)
            ln = math.log(r.indexes.gro) if r.indexes.gro > 0 else None
            rows.append([r.gro_rank, r.code, ln, band])
        files["rank_plot.csv"] = out.table(["rank", "entity", "ln_gro", "band"], rows)
    summary = {
        "world": {"n_docs": ds.world.totals.n_docs, "citations": ds.world.totals.citations,
                  "quality": ds.world.quality},
        "n_ranked": len(reports),
        "below_min_docs": below,
        "excluded": sorted(excluded & {e.code for e in included}),
        "entities": {
            r.code: {"rank": r.gro_rank, "gro": r.indexes.gro, "rro": r.indexes.rro,
                     "quantity_q": r.indexes.quantity_q, "quality_q": r.indexes.quality_q,
                     "p_index": r.indexes.p_index, "cq": r.indexes.cq,
                     "sum_gro_r": r.sum_gro_r, "sum_rro_r": r.sum_rro_r,
                     "sgr": r.sgr, "top2": r.top2}
            for r in reports
        },
    }
    _finish(cfg, "index", files, summary)


def cmd_profile(cfg: RunConfig, entity: str) -> None:
    ds, included, below, _ = load_inputs(cfg)
    match = [e for e in ds.entities if e.code == entity]
    if not match:
        raise CliError(EXIT_ANALYSIS, f"entity not found: {entity}")
    if entity in below:
        raise CliError(EXIT_ANALYSIS, f"{entity} has no more than {cfg.min_docs} documents")
    report = build_reports(match, ds.world)[0]
    summary = {
        "entity": entity,
        "gro": report.indexes.gro, "rro": report.indexes.rro,
        "sum_gro_r": report.sum_gro_r, "sum_rro_r": report.sum_rro_r,
        "gro_over_sum_gro_r": report.indexes.gro / report.sum_gro_r if report.sum_gro_r else None,
        "sgr": report.sgr, "top2": report.top2,
        "n_fields": len(report.by_field),
    }
    _finish(cfg, "profile", {"profile.csv": out.profile_table(report)}, summary)


def cmd_wealth(cfg: RunConfig) -> None:
    ds, included, below, excluded = load_inputs(cfg, with_econ=True)
    reports = build_reports(included, ds.world, workers=cfg.workers)
    fit, points = wealth_study(reports, ds.econ, excluded)
    summary = {
        "regression": out.regression_summary(fit),
        "below_min_docs": below,
        "excluded": {p.entity: p.reason for p in points if p.excluded},
    }
    _finish(cfg, "wealth", {"wealth.csv": out.wealth_table(points)}, summary)


def cmd_pca(cfg: RunConfig) -> None:
    ds, included, below, excluded = load_inputs(cfg)
    scheme = _scheme(cfg)
    kept = [e for e in included if e.code not in excluded]
    pmap = pca_map(kept, scheme)
    summary = {"scheme": {g: sorted(f.value for f in m) for g, m in scheme.groups.items()},
               "below_min_docs": below, "excluded": sorted(excluded), **out.pca_summary(pmap)}
    _finish(cfg, "pca", {"pca_scores.csv": out.pca_table(pmap)}, summary)


def cmd_cluster(cfg: RunConfig) -> None:
    ds, included, below, excluded = load_inputs(cfg)
    kept = sorted((e for e in included if e.code not in excluded), key=lambda e: e.code)
    reports = build_reports(kept, ds.world)
    # items are research fields, features are the entities' field GROs
    matrix = np.array([[r.by_field[f].gro_r if f in r.by_field else 0.0 for r in reports]
                       for f in FIELDS])
    if cfg.standardize:
        sd = matrix.std(axis=1, ddof=1, keepdims=True)
        if np.any(sd == 0):
            raise CliError(EXIT_ANALYSIS, "cannot standardize a field with constant scores")
        matrix = (matrix - matrix.mean(axis=1, keepdims=True)) / sd
    dendro = hcluster(matrix, Linkage(cfg.linkage), Distance(cfg.distance))
    k = min(cfg.clusters, len(FIELDS))
    labels = dendro.cut(k)
    names = [f.value for f in FIELDS]
    groups: dict[int, list[str]] = {}
    for name, lab in zip(names, labels):
        groups.setdefault(lab, []).append(name)
    scheme_text = "".join(f"cluster{lab + 1}: {'; '.join(m)}\n" for lab, m in sorted(groups.items()))
    files = {
        "dendrogram.txt": dendro.to_text(names),
        "clusters.csv": out.table(["field", "cluster"], ([n, lab + 1] for n, lab in zip(names, labels))),
        "clusters_scheme.txt": scheme_text,
    }
    summary = {"linkage": cfg.linkage, "distance": cfg.distance, "standardize": cfg.standardize,
               "n_entities": len(reports), "clusters": k,
               "merges": out.dendrogram_summary(dendro, names)}
    _finish(cfg, "cluster", files, summary)


def cmd_compare(cfg: RunConfig) -> None:
    if cfg.corpus:
        corpus = parse_corpus(_need(cfg.corpus, "--corpus"))
        source = "file"
    else:
        corpus = citation_corpus(seed=cfg.seed)
        source = "synthetic"
    cmp = indicator_comparison(corpus)
    summary = {
        "source": source, "n_entities": len(cmp.rows), "top_decile_threshold": cmp.threshold,
        "log_excluded": list(cmp.log_excluded),
        "log_correlations": {f"{a}~{b}": r for (a, b), r in cmp.correlations.items()},
    }
    _finish(cfg, "compare", {"comparison.csv": out.comparison_table(cmp)}, summary)


def cmd_linearity(cfg: RunConfig) -> None:
    if cfg.entities:
        ds, included, below, excluded = load_inputs(cfg)
        world = ds.world
        entities = [e for e in included if e.code not in excluded]
        source = "file"
    else:
        world = _world(cfg)
        entities = world_proportional_sample(world, seed=cfg.seed)
        source = "synthetic"
    reports = build_reports(entities, world, workers=cfg.workers)
    gro_fit, rro_fit = linearity_study(reports)
    world_ratio = build_reports([_world_as_entity(world)], world)[0]
    files = {"linearity.csv": out.table(
        ["entity", "gro", "sum_gro_r", "rro", "sum_rro_r"],
        ([r.code, r.indexes.gro, r.sum_gro_r, r.indexes.rro, r.sum_rro_r] for r in reports))}
    summary = {"source": source, "gro_on_sum_gro_r": out.regression_summary(gro_fit),
               "rro_on_sum_rro_r": out.regression_summary(rro_fit),
               "world_gro_over_sum_gro_r": world_ratio.indexes.gro / world_ratio.sum_gro_r}
    _finish(cfg, "linearity", files, summary)


def _world_as_entity(world):
    return EntityMetrics(EntityId("WORLD"), world.totals, dict(world.by_field))


# -- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, f"{self.prog}: {message}")


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("inputs and run options")
    g.add_argument("--world", metavar="PATH",
                   help="world baseline CSV (field,n_docs,citations); default: the bundled world table")
    g.add_argument("--entities", metavar="PATH", help="entity metrics CSV (entity,kind,field,n_docs,citations)")
    g.add_argument("--econ", metavar="PATH", help="economic CSV (entity,gdp_busd,ppc_kusd)")
    g.add_argument("--exclude", metavar="PATH", help="exclusion list, one entity code per line")
    g.add_argument("--min-docs", dest="min_docs", type=_nonneg_int, metavar="N",
                   help=f"keep entities with more than N documents (default {DEFAULT_MIN_DOCS})")
    g.add_argument("--linkage", choices=[l.value for l in Linkage],
                   help="cluster linkage (default average)")
    g.add_argument("--distance", choices=[d.value for d in Distance],
                   help="cluster distance (default one_minus_pearson)")
    g.add_argument("--scheme", metavar="PATH",
                   help="field-group scheme, lines of 'name: field; field'; default: bundled five-group scheme")
    g.add_argument("--out", metavar="DIR", help="output directory (default ./out)")
    g.add_argument("--seed", type=_nonneg_int, metavar="N", help="seed for synthetic corpora (default 0)")
    g.add_argument("--config", metavar="PATH", help="'key = value' config file; flags override it")
    g.add_argument("--workers", type=_nonneg_int, metavar="N",
                   help="threads for building reports (default 1)")

    parser = _Parser(prog="groindex", description="Geometric-mean research output indicators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("index", parents=[common], help="rank entities by GRO (rankings.csv)")
    p.add_argument("--bands", metavar="LIST",
                   help="comma-separated GRO thresholds for rank_plot.csv bands (off by default)")
    p = sub.add_parser("profile", parents=[common], help="per-field profile of one entity (profile.csv)")
    p.add_argument("entity", help="entity code")
    sub.add_parser("wealth", parents=[common], help="regress ln GRO on ln WTH (wealth.csv)")
    sub.add_parser("pca", parents=[common], help="covariance PCA of grouped field GROs (pca_scores.csv)")
    p = sub.add_parser("cluster", parents=[common], help="cluster the research fields (dendrogram.txt)")
    p.add_argument("--clusters", type=_nonneg_int, metavar="K", help="number of clusters to cut (default 5)")
    p.add_argument("--standardize", action="store_const", const=True,
                   help="z-score each field's scores before clustering (default off)")
    p = sub.add_parser("compare", parents=[common],
                       help="GRO vs h, p and CQ on per-paper citations (comparison.csv)")
    p.add_argument("--corpus", metavar="PATH",
                   help="per-paper CSV (entity,citations); default: seeded synthetic corpus")
    sub.add_parser("linearity", parents=[common],
                   help="GRO vs sum of field GROs; synthetic sample unless --entities is given")
    return parser


COMMANDS = {
    "index": cmd_index, "wealth": cmd_wealth, "pca": cmd_pca,
    "cluster": cmd_cluster, "compare": cmd_compare, "linearity": cmd_linearity,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        if args.command == "profile":
            cmd_profile(cfg, args.entity)
        else:
            COMMANDS[args.command](cfg)
    except CliError as exc:
        return _fail(exc.code, str(exc))
    except ParseError as exc:
        return _fail(EXIT_PARSE, str(exc))
    except (AnalysisError, StatsError) as exc:
        return _fail(EXIT_ANALYSIS, str(exc))
    except ValueError as exc:
        return _fail(EXIT_ANALYSIS, str(exc))
    except OSError as exc:
        return _fail(EXIT_PARSE, f"{exc.filename}: {exc.strerror}")
    return EXIT_OK


def _fail(code: int, message: str) -> int:
    print(f"ERROR {code}: {' '.join(message.split())}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
