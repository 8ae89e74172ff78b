"""Per-entity indicator reports and the analyses built on top of them."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from importlib import resources
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import indicators as ind
from .dataset import EconRecord, EntityId, EntityMetrics, WorldBaseline
from .fields import FIELD_ORDER, FIELDS, FieldId
from .indicators import CountPair, FieldIndexValues, IndexValues
from .stats import PcaResult, RegressionResult, StatsError, covariance_pca, ols, pearson, rank_desc


class AnalysisError(ValueError):
    pass


# -- cluster schemes --------------------------------------------------------


@dataclass(frozen=True)
class ClusterScheme:
    name: str
    groups: Mapping[str, frozenset]

    def __post_init__(self):
        seen: dict[FieldId, str] = {}
        if not self.groups:
            raise ValueError("scheme has no groups")
        for group, members in self.groups.items():
            if not members:
                raise ValueError(f"group {group!r} is empty")
            for f in members:
                if not isinstance(f, FieldId):
                    raise ValueError(f"group {group!r}: unknown field {f!r}")
                if f in seen:
                    raise ValueError(f"{f.value} is in both {seen[f]!r} and {group!r}")
                seen[f] = group

    @classmethod
    def singletons(cls) -> "ClusterScheme":
        return cls("singletons", {f.value: frozenset([f]) for f in FIELDS})


def parse_scheme(text: str, name: str = "scheme") -> ClusterScheme:
    """Parse ``group: field; field; ...`` lines. Blank lines and ``#`` comments are skipped."""
    groups: dict[str, frozenset] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ValueError(f"{name}:{lineno}: expected 'group: field; field; ...'")
        group, rest = line.split(":", 1)
        group = group.strip()
        if not group or group in groups:
            raise ValueError(f"{name}:{lineno}: missing or repeated group name {group!r}")
        members = []
        for token in rest.split(";"):
            token = token.strip()
            if not token:
                continue
            try:
                members.append(FieldId.parse(token))
            except ValueError as exc:
                raise ValueError(f"{name}:{lineno}: {exc}") from None
        groups[group] = frozenset(members)
    try:
        return ClusterScheme(name, groups)
    except ValueError as exc:
        raise ValueError(f"{name}: {exc}") from None


def load_scheme(path) -> ClusterScheme:
    with open(path, encoding="utf-8") as fh:
        return parse_scheme(fh.read(), name=str(path))


def default_scheme() -> ClusterScheme:
    """The five-cluster field grouping shipped with the package."""
    text = resources.files("groindex.data").joinpath("five_groups_scheme.txt").read_text(encoding="utf-8")
    return parse_scheme(text, name="default")


# -- per-entity reports -----------------------------------------------------


@dataclass(frozen=True)
class IndicatorReport:
    id: EntityId
    totals: CountPair
    indexes: IndexValues
    by_field: Mapping[FieldId, FieldIndexValues]
    sum_gro_r: float
    sum_rro_r: float
    sgr: float          # NaN when every present field is uncited
    top2: float
    shares: Mapping[FieldId, float]
    gro_rank: int = 0

    @property
    def code(self) -> str:
        return self.id.code


def build_report(entity: EntityMetrics, world: WorldBaseline) -> IndicatorReport:
    if entity.totals.n_docs <= 0:
        raise AnalysisError(
            f"{entity.code} has no documents; filter entities with apply_threshold first"
        )
    by_field: dict[FieldId, FieldIndexValues] = {}
    for f in sorted(entity.by_field, key=FIELD_ORDER.__getitem__):
        values = ind.field_indexes(entity.by_field[f], world.by_field[f], f)
        if values is not None:
            by_field[f] = values
    gros = {f: v.gro_r for f, v in by_field.items()}
    sum_gro = math.fsum(gros.values())
    sum_rro = math.fsum(v.rro_r for v in by_field.values())
    if sum_gro > 0:
        shares = {f: g / sum_gro for f, g in gros.items()}
        sgr, top2 = ind.specialization(gros)
    else:
        shares = {}
        sgr = top2 = math.nan
    return IndicatorReport(
        id=entity.id,
        totals=entity.totals,
        indexes=ind.indexes(entity.totals, world.quality),
        by_field=by_field,
        sum_gro_r=sum_gro,
        sum_rro_r=sum_rro,
        sgr=sgr,
        top2=top2,
        shares=shares,
    )


def build_reports(entities: Iterable[EntityMetrics], world: WorldBaseline,
                  workers: Optional[int] = None) -> list[IndicatorReport]:
    """Reports for many entities, ranked by GRO and ordered by entity code.

    With ``workers`` > 1 the reports are built on a thread pool; the result
    does not depend on scheduling.
    """
    entities = sorted(entities, key=lambda e: e.code)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda e: build_report(e, world), entities))
    else:
        reports = [build_report(e, world) for e in entities]
    return assign_ranks(reports)


def assign_ranks(reports: Sequence[IndicatorReport]) -> list[IndicatorReport]:
    if not reports:
        return []
    ranks = rank_desc({r.code: r.indexes.gro for r in reports})
    return [replace(r, gro_rank=ranks[r.code]) for r in reports]


def ranked(reports: Sequence[IndicatorReport]) -> list[IndicatorReport]:
    """Display order: by rank, ties by entity code."""
    return sorted(reports, key=lambda r: (r.gro_rank, r.code))


# -- GRO vs sum of field GROs ----------------------------------------------


def linearity_study(reports: Sequence[IndicatorReport]) -> tuple[RegressionResult, RegressionResult]:
    """OLS of GRO on the sum of field GROs, and of RRO on the sum of field RROs."""
    if len(reports) < 3:
        raise AnalysisError(f"linearity study needs at least 3 entities, got {len(reports)}")
    try:
        gro_fit = ols([r.sum_gro_r for r in reports], [r.indexes.gro for r in reports])
        rro_fit = ols([r.sum_rro_r for r in reports], [r.indexes.rro for r in reports])
    except StatsError as exc:
        raise AnalysisError(str(exc)) from None
    return gro_fit, rro_fit


# -- grouped fields ---------------------------------------------------------


@dataclass(frozen=True)
class GroupIndex:
    group: str
    pair: CountPair
    gro: float
    rro: Optional[float]  # relative to the world's quality in the same group


def aggregate_by_scheme(by_field: Mapping[FieldId, CountPair], scheme: ClusterScheme,
                        world: Optional[WorldBaseline] = None) -> dict[str, GroupIndex]:
    """Sum field counts inside each group and index the sums.

    Groups where the entity has no documents are left out.
    """
    out = {}
    for group, members in scheme.groups.items():
        pairs = [by_field[f] for f in sorted(members, key=FIELD_ORDER.__getitem__) if f in by_field]
        if not pairs:
            continue
        pair = ind.aggregate(pairs)
        if pair.n_docs == 0:
            continue
        rro = None
        if world is not None:
            wpair = ind.aggregate(world.by_field[f] for f in members)
            rro = ind.field_indexes(pair, wpair, next(iter(members))).rro_r
        out[group] = GroupIndex(group, pair, ind.gro(pair), rro)
    return out


@dataclass(frozen=True)
class PcaMap:
    codes: tuple[str, ...]
    columns: tuple[str, ...]
    matrix: np.ndarray
    result: Optional[PcaResult]
    quadrants: tuple[str, ...]
    degenerate: bool
    dropped: tuple[str, ...] = ()
    threshold: float = 0.70

    @property
    def first_two_fraction(self) -> float:
        if self.result is None:
            return 0.0
        return float(self.result.explained_fraction[:2].sum())

    @property
    def meets_threshold(self) -> bool:
        return self.first_two_fraction > self.threshold

    @property
    def n_eigen_above_one(self) -> int:
        if self.result is None:
            return 0
        return int((self.result.eigenvalues > 1.0).sum())


QUADRANTS = {(1, 1): "upper-right", (-1, 1): "upper-left",
             (-1, -1): "lower-left", (1, -1): "lower-right"}


def _quadrant(pc1: float, pc2: float, eps: float) -> str:
    s1 = 0 if abs(pc1) <= eps else (1 if pc1 > 0 else -1)
    s2 = 0 if abs(pc2) <= eps else (1 if pc2 > 0 else -1)
    return QUADRANTS.get((s1, s2), "axis")


def pca_quadrants(matrix, codes: Sequence[str], columns: Sequence[str],
                  threshold: float = 0.70) -> PcaMap:
    """Covariance PCA of an entity x variable matrix with quadrant labels from the first two scores."""
    x = np.asarray(matrix, dtype=float)
    codes, columns = tuple(codes), tuple(columns)
    if x.shape[0] < 3:
        raise AnalysisError(f"PCA map needs at least 3 entities, got {x.shape[0]}")
    variances = x.var(axis=0, ddof=1)
    scale = float(np.abs(x).max(initial=0.0))
    if np.all(variances <= (1e-12 * max(scale, 1.0)) ** 2):
        return PcaMap(codes, columns, x, None, ("none",) * len(codes), True, threshold=threshold)
    if int((variances > 0).sum()) < 2:
        raise AnalysisError("PCA map needs at least 2 variables with nonzero variance")
    res = covariance_pca(x)
    eps = 1e-9 * max(1.0, float(np.abs(res.scores).max()))
    labels = tuple(_quadrant(s[0], s[1], eps) for s in res.scores)
    return PcaMap(codes, columns, x, res, labels, False, threshold=threshold)


def pca_map(entities: Sequence[EntityMetrics], scheme: ClusterScheme,
            threshold: float = 0.70) -> PcaMap:
    """PCA over per-group GRO scores.

    Entities missing any group are dropped and listed in ``dropped``.
    """
    columns = tuple(scheme.groups)
    rows, codes, dropped = [], [], []
    for e in sorted(entities, key=lambda e: e.code):
        groups = aggregate_by_scheme(e.by_field, scheme)
        if len(groups) < len(columns):
            dropped.append(e.code)
            continue
        rows.append([groups[g].gro for g in columns])
        codes.append(e.code)
    matrix = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    out = pca_quadrants(matrix, codes, columns, threshold)
    return replace(out, dropped=tuple(dropped))


# -- wealth ------------------------------------------------------------------


@dataclass(frozen=True)
class WealthPoint:
    entity: str
    ln_wth: Optional[float]
    ln_gro: Optional[float]
    excluded: bool = False
    reason: str = ""


def wealth_study(reports: Sequence[IndicatorReport], econ: Mapping[str, EconRecord],
                 exclusions: Iterable[str] = ()) -> tuple[RegressionResult, list[WealthPoint]]:
    """OLS of ln(GRO) on ln(WTH) over the entities not excluded.

    Excluded entities stay in the returned points with a reason.
    """
    exclusions = set(exclusions)
    points: list[WealthPoint] = []
    for r in sorted(reports, key=lambda r: r.code):
        rec = econ.get(r.code)
        ln_wth = math.log(rec.wth) if rec is not None and rec.wth > 0 else None
        ln_gro = math.log(r.indexes.gro) if r.indexes.gro > 0 else None
        if r.code in exclusions:
            points.append(WealthPoint(r.code, ln_wth, ln_gro, True, "listed in exclusions"))
            continue
        if rec is None:
            raise AnalysisError(f"missing econ record for {r.code}")
        if ln_wth is None:
            raise AnalysisError(f"invalid econ record for {r.code}: wth must be positive")
        if ln_gro is None:
            points.append(WealthPoint(r.code, ln_wth, None, True, "gro is zero; log undefined"))
            continue
        points.append(WealthPoint(r.code, ln_wth, ln_gro))
    used = [p for p in points if not p.excluded]
    try:
        fit = ols([p.ln_wth for p in used], [p.ln_gro for p in used])
    except StatsError as exc:
        raise AnalysisError(f"wealth regression: {exc}") from None
    return fit, points


# -- indicator comparison harness -------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    entity: str
    n: int
    c: int
    gro: float
    h: int
    p: float
    cq: float
    top_decile: int


LOG_INDICATORS = ("gro", "h", "p", "cq", "top_decile")


@dataclass(frozen=True)
class Comparison:
    rows: tuple[ComparisonRow, ...]
    threshold: int                       # citation count that enters the top decile
    correlations: Mapping[tuple[str, str], Optional[float]]
    log_excluded: tuple[str, ...] = ()

    def correlation(self, a: str, b: str) -> Optional[float]:
        return self.correlations.get((a, b), self.correlations.get((b, a)))


def nearest_rank_percentile(values: Sequence[int], pct: float) -> int:
    if not values:
        raise AnalysisError("percentile of an empty sample")
    ordered = sorted(values)
    rank = max(1, math.ceil(pct / 100 * len(ordered)))
    return ordered[rank - 1]


def indicator_comparison(corpus: Mapping[str, Sequence[int]]) -> Comparison:
    """Compare GRO, h, p and CQ on per-paper citation lists.

    ``top_decile`` counts papers at or above the corpus-wide 90th percentile
    (nearest rank). Log correlations skip entities where any indicator is 0.
    """
    if not corpus:
        raise AnalysisError("empty corpus")
    everything = []
    for code, cites in corpus.items():
        if not cites:
            raise AnalysisError(f"{code} has no papers")
        if min(cites) < 0:
            raise AnalysisError(f"{code} has a negative citation count")
        everything.extend(cites)
    threshold = nearest_rank_percentile(everything, 90)
    rows = []
    for code in sorted(corpus):
        cites = list(corpus[code])
        pair = CountPair(len(cites), sum(cites))
        rows.append(ComparisonRow(
            entity=code, n=pair.n_docs, c=pair.citations,
            gro=ind.gro(pair), h=ind.h_index(cites), p=ind.p_index(pair),
            cq=ind.cq_index(pair), top_decile=sum(1 for c in cites if c >= threshold),
        ))
    usable = [r for r in rows if all(getattr(r, k) > 0 for k in LOG_INDICATORS)]
    excluded = tuple(r.entity for r in rows if r not in usable)
    logs = {k: [math.log(getattr(r, k)) for r in usable] for k in LOG_INDICATORS}
    correlations = {}
    for i, a in enumerate(LOG_INDICATORS):
        for b in LOG_INDICATORS[i + 1:]:
            try:
                correlations[(a, b)] = pearson(logs[a], logs[b])
            except StatsError:
                correlations[(a, b)] = None
    return Comparison(tuple(rows), threshold, correlations, excluded)
