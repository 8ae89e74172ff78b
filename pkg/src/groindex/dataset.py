"""CSV ingestion for world baselines, entity metrics and economic data.

Every parse failure raises :class:`ParseError` carrying the file name, the
1-based line number and a short machine-readable ``code``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

from .fields import ALL_FIELDS_LABEL, FIELD_ORDER, FIELDS, FieldId
from .indicators import CountPair

log = logging.getLogger(__name__)

WORLD_HEADER = ["field", "n_docs", "citations"]
ENTITY_HEADER = ["entity", "kind", "field", "n_docs", "citations"]
ECON_HEADER = ["entity", "gdp_busd", "ppc_kusd"]

DEFAULT_MIN_DOCS = 50
TOTAL_MISMATCH_WARN = 0.05


class ParseError(ValueError):
    def __init__(self, path, line: int, code: str, message: str):
        self.path = str(path)
        self.line = line
        self.code = code
        self.message = message
        super().__init__(f"{self.path}:{line}: {code}: {message}")


class EntityKind(str, Enum):
    COUNTRY = "country"
    INSTITUTION = "institution"
    US_STATE = "us_state"


@dataclass(frozen=True, order=True)
class EntityId:
    code: str
    kind: EntityKind = EntityKind.COUNTRY

    def __post_init__(self):
        if not self.code or "," in self.code or "\n" in self.code or "\r" in self.code:
            raise ValueError(f"invalid entity code {self.code!r}")


@dataclass(frozen=True)
class EntityMetrics:
    id: EntityId
    totals: CountPair
    by_field: Mapping[FieldId, CountPair] = field(default_factory=dict)

    @property
    def code(self) -> str:
        return self.id.code


@dataclass(frozen=True)
class WorldBaseline:
    totals: CountPair
    by_field: Mapping[FieldId, CountPair]

    @property
    def quality(self) -> float:
        return self.totals.citations / self.totals.n_docs

    def field_quality(self, f: FieldId) -> float:
        pair = self.by_field[f]
        return pair.citations / pair.n_docs


@dataclass(frozen=True)
class EconRecord:
    entity: str
    gdp: float
    ppc: float

    @property
    def wth(self) -> float:
        return wealth_index(self.gdp, self.ppc)


@dataclass(frozen=True)
class Dataset:
    world: WorldBaseline
    entities: tuple[EntityMetrics, ...]
    econ: Optional[Mapping[str, EconRecord]] = None
    min_docs: int = DEFAULT_MIN_DOCS

    def __post_init__(self):
        codes = [e.code for e in self.entities]
        if len(set(codes)) != len(codes):
            raise ValueError("duplicate entity codes in dataset")
        if self.econ is not None:
            unknown = sorted(set(self.econ) - set(codes))
            if unknown:
                raise ValueError(f"econ records for unknown entities: {', '.join(unknown)}")
        if self.min_docs < 0:
            raise ValueError("min_docs must be nonnegative")

    def entity(self, code: str) -> EntityMetrics:
        for e in self.entities:
            if e.code == code:
                return e
        raise KeyError(code)

    def flagged(self) -> list[EntityMetrics]:
        """Entities at or below the document threshold."""
        return apply_threshold(self, self.min_docs)[1]


def wealth_index(gdp: float, ppc: float) -> float:
    """Geometric mean of average GDP and average GDP (PPP) per capita."""
    if gdp <= 0 or ppc <= 0:
        raise ValueError(f"gdp and ppc must be positive, got {gdp}, {ppc}")
    return math.sqrt(gdp * ppc)


# -- reading ---------------------------------------------------------------


def _rows(path):
    """Yield (line_number, row) pairs after checking the header is present."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row in reader:
            yield reader.line_num, row


def _check_header(path, rows, expected):
    try:
        line, header = next(rows)
    except StopIteration:
        raise ParseError(path, 1, "empty_file", "file is empty") from None
    if [h.strip() for h in header] != expected:
        raise ParseError(
            path, line, "bad_header",
            f"expected header {','.join(expected)!r}, got {','.join(header)!r}",
        )


def _parse_count(path, line, value, column) -> int:
    text = value.strip()
    try:
        n = int(text)
    except ValueError:
        raise ParseError(path, line, "bad_integer", f"{column} is not an integer: {value!r}") from None
    if n < 0:
        raise ParseError(path, line, "negative_count", f"{column} is negative: {n}")
    return n


def _parse_field(path, line, name) -> Optional[FieldId]:
    """None stands for the all-fields row."""
    if name.strip() == ALL_FIELDS_LABEL:
        return None
    try:
        return FieldId.parse(name)
    except ValueError:
        raise ParseError(path, line, "unknown_field", f"unknown research field {name!r}") from None


def _data_rows(path, rows, width):
    for line, row in rows:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise ParseError(path, line, "bad_row", f"expected {width} columns, got {len(row)}")
        yield line, row


def _check_totals(path, line, label, totals: CountPair, by_field: Mapping[FieldId, CountPair]):
    if not by_field:
        return
    biggest = max(p.n_docs for p in by_field.values())
    if totals.n_docs < biggest:
        raise ParseError(
            path, line, "total_below_field",
            f"{label}: total n_docs {totals.n_docs} is below a field count {biggest}",
        )
    sums = CountPair(
        sum(p.n_docs for p in by_field.values()),
        sum(p.citations for p in by_field.values()),
    )
    for name, tot, s in (("n_docs", totals.n_docs, sums.n_docs),
                         ("citations", totals.citations, sums.citations)):
        if tot and abs(s - tot) / tot > TOTAL_MISMATCH_WARN:
            log.warning("%s: %s field sum %d differs from total %d by more than 5%%",
                        label, name, s, tot)


def parse_world_baseline(path) -> WorldBaseline:
    rows = _rows(path)
    _check_header(path, rows, WORLD_HEADER)
    totals = None
    by_field: dict[FieldId, CountPair] = {}
    seen: dict[Optional[FieldId], int] = {}
    last_line = 1
    for line, (name, n, c) in _data_rows(path, rows, 3):
        last_line = line
        f = _parse_field(path, line, name)
        if f in seen:
            label = ALL_FIELDS_LABEL if f is None else f.value
            raise ParseError(path, line, "duplicate_field",
                             f"{label} already given on line {seen[f]}")
        seen[f] = line
        pair = CountPair(_parse_count(path, line, n, "n_docs"),
                         _parse_count(path, line, c, "citations"))
        if pair.n_docs == 0 or pair.citations == 0:
            raise ParseError(path, line, "nonpositive_world", "world counts must be positive")
        if f is None:
            totals = pair
        else:
            by_field[f] = pair
    missing = [f.value for f in FIELDS if f not in by_field]
    if missing:
        raise ParseError(path, last_line, "missing_field", f"missing field(s): {'; '.join(missing)}")
    if totals is None:
        raise ParseError(path, last_line, "missing_field", f"missing {ALL_FIELDS_LABEL} row")
    _check_totals(path, seen[None], "world", totals, by_field)
    return WorldBaseline(totals=totals, by_field={f: by_field[f] for f in FIELDS})


def parse_entity_metrics(path) -> list[EntityMetrics]:
    """Group per-field rows into one record per entity, sorted by code.

    When an entity has no ``ALL`` row its totals are the field sums.
    """
    rows = _rows(path)
    _check_header(path, rows, ENTITY_HEADER)
    kinds: dict[str, tuple[EntityKind, int]] = {}
    fields: dict[str, dict[FieldId, CountPair]] = {}
    totals: dict[str, CountPair] = {}
    seen: dict[tuple[str, Optional[FieldId]], int] = {}
    total_line: dict[str, int] = {}
    for line, (code, kind, name, n, c) in _data_rows(path, rows, 5):
        code = code.strip()
        if not code:
            raise ParseError(path, line, "bad_entity", "empty entity code")
        try:
            k = EntityKind(kind.strip())
        except ValueError:
            raise ParseError(path, line, "bad_kind", f"unknown entity kind {kind!r}") from None
        if code in kinds and kinds[code][0] != k:
            raise ParseError(path, line, "bad_kind",
                             f"{code} declared as {kinds[code][0].value} on line {kinds[code][1]}")
        kinds.setdefault(code, (k, line))
        f = _parse_field(path, line, name)
        key = (code, f)
        if key in seen:
            label = ALL_FIELDS_LABEL if f is None else f.value
            raise ParseError(path, line, "duplicate_entry",
                             f"({code}, {label}) duplicated on lines {seen[key]} and {line}")
        seen[key] = line
        pair = CountPair(_parse_count(path, line, n, "n_docs"),
                         _parse_count(path, line, c, "citations"))
        if f is None:
            totals[code] = pair
            total_line[code] = line
        else:
            fields.setdefault(code, {})[f] = pair

    out = []
    for code in sorted(kinds):
        by_field = fields.get(code, {})
        by_field = {f: by_field[f] for f in sorted(by_field, key=FIELD_ORDER.__getitem__)}
        if code in totals:
            tot = totals[code]
            _check_totals(path, total_line[code], code, tot, by_field)
        else:
            tot = CountPair(sum(p.n_docs for p in by_field.values()),
                            sum(p.citations for p in by_field.values()))
        out.append(EntityMetrics(EntityId(code, kinds[code][0]), tot, by_field))
    return out


def parse_econ(path, known_ids: Optional[Iterable[str]] = None) -> dict[str, EconRecord]:
    rows = _rows(path)
    _check_header(path, rows, ECON_HEADER)
    known = None if known_ids is None else set(known_ids)
    out: dict[str, EconRecord] = {}
    lines: dict[str, int] = {}
    for line, (code, gdp, ppc) in _data_rows(path, rows, 3):
        code = code.strip()
        if code in lines:
            raise ParseError(path, line, "duplicate_entry", f"{code} already given on line {lines[code]}")
        values = []
        for column, text in (("gdp_busd", gdp), ("ppc_kusd", ppc)):
            try:
                v = float(text)
            except ValueError:
                raise ParseError(path, line, "bad_number", f"{column} is not a number: {text!r}") from None
            if not (v > 0) or math.isinf(v):
                raise ParseError(path, line, "nonpositive_econ", f"{column} must be positive, got {text.strip()}")
            values.append(v)
        if known is not None and code not in known:
            raise ParseError(path, line, "unknown_entity", f"no entity metrics for {code}")
        lines[code] = line
        out[code] = EconRecord(code, values[0], values[1])
    return dict(sorted(out.items()))


def parse_exclusions(path) -> set[str]:
    """Entity codes, one per line; ``#`` starts a comment."""
    codes = set()
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            text = raw.split("#", 1)[0].strip()
            if text:
                codes.add(text)
    return codes


def load_dataset(world_path, entities_path, econ_path=None,
                 min_docs: int = DEFAULT_MIN_DOCS) -> Dataset:
    world = parse_world_baseline(world_path)
    entities = parse_entity_metrics(entities_path)
    econ = None
    if econ_path is not None:
        econ = parse_econ(econ_path, known_ids=[e.code for e in entities])
    return Dataset(world, tuple(entities), econ, min_docs)


def apply_threshold(dataset: Dataset, min_docs: int) -> tuple[list[EntityMetrics], list[EntityMetrics]]:
    """Split entities into those with strictly more than ``min_docs`` documents and the rest."""
    if min_docs < 0:
        raise ValueError("min_docs must be nonnegative")
    included, excluded = [], []
    for e in dataset.entities:
        (included if e.totals.n_docs > min_docs else excluded).append(e)
    return included, excluded


# -- writing ---------------------------------------------------------------


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def format_world_baseline(world: WorldBaseline) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(WORLD_HEADER)
    w.writerow([ALL_FIELDS_LABEL, world.totals.n_docs, world.totals.citations])
    for f in FIELDS:
        p = world.by_field[f]
        w.writerow([f.value, p.n_docs, p.citations])
    return buf.getvalue()


def format_entity_metrics(entities: Iterable[EntityMetrics]) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(ENTITY_HEADER)
    for e in sorted(entities, key=lambda e: e.code):
        w.writerow([e.code, e.id.kind.value, ALL_FIELDS_LABEL, e.totals.n_docs, e.totals.citations])
        for f in sorted(e.by_field, key=FIELD_ORDER.__getitem__):
            p = e.by_field[f]
            w.writerow([e.code, e.id.kind.value, f.value, p.n_docs, p.citations])
    return buf.getvalue()


def format_econ(econ: Mapping[str, EconRecord]) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(ECON_HEADER)
    for code in sorted(econ):
        r = econ[code]
        w.writerow([code, repr(r.gdp), repr(r.ppc)])
    return buf.getvalue()


def write_dataset(dataset: Dataset, directory) -> dict[str, str]:
    """Write the canonical CSV form of a dataset; returns the paths written."""
    os.makedirs(directory, exist_ok=True)
    paths = {
        "world": os.path.join(directory, "world_fields.csv"),
        "entities": os.path.join(directory, "entity_metrics.csv"),
    }
    with open(paths["world"], "w", encoding="utf-8", newline="") as fh:
        fh.write(format_world_baseline(dataset.world))
    with open(paths["entities"], "w", encoding="utf-8", newline="") as fh:
        fh.write(format_entity_metrics(dataset.entities))
    if dataset.econ is not None:
        paths["econ"] = os.path.join(directory, "econ.csv")
        with open(paths["econ"], "w", encoding="utf-8", newline="") as fh:
            fh.write(format_econ(dataset.econ))
    return paths


CORPUS_HEADER = ["entity", "citations"]


def parse_corpus(path) -> dict[str, list[int]]:
    """Per-paper citation counts, one ``entity,citations`` row per paper."""
    rows = _rows(path)
    _check_header(path, rows, CORPUS_HEADER)
    corpus: dict[str, list[int]] = {}
    for line, (code, c) in _data_rows(path, rows, 2):
        code = code.strip()
        if not code:
            raise ParseError(path, line, "bad_entity", "empty entity code")
        corpus.setdefault(code, []).append(_parse_count(path, line, c, "citations"))
    return dict(sorted(corpus.items()))


def format_corpus(corpus: Mapping[str, Iterable[int]]) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(CORPUS_HEADER)
    for code in sorted(corpus):
        for c in corpus[code]:
            w.writerow([code, c])
    return buf.getvalue()
