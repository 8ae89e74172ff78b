"""Closed-form bibliometric indexes for a (documents, citations) aggregate.

All fractional powers are evaluated in the log domain: world-scale citation
counts cubed overflow 64-bit integers and lose precision as floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .fields import FieldId


class DomainError(ValueError):
    """An index was requested outside the domain where it is defined."""


@dataclass(frozen=True)
class CountPair:
    n_docs: int
    citations: int

    def __post_init__(self):
        if self.n_docs < 0 or self.citations < 0:
            raise DomainError(
                f"counts must be nonnegative, got N={self.n_docs}, C={self.citations}"
            )

    def __add__(self, other: "CountPair") -> "CountPair":
        return CountPair(self.n_docs + other.n_docs, self.citations + other.citations)


@dataclass(frozen=True)
class IndexValues:
    quantity_q: float
    quality_q: float
    gro: float
    rro: float
    p_index: float
    cq: float


@dataclass(frozen=True)
class FieldIndexValues:
    field_id: FieldId
    gro_r: float
    rro_r: float
    relative_quality: float


def _require_docs(pair: CountPair) -> None:
    if pair.n_docs <= 0:
        raise DomainError("index undefined for an entity with zero documents")


def _power_ratio(c: int, n: int, c_exp: int, root: int) -> float:
    """(c**c_exp / n) ** (1/root), computed as exp((c_exp*ln c - ln n) / root)."""
    if c == 0:
        return 0.0
    return math.exp((c_exp * math.log(c) - math.log(n)) / root)


def geometric_mean(a: float, b: float) -> float:
    if a < 0 or b < 0:
        raise DomainError(f"geometric mean needs nonnegative inputs, got {a}, {b}")
    prod = a * b
    if math.isinf(prod) or (prod == 0 and a and b):
        return math.sqrt(a) * math.sqrt(b)
    return math.sqrt(prod)


def quantity(pair: CountPair) -> float:
    """Size measure Q: geometric mean of documents and citations."""
    return geometric_mean(pair.n_docs, pair.citations)


def quality(pair: CountPair) -> float:
    """Citations per document."""
    _require_docs(pair)
    return pair.citations / pair.n_docs


def gro(pair: CountPair) -> float:
    """Global research output, (C^3 / N) ** (1/4).

    Equivalently the geometric mean of quantity and quality. An uncited
    corpus scores 0.
    """
    _require_docs(pair)
    return _power_ratio(pair.citations, pair.n_docs, 3, 4)


def rro(pair: CountPair, world_quality: float) -> float:
    if world_quality <= 0:
        raise DomainError(f"world quality must be positive, got {world_quality}")
    return gro(pair) / math.sqrt(world_quality)


def p_index(pair: CountPair) -> float:
    _require_docs(pair)
    return _power_ratio(pair.citations, pair.n_docs, 2, 3)


def cq_index(pair: CountPair) -> float:
    _require_docs(pair)
    return _power_ratio(pair.citations, pair.n_docs, 3, 2)


def indexes(pair: CountPair, world_quality: float) -> IndexValues:
    """All whole-entity indexes at once, RRO relative to ``world_quality``."""
    return IndexValues(
        quantity_q=quantity(pair),
        quality_q=quality(pair),
        gro=gro(pair),
        rro=rro(pair, world_quality),
        p_index=p_index(pair),
        cq=cq_index(pair),
    )


def field_indexes(
    pair: CountPair, world_pair: CountPair, field: FieldId
) -> Optional[FieldIndexValues]:
    """Per-field GRO and world-relative RRO for one entity.

    Returns None when the entity has no documents in the field; an empty
    field is absent rather than zero.
    """
    if world_pair.n_docs <= 0 or world_pair.citations <= 0:
        raise DomainError(f"world counts for {field} must be positive")
    if pair.n_docs == 0:
        return None
    world_q = world_pair.citations / world_pair.n_docs
    rel_q = (pair.citations / pair.n_docs) / world_q
    return FieldIndexValues(
        field_id=field,
        gro_r=gro(pair),
        rro_r=math.sqrt(quantity(pair) * rel_q),
        relative_quality=rel_q,
    )


def h_index(citations_per_paper: Iterable[int]) -> int:
    """Largest h such that h papers have at least h citations each."""
    counts = sorted(citations_per_paper, reverse=True)
    if counts and counts[-1] < 0:
        raise DomainError("citation counts must be nonnegative")
    h = 0
    for i, c in enumerate(counts, start=1):
        if c >= i:
            h = i
        else:
            break
    return h


def specialization(field_gros: Mapping[FieldId, float]) -> tuple[float, float]:
    """Largest field share of the GROr sum, and the sum of the two largest.

    Returns (sgr, top2).
    """
    values = list(field_gros.values())
    if any(v < 0 for v in values):
        raise DomainError("field GRO values must be nonnegative")
    total = math.fsum(values)
    if total <= 0:
        raise DomainError("specialization needs at least one positive field value")
    shares = sorted((v / total for v in values), reverse=True)
    return shares[0], math.fsum(shares[:2])


def aggregate(pairs: Iterable[CountPair]) -> CountPair:
    pairs = list(pairs)
    if not pairs:
        raise DomainError("cannot aggregate an empty list of counts")
    return CountPair(
        sum(p.n_docs for p in pairs), sum(p.citations for p in pairs)
    )
