"""Seeded synthetic corpora for behaviour that cannot be checked on public data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .dataset import EntityId, EntityKind, EntityMetrics, WorldBaseline
from .fields import FIELDS, FieldId
from .indicators import CountPair


def _code(prefix: str, i: int, width: int) -> str:
    return f"{prefix}{i:0{width}d}"


def world_proportional_sample(world: WorldBaseline, n_entities: int = 189, jitter: float = 0.2,
                              min_scale: float = 1e-5, max_scale: float = 0.3,
                              seed: int = 0) -> list[EntityMetrics]:
    """Entities whose field counts are the world's, scaled and jittered.

    Each entity gets a log-uniform scale; every field's N and C are then
    multiplied by an independent factor in [1 - jitter, 1 + jitter]. The
    all-fields totals follow the world totals, rescaled by how much the
    jittered field sums moved.
    """
    rng = np.random.default_rng(seed)
    width = len(str(n_entities - 1))
    world_n = sum(p.n_docs for p in world.by_field.values())
    world_c = sum(p.citations for p in world.by_field.values())
    out = []
    for i in range(n_entities):
        k = math.exp(rng.uniform(math.log(min_scale), math.log(max_scale)))
        by_field = {}
        for f in FIELDS:
            wp = world.by_field[f]
            fn, fc = rng.uniform(1 - jitter, 1 + jitter, size=2)
            n = int(round(k * wp.n_docs * fn))
            c = int(round(k * wp.citations * fc))
            if n > 0:
                by_field[f] = CountPair(n, c)
        sn = sum(p.n_docs for p in by_field.values())
        sc = sum(p.citations for p in by_field.values())
        totals = CountPair(
            max(int(round(world.totals.n_docs * sn / world_n)), max((p.n_docs for p in by_field.values()), default=0)),
            int(round(world.totals.citations * sc / world_c)),
        )
        out.append(EntityMetrics(EntityId(_code("S", i, width), EntityKind.COUNTRY), totals, by_field))
    return out


def scaled_world_copies(world: WorldBaseline, scales: Sequence[float]) -> list[EntityMetrics]:
    """Exact multiples of the world profile (counts rounded to integers)."""
    out = []
    width = len(str(len(scales) - 1))
    for i, k in enumerate(scales):
        by_field = {f: CountPair(round(k * p.n_docs), round(k * p.citations))
                    for f, p in world.by_field.items()}
        totals = CountPair(round(k * world.totals.n_docs), round(k * world.totals.citations))
        out.append(EntityMetrics(EntityId(_code("K", i, width)), totals, by_field))
    return out


@dataclass(frozen=True)
class CorpusConfig:
    """Knobs for the per-paper citation corpus.

    Paper counts are log-uniform in [min_size, max_size]. Each entity draws a
    quality multiplier from a lognormal(0, quality_sigma); each paper's
    citations are floor(lognormal(ln(base_mean * quality), tail_sigma)).
    """

    n_entities: int = 200
    min_size: int = 50
    max_size: int = 5000
    base_mean: float = 8.0
    quality_sigma: float = 0.35
    tail_sigma: float = 1.1


def citation_corpus(config: CorpusConfig = CorpusConfig(), seed: int = 0) -> dict[str, list[int]]:
    rng = np.random.default_rng(seed)
    width = len(str(config.n_entities - 1))
    corpus = {}
    lo, hi = math.log(config.min_size), math.log(config.max_size)
    for i in range(config.n_entities):
        size = int(round(math.exp(rng.uniform(lo, hi))))
        quality = math.exp(rng.normal(0.0, config.quality_sigma))
        mu = math.log(config.base_mean * quality) - config.tail_sigma ** 2 / 2
        cites = np.floor(rng.lognormal(mu, config.tail_sigma, size=size)).astype(int)
        corpus[_code("E", i, width)] = [int(c) for c in cites]
    return corpus


def planted_bloc_sample(world: WorldBaseline, blocs: Mapping[str, Sequence[FieldId]],
                        per_bloc: int = 20, boost: float = 3.0, jitter: float = 0.1,
                        scale: float = 0.01, seed: int = 0) -> tuple[list[EntityMetrics], dict[str, str]]:
    """Entities built from the world profile with one set of fields boosted per bloc.

    Returns the entities and a code -> bloc map.
    """
    rng = np.random.default_rng(seed)
    entities, membership = [], {}
    idx = 0
    for bloc, boosted in blocs.items():
        boosted = set(boosted)
        for _ in range(per_bloc):
            by_field = {}
            for f in FIELDS:
                wp = world.by_field[f]
                m = boost if f in boosted else 1.0
                fn, fc = rng.uniform(1 - jitter, 1 + jitter, size=2)
                by_field[f] = CountPair(max(1, round(scale * m * wp.n_docs * fn)),
                                        round(scale * m * wp.citations * fc))
            totals = CountPair(sum(p.n_docs for p in by_field.values()),
                               sum(p.citations for p in by_field.values()))
            code = f"B{idx:03d}"
            idx += 1
            entities.append(EntityMetrics(EntityId(code), totals, by_field))
            membership[code] = bloc
    return entities, membership


def planted_profiles(n_items: int = 22, n_groups: int = 5, n_features: int = 40,
                     noise: float = 0.05, seed: int = 0) -> tuple[np.ndarray, list[int]]:
    """Item x feature matrix where each item is its group's base vector plus small noise.

    Returns the matrix and the planted group of each item (round-robin).
    """
    rng = np.random.default_rng(seed)
    bases = rng.normal(0.0, 1.0, size=(n_groups, n_features))
    groups = [i % n_groups for i in range(n_items)]
    x = np.array([bases[g] + rng.normal(0.0, noise, size=n_features) for g in groups])
    return x, groups
