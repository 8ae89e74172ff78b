"""Geometric-mean research output indicators (GRO, RRO and friends) for countries and institutions."""

__version__ = "0.1.0"

from .fields import FIELDS, FieldId
from .indicators import (CountPair, DomainError, aggregate, cq_index, field_indexes,
                         geometric_mean, gro, h_index, indexes, p_index, rro, specialization)

__all__ = [
    "FIELDS", "FieldId", "CountPair", "DomainError", "aggregate", "cq_index", "field_indexes",
    "geometric_mean", "gro", "h_index", "indexes", "p_index", "rro", "specialization",
]
