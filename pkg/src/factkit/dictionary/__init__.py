"""Dictionary generation: NER pair queries + diversity-clustered semantic search."""

from .builder import (
    Dictionary,
    DictionaryBuilder,
    DictionaryEntry,
    DictionaryParams,
    KnowledgeScope,
    assemble_scope,
)
from .clustering import KMeansResult, kmeans, round_robin_select
from .ner import CapitalizedRunRecognizer, EntityRecognizer, EntitySpan, pair_queries

__all__ = [
    "Dictionary",
    "DictionaryBuilder",
    "DictionaryEntry",
    "DictionaryParams",
    "KnowledgeScope",
    "assemble_scope",
    "KMeansResult",
    "kmeans",
    "round_robin_select",
    "CapitalizedRunRecognizer",
    "EntityRecognizer",
    "EntitySpan",
    "pair_queries",
]
