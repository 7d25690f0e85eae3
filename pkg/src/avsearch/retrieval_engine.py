"""Classifier-routed retrieval: one query in, one backend out.

Each query is classified as speech/quote text or a plain visual
description. Speech queries go to the full-text transcript index; visual
queries are embedded and sent to the vector index. There is no score
fusion between the two paths — routing is exclusive.

When the full-text path returns nothing and fallback is enabled, the query
is re-run on the vector path and the decision records route "vector" with
fallback_used set; a fallback decision therefore tells you the classifier
said speech but the transcripts had no match. Evaluation runs disable the
fallback so the routing itself is what gets measured.

The engine is an immutable bundle of classifier, indexes, and config;
concurrent searches are safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dataset_builder import SPEECH_QUOTE
from .fulltext_index import FulltextIndex, fulltext_search
from .query_classifier import ClassifierModel, predict, rule_based_detect
from .vector_index import EmbeddingMatrix, ScoredHit, VectorIndexError, vector_search

ROUTE_FULLTEXT = "fulltext"
ROUTE_VECTOR = "vector"

MODE_TRAINED = "trained"
MODE_RULE_BASED = "rule_based"

QueryEmbedder = Callable[[str], np.ndarray]


class EngineError(ValueError):
    """Engine misconfiguration or unanswerable query."""


class QueryEmbeddingError(EngineError):
    """The vector route had no embedding available for the query text."""


@dataclass(frozen=True)
class EngineConfig:
    threshold: float = 0.5
    k_default: int = 10
    fallback_on_empty: bool = True
    classifier_mode: str = MODE_TRAINED  # or MODE_RULE_BASED

    def check(self) -> None:
        if not 0.0 <= self.threshold:
            raise EngineError(f"threshold must be non-negative, got {self.threshold}")
        if self.k_default < 1:
            raise EngineError(f"k_default must be >= 1, got {self.k_default}")
        if self.classifier_mode not in (MODE_TRAINED, MODE_RULE_BASED):
            raise EngineError(f"unknown classifier_mode {self.classifier_mode!r}")


@dataclass(frozen=True)
class RouteDecision:
    route: str  # ROUTE_FULLTEXT or ROUTE_VECTOR
    label_confidence: float
    fallback_used: bool = False

    def __post_init__(self):
        if self.fallback_used and self.route != ROUTE_VECTOR:
            raise EngineError("fallback_used requires route == vector")


@dataclass(frozen=True)
class RetrievalEngine:
    fulltext: FulltextIndex
    vectors: EmbeddingMatrix
    query_embedder: QueryEmbedder
    config: EngineConfig = EngineConfig()
    classifier: ClassifierModel | None = None

    def __post_init__(self):
        self.config.check()
        if self.config.classifier_mode == MODE_TRAINED and self.classifier is None:
            raise EngineError("classifier_mode 'trained' requires a classifier model")


def route_query(engine: RetrievalEngine, query_text: str) -> RouteDecision:
    """Pure routing decision: speech goes to full-text, visual to vectors."""
    if engine.config.classifier_mode == MODE_RULE_BASED:
        label = rule_based_detect(query_text)
        confidence = 1.0
    else:
        label, confidence = predict(engine.classifier, query_text, engine.config.threshold)
    route = ROUTE_FULLTEXT if label == SPEECH_QUOTE else ROUTE_VECTOR
    return RouteDecision(route=route, label_confidence=confidence)


def _vector_hits(engine: RetrievalEngine, query_text: str, k: int) -> list[ScoredHit]:
    try:
        vec = engine.query_embedder(query_text)
    except (VectorIndexError, LookupError) as exc:
        raise QueryEmbeddingError(f"no query embedding available for {query_text!r}: {exc}") from exc
    return vector_search(engine.vectors, vec, k)


def engine_search(
    engine: RetrievalEngine, query_text: str, k: int | None = None
) -> tuple[RouteDecision, list[ScoredHit]]:
    """Route, then search the chosen backend.

    A full-text route with zero hits falls back to the vector path when the
    engine is configured to do so; the returned decision then reads
    route="vector", fallback_used=True.
    """
    k = engine.config.k_default if k is None else k
    if k < 1:
        raise EngineError(f"k must be >= 1, got {k}")
    decision = route_query(engine, query_text)
    if decision.route == ROUTE_FULLTEXT:
        ranked = fulltext_search(engine.fulltext, query_text, k)
        hits = [ScoredHit(clip_id=cid, score=score, rank=i + 1) for i, (cid, score) in enumerate(ranked)]
        if hits or not engine.config.fallback_on_empty:
            return decision, hits
        decision = RouteDecision(
            route=ROUTE_VECTOR, label_confidence=decision.label_confidence, fallback_used=True
        )
    return decision, _vector_hits(engine, query_text, k)
