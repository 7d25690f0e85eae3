"""Recall@K evaluation and the three-way retrieval comparison.

The comparison matrix has one row per (method, test set) cell:

* vector_only / baseline: cosine search over caption-derived embeddings.
* vector_only / transcript_enriched: cosine search over embeddings that
  absorbed transcript text.
* classifier_routed / baseline: each query is routed to full-text transcript
  search or to the baseline vector index, with the empty-result fallback
  disabled so the routing itself is what gets scored.

Retrieval always runs over the test split only; train clips exist to feed
augmentation and classifier training, not to pad the candidate pool. Ranks
are computed over the full candidate list, so median rank is exact; a query
whose ground truth never appears (e.g. routed to full-text and matching
nothing) counts as rank N+1 in the median and as a miss in every recall.

Each cell runs independently: a missing artifact marks that row with an
error message and the rest of the report still fills in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .corpus_store import Corpus, TEST, transcript_documents
from .datafication import utc_now_iso
from .dataset_builder import SPEECH_QUOTE, EvalPair, build_mixed_test_set
from .fulltext_index import FulltextIndex, build_fulltext_index, fulltext_search
from .query_classifier import ClassifierModel
from .retrieval_engine import (
    MODE_RULE_BASED,
    MODE_TRAINED,
    EngineConfig,
    QueryEmbedder,
    RetrievalEngine,
    engine_search,
)
from .synth import (  # noqa: F401  (re-exported: the synthetic world is eval tooling)
    SynthParams,
    SynthWorld,
    generate_synthetic_corpus,
)
from .vector_index import EmbeddingMatrix, vector_search

METHOD_VECTOR_ONLY = "vector_only"
METHOD_CLASSIFIER_ROUTED = "classifier_routed"

VARIANT_BASELINE = "baseline"
VARIANT_TRANSCRIPT_ENRICHED = "transcript_enriched"

TEST_SET_VISUAL_ONLY = "visual_only"
TEST_SET_MIXED = "mixed"

ROUTING_CLASSIFIER = "classifier"
ROUTING_RULE_BASED = "rule_based"
ROUTING_ORACLE = "oracle"
ROUTING_NONE = "none"  # vector-only rows do not route

_ROUTING_MODES = (ROUTING_CLASSIFIER, ROUTING_RULE_BASED, ROUTING_ORACLE)

DEFAULT_K_LIST = (1, 5, 10)


class EvalError(ValueError):
    """Evaluation inputs are unusable as a whole (per-cell problems are
    reported in the row instead)."""


@dataclass(frozen=True)
class EvalRow:
    method: str
    variant: str
    test_set: str
    r_at_k: dict[int, float]
    median_rank: float | None
    routing_mode: str
    n_queries: int
    error: str | None = None


@dataclass(frozen=True)
class EvalReport:
    rows: list[EvalRow]
    seed: int
    corpus_size: int
    timestamp: str
    k_list: tuple[int, ...]
    routing_mode: str

    def row(self, method: str, variant: str, test_set: str) -> EvalRow:
        for r in self.rows:
            if (r.method, r.variant, r.test_set) == (method, variant, test_set):
                return r
        raise KeyError(f"no row ({method}, {variant}, {test_set})")


def _hit_id(hit) -> str:
    if isinstance(hit, str):
        return hit
    if isinstance(hit, tuple):
        return hit[0]
    return hit.clip_id


def rank_of(hits: Iterable, gt_clip_id: str) -> int | None:
    """1-based position of the ground truth in a ranked list, None if absent."""
    for i, hit in enumerate(hits):
        if _hit_id(hit) == gt_clip_id:
            return i + 1
    return None


def recall_at_k(ranks: Sequence[int | None], k: int) -> float:
    """Fraction of queries whose rank is <= k; absent ranks count as misses."""
    if not ranks:
        raise EvalError("recall over an empty rank list is undefined")
    if k < 1:
        raise EvalError(f"k must be >= 1, got {k}")
    return sum(1 for r in ranks if r is not None and r <= k) / len(ranks)


def median_rank(ranks: Sequence[int | None], universe_size: int) -> float:
    """Median rank with absent ground truth counted as universe_size + 1."""
    if not ranks:
        raise EvalError("median over an empty rank list is undefined")
    filled = [universe_size + 1 if r is None else r for r in ranks]
    return float(np.median(filled))


def format_percent(ratio: float) -> str:
    """Recall ratios are reported as percentages with one decimal: 0.542 -> "54.2"."""
    return f"{ratio * 100.0:.1f}"


def build_standard_test_sets(corpus: Corpus, seed: int, mixed_fraction: float = 0.5) -> dict[str, list[EvalPair]]:
    """The two test sets every comparison uses: all-caption and half-speech."""
    return {
        TEST_SET_VISUAL_ONLY: build_mixed_test_set(corpus, 0.0, seed),
        TEST_SET_MIXED: build_mixed_test_set(corpus, mixed_fraction, seed),
    }


def _vector_ranks(
    matrix: EmbeddingMatrix, pairs: list[EvalPair], embedder: QueryEmbedder, k_full: int
) -> list[int | None]:
    return [
        rank_of(vector_search(matrix, embedder(p.query_text), k_full), p.gt_clip_id) for p in pairs
    ]


def _oracle_ranks(
    fulltext: FulltextIndex,
    matrix: EmbeddingMatrix,
    pairs: list[EvalPair],
    embedder: QueryEmbedder,
    k_full: int,
) -> list[int | None]:
    ranks: list[int | None] = []
    for p in pairs:
        if p.query_kind == SPEECH_QUOTE:
            hits: Iterable = fulltext_search(fulltext, p.query_text, k_full)
        else:
            hits = vector_search(matrix, embedder(p.query_text), k_full)
        ranks.append(rank_of(hits, p.gt_clip_id))
    return ranks


def _routed_ranks(
    engine: RetrievalEngine, pairs: list[EvalPair], k_full: int
) -> list[int | None]:
    ranks: list[int | None] = []
    for p in pairs:
        _, hits = engine_search(engine, p.query_text, k_full)
        ranks.append(rank_of(hits, p.gt_clip_id))
    return ranks


def run_comparison(
    corpus: Corpus,
    baseline: EmbeddingMatrix | None,
    enriched: EmbeddingMatrix | None,
    query_embedder: QueryEmbedder,
    test_sets: dict[str, list[EvalPair]],
    classifier: ClassifierModel | None = None,
    k_list: Sequence[int] = DEFAULT_K_LIST,
    routing_mode: str = ROUTING_CLASSIFIER,
    threshold: float = 0.5,
    seed: int = 0,
) -> EvalReport:
    """Evaluate the 3 x len(test_sets) matrix and return the full report."""
    if not test_sets:
        raise EvalError("no test sets given")
    k_list = tuple(int(k) for k in k_list)
    if not k_list or any(k < 1 for k in k_list):
        raise EvalError(f"k_list must be non-empty with k >= 1, got {k_list}")
    if routing_mode not in _ROUTING_MODES:
        raise EvalError(f"routing_mode must be one of {_ROUTING_MODES}, got {routing_mode!r}")
    test_ids = [c.clip_id for c in corpus if c.split == TEST]
    if not test_ids:
        raise EvalError("corpus has no test-split clips")
    universe = len(test_ids)
    k_full = universe  # full ranking: exact median, recall at any k <= N

    def subset(matrix: EmbeddingMatrix | None, name: str) -> EmbeddingMatrix:
        if matrix is None:
            raise EvalError(f"{name} embeddings not provided")
        return matrix.subset(test_ids)

    def classifier_ranks(pairs: list[EvalPair]) -> list[int | None]:
        base = subset(baseline, VARIANT_BASELINE)
        fulltext = build_fulltext_index(transcript_documents(corpus, TEST))
        if routing_mode == ROUTING_ORACLE:
            return _oracle_ranks(fulltext, base, pairs, query_embedder, k_full)
        mode = MODE_TRAINED if routing_mode == ROUTING_CLASSIFIER else MODE_RULE_BASED
        if mode == MODE_TRAINED and classifier is None:
            raise EvalError("routing_mode 'classifier' requires a trained classifier")
        engine = RetrievalEngine(
            fulltext=fulltext,
            vectors=base,
            query_embedder=query_embedder,
            config=EngineConfig(
                threshold=threshold, k_default=k_full, fallback_on_empty=False, classifier_mode=mode
            ),
            classifier=classifier,
        )
        return _routed_ranks(engine, pairs, k_full)

    cells: list[tuple[str, str, str, Callable[[list[EvalPair]], list[int | None]]]] = [
        (
            METHOD_VECTOR_ONLY,
            VARIANT_BASELINE,
            ROUTING_NONE,
            lambda pairs: _vector_ranks(subset(baseline, VARIANT_BASELINE), pairs, query_embedder, k_full),
        ),
        (
            METHOD_VECTOR_ONLY,
            VARIANT_TRANSCRIPT_ENRICHED,
            ROUTING_NONE,
            lambda pairs: _vector_ranks(
                subset(enriched, VARIANT_TRANSCRIPT_ENRICHED), pairs, query_embedder, k_full
            ),
        ),
        (METHOD_CLASSIFIER_ROUTED, VARIANT_BASELINE, routing_mode, classifier_ranks),
    ]

    rows: list[EvalRow] = []
    for test_set_name, pairs in test_sets.items():
        for method, variant, row_routing, run in cells:
            try:
                if not pairs:
                    raise EvalError("empty test set")
                ranks = run(pairs)
                rows.append(
                    EvalRow(
                        method=method,
                        variant=variant,
                        test_set=test_set_name,
                        r_at_k={k: recall_at_k(ranks, k) for k in k_list},
                        median_rank=median_rank(ranks, universe),
                        routing_mode=row_routing,
                        n_queries=len(pairs),
                    )
                )
            except ValueError as exc:
                rows.append(
                    EvalRow(
                        method=method,
                        variant=variant,
                        test_set=test_set_name,
                        r_at_k={},
                        median_rank=None,
                        routing_mode=row_routing,
                        n_queries=len(pairs),
                        error=str(exc),
                    )
                )
    return EvalReport(
        rows=rows,
        seed=seed,
        corpus_size=len(corpus),
        timestamp=utc_now_iso(),
        k_list=k_list,
        routing_mode=routing_mode,
    )


def report_to_dict(report: EvalReport) -> dict:
    return {
        "seed": report.seed,
        "corpus_size": report.corpus_size,
        "timestamp": report.timestamp,
        "k_list": list(report.k_list),
        "routing_mode": report.routing_mode,
        "rows": [
            {
                "method": r.method,
                "variant": r.variant,
                "test_set": r.test_set,
                "r_at_k": {str(k): v for k, v in r.r_at_k.items()},
                "r_at_k_percent": {str(k): format_percent(v) for k, v in r.r_at_k.items()},
                "median_rank": r.median_rank,
                "routing_mode": r.routing_mode,
                "n_queries": r.n_queries,
                "error": r.error,
            }
            for r in report.rows
        ],
    }


def save_report(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8")


def load_report(path: str | Path) -> EvalReport:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    rows = [
        EvalRow(
            method=r["method"],
            variant=r["variant"],
            test_set=r["test_set"],
            r_at_k={int(k): v for k, v in r["r_at_k"].items()},
            median_rank=r["median_rank"],
            routing_mode=r["routing_mode"],
            n_queries=r["n_queries"],
            error=r.get("error"),
        )
        for r in obj["rows"]
    ]
    return EvalReport(
        rows=rows,
        seed=obj["seed"],
        corpus_size=obj["corpus_size"],
        timestamp=obj["timestamp"],
        k_list=tuple(obj["k_list"]),
        routing_mode=obj["routing_mode"],
    )
