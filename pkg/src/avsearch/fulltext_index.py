"""Inverted index with BM25 ranking over clip transcripts.

The scoring function, for query token multiset q and document d:

    score(q, d) = sum over t in q of
        idf(t) * tf(t,d) * (k1 + 1) / (tf(t,d) + k1 * (1 - b + b * |d| / avgdl))
    idf(t) = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))

N is the document count, df the document frequency, |d| the token length of
d, and avgdl the mean document length. The sum runs over query token
occurrences, so repeating a term in the query weights it proportionally.
The ln(1 + ...) idf variant keeps every score non-negative even on tiny
corpora. No stemming, no stop words: ranking is an exact function of the
formula, which keeps the brute-force oracle in the test suite meaningful.

Results are ordered by (score descending, clip_id ascending); documents
scoring 0 are omitted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .analysis import analyze_text

SNAPSHOT_MAGIC = "AVFT1"


class FulltextIndexError(ValueError):
    """Bad build input or unreadable snapshot."""


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def check(self) -> None:
        if not self.k1 > 0:
            raise FulltextIndexError(f"k1 must be positive, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise FulltextIndexError(f"b must be in [0, 1], got {self.b}")


@dataclass(frozen=True)
class FulltextIndex:
    postings: dict[str, list[tuple[int, int]]]  # token -> [(ordinal, tf)], ordinal-sorted
    doc_ids: list[str]  # ordinal -> clip_id
    doc_lengths: list[int]
    avgdl: float
    params: Bm25Params

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)


def build_fulltext_index(
    docs: list[tuple[str, str]], params: Bm25Params = Bm25Params()
) -> FulltextIndex:
    """Index (clip_id, text) pairs. Empty documents are allowed (length 0)."""
    params.check()
    doc_ids: list[str] = []
    doc_lengths: list[int] = []
    postings: dict[str, list[tuple[int, int]]] = {}
    seen: set[str] = set()
    for ordinal, (clip_id, text) in enumerate(docs):
        if clip_id in seen:
            raise FulltextIndexError(f"duplicate clip_id {clip_id!r}")
        seen.add(clip_id)
        tokens = analyze_text(text)
        doc_ids.append(clip_id)
        doc_lengths.append(len(tokens))
        tf: dict[str, int] = {}
        for t in tokens:
            tf[t] = tf.get(t, 0) + 1
        for t, f in tf.items():
            postings.setdefault(t, []).append((ordinal, f))
    avgdl = sum(doc_lengths) / len(doc_lengths) if doc_lengths else 0.0
    return FulltextIndex(
        postings=postings, doc_ids=doc_ids, doc_lengths=doc_lengths, avgdl=avgdl, params=params
    )


def idf(index: FulltextIndex, token: str) -> float:
    df = len(index.postings.get(token, ()))
    n = index.doc_count
    return math.log(1.0 + (n - df + 0.5) / (df + 0.5))


def fulltext_search(index: FulltextIndex, query: str, k: int) -> list[tuple[str, float]]:
    """Top-k BM25 matches as (clip_id, score); zero-score docs are omitted."""
    if k < 1:
        raise FulltextIndexError(f"k must be >= 1, got {k}")
    k1, b = index.params.k1, index.params.b
    avgdl = index.avgdl
    scores: dict[int, float] = {}
    for token in analyze_text(query):
        plist = index.postings.get(token)
        if not plist:
            continue
        w = idf(index, token)
        for ordinal, tf in plist:
            norm = k1 * (1.0 - b + b * index.doc_lengths[ordinal] / avgdl)
            scores[ordinal] = scores.get(ordinal, 0.0) + w * tf * (k1 + 1.0) / (tf + norm)
    ranked = sorted(
        ((index.doc_ids[o], s) for o, s in scores.items() if s > 0.0),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked[:k]


def save_index(index: FulltextIndex, path: str | Path) -> None:
    """Snapshot the index; rebuilding from the corpus is always possible,
    so this is a cache, not a source of truth."""
    body = {
        "postings": {t: [[o, f] for o, f in pl] for t, pl in index.postings.items()},
        "doc_ids": index.doc_ids,
        "doc_lengths": index.doc_lengths,
        "avgdl": index.avgdl,
        "params": {"k1": index.params.k1, "b": index.params.b},
    }
    Path(path).write_text(SNAPSHOT_MAGIC + "\n" + json.dumps(body, ensure_ascii=False), encoding="utf-8")


def load_index(path: str | Path) -> FulltextIndex:
    raw = Path(path).read_text(encoding="utf-8")
    header, _, body = raw.partition("\n")
    if header != SNAPSHOT_MAGIC:
        raise FulltextIndexError(f"bad index snapshot magic {header!r}")
    obj = json.loads(body)
    return FulltextIndex(
        postings={t: [(int(o), int(f)) for o, f in pl] for t, pl in obj["postings"].items()},
        doc_ids=list(obj["doc_ids"]),
        doc_lengths=[int(x) for x in obj["doc_lengths"]],
        avgdl=float(obj["avgdl"]),
        params=Bm25Params(k1=float(obj["params"]["k1"]), b=float(obj["params"]["b"])),
    )
