"""Exact top-k cosine retrieval over precomputed unit-norm clip embeddings.

Retrieval is a full scan: at archive sizes up to ~10^4 clips exactness is
affordable and keeps evaluation noise-free. Vectors are unit-normalized at
load time so the dot product is the cosine.

The module also ships a deterministic feature-hashing text embedder,
hash_embed, used to simulate a joint text/video embedding space at desk
scale. It is a simulator component: embeddings from real encoder models
enter only through the file format below.

Embedding file (binary, little-endian): magic "AVEM", version u32 = 1,
dim u32, count u64, then per record: id_len u16, id bytes (UTF-8),
dim float32 values. A JSON Lines debug form {"clip_id": ..., "vector":
[...]} round-trips losslessly against the binary form.

Hashing rule (stable across runs and platforms): a token hashes to the
8-byte BLAKE2b digest of its UTF-8 bytes, read as a little-endian unsigned
64-bit integer h. The token adds sign(h) to bucket h mod dim, where
sign(h) is +1 when the top bit (bit 63) is 0 and -1 otherwise. The
accumulated vector is L2-normalized.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import analyze_text

EMBEDDING_MAGIC = b"AVEM"
EMBEDDING_VERSION = 1

# Norms within RENORM_TOLERANCE of 1 are silently fixed at load (file
# formats with float32 payloads drift); anything further off is rejected.
RENORM_TOLERANCE = 1e-3
UNIT_NORM_TOLERANCE = 1e-6

MIN_HASH_DIM = 8


class VectorIndexError(ValueError):
    """Bad embedding file, vector, or query."""


class EmptyTextError(VectorIndexError):
    """Text produced an all-zero accumulation (typically: no tokens)."""


@dataclass(frozen=True)
class EmbeddingMatrix:
    dim: int
    clip_ids: list[str]
    vectors: np.ndarray  # shape (n, dim), float64, rows unit-norm

    def __len__(self) -> int:
        return len(self.clip_ids)

    def subset(self, ids: list[str]) -> "EmbeddingMatrix":
        """Matrix restricted to the given ids, in the given order."""
        index = {cid: i for i, cid in enumerate(self.clip_ids)}
        try:
            rows = [index[cid] for cid in ids]
        except KeyError as exc:
            raise VectorIndexError(f"clip {exc.args[0]!r} not in embedding matrix") from None
        return EmbeddingMatrix(dim=self.dim, clip_ids=list(ids), vectors=self.vectors[rows])


@dataclass(frozen=True)
class ScoredHit:
    clip_id: str
    score: float
    rank: int  # 1-based, contiguous


def make_embedding_matrix(dim: int, entries: list[tuple[str, np.ndarray]]) -> EmbeddingMatrix:
    """Validate and normalize raw (clip_id, vector) entries into a matrix."""
    if dim < 1:
        raise VectorIndexError(f"dim must be positive, got {dim}")
    ids: list[str] = []
    rows = np.zeros((len(entries), dim), dtype=np.float64)
    seen: set[str] = set()
    for i, (clip_id, vec) in enumerate(entries):
        if clip_id in seen:
            raise VectorIndexError(f"duplicate clip_id {clip_id!r}")
        seen.add(clip_id)
        v = np.asarray(vec, dtype=np.float64)
        if v.shape != (dim,):
            raise VectorIndexError(
                f"clip {clip_id!r}: expected {dim} values, got {v.shape}"
            )
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise VectorIndexError(f"clip {clip_id!r}: zero vector cannot be normalized")
        if abs(norm - 1.0) > RENORM_TOLERANCE:
            raise VectorIndexError(
                f"clip {clip_id!r}: norm {norm:.6f} too far from 1 to renormalize"
            )
        ids.append(clip_id)
        rows[i] = v / norm
    return EmbeddingMatrix(dim=dim, clip_ids=ids, vectors=rows)


def save_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(struct.pack("<IIQ", EMBEDDING_VERSION, matrix.dim, len(matrix)))
        for clip_id, row in zip(matrix.clip_ids, matrix.vectors):
            raw = clip_id.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(row.astype("<f4").tobytes())


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Read the binary embedding format, validating magic, dims, and norms."""
    data = Path(path).read_bytes()
    if data[:4] != EMBEDDING_MAGIC:
        raise VectorIndexError(f"bad embedding file magic {data[:4]!r}")
    version, dim, count = struct.unpack_from("<IIQ", data, 4)
    if version != EMBEDDING_VERSION:
        raise VectorIndexError(f"unsupported embedding file version {version}")
    offset = 4 + 16
    entries: list[tuple[str, np.ndarray]] = []
    for _ in range(count):
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        clip_id = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).astype(np.float64)
        offset += 4 * dim
        entries.append((clip_id, vec))
    if offset != len(data):
        raise VectorIndexError("trailing bytes after last embedding record")
    return make_embedding_matrix(dim, entries)


def save_embeddings_jsonl(matrix: EmbeddingMatrix, path: str | Path) -> None:
    """Debug form; float32 values survive the JSON round trip exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        for clip_id, row in zip(matrix.clip_ids, matrix.vectors):
            vec = [float(x) for x in row.astype(np.float32)]
            fh.write(json.dumps({"clip_id": clip_id, "vector": vec}) + "\n")


def load_embeddings_jsonl(path: str | Path) -> EmbeddingMatrix:
    entries: list[tuple[str, np.ndarray]] = []
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            vec = np.asarray(obj["vector"], dtype=np.float32).astype(np.float64)
            if dim is None:
                dim = len(vec)
            entries.append((obj["clip_id"], vec))
    if dim is None:
        raise VectorIndexError("embedding JSONL file has no records")
    return make_embedding_matrix(dim, entries)


def token_hash(token: str) -> int:
    """Stable 64-bit token hash: BLAKE2b-8 digest as little-endian u64."""
    return int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "little")


def hash_embed(text: str, dim: int) -> np.ndarray:
    """Deterministic unit vector from the signed token-hash accumulation."""
    if dim < MIN_HASH_DIM:
        raise VectorIndexError(f"dim must be >= {MIN_HASH_DIM}, got {dim}")
    tokens = analyze_text(text)
    if not tokens:
        raise EmptyTextError("cannot embed text with no tokens")
    acc = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        h = token_hash(token)
        acc[h % dim] += 1.0 if (h >> 63) & 1 == 0 else -1.0
    norm = float(np.linalg.norm(acc))
    if norm == 0.0:
        raise EmptyTextError("token contributions cancelled to the zero vector")
    return acc / norm


def vector_search(matrix: EmbeddingMatrix, query_vec: np.ndarray, k: int) -> list[ScoredHit]:
    """Exact top-k by dot product, ties broken by ascending clip_id.

    Returns min(k, n) hits with contiguous 1-based ranks. The scan scores
    every row; any future acceleration must preserve exactly these results.
    """
    if k < 1:
        raise VectorIndexError(f"k must be >= 1, got {k}")
    q = np.asarray(query_vec, dtype=np.float64)
    if q.shape != (matrix.dim,):
        raise VectorIndexError(f"query has shape {q.shape}, index dim is {matrix.dim}")
    qnorm = float(np.linalg.norm(q))
    if abs(qnorm - 1.0) > RENORM_TOLERANCE:
        raise VectorIndexError(f"query vector norm {qnorm:.6f} is not unit")
    scores = matrix.vectors @ q
    order = sorted(range(len(matrix)), key=lambda i: (-scores[i], matrix.clip_ids[i]))
    return [
        ScoredHit(clip_id=matrix.clip_ids[i], score=float(scores[i]), rank=rank)
        for rank, i in enumerate(order[:k], start=1)
    ]
