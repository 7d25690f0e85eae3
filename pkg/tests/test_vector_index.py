"""Vector index tests: hashing rule, exact search, file formats.

The hashing rule and the top-k scan both get independent in-test
re-implementations to compare against.
"""

import hashlib
import struct

import numpy as np
import pytest

from avsearch.analysis import analyze_text
from avsearch.vector_index import (
    EmptyTextError,
    VectorIndexError,
    hash_embed,
    load_embeddings,
    load_embeddings_jsonl,
    make_embedding_matrix,
    save_embeddings,
    save_embeddings_jsonl,
    token_hash,
    vector_search,
)

# Cosines pinned once from the hashing rule; any change to tokenizer, hash,
# sign convention, or normalization moves them.
GOLDEN_DISJOINT_ZERO = ("one two three", "four five six", 0.0)
GOLDEN_COLLIDING = (
    "a man rides a brown horse along the beach",
    "yellow submarine sandwiches were sold quickly yesterday evening",
    0.10660035817780521,
)


def reference_embed(text: str, dim: int) -> np.ndarray:
    acc = np.zeros(dim)
    for token in analyze_text(text):
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        (h,) = struct.unpack("<Q", digest)
        acc[h % dim] += 1.0 if h < 2**63 else -1.0
    return acc / np.linalg.norm(acc)


@pytest.mark.parametrize("token", ["a", "horse", "Übermaß", "0042", "spk0007"])
def test_token_hash_matches_reference(token):
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    assert token_hash(token) == struct.unpack("<Q", digest)[0]


@pytest.mark.parametrize("dim", [8, 64, 256])
def test_hash_embed_matches_reference(dim):
    for text in ("a man rides a horse", "hello hello world", "Zwei Pferde am Strand"):
        np.testing.assert_array_equal(hash_embed(text, dim), reference_embed(text, dim))


def test_hash_embed_golden_cosines():
    for a, b, expected in (GOLDEN_DISJOINT_ZERO, GOLDEN_COLLIDING):
        got = float(hash_embed(a, 256) @ hash_embed(b, 256))
        assert got == pytest.approx(expected, abs=1e-12)


def test_hash_embed_is_unit_norm():
    assert np.linalg.norm(hash_embed("some words here", 64)) == pytest.approx(1.0)


def test_hash_embed_rejects_empty_and_tiny_dim():
    with pytest.raises(EmptyTextError):
        hash_embed("...", 64)
    with pytest.raises(VectorIndexError, match="dim must be >= 8"):
        hash_embed("words", 4)


def _random_matrix(rng, n, dim):
    vecs = rng.normal(size=(n, dim))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    ids = [f"v{i:04d}" for i in range(n)]
    return make_embedding_matrix(dim, list(zip(ids, vecs)))


def test_vector_search_matches_brute_force():
    rng = np.random.default_rng(11)
    matrix = _random_matrix(rng, 300, 32)
    for _ in range(20):
        q = rng.normal(size=32)
        q /= np.linalg.norm(q)
        hits = vector_search(matrix, q, k=10)
        # independent scan: per-row dot products, same tie rule
        scores = {cid: float(row @ q) for cid, row in zip(matrix.clip_ids, matrix.vectors)}
        want = sorted(scores, key=lambda cid: (-scores[cid], cid))[:10]
        assert [h.clip_id for h in hits] == want
        assert [h.rank for h in hits] == list(range(1, 11))
        for h in hits:
            assert abs(h.score - scores[h.clip_id]) <= 1e-12


def test_vector_search_tie_rule_on_identical_rows():
    v = np.zeros(8)
    v[0] = 1.0
    matrix = make_embedding_matrix(8, [("zz", v), ("aa", v), ("mm", v)])
    hits = vector_search(matrix, v, k=3)
    assert [h.clip_id for h in hits] == ["aa", "mm", "zz"]


def test_vector_search_k_larger_than_corpus():
    rng = np.random.default_rng(0)
    matrix = _random_matrix(rng, 5, 16)
    hits = vector_search(matrix, matrix.vectors[0], k=50)
    assert len(hits) == 5


def test_vector_search_input_validation():
    rng = np.random.default_rng(1)
    matrix = _random_matrix(rng, 4, 16)
    with pytest.raises(VectorIndexError, match="k must be"):
        vector_search(matrix, matrix.vectors[0], k=0)
    with pytest.raises(VectorIndexError, match="shape"):
        vector_search(matrix, np.ones(8), k=1)
    with pytest.raises(VectorIndexError, match="not unit"):
        vector_search(matrix, np.ones(16), k=1)


def test_make_matrix_validation():
    ok = np.zeros(8)
    ok[1] = 1.0
    with pytest.raises(VectorIndexError, match="duplicate"):
        make_embedding_matrix(8, [("a", ok), ("a", ok)])
    with pytest.raises(VectorIndexError, match="expected 8 values"):
        make_embedding_matrix(8, [("a", np.ones(9))])
    with pytest.raises(VectorIndexError, match="zero vector"):
        make_embedding_matrix(8, [("a", np.zeros(8))])
    with pytest.raises(VectorIndexError, match="too far from 1"):
        make_embedding_matrix(8, [("a", ok * 2)])


def test_make_matrix_renormalizes_float32_drift():
    v = np.zeros(8)
    v[2] = 1.0 + 5e-4  # within tolerance, must come back unit
    matrix = make_embedding_matrix(8, [("a", v)])
    assert np.linalg.norm(matrix.vectors[0]) == pytest.approx(1.0, abs=1e-12)


def test_subset_preserves_requested_order():
    rng = np.random.default_rng(3)
    matrix = _random_matrix(rng, 6, 16)
    sub = matrix.subset(["v0004", "v0001"])
    assert sub.clip_ids == ["v0004", "v0001"]
    np.testing.assert_array_equal(sub.vectors[0], matrix.vectors[4])
    with pytest.raises(VectorIndexError, match="not in embedding matrix"):
        matrix.subset(["v9999"])


def test_binary_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    matrix = _random_matrix(rng, 20, 24)
    path = tmp_path / "emb.bin"
    save_embeddings(matrix, path)
    loaded = load_embeddings(path)
    assert loaded.clip_ids == matrix.clip_ids
    assert loaded.dim == 24
    # float32 payload: equal after the same quantization
    np.testing.assert_allclose(loaded.vectors, matrix.vectors, atol=1e-6)


def test_jsonl_and_binary_forms_agree(tmp_path):
    rng = np.random.default_rng(10)
    matrix = _random_matrix(rng, 12, 16)
    bin_path = tmp_path / "emb.bin"
    jsonl_path = tmp_path / "emb.jsonl"
    save_embeddings(matrix, bin_path)
    save_embeddings_jsonl(matrix, jsonl_path)
    from_bin = load_embeddings(bin_path)
    from_jsonl = load_embeddings_jsonl(jsonl_path)
    assert from_bin.clip_ids == from_jsonl.clip_ids
    # both routes quantize to float32 exactly once: bitwise identical
    np.testing.assert_array_equal(from_bin.vectors, from_jsonl.vectors)


def test_binary_format_errors(tmp_path):
    path = tmp_path / "emb.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(VectorIndexError, match="magic"):
        load_embeddings(path)

    rng = np.random.default_rng(2)
    matrix = _random_matrix(rng, 2, 8)
    good = tmp_path / "good.bin"
    save_embeddings(matrix, good)
    data = good.read_bytes()

    bad_version = bytearray(data)
    bad_version[4] = 99
    (tmp_path / "v.bin").write_bytes(bytes(bad_version))
    with pytest.raises(VectorIndexError, match="version"):
        load_embeddings(tmp_path / "v.bin")

    (tmp_path / "t.bin").write_bytes(data + b"junk")
    with pytest.raises(VectorIndexError, match="trailing"):
        load_embeddings(tmp_path / "t.bin")


def test_jsonl_empty_file_error(tmp_path):
    path = tmp_path / "emb.jsonl"
    path.write_text("")
    with pytest.raises(VectorIndexError, match="no records"):
        load_embeddings_jsonl(path)
