import numpy as np
import pytest

from avsearch.corpus_store import TEST, TRAIN, dumps_corpus
from avsearch.synth import (
    CAPTIONS_PER_CLIP,
    SPEECH_COMMON_WORDS,
    TRANSCRIPT_SOURCE_TAG,
    VISUAL_COMMON_WORDS,
    SynthError,
    SynthParams,
    _build_vocab,
    generate_synthetic_corpus,
    generate_synthetic_quotes,
    synth_classifier_inputs,
)


@pytest.fixture(scope="module")
def world():
    return generate_synthetic_corpus(SynthParams(n_clips=40, seed=3))


def test_regeneration_is_byte_identical(world):
    again = generate_synthetic_corpus(SynthParams(n_clips=40, seed=3))
    assert dumps_corpus(again.corpus) == dumps_corpus(world.corpus)
    np.testing.assert_array_equal(again.baseline.vectors, world.baseline.vectors)
    np.testing.assert_array_equal(again.enriched.vectors, world.enriched.vectors)


def test_seed_changes_everything(world):
    other = generate_synthetic_corpus(SynthParams(n_clips=40, seed=4))
    assert dumps_corpus(other.corpus) != dumps_corpus(world.corpus)


def test_corpus_shape(world):
    corpus = world.corpus
    assert len(corpus) == 40
    assert [c.split for c in corpus[:4]] == [TRAIN, TEST, TRAIN, TEST]
    assert all(len(c.captions) == CAPTIONS_PER_CLIP for c in corpus)
    assert corpus[0].clip_id == "clip_0000" and corpus[39].clip_id == "clip_0039"
    # exactly half of each split has speech at transcript_fraction 0.5
    for split in (TRAIN, TEST):
        members = [c for c in corpus if c.split == split]
        assert sum(1 for c in members if c.has_speech()) == len(members) // 2
    for c in corpus:
        if c.has_speech():
            assert c.transcript.source_tag == TRANSCRIPT_SOURCE_TAG


def test_vocabularies_are_disjoint_per_clip_unique(world):
    corpus = world.corpus
    visual_tokens = {w for c in corpus for cap in c.captions for w in cap.text.split()}
    speech_tokens = {
        w for c in corpus if c.has_speech() for w in c.transcript.text.split()
    }
    assert not visual_tokens & speech_tokens
    # each clip's captions share a token that appears in no other clip
    for c in corpus[:8]:
        mine = set.intersection(*[set(cap.text.split()) for cap in c.captions])
        others = {
            w
            for o in corpus
            if o.clip_id != c.clip_id
            for cap in o.captions
            for w in cap.text.split()
        }
        assert mine - others, c.clip_id


def test_embeddings_differ_only_where_speech(world):
    for clip, base_row, enriched_row in zip(
        world.corpus, world.baseline.vectors, world.enriched.vectors
    ):
        if clip.has_speech():
            assert not np.array_equal(base_row, enriched_row), clip.clip_id
        else:
            np.testing.assert_array_equal(base_row, enriched_row)


def test_query_embedder_matches_dim(world):
    vec = world.query_embedder("a man rides a horse")
    assert vec.shape == (world.params.dim,)


def test_params_validation():
    with pytest.raises(SynthError, match="n_clips"):
        SynthParams(n_clips=5).check()
    with pytest.raises(SynthError, match="transcript_fraction"):
        SynthParams(transcript_fraction=2.0).check()
    with pytest.raises(SynthError, match="dim"):
        SynthParams(dim=4).check()


def test_vocab_too_small_to_cover_uniques():
    with pytest.raises(SynthError, match="too small to grant"):
        _build_vocab(VISUAL_COMMON_WORDS, size=30, n_unique=20, prefix="vis")


def test_explicit_vocab_sizes_pad_with_fillers():
    common, unique = _build_vocab(SPEECH_COMMON_WORDS, size=200, n_unique=30, prefix="spk")
    assert len(common) == 170 and len(unique) == 30
    assert unique[-1] == "spk0199"
    assert not set(common) & set(unique)


def test_word_lists_are_disjoint():
    assert not set(VISUAL_COMMON_WORDS) & set(SPEECH_COMMON_WORDS)


def test_quotes_deterministic():
    assert generate_synthetic_quotes(5, seed=1) == generate_synthetic_quotes(5, seed=1)
    assert generate_synthetic_quotes(5, seed=1) != generate_synthetic_quotes(5, seed=2)
    with pytest.raises(SynthError):
        generate_synthetic_quotes(0, seed=1)


def test_classifier_inputs_come_from_train_split(world):
    quotes, transcripts, captions = synth_classifier_inputs(
        world.corpus, n_quotes=10, n_transcripts=8, n_captions=30, seed=3
    )
    assert len(quotes) == 10 and len(transcripts) == 8 and len(captions) == 30
    train_transcripts = {
        c.transcript.text for c in world.corpus if c.split == TRAIN and c.has_speech()
    }
    train_captions = {
        cap.text for c in world.corpus if c.split == TRAIN for cap in c.captions
    }
    assert set(transcripts) <= train_transcripts
    assert set(captions) <= train_captions
    assert len(set(transcripts)) == 8  # sampled without replacement


def test_classifier_inputs_shortfall_errors(world):
    with pytest.raises(SynthError, match="transcripts"):
        synth_classifier_inputs(world.corpus, 5, n_transcripts=900, n_captions=5, seed=0)
    with pytest.raises(SynthError, match="captions"):
        synth_classifier_inputs(world.corpus, 5, n_transcripts=5, n_captions=10**6, seed=0)
