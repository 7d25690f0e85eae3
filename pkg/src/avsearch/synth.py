"""Synthetic audiovisual corpus generator for desk-scale experiments.

Real caption/transcript corpora and trained video encoders are out of scope
here, so experiments run on a generated stand-in with one structural property
dialled in deliberately: caption text and speech text use disjoint
vocabularies. Caption-derived embeddings therefore carry no signal for
transcript queries, while every transcript holds a rare token that full-text
search finds immediately. That separation is what makes the routing
comparison measurable at this scale.

Shape of the generated world:

* Every clip gets CAPTIONS_PER_CLIP captions. Each caption mixes common
  visual words with one token unique to the clip, so a caption query pins
  its clip under cosine search.
* A transcript_fraction share of each split gets a transcript: a long bag of
  a few heavily repeated conversational words plus a clip-unique speech
  token. Transcripts are near-duplicates of each other on purpose; telling
  them apart by cosine is hard, telling them apart by rare-term weighting
  is trivial.
* Baseline clip embedding = hash of the caption text. Enriched embedding =
  hash of caption text plus transcript text, standing in for a retrained
  encoder that absorbed speech content.

Everything is a pure function of (params, seed) via PCG64; regenerating is
byte-identical.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .corpus_store import Caption, ClipRecord, Corpus, HUMAN, TEST, TRAIN, Transcript
from .retrieval_engine import QueryEmbedder
from .vector_index import EmbeddingMatrix, MIN_HASH_DIM, hash_embed, make_embedding_matrix

AUTO_VOCAB = 0

# A vocabulary must cover one unique token per clip and still leave a usable
# common pool behind.
MIN_COMMON_WORDS = 16

CAPTIONS_PER_CLIP = 20

# Tuning knobs for the difficulty of the synthetic retrieval problem. Caption
# and quote lengths are word counts drawn uniformly from [lo, hi).
_CAPTION_LEN = (5, 9)
_TRANSCRIPT_LEN = (28, 44)
_QUOTE_LEN = (4, 10)
# Unique-token repeat counts. Two per caption keeps the clip signal alive
# even when one occurrence is cancelled by an opposite-sign hash collision
# with a common word; one repeat measurably loses that guarantee at dim 256.
_UNIQUE_VISUAL_REPEATS = 3
_UNIQUE_SPEECH_REPEATS = 2
# Transcript bodies draw from this many conversational words, Zipf-weighted,
# which keeps all transcripts cosine-close to each other.
_SPEECH_CORE_SIZE = 12

VISUAL_COMMON_WORDS = (
    "a", "the", "is", "are", "in", "on", "with", "near", "two", "young",
    "old", "man", "woman", "girl", "boy", "child", "dog", "cat", "horse",
    "chef", "player", "band", "crowd", "team", "baby", "monkey", "bird",
    "car", "truck", "train", "plane", "boat", "group", "lady", "guy",
    "rides", "walks", "runs", "jumps", "plays", "sings", "dances", "cooks",
    "cuts", "slices", "drives", "flies", "swims", "climbs", "throws",
    "catches", "kicks", "holds", "shows", "talking", "looks", "watches",
    "eats", "drinks", "paints", "draws", "opens", "closes", "washes",
    "cleans", "builds", "standing", "sitting", "performing", "riding",
    "running", "ball", "guitar", "piano", "kitchen", "street", "beach",
    "mountain", "river", "park", "stage", "field", "court", "pool", "snow",
    "rain", "city", "road", "bridge", "garden", "market", "food", "cake",
    "video", "game", "song", "dance", "table", "chair", "room", "house",
    "tree", "grass", "water", "sand", "hill", "judges", "show", "red",
    "blue", "green", "yellow", "brown", "black", "white", "small", "large",
    "fast", "slow",
)

SPEECH_COMMON_WORDS = (
    "i", "you", "we", "they", "he", "she", "it", "dont", "cant", "didnt",
    "im", "its", "thats", "well", "really", "think", "know", "maybe",
    "going", "gonna", "right", "okay", "yeah", "hello", "thanks", "please",
    "sorry", "question", "answer", "because", "never", "always", "today",
    "tomorrow", "people", "thing", "things", "good", "great", "love",
    "want", "need", "say", "tell", "talk", "listen", "hear", "remember",
    "forget", "believe", "actually", "probably", "something", "everything",
    "nothing", "anyway", "exactly", "honestly", "seriously", "basically",
)

TRANSCRIPT_SOURCE_TAG = "synthetic_asr"


class SynthError(ValueError):
    """Synthetic-corpus parameters are unsatisfiable."""


@dataclass(frozen=True)
class SynthParams:
    n_clips: int = 200
    transcript_fraction: float = 0.5
    dim: int = 256
    visual_vocab_size: int = AUTO_VOCAB  # AUTO_VOCAB: n_clips + common word list
    speech_vocab_size: int = AUTO_VOCAB
    seed: int = 0

    def check(self) -> None:
        if self.n_clips < 10:
            raise SynthError(f"n_clips must be >= 10, got {self.n_clips}")
        if not 0.0 <= self.transcript_fraction <= 1.0:
            raise SynthError(f"transcript_fraction must be in [0, 1], got {self.transcript_fraction}")
        if self.dim < MIN_HASH_DIM:
            raise SynthError(f"dim must be >= {MIN_HASH_DIM}, got {self.dim}")
        for name in ("visual_vocab_size", "speech_vocab_size"):
            if getattr(self, name) < 0:
                raise SynthError(f"{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class SynthWorld:
    """A generated corpus plus the embedding artifacts derived from it."""

    params: SynthParams
    corpus: Corpus
    baseline: EmbeddingMatrix
    enriched: EmbeddingMatrix
    query_embedder: QueryEmbedder


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def _build_vocab(hand: tuple[str, ...], size: int, n_unique: int, prefix: str) -> tuple[list[str], list[str]]:
    """Split a vocabulary into a common pool and per-clip unique tokens.

    Hand-written words come first, synthetic fillers pad up to size; the last
    n_unique entries are reserved as unique tokens so the common pool never
    hands them out.
    """
    if size == AUTO_VOCAB:
        size = n_unique + len(hand)
    if size < n_unique + MIN_COMMON_WORDS:
        raise SynthError(
            f"{prefix} vocab size {size} too small to grant {n_unique} unique tokens "
            f"(need >= {n_unique + MIN_COMMON_WORDS})"
        )
    words = list(hand[:size])
    words.extend(f"{prefix}{i:04d}" for i in range(len(words), size))
    return words[: size - n_unique], words[size - n_unique :]


def _check_word_lists() -> None:
    visual, speech = set(VISUAL_COMMON_WORDS), set(SPEECH_COMMON_WORDS)
    if len(visual) != len(VISUAL_COMMON_WORDS) or len(speech) != len(SPEECH_COMMON_WORDS):
        raise SynthError("word lists contain duplicates")
    overlap = visual & speech
    if overlap:
        raise SynthError(f"visual and speech word lists overlap: {sorted(overlap)}")


def _sample_words(rng: np.random.Generator, pool: list[str], n: int, p: np.ndarray | None = None) -> list[str]:
    idx = rng.choice(len(pool), size=n, replace=True, p=p)
    return [pool[int(i)] for i in idx]


def _make_caption(rng: np.random.Generator, common: list[str], unique_token: str) -> str:
    n = int(rng.integers(*_CAPTION_LEN))
    words = _sample_words(rng, common, n)
    for _ in range(_UNIQUE_VISUAL_REPEATS):
        words.insert(int(rng.integers(0, len(words) + 1)), unique_token)
    return " ".join(words)


def _make_transcript(rng: np.random.Generator, core: list[str], core_p: np.ndarray, unique_token: str) -> str:
    n = int(rng.integers(*_TRANSCRIPT_LEN))
    words = _sample_words(rng, core, n, core_p)
    for _ in range(_UNIQUE_SPEECH_REPEATS):
        words.insert(int(rng.integers(0, len(words) + 1)), unique_token)
    return " ".join(words)


def _zipf_weights(n: int) -> np.ndarray:
    w = 1.0 / (np.arange(n, dtype=np.float64) + 2.0)
    return w / w.sum()


def generate_synthetic_corpus(params: SynthParams) -> SynthWorld:
    """Generate the corpus and both embedding variants. Deterministic in seed.

    Clips alternate train/test so both splits exist at any size. Within each
    split, exactly round(transcript_fraction * split size) clips carry a
    transcript, which makes a half-speech test set constructible without
    slack.
    """
    params.check()
    _check_word_lists()
    rng = np.random.Generator(np.random.PCG64(params.seed))

    splits = [TRAIN if i % 2 == 0 else TEST for i in range(params.n_clips)]
    n_with_speech = sum(
        _round_half_up(params.transcript_fraction * splits.count(s)) for s in (TRAIN, TEST)
    )
    visual_common, visual_unique = _build_vocab(
        VISUAL_COMMON_WORDS, params.visual_vocab_size, params.n_clips, "vis"
    )
    speech_common, speech_unique = _build_vocab(
        SPEECH_COMMON_WORDS, params.speech_vocab_size, n_with_speech, "spk"
    )
    core = speech_common[:_SPEECH_CORE_SIZE]
    core_p = _zipf_weights(len(core))

    speech_clip_indices: set[int] = set()
    for split in (TRAIN, TEST):
        members = [i for i, s in enumerate(splits) if s == split]
        quota = _round_half_up(params.transcript_fraction * len(members))
        chosen = rng.choice(len(members), size=quota, replace=False) if quota else []
        speech_clip_indices.update(members[int(j)] for j in chosen)

    width = max(4, len(str(params.n_clips - 1)))
    corpus: Corpus = []
    base_entries: list[tuple[str, np.ndarray]] = []
    enriched_entries: list[tuple[str, np.ndarray]] = []
    speech_counter = 0
    for i in range(params.n_clips):
        clip_id = f"clip_{i:0{width}d}"
        captions = tuple(
            Caption(text=_make_caption(rng, visual_common, visual_unique[i]))
            for _ in range(CAPTIONS_PER_CLIP)
        )
        transcript = None
        if i in speech_clip_indices:
            transcript = Transcript(
                text=_make_transcript(rng, core, core_p, speech_unique[speech_counter]),
                source_tag=TRANSCRIPT_SOURCE_TAG,
            )
            speech_counter += 1
        corpus.append(ClipRecord(clip_id=clip_id, captions=captions, transcript=transcript, split=splits[i]))

        caption_text = " ".join(c.text for c in captions)
        base_entries.append((clip_id, hash_embed(caption_text, params.dim)))
        enriched_text = caption_text if transcript is None else caption_text + " " + transcript.text
        enriched_entries.append((clip_id, hash_embed(enriched_text, params.dim)))

    return SynthWorld(
        params=params,
        corpus=corpus,
        baseline=make_embedding_matrix(params.dim, base_entries),
        enriched=make_embedding_matrix(params.dim, enriched_entries),
        query_embedder=functools.partial(hash_embed, dim=params.dim),
    )


def _quotes_from_rng(rng: np.random.Generator, n: int) -> list[str]:
    pool = list(SPEECH_COMMON_WORDS)
    return [" ".join(_sample_words(rng, pool, int(rng.integers(*_QUOTE_LEN)))) for _ in range(n)]


def generate_synthetic_quotes(n: int, seed: int) -> list[str]:
    """Short conversational sentences, the raw material for quote queries."""
    if n < 1:
        raise SynthError(f"n must be >= 1, got {n}")
    return _quotes_from_rng(np.random.Generator(np.random.PCG64(seed)), n)


def synth_classifier_inputs(
    corpus: Corpus, n_quotes: int, n_transcripts: int, n_captions: int, seed: int
) -> tuple[list[str], list[str], list[str]]:
    """Draw (quotes, transcripts, captions) for routing-classifier training.

    Transcripts and captions come from the train split only, sampled without
    replacement, so evaluation queries built from test clips stay unseen.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    quotes = _quotes_from_rng(rng, n_quotes)

    transcript_pool = [c.transcript.text for c in corpus if c.split == TRAIN and c.has_speech()]
    if len(transcript_pool) < n_transcripts:
        raise SynthError(
            f"train split has {len(transcript_pool)} transcripts, need {n_transcripts}"
        )
    idx = sorted(int(i) for i in rng.choice(len(transcript_pool), size=n_transcripts, replace=False))
    transcripts = [transcript_pool[i] for i in idx]

    caption_pool = [
        cap.text for c in corpus if c.split == TRAIN for cap in c.captions if cap.origin == HUMAN
    ]
    if len(caption_pool) < n_captions:
        raise SynthError(f"train split has {len(caption_pool)} human captions, need {n_captions}")
    idx = sorted(int(i) for i in rng.choice(len(caption_pool), size=n_captions, replace=False))
    captions = [caption_pool[i] for i in idx]
    return quotes, transcripts, captions
