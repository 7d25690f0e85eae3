"""Shared fixtures: a tiny hand-built corpus and one mid-size generated world.

The generated world is session-scoped because corpus generation plus
classifier training is the expensive part of the suite; tests must treat it
as read-only.
"""

from __future__ import annotations

import pytest

from avsearch.corpus_store import Caption, ClipRecord, Transcript, save_corpus
from avsearch.dataset_builder import build_classifier_corpus
from avsearch.query_classifier import Hyperparams, fit, save_model
from avsearch.synth import SynthParams, generate_synthetic_corpus, synth_classifier_inputs
from avsearch.vector_index import save_embeddings


def pytest_runtest_logreport(report):
    # One visible verdict line per acceptance criterion, pass or fail.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\n[acceptance] {name}: {report.outcome.upper()}", flush=True)


def tiny_corpus() -> list[ClipRecord]:
    """Four clips, two with speech, both splits populated."""
    return [
        ClipRecord(
            clip_id="c1",
            split="train",
            captions=(Caption("a dog runs in the park"), Caption("brown dog running outside")),
            transcript=Transcript("come here boy good dog", source_tag="asr_v1"),
        ),
        ClipRecord(
            clip_id="c2",
            split="train",
            captions=(Caption("a chef cooks pasta"),),
            transcript=None,
        ),
        ClipRecord(
            clip_id="c3",
            split="test",
            captions=(Caption("two people play chess"), Caption("a chess match indoors")),
            transcript=Transcript("checkmate in three moves i think", source_tag="asr_v1"),
        ),
        ClipRecord(
            clip_id="c4",
            split="test",
            captions=(Caption("a plane lands on a runway"),),
            transcript=None,
        ),
    ]


@pytest.fixture
def corpus4():
    return tiny_corpus()


@pytest.fixture(scope="session")
def world60():
    return generate_synthetic_corpus(SynthParams(n_clips=60, seed=7))


@pytest.fixture(scope="session")
def classifier60(world60):
    quotes, transcripts, captions = synth_classifier_inputs(
        world60.corpus, n_quotes=120, n_transcripts=15, n_captions=160, seed=7
    )
    train, _ = build_classifier_corpus(quotes, transcripts, captions, seed=7)
    return fit(train, Hyperparams(seed=7))


@pytest.fixture(scope="session")
def artifacts60(tmp_path_factory, world60, classifier60):
    """The world's on-disk form, as the service and CLI consume it."""
    root = tmp_path_factory.mktemp("artifacts60")
    save_corpus(world60.corpus, root / "corpus.jsonl")
    save_embeddings(world60.baseline, root / "embeddings_baseline.bin")
    save_embeddings(world60.enriched, root / "embeddings_enriched.bin")
    save_model(classifier60, root / "classifier.model")
    return root
