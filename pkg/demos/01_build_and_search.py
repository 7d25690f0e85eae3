"""
Build both indexes over a small synthetic archive and route some queries.
"""

from avsearch.fulltext_index import build_fulltext_index
from avsearch.retrieval_engine import (
    MODE_RULE_BASED,
    EngineConfig,
    RetrievalEngine,
    engine_search,
)
from avsearch.synth import SynthParams, generate_synthetic_corpus

# A 60-clip world: every clip gets 20 captions, half the clips also get an
# ASR transcript whose vocabulary never overlaps the captions.
world = generate_synthetic_corpus(SynthParams(n_clips=60, seed=7))
corpus = world.corpus
print(f"{len(corpus)} clips, {sum(c.has_speech() for c in corpus)} with transcripts")

# Full-text side: BM25 over the transcripts only.
fulltext = build_fulltext_index(
    [(c.clip_id, c.transcript.text) for c in corpus if c.has_speech()]
)
print(f"BM25 index over {fulltext.doc_count} transcript documents")

# Vector side: the world ships a caption-embedding matrix and the matching
# query embedder (feature hashing, so no vocabulary to carry around).
engine = RetrievalEngine(
    fulltext=fulltext,
    vectors=world.baseline,
    query_embedder=world.query_embedder,
    config=EngineConfig(classifier_mode=MODE_RULE_BASED),
)

visual_query = corpus[1].captions[0].text
speech_clip = next(c for c in corpus if c.has_speech())
speech_query = '"' + " ".join(speech_clip.transcript.text.split()[:6]) + '"'

for query in (visual_query, speech_query):
    decision, hits = engine_search(engine, query, k=3)
    print(f"\nquery: {query!r}")
    print(f"  route={decision.route} confidence={decision.label_confidence:.2f}")
    for h in hits:
        print(f"  #{h.rank} {h.clip_id}  score={h.score:.4f}")
