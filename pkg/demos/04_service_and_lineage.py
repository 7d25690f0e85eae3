"""
Stand the HTTP service up on freshly written artifacts, search it, record a
click, and walk the provenance chain of what came back.

Uses the in-process ASGI test client so the demo needs no open port; the
same app serves over TCP via `avsearch serve`.
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from avsearch.corpus_store import save_corpus
from avsearch.datafication import (
    DescriptorFacets,
    DescriptorRecord,
    DescriptorStore,
    ProvenanceRef,
)
from avsearch.dataset_builder import build_classifier_corpus
from avsearch.query_classifier import Hyperparams, fit, save_model
from avsearch.service_api import ServiceConfig, create_app, load_service_state
from avsearch.synth import SynthParams, generate_synthetic_corpus, synth_classifier_inputs
from avsearch.vector_index import save_embeddings

workdir = Path(tempfile.mkdtemp(prefix="avsearch_demo_"))
print(f"writing artifacts under {workdir}")

world = generate_synthetic_corpus(SynthParams(n_clips=60, seed=7))
save_corpus(world.corpus, workdir / "corpus.jsonl")
save_embeddings(world.baseline, workdir / "embeddings.bin")

quotes, transcripts, captions = synth_classifier_inputs(
    world.corpus, n_quotes=120, n_transcripts=15, n_captions=160, seed=7
)
train, _ = build_classifier_corpus(quotes, transcripts, captions, seed=7)
save_model(fit(train, Hyperparams(seed=7)), workdir / "classifier.model")

# Every derived artifact gets a descriptor: six facet dimensions plus a
# provenance ref. "descriptor:<id>" links make provenance a chain walk.
store = DescriptorStore(world.corpus)
store.register(DescriptorRecord(
    descriptor_id="corpus.jsonl",
    clip_id="",  # corpus-scoped
    kind="corpus",
    payload_ref=str(workdir / "corpus.jsonl"),
    facets=DescriptorFacets("content", "automatic", "pre_use", "text", "not_indexed", "audiovisual"),
    provenance=ProvenanceRef(tool_name="synth", tool_version="1"),
))
for clip in world.corpus[:6]:
    store.register(DescriptorRecord(
        descriptor_id=f"embedding__{clip.clip_id}",
        clip_id=clip.clip_id,
        kind="clip_embedding",
        payload_ref=f"embeddings.bin#{clip.clip_id}",
        facets=DescriptorFacets("content", "automatic", "pre_use", "vector", "vector_index", "visual"),
        provenance=ProvenanceRef(
            tool_name="embedder", tool_version="1", training_data_ref="descriptor:corpus.jsonl"
        ),
    ))
store.save(workdir / "descriptors.jsonl")

config = ServiceConfig(
    corpus_path=str(workdir / "corpus.jsonl"),
    embeddings_path=str(workdir / "embeddings.bin"),
    classifier_path=str(workdir / "classifier.model"),
    descriptors_path=str(workdir / "descriptors.jsonl"),
    log_path=str(workdir / "interactions.jsonl"),
)
client = TestClient(create_app(load_service_state(config)))

print("\nhealth:", client.get("/healthz").json())

speech_clip = next(c for c in world.corpus if c.has_speech())
query = '"' + " ".join(speech_clip.transcript.text.split()[:5]) + '"'
body = client.get("/search", params={"q": query, "k": 3, "participant_id": "demo"}).json()
print(f"\nsearch {query!r} -> route={body['route']}")
for r in body["results"]:
    print(f"  #{r['rank']} {r['clip_id']}  score={r['score']:.3f}")

top = body["results"][0]["clip_id"]
click = client.post(
    "/interactions",
    json={"participant_id": "demo", "action": "click", "query_text": query, "target_clip_id": top},
).json()
print(f"\nclicked {top}: logged as {click['interaction_id']}")

detail = client.get(f"/clips/{world.corpus[0].clip_id}").json()
print(f"\n{detail['clip_id']}: {len(detail['captions'])} captions")
for d in detail["descriptors"]:
    chain = " -> ".join(step["tool_name"] for step in d["lineage"])
    print(f"  descriptor {d['descriptor_id']} ({d['kind']}), lineage: {chain}")

log_lines = (workdir / "interactions.jsonl").read_text().splitlines()
print(f"\ninteraction log holds {len(log_lines)} records (1 query + 1 click)")
