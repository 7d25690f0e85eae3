"""Command-line pipeline around the library.

Subcommands cover the whole artifact flow: generate or ingest a corpus,
build indexes and embeddings, train the routing classifier, derive datasets,
evaluate, and serve. Every command that takes --seed is deterministic in it.

Each machine-produced artifact is also registered in a descriptor registry
(descriptors.jsonl next to the artifact unless --descriptors says otherwise)
with automation "automatic" and a provenance whose training_data_ref links
back to the source artifact's descriptor when that lives in the same
registry. Re-running a command replaces the artifact's registry entry
rather than erroring, so pipelines are re-runnable in place.
"""

from __future__ import annotations

import argparse
import dataclasses
import functools
import sys
from pathlib import Path

from . import __version__
from .corpus_store import TRAIN, load_corpus, save_corpus, transcript_documents, validate_corpus
from .datafication import DescriptorFacets, DescriptorRecord, DescriptorStore, ProvenanceRef
from .dataset_builder import (
    SPEECH_QUOTE,
    augment_training_captions,
    build_classifier_corpus,
    build_mixed_test_set,
    load_labeled_texts,
    save_eval_pairs,
    save_labeled_texts,
)
from .eval_harness import (
    ROUTING_CLASSIFIER,
    ROUTING_ORACLE,
    ROUTING_RULE_BASED,
    build_standard_test_sets,
    format_percent,
    run_comparison,
    save_report,
)
from .fulltext_index import Bm25Params, build_fulltext_index, save_index
from .query_classifier import Hyperparams, evaluate_accuracy, fit, load_model, save_model
from .retrieval_engine import MODE_RULE_BASED, MODE_TRAINED, EngineConfig
from .service_api import ServiceConfig, create_app, load_config, load_service_state
from .synth import SynthParams, generate_synthetic_corpus, synth_classifier_inputs
from .vector_index import hash_embed, load_embeddings, save_embeddings

TOOL_NAME = "avsearch"


# --- descriptor registration helpers ------------------------------------


def _store_at(path: Path) -> DescriptorStore:
    return DescriptorStore.load(path) if path.exists() else DescriptorStore()


def _ref_for(store: DescriptorStore, source: Path) -> str:
    """Link to the source artifact's descriptor when it is registered here,
    else fall back to the path as a free-form reference."""
    if source.name in store:
        return f"descriptor:{source.name}"
    return str(source)


def _facets(level: str, form: str, retrieval: str, modality: str) -> DescriptorFacets:
    return DescriptorFacets(
        level=level,
        automation="automatic",
        extraction_time="pre_use",
        form=form,
        retrieval=retrieval,
        modality=modality,
    )


def _register_artifact(
    descriptors_path: Path,
    artifact: Path,
    kind: str,
    facets: DescriptorFacets,
    training_ref_source: Path | None,
) -> None:
    store = _store_at(descriptors_path)
    ref = _ref_for(store, training_ref_source) if training_ref_source is not None else None
    store.upsert(
        DescriptorRecord(
            descriptor_id=artifact.name,
            clip_id="",
            kind=kind,
            payload_ref=str(artifact),
            facets=facets,
            provenance=ProvenanceRef(
                tool_name=TOOL_NAME, tool_version=__version__, training_data_ref=ref
            ),
        )
    )
    store.save(descriptors_path)


def _descriptors_path(args, out: Path) -> Path:
    return Path(args.descriptors) if args.descriptors else out.parent / "descriptors.jsonl"


# --- subcommands ---------------------------------------------------------


def cmd_synth(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = SynthParams(
        n_clips=args.n_clips,
        transcript_fraction=args.transcript_fraction,
        dim=args.dim,
        visual_vocab_size=args.visual_vocab_size,
        speech_vocab_size=args.speech_vocab_size,
        seed=args.seed,
    )
    world = generate_synthetic_corpus(params)

    corpus_path = out_dir / "corpus.jsonl"
    baseline_path = out_dir / "embeddings_baseline.bin"
    enriched_path = out_dir / "embeddings_enriched.bin"
    save_corpus(world.corpus, corpus_path)
    save_embeddings(world.baseline, baseline_path)
    save_embeddings(world.enriched, enriched_path)

    descriptors_path = out_dir / "descriptors.jsonl"
    store = _store_at(descriptors_path)
    corpus_facets = _facets("content", "text", "not_indexed", "audiovisual")
    store.upsert(
        DescriptorRecord(
            descriptor_id=corpus_path.name,
            clip_id="",
            kind="synthetic_corpus",
            payload_ref=str(corpus_path),
            facets=corpus_facets,
            provenance=ProvenanceRef(tool_name=TOOL_NAME, tool_version=__version__),
        )
    )
    for path, kind, modality in (
        (baseline_path, "embedding_matrix", "visual"),
        (enriched_path, "embedding_matrix", "audiovisual"),
    ):
        store.upsert(
            DescriptorRecord(
                descriptor_id=path.name,
                clip_id="",
                kind=kind,
                payload_ref=str(path),
                facets=_facets("content", "vector", "vector_index", modality),
                provenance=ProvenanceRef(
                    tool_name=TOOL_NAME,
                    tool_version=__version__,
                    training_data_ref=f"descriptor:{corpus_path.name}",
                ),
            )
        )
    # Per-clip records give every detail view a lineage to walk: the clip's
    # embedding row links back to the corpus it was derived from.
    for clip in world.corpus:
        store.upsert(
            DescriptorRecord(
                descriptor_id=f"embedding__{clip.clip_id}",
                clip_id=clip.clip_id,
                kind="clip_embedding",
                payload_ref=f"{baseline_path.name}#{clip.clip_id}",
                facets=_facets("content", "vector", "vector_index", "visual"),
                provenance=ProvenanceRef(
                    tool_name=TOOL_NAME,
                    tool_version=__version__,
                    training_data_ref=f"descriptor:{corpus_path.name}",
                ),
            )
        )
        if clip.has_speech():
            store.upsert(
                DescriptorRecord(
                    descriptor_id=f"transcript__{clip.clip_id}",
                    clip_id=clip.clip_id,
                    kind="transcript",
                    payload_ref=f"{corpus_path.name}#{clip.clip_id}",
                    facets=_facets("content", "text", "fulltext_index", "speech"),
                    provenance=ProvenanceRef(
                        tool_name=TOOL_NAME,
                        tool_version=__version__,
                        training_data_ref=f"descriptor:{corpus_path.name}",
                    ),
                )
            )
    written = [corpus_path, baseline_path, enriched_path]

    train_transcripts = [
        c.transcript.text for c in world.corpus if c.split == TRAIN and c.has_speech()
    ]
    if train_transcripts:
        quotes, transcripts, captions = synth_classifier_inputs(
            world.corpus,
            n_quotes=args.quotes,
            n_transcripts=len(train_transcripts),
            n_captions=args.classifier_captions,
            seed=args.seed,
        )
        train, test = build_classifier_corpus(quotes, transcripts, captions, seed=args.seed)
        train_path = out_dir / "classifier_train.jsonl"
        test_path = out_dir / "classifier_test.jsonl"
        save_labeled_texts(train, train_path)
        save_labeled_texts(test, test_path)
        for path in (train_path, test_path):
            store.upsert(
                DescriptorRecord(
                    descriptor_id=path.name,
                    clip_id="",
                    kind="classifier_corpus",
                    payload_ref=str(path),
                    facets=_facets("content", "text", "not_indexed", "text"),
                    provenance=ProvenanceRef(
                        tool_name=TOOL_NAME,
                        tool_version=__version__,
                        training_data_ref=f"descriptor:{corpus_path.name}",
                    ),
                )
            )
        written.extend([train_path, test_path])
    else:
        print("note: no train-split transcripts; classifier corpus not emitted")

    store.save(descriptors_path)
    written.append(descriptors_path)
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_ingest(args) -> int:
    corpus = load_corpus(args.corpus, strict=args.strict)
    violations = validate_corpus(corpus)
    if violations:
        for v in violations:
            print(f"violation: {v.clip_id or '<no id>'}: {v.rule}", file=sys.stderr)
        print(f"error: corpus has {len(violations)} violations", file=sys.stderr)
        return 1
    save_corpus(corpus, args.out)
    print(f"wrote {args.out} ({len(corpus)} clips)")
    return 0


def cmd_index(args) -> int:
    corpus = load_corpus(args.corpus)
    docs = transcript_documents(corpus)
    index = build_fulltext_index(docs, Bm25Params(k1=args.k1, b=args.b))
    out = Path(args.out)
    save_index(index, out)
    _register_artifact(
        _descriptors_path(args, out),
        out,
        kind="fulltext_index",
        facets=_facets("content", "inverted_index", "fulltext_index", "speech"),
        training_ref_source=Path(args.corpus),
    )
    print(f"wrote {out} ({index.doc_count} transcript documents)")
    return 0


def cmd_train_classifier(args) -> int:
    train = load_labeled_texts(args.data)
    hp = Hyperparams(
        embed_dim=args.embed_dim,
        hidden_dim=args.hidden_dim,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        learning_rate=args.learning_rate,
    )
    model = fit(train, hp)
    out = Path(args.out)
    save_model(model, out)
    _register_artifact(
        _descriptors_path(args, out),
        out,
        kind="query_classifier",
        facets=_facets("technical", "model", "not_indexed", "text"),
        training_ref_source=Path(args.data),
    )
    print(f"wrote {out} (vocabulary {len(model.vocabulary)}, {len(train)} training texts)")
    if args.test:
        acc = evaluate_accuracy(model, load_labeled_texts(args.test))
        print(f"held-out accuracy: {acc:.4f}")
    return 0


def cmd_augment(args) -> int:
    corpus = load_corpus(args.corpus)
    augmented = augment_training_captions(
        corpus, args.replace_min, args.replace_max, args.seed, no_op=args.no_op
    )
    out = Path(args.out)
    save_corpus(augmented, out)
    _register_artifact(
        _descriptors_path(args, out),
        out,
        kind="augmented_corpus",
        facets=_facets("content", "text", "not_indexed", "audiovisual"),
        training_ref_source=Path(args.corpus),
    )
    replaced = sum(
        1
        for before, after in zip(corpus, augmented)
        for b, a in zip(before.captions, after.captions)
        if b != a
    )
    print(f"wrote {out} ({replaced} captions replaced)")
    return 0


def cmd_build_testset(args) -> int:
    corpus = load_corpus(args.corpus)
    pairs = build_mixed_test_set(corpus, args.fraction, args.seed)
    out = Path(args.out)
    save_eval_pairs(pairs, out)
    _register_artifact(
        _descriptors_path(args, out),
        out,
        kind="eval_pairs",
        facets=_facets("content", "text", "not_indexed", "text"),
        training_ref_source=Path(args.corpus),
    )
    n_speech = sum(1 for p in pairs if p.query_kind == SPEECH_QUOTE)
    print(f"wrote {out} ({len(pairs)} pairs, {n_speech} speech_quote)")
    return 0


def cmd_eval(args) -> int:
    corpus = load_corpus(args.corpus)
    baseline = load_embeddings(args.embeddings)
    enriched = load_embeddings(args.embeddings_enriched) if args.embeddings_enriched else None
    classifier = load_model(args.classifier) if args.classifier else None
    k_list = tuple(int(v) for v in args.k.split(","))
    test_sets = build_standard_test_sets(corpus, args.seed, mixed_fraction=args.mixed_fraction)
    report = run_comparison(
        corpus,
        baseline,
        enriched,
        query_embedder=functools.partial(hash_embed, dim=baseline.dim),
        test_sets=test_sets,
        classifier=classifier,
        k_list=k_list,
        routing_mode=args.routing,
        threshold=args.threshold,
        seed=args.seed,
    )
    save_report(report, args.out)
    print(f"wrote {args.out}")
    for row in report.rows:
        cells = " ".join(f"r@{k}={format_percent(v)}" for k, v in sorted(row.r_at_k.items()))
        status = cells if row.error is None else f"ERROR: {row.error}"
        print(f"  {row.method:18s} {row.variant:20s} {row.test_set:12s} {status}")
    return 0


def cmd_serve(args) -> int:
    if args.config:
        config = load_config(args.config)
    else:
        if not args.corpus or not args.embeddings:
            print("error: serve requires --config or both --corpus and --embeddings", file=sys.stderr)
            return 2
        config = ServiceConfig(corpus_path=args.corpus, embeddings_path=args.embeddings)
    overrides = {
        "corpus_path": args.corpus,
        "embeddings_path": args.embeddings,
        "classifier_path": args.classifier,
        "descriptors_path": args.descriptors,
        "log_path": args.log,
        "host": args.host,
        "port": args.port,
    }
    changed = {k: v for k, v in overrides.items() if v is not None}
    engine_overrides = {
        "threshold": args.threshold,
        "k_default": args.k_default,
        "fallback_on_empty": args.fallback,
        "classifier_mode": args.classifier_mode,
    }
    engine_changed = {k: v for k, v in engine_overrides.items() if v is not None}
    if changed or engine_changed:
        config = dataclasses.replace(
            config, **changed, engine=dataclasses.replace(config.engine, **engine_changed)
        )
    state = load_service_state(config)
    app = create_app(state)
    print(f"serving {len(state.clips)} clips on http://{config.host}:{config.port}")
    import uvicorn

    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avsearch", description="Hybrid full-text / vector clip retrieval toolkit."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus and its artifacts")
    p.add_argument("--n-clips", type=int, default=200)
    p.add_argument("--transcript-fraction", type=float, default=0.5)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--visual-vocab-size", type=int, default=0, help="0 = auto")
    p.add_argument("--speech-vocab-size", type=int, default=0, help="0 = auto")
    p.add_argument("--quotes", type=int, default=400, help="synthetic quotes for the classifier corpus")
    p.add_argument("--classifier-captions", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate a corpus file and write its normal form")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true", help="reject unknown fields, warn on caption count")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="build the transcript full-text index snapshot")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--descriptors", default=None)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("train-classifier", help="train the query-routing classifier")
    p.add_argument("--data", required=True, help="labeled JSONL training texts")
    p.add_argument("--test", default=None, help="labeled JSONL held-out texts")
    p.add_argument("--out", required=True)
    p.add_argument("--embed-dim", type=int, default=16)
    p.add_argument("--hidden-dim", type=int, default=16)
    p.add_argument("--epochs", type=int, default=7)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--descriptors", default=None)
    p.set_defaults(func=cmd_train_classifier)

    p = sub.add_parser("augment", help="replace train captions with transcript text")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--replace-min", type=int, default=1)
    p.add_argument("--replace-max", type=int, default=1)
    p.add_argument("--no-op", action="store_true", help="copy without replacement")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--descriptors", default=None)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("build-testset", help="build the mixed query/ground-truth pairs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--descriptors", default=None)
    p.set_defaults(func=cmd_build_testset)

    p = sub.add_parser("eval", help="run the three-method comparison and write a report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True, help="baseline embedding matrix")
    p.add_argument("--embeddings-enriched", default=None)
    p.add_argument("--classifier", default=None)
    p.add_argument(
        "--routing",
        choices=[ROUTING_CLASSIFIER, ROUTING_RULE_BASED, ROUTING_ORACLE],
        default=ROUTING_CLASSIFIER,
    )
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--k", default="1,5,10", help="comma-separated cutoffs")
    p.add_argument("--mixed-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="serve search over HTTP")
    p.add_argument("--config", default=None, help="JSON config file; flags win over it")
    p.add_argument("--corpus", default=None)
    p.add_argument("--embeddings", default=None)
    p.add_argument("--classifier", default=None)
    p.add_argument("--descriptors", default=None)
    p.add_argument("--log", default=None, help="interaction log path")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--k-default", type=int, default=None)
    p.add_argument("--fallback", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--classifier-mode", choices=[MODE_TRAINED, MODE_RULE_BASED], default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
