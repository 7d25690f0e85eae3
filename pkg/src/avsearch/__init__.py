"""Hybrid clip retrieval: BM25 over speech transcripts, exact cosine search
over caption embeddings, and a trained classifier that routes each query to
whichever backend suits it.

The import graph is a straight line up from text analysis to the HTTP
service; every layer is usable on its own:

    analysis -> corpus_store -> {fulltext_index, vector_index}
             -> dataset_builder -> query_classifier -> retrieval_engine
             -> synth -> eval_harness -> service_api -> cli

All randomness flows through seeded PCG64 generators, so corpus generation,
augmentation, splits, and classifier training are reproducible bit for bit.
"""

from .analysis import analyze_text, tokenize_query
from .corpus_store import (
    Caption,
    ClipRecord,
    Corpus,
    CorpusFormatError,
    Transcript,
    Violation,
    load_corpus,
    save_corpus,
    transcript_documents,
    validate_corpus,
)
from .datafication import (
    DataficationError,
    DescriptorFacets,
    DescriptorRecord,
    DescriptorStore,
    InteractionLog,
    InteractionRecord,
    LineageCycleError,
    ParticipantRecord,
    ProvenanceRef,
    append_interaction,
    lineage_of,
    register_descriptor,
)
from .dataset_builder import (
    DatasetBuildError,
    EvalPair,
    LabeledText,
    apply_reporting_template,
    augment_training_captions,
    build_classifier_corpus,
    build_mixed_test_set,
    load_eval_pairs,
    load_labeled_texts,
    save_eval_pairs,
    save_labeled_texts,
)
from .eval_harness import (
    EvalReport,
    EvalRow,
    build_standard_test_sets,
    format_percent,
    load_report,
    median_rank,
    rank_of,
    recall_at_k,
    run_comparison,
    save_report,
)
from .fulltext_index import (
    Bm25Params,
    FulltextIndex,
    FulltextIndexError,
    build_fulltext_index,
    fulltext_search,
    load_index,
    save_index,
)
from .query_classifier import (
    ClassifierError,
    ClassifierModel,
    Hyperparams,
    evaluate_accuracy,
    fit,
    load_model,
    predict,
    predict_scores,
    rule_based_detect,
    save_model,
)
from .retrieval_engine import (
    EngineConfig,
    EngineError,
    QueryEmbeddingError,
    RetrievalEngine,
    RouteDecision,
    engine_search,
    route_query,
)
from .service_api import ServiceConfig, ServiceState, create_app, load_service_state
from .synth import (
    SynthError,
    SynthParams,
    SynthWorld,
    generate_synthetic_corpus,
    generate_synthetic_quotes,
    synth_classifier_inputs,
)
from .vector_index import (
    EmbeddingMatrix,
    EmptyTextError,
    ScoredHit,
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

__version__ = "0.1.0"
