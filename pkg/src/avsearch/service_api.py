"""HTTP front door: query-routed search, clip lookup, interaction logging.

The service is read-only with one exception: the interaction log. Every
completed search appends a query record (queries are first-class interaction
data, not just transport), and clients may post their own click/view records.
Ids and timestamps are always assigned server-side so clients stay trivial.

Error bodies are uniformly {"error": str} regardless of status code.

The app is built from a ServiceState so tests can assemble states in memory;
load_service_state builds one from files. A state starts ready; constructing
one with ready=False exercises the 503 path.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI
from fastapi.exceptions import HTTPException, RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from .corpus_store import ClipRecord, load_corpus, transcript_documents
from .datafication import (
    DataficationError,
    DescriptorRecord,
    DescriptorStore,
    InteractionLog,
    InteractionRecord,
    utc_now_iso,
)
from .fulltext_index import build_fulltext_index
from .query_classifier import load_model
from .retrieval_engine import EngineConfig, EngineError, MODE_TRAINED, RetrievalEngine, engine_search
from .vector_index import hash_embed, load_embeddings

DEFAULT_PARTICIPANT = "anonymous"


class ServiceConfigError(ValueError):
    """Service configuration is unusable (missing or unreadable artifacts)."""


@dataclass(frozen=True)
class ServiceConfig:
    corpus_path: str
    embeddings_path: str
    classifier_path: str | None = None  # required iff engine.classifier_mode is trained
    descriptors_path: str | None = None
    log_path: str | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    engine: EngineConfig = EngineConfig()

    def check(self) -> None:
        self.engine.check()
        for name in ("corpus_path", "embeddings_path", "classifier_path", "descriptors_path"):
            value = getattr(self, name)
            if value is None:
                continue
            if not Path(value).is_file():
                raise ServiceConfigError(f"{name} {value!r} is not a readable file")
        if self.engine.classifier_mode == MODE_TRAINED and self.classifier_path is None:
            raise ServiceConfigError("classifier_path required when classifier_mode is 'trained'")
        if self.log_path is not None and not Path(self.log_path).parent.is_dir():
            raise ServiceConfigError(f"log_path parent {Path(self.log_path).parent!r} is not a directory")
        if not 1 <= self.port <= 65535:
            raise ServiceConfigError(f"port must be in [1, 65535], got {self.port}")


_CONFIG_KEYS = (
    "corpus_path", "embeddings_path", "classifier_path", "descriptors_path",
    "log_path", "host", "port",
)
_ENGINE_KEYS = ("threshold", "k_default", "fallback_on_empty", "classifier_mode")


def config_from_dict(obj: dict) -> ServiceConfig:
    """Build a ServiceConfig from parsed JSON; unknown keys are errors."""
    if not isinstance(obj, dict):
        raise ServiceConfigError("config must be a JSON object")
    unknown = set(obj) - set(_CONFIG_KEYS) - {"engine"}
    if unknown:
        raise ServiceConfigError(f"unknown config keys: {sorted(unknown)}")
    engine_obj = obj.get("engine", {})
    if not isinstance(engine_obj, dict):
        raise ServiceConfigError("engine section must be a JSON object")
    unknown = set(engine_obj) - set(_ENGINE_KEYS)
    if unknown:
        raise ServiceConfigError(f"unknown engine config keys: {sorted(unknown)}")
    if "corpus_path" not in obj or "embeddings_path" not in obj:
        raise ServiceConfigError("config requires corpus_path and embeddings_path")
    return ServiceConfig(
        **{k: obj[k] for k in _CONFIG_KEYS if k in obj},
        engine=EngineConfig(**engine_obj),
    )


def load_config(path: str | Path) -> ServiceConfig:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ServiceConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(obj)


@dataclass
class ServiceState:
    """Everything request handlers touch. Engine and corpus are read-only
    after construction; only the interaction log mutates."""

    clips: dict[str, ClipRecord] = field(default_factory=dict)
    engine: RetrievalEngine | None = None
    descriptors: DescriptorStore = field(default_factory=DescriptorStore)
    log: InteractionLog = field(default_factory=InteractionLog)
    ready: bool = False


def load_service_state(config: ServiceConfig) -> ServiceState:
    """Load all artifacts named by the config and return a ready state."""
    config.check()
    corpus = load_corpus(config.corpus_path)
    matrix = load_embeddings(config.embeddings_path)
    classifier = load_model(config.classifier_path) if config.classifier_path else None
    engine = RetrievalEngine(
        fulltext=build_fulltext_index(transcript_documents(corpus)),
        vectors=matrix,
        query_embedder=functools.partial(hash_embed, dim=matrix.dim),
        config=config.engine,
        classifier=classifier,
    )
    descriptors = (
        DescriptorStore.load(config.descriptors_path, corpus=corpus)
        if config.descriptors_path
        else DescriptorStore(corpus)
    )
    return ServiceState(
        clips={c.clip_id: c for c in corpus},
        engine=engine,
        descriptors=descriptors,
        log=InteractionLog(config.log_path),
        ready=True,
    )


class InteractionBody(BaseModel):
    """Client-supplied part of an interaction; id and timestamp are not
    accepted because the server assigns them."""

    model_config = ConfigDict(extra="forbid")

    participant_id: str
    action: str
    query_text: str | None = None
    route: str | None = None
    target_clip_id: str | None = None


def _descriptor_summary(store: DescriptorStore, record: DescriptorRecord) -> dict:
    try:
        lineage = [
            {
                "tool_name": p.tool_name,
                "tool_version": p.tool_version,
                "training_data_ref": p.training_data_ref,
                "created_at": p.created_at,
            }
            for p in store.lineage_of(record.descriptor_id)
        ]
        lineage_error = None
    except DataficationError as exc:
        # A broken chain in a hand-edited store should not take down clip
        # lookup; report it in place.
        lineage, lineage_error = [], str(exc)
    return {
        "descriptor_id": record.descriptor_id,
        "kind": record.kind,
        "payload_ref": record.payload_ref,
        "facets": {
            "level": record.facets.level,
            "automation": record.facets.automation,
            "extraction_time": record.facets.extraction_time,
            "form": record.facets.form,
            "retrieval": record.facets.retrieval,
            "modality": record.facets.modality,
        },
        "lineage": lineage,
        "lineage_error": lineage_error,
    }


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="avsearch")

    @app.exception_handler(HTTPException)
    async def _http_error(_request, exc: HTTPException):
        return JSONResponse({"error": str(exc.detail)}, status_code=exc.status_code)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request, exc: RequestValidationError):
        return JSONResponse({"error": str(exc.errors())}, status_code=422)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "ready": state.ready, "clips": len(state.clips)}

    @app.get("/search")
    def search(q: str = "", k: int | None = None, participant_id: str = DEFAULT_PARTICIPANT):
        if not state.ready or state.engine is None:
            raise HTTPException(503, "service not ready")
        if not q.strip():
            raise HTTPException(400, "q must be non-empty")
        if k is not None and k < 1:
            raise HTTPException(400, f"k must be >= 1, got {k}")
        if not participant_id:
            raise HTTPException(400, "participant_id must be non-empty")
        try:
            decision, hits = engine_search(state.engine, q, k)
        except EngineError as exc:
            raise HTTPException(400, str(exc)) from exc
        state.log.append(
            InteractionRecord(
                interaction_id=state.log.next_id(),
                participant_id=participant_id,
                timestamp=utc_now_iso(),
                action="query",
                query_text=q,
                route=decision.route,
            )
        )
        return {
            "route": decision.route,
            "fallback_used": decision.fallback_used,
            "confidence": decision.label_confidence,
            "results": [{"clip_id": h.clip_id, "score": h.score, "rank": h.rank} for h in hits],
        }

    @app.get("/clips/{clip_id}")
    def clip_detail(clip_id: str):
        clip = state.clips.get(clip_id)
        if clip is None:
            raise HTTPException(404, f"unknown clip {clip_id!r}")
        return {
            "clip_id": clip.clip_id,
            "split": clip.split,
            "captions": [{"text": c.text, "origin": c.origin} for c in clip.captions],
            "transcript": (
                {"text": clip.transcript.text, "source_tag": clip.transcript.source_tag}
                if clip.transcript is not None
                else None
            ),
            "descriptors": [
                _descriptor_summary(state.descriptors, d) for d in state.descriptors.for_clip(clip_id)
            ],
        }

    @app.post("/interactions")
    def post_interaction(body: InteractionBody):
        record = InteractionRecord(
            interaction_id=state.log.next_id(),
            participant_id=body.participant_id,
            timestamp=utc_now_iso(),
            action=body.action,
            query_text=body.query_text,
            route=body.route,
            target_clip_id=body.target_clip_id,
        )
        try:
            state.log.append(record)
        except DataficationError as exc:
            raise HTTPException(422, str(exc)) from exc
        return {"interaction_id": record.interaction_id}

    return app
