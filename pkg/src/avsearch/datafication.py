"""Typed metadata records for archive content, participants, and interactions.

Archive descriptors (embeddings, transcripts, annotations, models) are more
than payloads: each carries six facet dimensions and a provenance reference
naming the tool, version, and training data that produced it. Lineage is a
single-parent chain: a descriptor may point at the descriptor of its
training data, which may point further back.

A ``training_data_ref`` is either a link or free-form documentation. Links
use the explicit form ``"descriptor:<id>"`` and must resolve inside the
store; any other string (a URL, a dataset name) is opaque and ends the
lineage chain. The prefix keeps "dangling link" distinguishable from
"external note", which a bare string cannot be.

Interaction records are append-only; nothing in this module mutates or
deletes an entry once logged.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from .corpus_store import Corpus

DESCRIPTOR_LINK_PREFIX = "descriptor:"

FACET_NAMES = ("level", "automation", "extraction_time", "form", "retrieval", "modality")

# Recommended facet vocabulary; values are open strings on purpose.
LEVELS = ("technical", "content", "conceptual", "interaction")
AUTOMATIONS = ("manual", "automatic", "hybrid")

ACTIONS = ("query", "click", "view")
ROUTES = ("fulltext", "vector")


class DataficationError(ValueError):
    """Invalid descriptor, interaction, or lineage operation."""


class LineageCycleError(DataficationError):
    def __init__(self, descriptor_id: str):
        super().__init__(f"lineage cycle detected at descriptor {descriptor_id!r}")
        self.descriptor_id = descriptor_id


def utc_now_iso() -> str:
    """Current UTC time as an RFC 3339 string with a Z suffix."""
    return datetime.now(timezone.utc).isoformat(timespec="seconds").replace("+00:00", "Z")


@dataclass(frozen=True)
class DescriptorFacets:
    level: str
    automation: str
    extraction_time: str
    form: str
    retrieval: str
    modality: str

    def check(self) -> None:
        for name in FACET_NAMES:
            if not getattr(self, name):
                raise DataficationError(f"facet {name!r} must be non-empty")


@dataclass(frozen=True)
class ProvenanceRef:
    tool_name: str
    tool_version: str = ""
    training_data_ref: str | None = None
    created_at: str = ""

    def linked_descriptor_id(self) -> str | None:
        """The referenced descriptor id when the ref is a link, else None."""
        ref = self.training_data_ref
        if ref and ref.startswith(DESCRIPTOR_LINK_PREFIX):
            return ref[len(DESCRIPTOR_LINK_PREFIX):]
        return None


@dataclass(frozen=True)
class DescriptorRecord:
    descriptor_id: str
    clip_id: str
    kind: str
    payload_ref: str
    facets: DescriptorFacets
    provenance: ProvenanceRef


@dataclass(frozen=True)
class InteractionRecord:
    interaction_id: str
    participant_id: str
    timestamp: str
    action: str
    query_text: str | None = None
    route: str | None = None
    target_clip_id: str | None = None

    def check(self) -> None:
        if self.action not in ACTIONS:
            raise DataficationError(f"unknown action {self.action!r}")
        if self.action == "query" and not self.query_text:
            raise DataficationError("query interaction requires query_text")
        if self.action == "click" and not self.target_clip_id:
            raise DataficationError("click interaction requires target_clip_id")
        if self.route is not None and self.route not in ROUTES:
            raise DataficationError(f"unknown route {self.route!r}")
        if not self.participant_id:
            raise DataficationError("participant_id must be non-empty")


@dataclass(frozen=True)
class ParticipantRecord:
    participant_id: str
    attributes: dict[str, str] = field(default_factory=dict)


class DescriptorStore:
    """In-memory descriptor registry with optional corpus attachment.

    With a corpus attached, descriptors must reference an existing clip
    (the empty clip_id is allowed for corpus-level artifacts such as a
    trained model or an index).
    """

    def __init__(self, corpus: Corpus | None = None):
        self._records: dict[str, DescriptorRecord] = {}
        self._clip_ids = {c.clip_id for c in corpus} if corpus is not None else None

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, descriptor_id: str) -> bool:
        return descriptor_id in self._records

    def get(self, descriptor_id: str) -> DescriptorRecord:
        try:
            return self._records[descriptor_id]
        except KeyError:
            raise DataficationError(f"unknown descriptor {descriptor_id!r}") from None

    def records(self) -> list[DescriptorRecord]:
        return list(self._records.values())

    def for_clip(self, clip_id: str) -> list[DescriptorRecord]:
        return [r for r in self._records.values() if r.clip_id == clip_id]

    def register(self, record: DescriptorRecord) -> str:
        """Add a descriptor; returns its id.

        Rejects duplicate ids, unknown clip ids (when a corpus is attached),
        and training-data links that do not resolve.
        """
        if not record.descriptor_id:
            raise DataficationError("descriptor_id must be non-empty")
        if record.descriptor_id in self._records:
            raise DataficationError(f"duplicate descriptor_id {record.descriptor_id!r}")
        if not record.provenance.tool_name:
            raise DataficationError("provenance.tool_name must be non-empty")
        record.facets.check()
        if self._clip_ids is not None and record.clip_id and record.clip_id not in self._clip_ids:
            raise DataficationError(f"descriptor references unknown clip {record.clip_id!r}")
        linked = record.provenance.linked_descriptor_id()
        if linked is not None and linked not in self._records:
            raise DataficationError(
                f"dangling training_data_ref: descriptor {linked!r} not in store"
            )
        stamped = record
        if not record.provenance.created_at:
            stamped = replace(record, provenance=replace(record.provenance, created_at=utc_now_iso()))
        self._records[record.descriptor_id] = stamped
        return record.descriptor_id

    def upsert(self, record: DescriptorRecord) -> str:
        """Register, replacing any existing descriptor with the same id.

        The registry describes the current artifacts; a regenerated artifact
        keeps its id and its record is replaced. Only the interaction log is
        append-only.
        """
        self._records.pop(record.descriptor_id, None)
        return self.register(record)

    def lineage_of(self, descriptor_id: str) -> list[ProvenanceRef]:
        """Provenance chain from the descriptor back through its training data.

        Follows ``descriptor:`` links until a ref is absent, free-form, or
        (in a hand-edited store) unresolvable. A repeated id raises
        LineageCycleError naming it.
        """
        chain: list[ProvenanceRef] = []
        visited: set[str] = set()
        current: str | None = descriptor_id
        first = True
        while current is not None:
            if current in visited:
                raise LineageCycleError(current)
            visited.add(current)
            if current not in self._records:
                if first:
                    raise DataficationError(f"unknown descriptor {descriptor_id!r}")
                break  # unresolvable link in a loaded store: chain ends here
            record = self._records[current]
            chain.append(record.provenance)
            current = record.provenance.linked_descriptor_id()
            first = False
        return chain

    # --- persistence ---------------------------------------------------

    def save(self, path: str | Path) -> None:
        lines = [json.dumps(descriptor_to_dict(r), ensure_ascii=False) for r in self._records.values()]
        Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, corpus: Corpus | None = None) -> "DescriptorStore":
        """Load descriptors from JSON Lines without link validation.

        Loaded stores may contain dangling or cyclic links (the file can be
        edited by hand); lineage_of copes with both.
        """
        store = cls(corpus=corpus)
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = descriptor_from_dict(json.loads(line))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise DataficationError(f"line {lineno}: bad descriptor record ({exc})") from exc
                if record.descriptor_id in store._records:
                    raise DataficationError(f"line {lineno}: duplicate descriptor_id {record.descriptor_id!r}")
                store._records[record.descriptor_id] = record
        return store


def descriptor_to_dict(r: DescriptorRecord) -> dict:
    return {
        "descriptor_id": r.descriptor_id,
        "clip_id": r.clip_id,
        "kind": r.kind,
        "payload_ref": r.payload_ref,
        "facets": {name: getattr(r.facets, name) for name in FACET_NAMES},
        "provenance": {
            "tool_name": r.provenance.tool_name,
            "tool_version": r.provenance.tool_version,
            "training_data_ref": r.provenance.training_data_ref,
            "created_at": r.provenance.created_at,
        },
    }


def descriptor_from_dict(obj: dict) -> DescriptorRecord:
    facets = DescriptorFacets(**{name: obj["facets"][name] for name in FACET_NAMES})
    prov = obj["provenance"]
    return DescriptorRecord(
        descriptor_id=obj["descriptor_id"],
        clip_id=obj.get("clip_id", ""),
        kind=obj.get("kind", ""),
        payload_ref=obj.get("payload_ref", ""),
        facets=facets,
        provenance=ProvenanceRef(
            tool_name=prov["tool_name"],
            tool_version=prov.get("tool_version", ""),
            training_data_ref=prov.get("training_data_ref"),
            created_at=prov.get("created_at", ""),
        ),
    )


def interaction_to_dict(r: InteractionRecord) -> dict:
    return {
        "interaction_id": r.interaction_id,
        "participant_id": r.participant_id,
        "timestamp": r.timestamp,
        "action": r.action,
        "query_text": r.query_text,
        "route": r.route,
        "target_clip_id": r.target_clip_id,
    }


def interaction_from_dict(obj: dict) -> InteractionRecord:
    return InteractionRecord(
        interaction_id=obj["interaction_id"],
        participant_id=obj["participant_id"],
        timestamp=obj["timestamp"],
        action=obj["action"],
        query_text=obj.get("query_text"),
        route=obj.get("route"),
        target_clip_id=obj.get("target_clip_id"),
    )


class InteractionLog:
    """Append-only interaction log, optionally mirrored to a JSONL file.

    Appends are serialized through one lock and flushed per record, so a
    restarted process sees every interaction logged before shutdown.
    """

    def __init__(self, path: str | Path | None = None):
        self._entries: list[InteractionRecord] = []
        self._lock = threading.Lock()
        self._path = Path(path) if path is not None else None
        self._counter = 0
        if self._path is not None and self._path.exists():
            with open(self._path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._entries.append(interaction_from_dict(json.loads(line)))
            self._counter = len(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def entries(self) -> list[InteractionRecord]:
        return list(self._entries)

    def next_id(self) -> str:
        with self._lock:
            self._counter += 1
            return f"i{self._counter:08d}"

    def append(self, record: InteractionRecord) -> None:
        record.check()
        with self._lock:
            if any(e.interaction_id == record.interaction_id for e in self._entries):
                raise DataficationError(f"duplicate interaction_id {record.interaction_id!r}")
            self._entries.append(record)
            if self._path is not None:
                with open(self._path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(interaction_to_dict(record), ensure_ascii=False) + "\n")
                    fh.flush()


def append_interaction(log: InteractionLog, record: InteractionRecord) -> None:
    """Validate and append one interaction; existing entries are untouched."""
    log.append(record)


def register_descriptor(store: DescriptorStore, record: DescriptorRecord) -> str:
    return store.register(record)


def lineage_of(store: DescriptorStore, descriptor_id: str) -> list[ProvenanceRef]:
    return store.lineage_of(descriptor_id)
