"""Clip corpus: records, JSON Lines persistence, and validation.

A corpus is an ordered list of clips. Each clip carries at least one
caption, an optional speech transcript, and a train/test split tag. The
on-disk form is UTF-8 JSON Lines, one clip per line:

    {"clip_id": str, "split": "train"|"test",
     "captions": [{"text": str, "origin": "human"|"asr_replacement"}, ...],
     "transcript": {"text": str, "source_tag": str} | null}

A missing transcript (null) means no speech recognition was run; a present
transcript with empty text means it ran and found no speech. The two cases
are kept distinct and neither is eligible for caption replacement.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

HUMAN = "human"
ASR_REPLACEMENT = "asr_replacement"
TRAIN = "train"
TEST = "test"

_ORIGINS = (HUMAN, ASR_REPLACEMENT)
_SPLITS = (TRAIN, TEST)

# MSR-VTT-style corpora pair every clip with 20 annotations; strict mode
# warns when a clip deviates so hand-built fixtures stay honest.
REFERENCE_CAPTION_COUNT = 20

_CLIP_FIELDS = {"clip_id", "split", "captions", "transcript"}
_CAPTION_FIELDS = {"text", "origin"}
_TRANSCRIPT_FIELDS = {"text", "source_tag"}


class CorpusFormatError(ValueError):
    """A corpus file or record does not satisfy the documented format."""


@dataclass(frozen=True)
class Caption:
    text: str
    origin: str = HUMAN


@dataclass(frozen=True)
class Transcript:
    text: str
    source_tag: str = ""


@dataclass(frozen=True)
class ClipRecord:
    clip_id: str
    captions: tuple[Caption, ...]
    transcript: Transcript | None = None
    split: str = TRAIN

    def has_speech(self) -> bool:
        """True when a transcript exists and contains text."""
        return self.transcript is not None and self.transcript.text != ""


Corpus = list[ClipRecord]


@dataclass(frozen=True)
class Violation:
    clip_id: str
    rule: str

    def __str__(self) -> str:
        return f"{self.clip_id}: {self.rule}"


def clip_to_dict(clip: ClipRecord) -> dict:
    return {
        "clip_id": clip.clip_id,
        "split": clip.split,
        "captions": [{"text": c.text, "origin": c.origin} for c in clip.captions],
        "transcript": (
            None
            if clip.transcript is None
            else {"text": clip.transcript.text, "source_tag": clip.transcript.source_tag}
        ),
    }


def clip_from_dict(obj: dict, strict: bool = False) -> ClipRecord:
    if not isinstance(obj, dict):
        raise CorpusFormatError("clip record must be a JSON object")
    if strict:
        unknown = set(obj) - _CLIP_FIELDS
        if unknown:
            raise CorpusFormatError(f"unknown fields {sorted(unknown)}")
    clip_id = obj.get("clip_id")
    if not isinstance(clip_id, str) or not clip_id:
        raise CorpusFormatError("clip_id must be a non-empty string")
    split = obj.get("split")
    if split not in _SPLITS:
        raise CorpusFormatError(f"split must be one of {_SPLITS}, got {split!r}")
    raw_captions = obj.get("captions")
    if not isinstance(raw_captions, list) or not raw_captions:
        raise CorpusFormatError(f"clip {clip_id!r} has an empty caption list")
    captions = []
    for c in raw_captions:
        if not isinstance(c, dict):
            raise CorpusFormatError(f"clip {clip_id!r}: caption must be an object")
        if strict:
            unknown = set(c) - _CAPTION_FIELDS
            if unknown:
                raise CorpusFormatError(f"clip {clip_id!r}: unknown caption fields {sorted(unknown)}")
        text = c.get("text")
        origin = c.get("origin", HUMAN)
        if not isinstance(text, str) or not text:
            raise CorpusFormatError(f"clip {clip_id!r}: caption text must be non-empty")
        if origin not in _ORIGINS:
            raise CorpusFormatError(f"clip {clip_id!r}: bad caption origin {origin!r}")
        captions.append(Caption(text=text, origin=origin))
    raw_tr = obj.get("transcript")
    transcript = None
    if raw_tr is not None:
        if not isinstance(raw_tr, dict):
            raise CorpusFormatError(f"clip {clip_id!r}: transcript must be an object or null")
        if strict:
            unknown = set(raw_tr) - _TRANSCRIPT_FIELDS
            if unknown:
                raise CorpusFormatError(f"clip {clip_id!r}: unknown transcript fields {sorted(unknown)}")
        text = raw_tr.get("text")
        source_tag = raw_tr.get("source_tag", "")
        if not isinstance(text, str):
            raise CorpusFormatError(f"clip {clip_id!r}: transcript text must be a string")
        if not isinstance(source_tag, str):
            raise CorpusFormatError(f"clip {clip_id!r}: transcript source_tag must be a string")
        transcript = Transcript(text=text, source_tag=source_tag)
    if strict and len(captions) != REFERENCE_CAPTION_COUNT:
        warnings.warn(
            f"clip {clip_id!r} has {len(captions)} captions, expected "
            f"{REFERENCE_CAPTION_COUNT}",
            stacklevel=3,
        )
    return ClipRecord(clip_id=clip_id, captions=tuple(captions), transcript=transcript, split=split)


def load_corpus(path: str | Path, strict: bool = False) -> Corpus:
    """Load a JSON Lines corpus, validating as it goes.

    Raises CorpusFormatError naming the offending line for malformed JSON,
    bad records, or duplicate clip ids. Blank lines are ignored.
    """
    corpus: Corpus = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
            try:
                clip = clip_from_dict(obj, strict=strict)
            except CorpusFormatError as exc:
                raise CorpusFormatError(f"line {lineno}: {exc}") from exc
            if clip.clip_id in seen:
                raise CorpusFormatError(f"line {lineno}: duplicate clip_id {clip.clip_id!r}")
            seen.add(clip.clip_id)
            corpus.append(clip)
    return corpus


def dumps_corpus(corpus: Corpus) -> str:
    """Serialize a corpus to its JSON Lines text. Deterministic."""
    return "".join(json.dumps(clip_to_dict(c), ensure_ascii=False) + "\n" for c in corpus)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus as JSON Lines; load_corpus round-trips it exactly."""
    Path(path).write_text(dumps_corpus(corpus), encoding="utf-8")


def transcript_documents(corpus: Corpus, split: str | None = None) -> list[tuple[str, str]]:
    """(clip_id, transcript text) pairs for clips that have speech.

    The full-text index is built from exactly this view of the corpus;
    optionally restricted to one split.
    """
    if split is not None and split not in _SPLITS:
        raise CorpusFormatError(f"unknown split {split!r}")
    return [
        (c.clip_id, c.transcript.text)
        for c in corpus
        if c.has_speech() and (split is None or c.split == split)
    ]


def validate_corpus(corpus: Corpus) -> list[Violation]:
    """Check every record invariant; returns [] iff the corpus is valid.

    Violations are data, not exceptions: each one names the clip and the
    broken rule so callers can report them all at once.
    """
    violations: list[Violation] = []
    seen: set[str] = set()
    for clip in corpus:
        if not clip.clip_id:
            violations.append(Violation(clip_id="", rule="empty clip_id"))
            continue
        if clip.clip_id in seen:
            violations.append(Violation(clip.clip_id, f"duplicate clip_id {clip.clip_id!r}"))
        seen.add(clip.clip_id)
        if not clip.captions:
            violations.append(Violation(clip.clip_id, "empty captions"))
        for i, cap in enumerate(clip.captions):
            if not cap.text:
                violations.append(Violation(clip.clip_id, f"caption {i} has empty text"))
            if cap.origin not in _ORIGINS:
                violations.append(Violation(clip.clip_id, f"caption {i} has bad origin {cap.origin!r}"))
        if clip.split not in _SPLITS:
            violations.append(Violation(clip.clip_id, f"bad split {clip.split!r}"))
    return violations
