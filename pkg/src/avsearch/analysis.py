"""Text analyzers shared by the index, embedder, and query classifier.

Two tokenizers live here because they deliberately differ in one respect:
the index/embedding analyzer throws away punctuation entirely, while the
classifier tokenizer keeps double-quote characters as an explicit sentinel
token (quotation marks are a strong routing signal).
"""

from __future__ import annotations

import re

# Sentinel emitted by the classifier tokenizer for every double-quote
# character.  Uppercase on purpose: text tokens are lowercased, so the
# sentinel can never collide with a real word.
QUOTE_MARK = "QUOTE_MARK"

# Straight and typographic double quotes.
DOUBLE_QUOTE_CHARS = frozenset('"“”„«»')

# Runs of unicode alphanumerics; underscore is punctuation here.
_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

_QUOTE_OR_WORD_RE = re.compile(
    "[" + "".join(DOUBLE_QUOTE_CHARS) + "]|[^\\W_]+", re.UNICODE
)


def analyze_text(text: str) -> list[str]:
    """Tokenize for indexing/embedding: lowercase, split on non-alphanumerics.

    Quote marks and all other punctuation are dropped. Empty input yields [].
    """
    return _WORD_RE.findall(text.lower())


def tokenize_query(text: str) -> list[str]:
    """Tokenize for classification: like analyze_text, but each double-quote
    character is emitted in place as the QUOTE_MARK sentinel token."""
    out = []
    for m in _QUOTE_OR_WORD_RE.finditer(text.lower()):
        tok = m.group(0)
        out.append(QUOTE_MARK if tok in DOUBLE_QUOTE_CHARS else tok)
    return out
