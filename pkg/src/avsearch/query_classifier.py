"""Binary query classifier: speech/quote text vs plain visual description.

The trainable model is a small recurrent network implemented directly on
numpy so that training is deterministic for a fixed seed: a 16-dimensional
token embedding feeds a 16-unit recurrent layer with relu activation whose
final hidden state goes through a dense softmax head with one unit per
label. Training runs Adam over shuffled mini-batches (defaults: batch size
32, seven epochs).

Tokens unseen at training time map to the reserved vocabulary index 0. The
decision rule is thresholded on the normalized speech score: the label is
speech_quote iff that score is at least the threshold (default 0.5), so
scaling all scores by a positive constant cannot change a decision.

A rule-based detector is also provided as a fallback router: it fires on a
double-quote pair or on any configured reporting verb.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import DOUBLE_QUOTE_CHARS, tokenize_query
from .dataset_builder import LabeledText, SPEECH_QUOTE, VISUAL

MODEL_MAGIC = "AVQC1"

LABEL_ORDER = (VISUAL, SPEECH_QUOTE)

DEFAULT_REPORTING_VERBS = ("said", "says", "asked", "replied", "remarked", "according to")

_GRAD_CLIP_NORM = 5.0


class ClassifierError(ValueError):
    """Invalid training input, hyperparameters, or model file."""


@dataclass(frozen=True)
class Hyperparams:
    embed_dim: int = 16
    hidden_dim: int = 16
    epochs: int = 7
    batch_size: int = 32
    seed: int = 0
    learning_rate: float = 0.01

    def check(self) -> None:
        for name in ("embed_dim", "hidden_dim", "epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ClassifierError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.learning_rate > 0:
            raise ClassifierError(f"learning_rate must be positive, got {self.learning_rate}")


@dataclass
class ClassifierModel:
    vocabulary: dict[str, int]  # token -> index; 0 is reserved for unknown
    params: dict[str, np.ndarray]
    hyperparams: Hyperparams
    label_order: tuple[str, str] = LABEL_ORDER

    def encode(self, text: str) -> list[int]:
        return [self.vocabulary.get(t, 0) for t in tokenize_query(text)]


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _init_params(vocab_size: int, hp: Hyperparams, rng: np.random.Generator) -> dict[str, np.ndarray]:
    d, h = hp.embed_dim, hp.hidden_dim
    scale = 0.1
    return {
        "E": rng.normal(0.0, scale, size=(vocab_size + 1, d)),
        "Wx": rng.normal(0.0, scale, size=(d, h)),
        "Wh": rng.normal(0.0, scale, size=(h, h)),
        "bh": np.zeros(h),
        "Wo": rng.normal(0.0, scale, size=(h, 2)),
        "bo": np.zeros(2),
    }


def _forward_batch(params: dict[str, np.ndarray], X: np.ndarray, mask: np.ndarray):
    """Run the recurrence over a padded batch; returns probs and a tape."""
    B, T = X.shape
    H = params["bh"].shape[0]
    h = np.zeros((B, H))
    tape = []
    for t in range(T):
        e = params["E"][X[:, t]]
        z = e @ params["Wx"] + h @ params["Wh"] + params["bh"]
        a = _relu(z)
        m = mask[:, t : t + 1]
        h_new = m * a + (1.0 - m) * h
        tape.append((h, z > 0.0, m))
        h = h_new
    logits = h @ params["Wo"] + params["bo"]
    return _softmax(logits), h, tape


def _backward_batch(params, X, mask, probs, h_final, tape, y):
    """Cross-entropy gradients for every parameter via truncation-free BPTT."""
    B, T = X.shape
    grads = {k: np.zeros_like(v) for k, v in params.items()}
    dlogits = probs.copy()
    dlogits[np.arange(B), y] -= 1.0
    dlogits /= B
    grads["Wo"] = h_final.T @ dlogits
    grads["bo"] = dlogits.sum(axis=0)
    dh = dlogits @ params["Wo"].T
    for t in range(T - 1, -1, -1):
        h_prev, z_pos, m = tape[t]
        dz = dh * m * z_pos
        e = params["E"][X[:, t]]
        grads["Wx"] += e.T @ dz
        grads["Wh"] += h_prev.T @ dz
        grads["bh"] += dz.sum(axis=0)
        np.add.at(grads["E"], X[:, t], dz @ params["Wx"].T)
        dh = dz @ params["Wh"].T + dh * (1.0 - m)
    return grads


def _clip_grads(grads: dict[str, np.ndarray], max_norm: float) -> None:
    total = float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))
    if total > max_norm:
        factor = max_norm / total
        for g in grads.values():
            g *= factor


def _pad_batch(sequences: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    B = len(sequences)
    T = max((len(s) for s in sequences), default=0)
    X = np.zeros((B, T), dtype=np.int64)
    mask = np.zeros((B, T))
    for i, seq in enumerate(sequences):
        X[i, : len(seq)] = seq
        mask[i, : len(seq)] = 1.0
    return X, mask


def build_vocabulary(train: list[LabeledText]) -> dict[str, int]:
    """Token index from the training texts only; index 0 stays unknown."""
    tokens = sorted({t for item in train for t in tokenize_query(item.text)})
    return {tok: i + 1 for i, tok in enumerate(tokens)}


def fit(train: list[LabeledText], hp: Hyperparams = Hyperparams()) -> ClassifierModel:
    """Train the classifier; deterministic for fixed (train, hp.seed)."""
    hp.check()
    if not train:
        raise ClassifierError("training set is empty")
    labels = {item.label for item in train}
    if labels != set(LABEL_ORDER):
        raise ClassifierError(f"training set must contain both labels, got {sorted(labels)}")
    vocab = build_vocabulary(train)
    rng = np.random.Generator(np.random.PCG64(hp.seed))
    params = _init_params(len(vocab), hp, rng)
    label_to_idx = {label: i for i, label in enumerate(LABEL_ORDER)}
    sequences = [[vocab.get(t, 0) for t in tokenize_query(item.text)] for item in train]
    y_all = np.array([label_to_idx[item.label] for item in train], dtype=np.int64)

    adam_m = {k: np.zeros_like(v) for k, v in params.items()}
    adam_v = {k: np.zeros_like(v) for k, v in params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    for _ in range(hp.epochs):
        order = rng.permutation(len(sequences))
        for start in range(0, len(order), hp.batch_size):
            batch_idx = order[start : start + hp.batch_size]
            X, mask = _pad_batch([sequences[int(i)] for i in batch_idx])
            y = y_all[batch_idx]
            probs, h_final, tape = _forward_batch(params, X, mask)
            grads = _backward_batch(params, X, mask, probs, h_final, tape, y)
            _clip_grads(grads, _GRAD_CLIP_NORM)
            step += 1
            for k in params:
                adam_m[k] = beta1 * adam_m[k] + (1 - beta1) * grads[k]
                adam_v[k] = beta2 * adam_v[k] + (1 - beta2) * grads[k] ** 2
                m_hat = adam_m[k] / (1 - beta1**step)
                v_hat = adam_v[k] / (1 - beta2**step)
                params[k] -= hp.learning_rate * m_hat / (np.sqrt(v_hat) + eps)

    for k, v in params.items():
        if not np.all(np.isfinite(v)):
            raise ClassifierError(f"training diverged: parameter {k} is not finite")
    return ClassifierModel(vocabulary=vocab, params=params, hyperparams=hp)


def predict_scores(model: ClassifierModel, text: str) -> tuple[float, float]:
    """Normalized (visual, speech_quote) scores; empty text scores as visual."""
    ids = model.encode(text)
    if not ids:
        return 1.0, 0.0
    X, mask = _pad_batch([ids])
    probs, _, _ = _forward_batch(model.params, X, mask)
    p = probs[0]
    p = p / p.sum()  # softmax already normalizes; keep the decision rule explicit
    return float(p[0]), float(p[1])


def predict(model: ClassifierModel, text: str, threshold: float = 0.5) -> tuple[str, float]:
    """(label, confidence). Label is speech_quote iff its score >= threshold;
    confidence is the score of the returned label. Empty text is visual."""
    p_visual, p_speech = predict_scores(model, text)
    if p_speech >= threshold:
        return SPEECH_QUOTE, p_speech
    return VISUAL, p_visual


def evaluate_accuracy(model: ClassifierModel, test: list[LabeledText], threshold: float = 0.5) -> float:
    if not test:
        raise ClassifierError("test set is empty")
    correct = sum(1 for item in test if predict(model, item.text, threshold)[0] == item.label)
    return correct / len(test)


def rule_based_detect(text: str, reporting_verbs: tuple[str, ...] = DEFAULT_REPORTING_VERBS) -> str:
    """speech_quote iff the text has a double-quote pair or a reporting verb."""
    lowered = text.lower()
    quote_count = sum(1 for ch in lowered if ch in DOUBLE_QUOTE_CHARS)
    if quote_count >= 2:
        return SPEECH_QUOTE
    for verb in reporting_verbs:
        if " " in verb:
            if verb in lowered:
                return SPEECH_QUOTE
        elif re.search(rf"\b{re.escape(verb)}\b", lowered):
            return SPEECH_QUOTE
    return VISUAL


def save_model(model: ClassifierModel, path: str | Path) -> None:
    body = {
        "vocabulary": model.vocabulary,
        "hyperparams": {
            "embed_dim": model.hyperparams.embed_dim,
            "hidden_dim": model.hyperparams.hidden_dim,
            "epochs": model.hyperparams.epochs,
            "batch_size": model.hyperparams.batch_size,
            "seed": model.hyperparams.seed,
            "learning_rate": model.hyperparams.learning_rate,
        },
        "label_order": list(model.label_order),
        "parameters": {k: v.tolist() for k, v in model.params.items()},
    }
    Path(path).write_text(MODEL_MAGIC + "\n" + json.dumps(body), encoding="utf-8")


def load_model(path: str | Path) -> ClassifierModel:
    raw = Path(path).read_text(encoding="utf-8")
    header, _, body = raw.partition("\n")
    if header != MODEL_MAGIC:
        raise ClassifierError(f"bad model file magic {header!r}")
    obj = json.loads(body)
    params = {k: np.asarray(v, dtype=np.float64) for k, v in obj["parameters"].items()}
    for k, v in params.items():
        if not np.all(np.isfinite(v)):
            raise ClassifierError(f"model file parameter {k} is not finite")
    return ClassifierModel(
        vocabulary={str(k): int(v) for k, v in obj["vocabulary"].items()},
        params=params,
        hyperparams=Hyperparams(**obj["hyperparams"]),
        label_order=tuple(obj["label_order"]),
    )
