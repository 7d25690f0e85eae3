"""Classifier tests.

The load-bearing one is the finite-difference gradient check: the training
code is hand-written backprop, so its gradients are verified coordinate-wise
against a numerical derivative of the loss rather than trusted.
"""

import numpy as np
import pytest

from avsearch.dataset_builder import SPEECH_QUOTE, VISUAL, LabeledText
from avsearch.query_classifier import (
    ClassifierError,
    Hyperparams,
    _backward_batch,
    _forward_batch,
    _init_params,
    _pad_batch,
    build_vocabulary,
    evaluate_accuracy,
    fit,
    load_model,
    predict,
    predict_scores,
    rule_based_detect,
    save_model,
)

SPEECHY = [
    LabeledText('"we will rebuild", said the mayor', SPEECH_QUOTE),
    LabeledText('"not today" he replied', SPEECH_QUOTE),
    LabeledText('she asked "why now"', SPEECH_QUOTE),
    LabeledText('"stop right there"', SPEECH_QUOTE),
    LabeledText('"i am sure of it", according to the witness', SPEECH_QUOTE),
]
VISUALY = [
    LabeledText("a man rides a horse on the beach", VISUAL),
    LabeledText("two dogs play in the snow", VISUAL),
    LabeledText("a chef slices vegetables", VISUAL),
    LabeledText("kids dance on a stage", VISUAL),
    LabeledText("a plane takes off at sunset", VISUAL),
]


def _loss(params, X, mask, y):
    probs, _, _ = _forward_batch(params, X, mask)
    return float(-np.mean(np.log(probs[np.arange(len(y)), y])))


def test_gradients_match_finite_differences():
    rng = np.random.Generator(np.random.PCG64(123))
    hp = Hyperparams(embed_dim=5, hidden_dim=4)
    params = _init_params(vocab_size=7, hp=hp, rng=rng)
    # Ragged lengths so the mask path is exercised by the check.
    X, mask = _pad_batch([[1, 3, 2, 5], [4, 6], [7, 1, 2]])
    y = np.array([0, 1, 1])

    probs, h_final, tape = _forward_batch(params, X, mask)
    grads = _backward_batch(params, X, mask, probs, h_final, tape, y)

    eps = 1e-6
    worst = 0.0
    coord_rng = np.random.Generator(np.random.PCG64(7))
    for name, g in grads.items():
        flat = params[name].reshape(-1)
        gflat = g.reshape(-1)
        picks = coord_rng.choice(flat.size, size=min(12, flat.size), replace=False)
        for j in picks:
            orig = flat[j]
            flat[j] = orig + eps
            up = _loss(params, X, mask, y)
            flat[j] = orig - eps
            down = _loss(params, X, mask, y)
            flat[j] = orig
            numeric = (up - down) / (2 * eps)
            # Central differences carry ~|loss|*2^-52/eps = 1e-10 of absolute
            # noise, so near-zero coordinates need an absolute floor.
            tol = 1e-8 + 1e-5 * max(abs(numeric), abs(gflat[j]))
            worst = max(worst, abs(numeric - gflat[j]) - tol)
    assert worst <= 0.0, f"gradient error exceeds tolerance by {worst}"


def test_fit_separable_toy_set_to_perfect_accuracy():
    # Quote marks alone separate the classes; the model must find that.
    train = SPEECHY + VISUALY
    model = fit(train, Hyperparams(seed=0, epochs=30))
    assert evaluate_accuracy(model, train) == 1.0


def test_fit_is_deterministic_per_seed():
    train = SPEECHY + VISUALY
    a = fit(train, Hyperparams(seed=5))
    b = fit(train, Hyperparams(seed=5))
    for k in a.params:
        assert np.array_equal(a.params[k], b.params[k]), k
    c = fit(train, Hyperparams(seed=6))
    assert any(not np.array_equal(a.params[k], c.params[k]) for k in a.params)


def test_fit_input_validation():
    with pytest.raises(ClassifierError, match="empty"):
        fit([])
    with pytest.raises(ClassifierError, match="both labels"):
        fit(VISUALY)
    with pytest.raises(ClassifierError, match="epochs"):
        fit(SPEECHY + VISUALY, Hyperparams(epochs=0))
    with pytest.raises(ClassifierError, match="learning_rate"):
        fit(SPEECHY + VISUALY, Hyperparams(learning_rate=0.0))


def test_build_vocabulary_reserves_unknown_index():
    vocab = build_vocabulary([LabeledText("b a", VISUAL), LabeledText('"a"', SPEECH_QUOTE)])
    assert 0 not in vocab.values()
    assert sorted(vocab) == ["QUOTE_MARK", "a", "b"]


def test_predict_scores_normalized_and_empty_text_is_visual():
    model = fit(SPEECHY + VISUALY, Hyperparams(seed=1))
    p_vis, p_speech = predict_scores(model, "a man rides a horse")
    assert p_vis + p_speech == pytest.approx(1.0)
    assert predict_scores(model, "...") == (1.0, 0.0)
    assert predict(model, "", threshold=0.5) == (VISUAL, 1.0)


def test_threshold_semantics():
    model = fit(SPEECHY + VISUALY, Hyperparams(seed=1))
    text = "a chef slices vegetables"
    # Normalized scores can never reach 1.01, so everything is visual...
    assert predict(model, '"hello" she said', threshold=1.01)[0] == VISUAL
    # ...and at threshold 0 the >= rule sends everything to speech.
    assert predict(model, text, threshold=0.0)[0] == SPEECH_QUOTE


def test_predict_handles_unseen_tokens():
    model = fit(SPEECHY + VISUALY, Hyperparams(seed=1))
    label, confidence = predict(model, "zebras gallop through unfamiliar tokens")
    assert label in (VISUAL, SPEECH_QUOTE)
    assert 0.0 <= confidence <= 1.0


def test_model_round_trip(tmp_path):
    model = fit(SPEECHY + VISUALY, Hyperparams(seed=2))
    path = tmp_path / "clf.model"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.vocabulary == model.vocabulary
    assert loaded.hyperparams == model.hyperparams
    assert loaded.label_order == model.label_order
    for k in model.params:
        assert np.array_equal(loaded.params[k], model.params[k]), k
    probe = '"we will rebuild", said the mayor'
    assert predict(loaded, probe) == predict(model, probe)


def test_load_model_rejects_garbage(tmp_path):
    path = tmp_path / "clf.model"
    path.write_text("NOTAMODEL\n{}")
    with pytest.raises(ClassifierError, match="magic"):
        load_model(path)


def test_load_model_rejects_non_finite(tmp_path):
    model = fit(SPEECHY + VISUALY, Hyperparams(seed=2))
    path = tmp_path / "clf.model"
    save_model(model, path)
    # json parses the overflowing literal as Infinity
    path.write_text(path.read_text().replace('"bo": [', '"bo": [1e999, '))
    with pytest.raises(ClassifierError, match="not finite"):
        load_model(path)


def test_evaluate_accuracy_empty_error():
    model = fit(SPEECHY + VISUALY, Hyperparams(seed=1))
    with pytest.raises(ClassifierError, match="empty"):
        evaluate_accuracy(model, [])


@pytest.mark.parametrize(
    "text, expected",
    [
        ('"come with me" he whispered', SPEECH_QUOTE),  # quote pair
        ('a sign reading "open', VISUAL),  # single quote mark is not enough
        ("we will rebuild, said the mayor", SPEECH_QUOTE),  # reporting verb
        ("according to the report, sales rose", SPEECH_QUOTE),
        ("the unsaid rules of chess", VISUAL),  # 'said' inside a word must not fire
        ("a man rides a horse", VISUAL),
    ],
)
def test_rule_based_detector(text, expected):
    assert rule_based_detect(text) == expected
