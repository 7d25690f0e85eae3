"""
Train the speech-quote vs visual-intent query classifier and poke at its
decisions, including the threshold knob and the rule-based fallback.
"""

from avsearch.dataset_builder import build_classifier_corpus
from avsearch.query_classifier import (
    Hyperparams,
    evaluate_accuracy,
    fit,
    predict,
    predict_scores,
    rule_based_detect,
)
from avsearch.synth import SynthParams, generate_synthetic_corpus, synth_classifier_inputs

world = generate_synthetic_corpus(SynthParams(n_clips=200, seed=5))
quotes, transcripts, captions = synth_classifier_inputs(
    world.corpus, n_quotes=400, n_transcripts=50, n_captions=400, seed=5
)
train, heldout = build_classifier_corpus(quotes, transcripts, captions, seed=5)
print(f"{len(train)} training texts, {len(heldout)} held out")

model = fit(train, Hyperparams(seed=5))
print(f"held-out accuracy: {evaluate_accuracy(model, heldout):.4f}")

PROBES = [
    '"we will rebuild", said the mayor',
    "a man rides a horse on the beach",
    'she asked "why now"',
    "two dogs play in fresh snow",
]
print("\ntrained model:")
for text in PROBES:
    p_visual, p_speech = predict_scores(model, text)
    label, confidence = predict(model, text)
    print(f"  {label:12s} p_speech={p_speech:.3f}  {text!r}")

# A higher threshold makes the router conservative: borderline queries fall
# back to the vector side, which degrades gracefully.
label, _ = predict(model, PROBES[0], threshold=1.01)
print(f"\nthreshold=1.01 forces {label!r} even on an obvious quote")

# The zero-dependency heuristic is available when no model file is around.
print("\nrule-based fallback:")
for text in PROBES:
    print(f"  {rule_based_detect(text):12s} {text!r}")
