"""Token-level audio data augmentation for ASR training.

Thin wrapper over the C++ core. Feature matrices are float32 arrays of shape
(frames, dims); spans are (token, start_frame, end_frame) tuples.
"""

import json

from ._core import (
    AdaError,
    AudioDictionary,
    DependencyError,
    HttpPredictor,
    MockPredictor,
    Predictor,
    bonferroni,
    corpus_wer,
    extract_fbank,
    n_replacements,
    parse_ctm,
    randomization_test,
    read_ctm,
    read_features,
    schedule_preset,
    spec_augment,
    splice,
    tokenize,
    wer_counts,
    write_features,
)
from ._core import augment as _augment
from ._core import augment_corpus as _augment_corpus

MODES = ("specaugment", "lm-only", "dict-only", "ada-lm", "ada-rt")


def _decode(result):
    result["trace"] = json.loads(result["trace"])
    return result


def augment(utt_id, features, transcript, spans, dictionary, **kwargs):
    """Augment one utterance. `transcript` may be a string or a token list.

    Returns a dict with features, transcript, spans and the decoded trace.
    """
    if isinstance(transcript, str):
        transcript = tokenize(transcript)
    return _decode(_augment(utt_id, features, transcript, spans, dictionary, **kwargs))


def augment_corpus(manifest, ctm, dictionary, **kwargs):
    """Augment every utterance of a manifest, in corpus order."""
    return [_decode(r) for r in _augment_corpus(str(manifest), str(ctm), dictionary, **kwargs)]


def wer(ref, hyp):
    """Word error rate of one hypothesis; strings are tokenized first."""
    if isinstance(ref, str):
        ref = tokenize(ref)
    if isinstance(hyp, str):
        hyp = tokenize(hyp)
    c = wer_counts(ref, hyp)
    if c["ref_len"] == 0:
        raise AdaError("EmptyReference: reference has no words")
    return (c["substitutions"] + c["deletions"] + c["insertions"]) / c["ref_len"]


__all__ = [name for name in dir() if not name.startswith("_")]
