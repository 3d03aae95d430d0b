"""Issue corpus cleaning and three-way issue classification.

Thin wrapper over the compiled extension. JSON-returning functions get a
parsed convenience twin here so callers can stay dict-native.
"""

import json

from ._core import (
    DataError,
    IoError,
    ModelFormatError,
    Predictor,
    SchemaError,
    clean_file,
    clean_issue,
    clean_text,
    default_config_json,
    eval_file,
    evaluate_json,
    evaluate_table,
    fnv1a64,
    stats_json,
    tokenize,
    train_file,
)

__all__ = [
    "DataError",
    "IoError",
    "ModelFormatError",
    "Predictor",
    "SchemaError",
    "clean_file",
    "clean_issue",
    "clean_text",
    "default_config",
    "default_config_json",
    "eval_file",
    "evaluate",
    "evaluate_json",
    "evaluate_table",
    "fnv1a64",
    "predict",
    "stats",
    "stats_json",
    "tokenize",
    "train_file",
]


def default_config():
    """The full run configuration as a dict."""
    return json.loads(default_config_json())


def evaluate(truth, pred):
    """Per-class and micro-averaged metrics as a dict."""
    return json.loads(evaluate_json(list(truth), list(pred)))


def stats(raw_csv, config_json="", origin="train"):
    """Corpus statistics of a raw issue CSV as a dict."""
    return json.loads(stats_json(raw_csv, config_json, origin))


def predict(predictor, title, body="", created_at="", author_association="", repository=""):
    """Classify one raw issue; returns the response as a dict."""
    return json.loads(
        predictor.predict_json(title, body, created_at, author_association, repository)
    )
