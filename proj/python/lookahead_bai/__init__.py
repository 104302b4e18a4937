"""Python access to the lookahead best-arm identification core."""

import json

from ._lbai import (
    PhiUndefined,
    Sketch,
    claim4_oracle,
    lemma1_gap,
    orthogonality_check,
)
from . import _lbai

__all__ = [
    "PhiUndefined",
    "Sketch",
    "bai_once",
    "claim4_oracle",
    "generate_instance",
    "lemma1_gap",
    "local_sparsity",
    "orthogonality_check",
    "run_experiment",
]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def run_experiment(config):
    """Run an experiment config (dict or JSON text); returns the decoded result document."""
    return json.loads(_lbai.run_experiment_json(_text(config)))


def generate_instance(spec):
    return json.loads(_lbai.generate_instance_json(_text(spec)))


def bai_once(instance, seed, phi=None):
    """One lookahead run; pass phi to use the sketch-based variant."""
    return _lbai.bai_once(_text(instance), seed, phi)


def local_sparsity(instance, window):
    return _lbai.local_sparsity(_text(instance), window)
