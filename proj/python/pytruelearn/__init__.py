"""Engagement models for fragmented educational video."""

import json

from ._core import (
    Model,
    TruelearnError,
    draw_margin,
    label_engagement,
    model_names,
    pagerank,
    render_state_svg,
    simulate,
    truncated_gaussian_update,
)
from . import _core

__all__ = [
    "Model",
    "TruelearnError",
    "draw_margin",
    "evaluate",
    "label_engagement",
    "learner_state",
    "model_names",
    "pagerank",
    "render_state_svg",
    "simulate",
    "truncated_gaussian_update",
]


def evaluate(data_dir, model="novelty", settings=None, split="test", jobs=0):
    """Sequential hold-out evaluation; returns the report as a dict."""
    settings = {k: str(v).lower() if isinstance(v, bool) else str(v) for k, v in (settings or {}).items()}
    return json.loads(_core.evaluate_json(str(data_dir), model, settings, split, jobs))


def learner_state(model):
    """Gaussian skill state of a model as a dict, or None for models without one."""
    return json.loads(model.state_json())
