"""Accessors for the builtin junction models shipped with the package."""

from __future__ import annotations

from importlib import resources

from .dsl import ModelFile, parse_model

__all__ = ["BUILTIN_MODELS", "builtin_model_names", "builtin_model_source", "load_builtin_model"]

BUILTIN_MODELS = {
    "linear-signal": "linear_signal.hpm",
    "linear-busstop": "linear_busstop.hpm",
    "diverge": "diverge.hpm",
    "merge": "merge.hpm",
}


def builtin_model_names() -> "list[str]":
    return list(BUILTIN_MODELS)


def builtin_model_source(name: str) -> str:
    """Raw .hpm text of a builtin model."""
    try:
        filename = BUILTIN_MODELS[name]
    except KeyError:
        raise KeyError(f"unknown builtin model {name!r}; available: {', '.join(BUILTIN_MODELS)}") from None
    return (resources.files("hybridflow") / "models" / filename).read_text(encoding="utf-8")


def load_builtin_model(name: str) -> ModelFile:
    return parse_model(builtin_model_source(name))
