"""Packaged example scenarios, loadable by name from the CLI and tests.

``figure1`` is a five-alternative setup whose location constants make
alternative 3 the modal choice and alternative 5 the runner-up, with one
binary and one standard-normal covariate in the heterogeneity term.  Its
curve sweep illustrates the scale effect: large positive heterogeneity
sharpens the modal choice toward probability 1, large negative values
flatten all five probabilities toward 1/J.
"""

from __future__ import annotations

import json
from importlib import resources

from ..errors import ConfigError

__all__ = ["available", "load", "load_scenario"]

_KINDS = ("scenario", "config", "params", "gridspec")


def available() -> tuple[str, ...]:
    """Names of the shipped scenarios."""
    names = set()
    for entry in resources.files(__name__).iterdir():
        if entry.name.endswith(".scenario.json"):
            names.add(entry.name[: -len(".scenario.json")])
    return tuple(sorted(names))


def load(name: str, kind: str = "scenario") -> dict:
    """Load one JSON asset (kind: scenario, config, params, or gridspec)."""
    if kind not in _KINDS:
        raise ConfigError(f"unknown scenario asset kind {kind!r}; expected {_KINDS}")
    ref = resources.files(__name__).joinpath(f"{name}.{kind}.json")
    if not ref.is_file():
        raise ConfigError(
            f"no packaged {kind} named {name!r}; available: {available()}"
        )
    return json.loads(ref.read_text(encoding="utf-8"))


def load_scenario(name: str):
    """The named scenario as a ScenarioSpec."""
    from ..simulate import scenario_from_dict

    return scenario_from_dict(load(name, "scenario"))
