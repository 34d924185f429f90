"""Shared builders for randomized designs and datasets."""

from pathlib import Path

import numpy as np
import pytest

from hetmnl import (
    ChoiceDataset,
    ChoiceRow,
    ModelSpec,
    ParameterVector,
    build_design,
)

DATA_DIR = Path(__file__).parent / "data"


def random_dataset(
    j: int,
    k: int,
    m: int,
    length: int,
    n: int,
    seed: int,
    choice_seed: int | None = None,
) -> tuple[ChoiceDataset, ModelSpec]:
    """A structurally valid dataset with standard-normal covariates.

    Choices are drawn uniformly (they only need to satisfy the one-chosen
    invariant, not any model).
    """
    rng = np.random.default_rng(seed)
    crng = rng if choice_seed is None else np.random.default_rng(choice_seed)
    spec = ModelSpec(
        j,
        z_names=tuple(f"z{t}" for t in range(k)),
        s_names=tuple(f"s{t}" for t in range(m)),
        w_names=tuple(f"w{t}" for t in range(length)),
    )
    rows = []
    for i in range(n):
        s_vals = {f"s{t}": float(rng.normal()) for t in range(m)}
        w_vals = {f"w{t}": float(rng.normal()) for t in range(length)}
        chosen = int(crng.integers(1, j + 1))
        for a in range(1, j + 1):
            covs = {f"z{t}": float(rng.normal()) for t in range(k)}
            covs.update(s_vals)
            covs.update(w_vals)
            rows.append(ChoiceRow(f"c{i:04d}", a, int(a == chosen), covs))
    return ChoiceDataset(tuple(rows)), spec


def random_design(j, k, m, length, n, seed):
    dataset, spec = random_dataset(j, k, m, length, n, seed)
    return build_design(dataset, spec), spec


def random_params(spec: ModelSpec, seed: int, scale=0.5, gamma_scale=0.3) -> ParameterVector:
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-scale, scale, spec.n_free)
    theta[spec.n_location :] = rng.uniform(-gamma_scale, gamma_scale, len(spec.w_names))
    return ParameterVector.unpack(theta, spec)


def intercept_only_dataset(n: int, n_second: int) -> ChoiceDataset:
    """J=2 dataset where the first n_second choosers pick alternative 2."""
    rows = []
    for i in range(n):
        chosen = 2 if i < n_second else 1
        for a in (1, 2):
            rows.append(ChoiceRow(f"c{i:04d}", a, int(a == chosen), {}))
    return ChoiceDataset(tuple(rows))


@pytest.fixture(scope="session")
def recovery_paths():
    return {
        "data": DATA_DIR / "recovery.csv",
        "config": DATA_DIR / "recovery_config.json",
        "scenario": DATA_DIR / "recovery_scenario.json",
        "golden": DATA_DIR / "recovery_golden.json",
    }
