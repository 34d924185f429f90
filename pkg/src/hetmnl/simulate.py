"""Random-utility simulation and probability-curve sweeps.

Choices are generated by the latent-utility mechanism itself: each
alternative gets utility x_ij . delta + sigma_i * eps_ij with i.i.d. standard
Gumbel noise (inverse transform, -log(-log(U))) and sigma_i =
exp(-w_i . gamma); the argmax is the simulated choice.  By the standard
extreme-value argument the implied choice frequencies match the model's
closed-form probabilities, which is what the consistency tests verify.

All randomness flows through a single seeded numpy Generator (PCG64), so one
seed reproduces a dataset bit for bit.  Draw order is fixed: choice-specific
columns first (spec order, one (n, J) block each), then chooser-specific
columns (s order, then remaining w), then one (n, J) uniform block for the
Gumbel noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .likelihood import HET_EXPONENT_LIMIT, choice_probabilities
from .model import (
    ChoiceDataset,
    ChoiceRow,
    DesignBlock,
    ModelSpec,
    ParameterVector,
    _layout_rows,
)

__all__ = [
    "RNG_ALGORITHM",
    "CovariateGenerator",
    "ScenarioSpec",
    "CurveGrid",
    "sample_choice",
    "sample_choices",
    "simulate_dataset",
    "probability_curves",
    "scenario_from_dict",
]

RNG_ALGORITHM = "numpy-pcg64"


@dataclass(frozen=True)
class CovariateGenerator:
    """Distribution descriptor for one covariate column."""

    kind: str
    args: tuple[float, ...]

    _KINDS = {"constant": 1, "uniform": 2, "normal": 2, "bernoulli": 1}

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(float(a) for a in self.args))
        if self.kind not in self._KINDS:
            raise ConfigError(
                f"unknown generator kind {self.kind!r}; expected one of "
                f"{sorted(self._KINDS)}"
            )
        if len(self.args) != self._KINDS[self.kind]:
            raise ConfigError(
                f"generator {self.kind!r} takes {self._KINDS[self.kind]} argument(s)"
            )
        if self.kind == "uniform" and self.args[0] > self.args[1]:
            raise ConfigError("uniform generator needs low <= high")
        if self.kind == "normal" and self.args[1] < 0:
            raise ConfigError("normal generator needs sd >= 0")
        if self.kind == "bernoulli" and not 0.0 <= self.args[0] <= 1.0:
            raise ConfigError("bernoulli generator needs p in [0, 1]")

    @classmethod
    def constant(cls, value: float) -> "CovariateGenerator":
        return cls("constant", (value,))

    @classmethod
    def uniform(cls, low: float, high: float) -> "CovariateGenerator":
        return cls("uniform", (low, high))

    @classmethod
    def normal(cls, mean: float, sd: float) -> "CovariateGenerator":
        return cls("normal", (mean, sd))

    @classmethod
    def bernoulli(cls, p: float) -> "CovariateGenerator":
        return cls("bernoulli", (p,))

    @classmethod
    def from_dict(cls, d: Mapping) -> "CovariateGenerator":
        kind = d.get("kind")
        if kind == "constant":
            return cls.constant(d["value"])
        if kind == "uniform":
            return cls.uniform(d["low"], d["high"])
        if kind == "normal":
            return cls.normal(d["mean"], d["sd"])
        if kind == "bernoulli":
            return cls.bernoulli(d["p"])
        raise ConfigError(f"unknown generator kind {kind!r}")

    def to_dict(self) -> dict:
        keys = {
            "constant": ("value",),
            "uniform": ("low", "high"),
            "normal": ("mean", "sd"),
            "bernoulli": ("p",),
        }[self.kind]
        return {"kind": self.kind, **dict(zip(keys, self.args))}

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "constant":
            return np.full(size, self.args[0])
        if self.kind == "uniform":
            low, high = self.args
            return low + (high - low) * rng.random(size)
        if self.kind == "normal":
            mean, sd = self.args
            return mean + sd * rng.standard_normal(size)
        # bernoulli
        return (rng.random(size) < self.args[0]).astype(float)


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    """A complete data-generating setup: model, truth, covariate generators, seed."""

    n_choosers: int
    spec: ModelSpec
    true_params: ParameterVector
    generators: Mapping[str, CovariateGenerator]
    seed: int

    def __post_init__(self):
        if self.n_choosers < 1:
            raise ConfigError("n_choosers must be at least 1")
        object.__setattr__(self, "generators", dict(self.generators))
        needed = set(self.spec.z_names) | set(self.spec.s_names) | set(self.spec.w_names)
        missing = needed - set(self.generators)
        if missing:
            raise ConfigError(f"no generator for covariate column(s) {sorted(missing)}")
        if self.true_params.n_free != self.spec.n_free:
            raise ConfigError(
                f"true_params has {self.true_params.n_free} free parameters, "
                f"expected {self.spec.n_free}"
            )

    def to_dict(self) -> dict:
        return {
            "n_choosers": self.n_choosers,
            "seed": self.seed,
            "model": {
                "n_alternatives": self.spec.n_alternatives,
                "z_names": list(self.spec.z_names),
                "s_names": list(self.spec.s_names),
                "w_names": list(self.spec.w_names),
                "reference_alternative": self.spec.reference_alternative,
            },
            "true_params": self.true_params.to_dict(),
            "generators": {k: g.to_dict() for k, g in self.generators.items()},
        }


def scenario_from_dict(d: Mapping) -> ScenarioSpec:
    """Parse a scenario mapping (the JSON scenario-file layout)."""
    try:
        model = d["model"]
        spec = ModelSpec(
            n_alternatives=int(model["n_alternatives"]),
            z_names=tuple(model.get("z_names", ())),
            s_names=tuple(model.get("s_names", ())),
            w_names=tuple(model.get("w_names", ())),
            reference_alternative=int(model.get("reference_alternative", 1)),
            penalty=float(model.get("penalty", 0.0)),
        )
        params = ParameterVector.from_dict(d["true_params"], spec)
        generators = {
            name: CovariateGenerator.from_dict(g)
            for name, g in d.get("generators", {}).items()
        }
        return ScenarioSpec(
            n_choosers=int(d["n_choosers"]),
            spec=spec,
            true_params=params,
            generators=generators,
            seed=int(d["seed"]),
        )
    except KeyError as exc:
        raise ConfigError(f"scenario is missing required key {exc.args[0]!r}") from None


def _gumbel(rng: np.random.Generator, size) -> np.ndarray:
    # Inverse transform; U in [0, 1) makes -log(-log(U)) = -inf with
    # probability 2^-53 per draw, which can never win the argmax.
    return -np.log(-np.log(rng.random(size)))


def _scaled_noise_utilities(
    eta: np.ndarray, w: np.ndarray, gamma: np.ndarray, eps: np.ndarray
) -> np.ndarray:
    if gamma.size:
        e = np.clip(w @ gamma, -HET_EXPONENT_LIMIT, HET_EXPONENT_LIMIT)
    else:
        e = np.zeros(w.shape[0])
    sigma = np.exp(-e)
    return eta + sigma[..., None] * eps


def sample_choice(
    block: DesignBlock, params: ParameterVector, rng: np.random.Generator
) -> int:
    """Draw one choice (1-based) by maximizing Gumbel-perturbed utilities."""
    return int(sample_choices(block, params, rng, 1)[0])


def sample_choices(
    block: DesignBlock, params: ParameterVector, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Vectorized sampler: ``size`` independent choices (1-based) for one block."""
    eta = block.x @ params.delta                    # (J,)
    eps = _gumbel(rng, (size, block.n_alternatives))
    u = _scaled_noise_utilities(eta, block.w[None, :], params.gamma, eps)
    # np.argmax takes the lowest index on ties.
    return np.argmax(u, axis=1) + 1


def simulate_dataset(scenario: ScenarioSpec) -> ChoiceDataset:
    """Generate a long-format dataset from the scenario, deterministically."""
    rng = np.random.default_rng(scenario.seed)
    spec = scenario.spec
    n, j = scenario.n_choosers, spec.n_alternatives
    zvals = {name: scenario.generators[name].draw(rng, (n, j)) for name in spec.z_names}
    chooser_names = list(spec.s_names) + [
        name for name in spec.w_names if name not in spec.s_names
    ]
    cvals = {name: scenario.generators[name].draw(rng, n) for name in chooser_names}

    k, m = len(spec.z_names), len(spec.s_names)
    x = np.zeros((n, j, spec.n_location))
    for pos, alt in enumerate(spec.non_reference):
        x[:, alt - 1, pos] = 1.0
    for t, name in enumerate(spec.z_names):
        x[:, :, j - 1 + t] = zvals[name]
    for pos, alt in enumerate(spec.non_reference):
        for t, name in enumerate(spec.s_names):
            x[:, alt - 1, j - 1 + k + pos * m + t] = cvals[name]
    w = (
        np.column_stack([cvals[name] for name in spec.w_names])
        if spec.w_names
        else np.zeros((n, 0))
    )
    eta = x @ scenario.true_params.delta
    eps = _gumbel(rng, (n, j))
    u = _scaled_noise_utilities(eta, w, scenario.true_params.gamma, eps)
    chosen = np.argmax(u, axis=1)

    width = max(len(str(n - 1)), 4)
    rows = []
    for i in range(n):
        cid = f"c{i:0{width}d}"
        for a in range(j):
            covs = {name: float(zvals[name][i, a]) for name in spec.z_names}
            covs.update({name: float(cvals[name][i]) for name in chooser_names})
            rows.append(ChoiceRow(cid, a + 1, int(a == chosen[i]), covs))
    return ChoiceDataset(tuple(rows))


@dataclass(frozen=True, eq=False)
class CurveGrid:
    """Choice probabilities swept over a heterogeneity grid.

    ``curves[a][k]`` is alternative a+1's probability at ``grid[k]``;
    ``base`` holds the probabilities with the heterogeneity effect switched
    off entirely (the plain multinomial logit point).
    """

    grid: tuple[float, ...]
    curves: tuple[tuple[float, ...], ...]
    base: tuple[float, ...]

    def at(self, k: int) -> tuple[float, ...]:
        return tuple(curve[k] for curve in self.curves)


def probability_curves(
    block: DesignBlock,
    params: ParameterVector,
    w_index: int,
    grid: Sequence[float],
    sweep: str = "coefficient",
) -> CurveGrid:
    """Sweep one heterogeneity coordinate over ``grid``, holding all else fixed.

    ``sweep="coefficient"`` varies the gamma coefficient at ``w_index``;
    ``sweep="covariate"`` varies the covariate value instead.  The base point
    is always the probabilities with zero heterogeneity effect.
    """
    if sweep not in ("coefficient", "covariate"):
        raise ConfigError(f"sweep must be 'coefficient' or 'covariate', got {sweep!r}")
    length = params.gamma.size
    if not 0 <= w_index < length:
        raise ConfigError(
            f"w_index must lie in 0..{length - 1}, got {w_index}"
        )
    grid_values = [float(v) for v in grid]
    if not grid_values or not np.all(np.isfinite(grid_values)):
        raise ConfigError("grid must be a non-empty list of finite values")
    base = choice_probabilities(block, params.replace_gamma(np.zeros(length)))
    columns = []
    for value in grid_values:
        if sweep == "coefficient":
            gamma = np.array(params.gamma)
            gamma[w_index] = value
            probs = choice_probabilities(block, params.replace_gamma(gamma))
        else:
            w = np.array(block.w)
            w[w_index] = value
            probs = choice_probabilities(
                DesignBlock(block.chooser_id, block.x, w, block.choice), params
            )
        columns.append(probs)
    table = np.column_stack(columns)  # (J, len(grid))
    return CurveGrid(
        grid=tuple(grid_values),
        curves=tuple(tuple(float(v) for v in row) for row in table),
        base=tuple(float(v) for v in base),
    )
