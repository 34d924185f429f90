"""Choice probabilities, log-likelihood, analytic score, observed information.

Systematic utilities are v_ij = (x_ij . delta) * exp(w_i . gamma).  The factor
exp(w_i . gamma) is the inverse standard deviation of the latent noise: large
values mean sharply distinct preferences, large negative values push every
choice probability toward 1/J.  gamma empty (or zero) recovers the standard
multinomial logit.

All evaluations use max-subtracted softmax / log-sum-exp arithmetic so no
intermediate exponential overflows, and the heterogeneity exponent is clamped
at +/-30 (exp(30) already saturates probabilities at machine resolution).
"""

from __future__ import annotations

import math
import warnings
from typing import Sequence

import numpy as np

from .errors import ConfigError, EvaluationError
from .model import Design, DesignBlock, ModelSpec, ParameterVector

__all__ = [
    "HET_EXPONENT_LIMIT",
    "heterogeneity_factor",
    "choice_probabilities",
    "probability_table",
    "odds",
    "log_likelihood",
    "score",
    "observed_information",
]

HET_EXPONENT_LIMIT = 30.0


# A warning sink is a plain list of messages; when absent, messages go through
# the warnings module instead.  Passing a list keeps concurrent fits isolated.
def _emit(sink: list | None, message: str) -> None:
    if sink is None:
        warnings.warn(message, RuntimeWarning, stacklevel=3)
    else:
        sink.append(message)


def _split_free(theta: np.ndarray, n_location: int) -> tuple[np.ndarray, np.ndarray]:
    return theta[:n_location], theta[n_location:]


def _het_exponent(
    w: np.ndarray, gamma: np.ndarray, ids: Sequence[str], sink: list | None
) -> np.ndarray:
    """w . gamma per chooser, clamped to +/-HET_EXPONENT_LIMIT."""
    if gamma.size == 0:
        return np.zeros(w.shape[0])
    e = w @ gamma
    bad = ~np.isfinite(e)
    if bad.any():
        k = int(np.argmax(bad))
        raise EvaluationError(
            f"heterogeneity exponent is not finite for chooser {ids[k]!r}",
            chooser_id=str(ids[k]),
        )
    over = np.abs(e) > HET_EXPONENT_LIMIT
    if over.any():
        k = int(np.argmax(over))
        _emit(
            sink,
            f"heterogeneity exponent clamped to +/-{HET_EXPONENT_LIMIT:g} for "
            f"{int(over.sum())} chooser(s) (first: {ids[k]!r})",
        )
        e = np.clip(e, -HET_EXPONENT_LIMIT, HET_EXPONENT_LIMIT)
    return e


def _utilities(
    design: Design, theta: np.ndarray, sink: list | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (v, eta, g): utilities, location indices, heterogeneity factors."""
    delta, gamma = _split_free(theta, design.x.shape[2])
    eta = design.x @ delta                     # (n, J)
    e = _het_exponent(design.w, gamma, design.chooser_ids, sink)
    g = np.exp(e)
    v = eta * g[:, None]
    bad = ~np.isfinite(v)
    if bad.any():
        k = int(np.argmax(bad.any(axis=1)))
        raise EvaluationError(
            f"utility is not finite for chooser {design.chooser_ids[k]!r}",
            chooser_id=str(design.chooser_ids[k]),
        )
    return v, eta, g


def _softmax(v: np.ndarray) -> np.ndarray:
    shifted = v - v.max(axis=-1, keepdims=True)
    expv = np.exp(shifted)
    return expv / expv.sum(axis=-1, keepdims=True)


def _check_params(design_or_block, params: ParameterVector) -> np.ndarray:
    n_location = design_or_block.x.shape[-1]
    theta = params.pack()
    w_dim = design_or_block.w.shape[-1]
    if params.n_location != n_location or params.gamma.size != w_dim:
        raise ConfigError(
            f"parameter dimensions (location {params.n_location}, heterogeneity "
            f"{params.gamma.size}) do not match the design "
            f"(location {n_location}, heterogeneity {w_dim})"
        )
    return theta


def _as_design(block: DesignBlock) -> Design:
    spec = ModelSpec(block.n_alternatives)  # placeholder; dims come from arrays
    design = object.__new__(Design)
    object.__setattr__(design, "spec", spec)
    object.__setattr__(design, "chooser_ids", (block.chooser_id,))
    object.__setattr__(design, "x", block.x[None, :, :])
    object.__setattr__(design, "w", block.w[None, :])
    object.__setattr__(
        design, "choices", None if block.choice is None else np.array([block.choice])
    )
    return design


def heterogeneity_factor(
    w_i: Sequence[float], gamma: Sequence[float], sink: list | None = None
) -> float:
    """exp(w_i . gamma), the inverse latent-noise standard deviation.

    Equals 1 when gamma is empty or zero (the plain multinomial logit case).
    """
    w = np.asarray(w_i, dtype=float).reshape(1, -1)
    g = np.asarray(gamma, dtype=float).reshape(-1)
    if w.shape[1] != g.size:
        raise ConfigError(
            f"heterogeneity covariates have length {w.shape[1]} but gamma has {g.size}"
        )
    e = _het_exponent(w, g, ("chooser",), sink)
    return float(np.exp(e[0]))


def choice_probabilities(
    block: DesignBlock, params: ParameterVector, sink: list | None = None
) -> np.ndarray:
    """The J choice probabilities for one chooser (softmax of scaled utilities)."""
    theta = _check_params(block, params)
    v, _, _ = _utilities(_as_design(block), theta, sink)
    return _softmax(v)[0]


def probability_table(
    design: Design, params: ParameterVector, sink: list | None = None
) -> np.ndarray:
    """Choice probabilities for every chooser, shape (n, J)."""
    theta = _check_params(design, params)
    v, _, _ = _utilities(design, theta, sink)
    return _softmax(v)


def odds(
    block: DesignBlock,
    params: ParameterVector,
    j: int,
    s: int,
    sink: list | None = None,
) -> float:
    """Odds of alternative j against s: exp((x_ij - x_is) . delta * factor).

    ``j`` and ``s`` are 1-based and must differ.
    """
    n_alt = block.n_alternatives
    if not (1 <= j <= n_alt and 1 <= s <= n_alt):
        raise ConfigError(f"alternatives must lie in 1..{n_alt}, got j={j}, s={s}")
    if j == s:
        raise ConfigError("odds requires two distinct alternatives")
    theta = _check_params(block, params)
    delta, gamma = _split_free(theta, params.n_location)
    e = _het_exponent(block.w[None, :], gamma, (block.chooser_id,), sink)
    diff = (block.x[j - 1] - block.x[s - 1]) @ delta
    value = float(np.exp(diff * np.exp(e[0])))
    if not math.isfinite(value):
        raise EvaluationError(
            f"odds overflowed for chooser {block.chooser_id!r}",
            chooser_id=block.chooser_id,
        )
    return value


def _require_choices(design: Design) -> np.ndarray:
    if design.choices is None:
        raise ConfigError("design has no recorded choices; fit/likelihood needs outcomes")
    return design.choices


def _loglike_free(design: Design, theta: np.ndarray, sink: list | None = None) -> float:
    choices = _require_choices(design)
    v, _, _ = _utilities(design, theta, sink)
    vmax = v.max(axis=1)
    lse = vmax + np.log(np.exp(v - vmax[:, None]).sum(axis=1))
    contrib = v[np.arange(v.shape[0]), choices] - lse
    # math.fsum gives the correctly rounded sum: chooser order cannot perturb
    # the reported value, and duplicating every chooser doubles it exactly.
    return math.fsum(contrib)


def log_likelihood(
    design: Design, params: ParameterVector, sink: list | None = None
) -> float:
    """Sum over choosers of log pi_{i,chosen}, in log-sum-exp form."""
    theta = _check_params(design, params)
    return _loglike_free(design, theta, sink)


def _score_free(design: Design, theta: np.ndarray, sink: list | None = None) -> np.ndarray:
    choices = _require_choices(design)
    v, eta, g = _utilities(design, theta, sink)
    pi = _softmax(v)
    idx = np.arange(design.n_choosers)
    x_chosen = design.x[idx, choices]                      # (n, P)
    x_mean = np.einsum("nj,njp->np", pi, design.x)         # (n, P)
    s_delta = ((x_chosen - x_mean) * g[:, None]).sum(axis=0)
    eta_chosen = eta[idx, choices]
    eta_mean = (pi * eta).sum(axis=1)
    s_gamma = (design.w * (g * (eta_chosen - eta_mean))[:, None]).sum(axis=0)
    return np.concatenate([s_delta, s_gamma])


def score(design: Design, params: ParameterVector, sink: list | None = None) -> np.ndarray:
    """Analytic gradient of the log-likelihood with respect to the free vector.

    Location coordinates: sum_i factor_i * (x_{i,chosen,t} - sum_s pi_is x_ist).
    Heterogeneity coordinates: sum_i w_it factor_i * (eta_{i,chosen} - sum_s pi_is eta_is),
    with eta_ij = x_ij . delta and factor_i = exp(w_i . gamma).
    """
    theta = _check_params(design, params)
    return _score_free(design, theta, sink)


def _information_free(
    design: Design,
    theta: np.ndarray,
    sink: list | None = None,
    symmetrize: bool = True,
) -> np.ndarray:
    p = theta.size
    hess = np.empty((p, p))
    for t in range(p):
        h = 1e-5 * (1.0 + abs(theta[t]))
        up = theta.copy()
        up[t] += h
        down = theta.copy()
        down[t] -= h
        hess[:, t] = (_score_free(design, up, sink) - _score_free(design, down, sink)) / (2 * h)
    info = -hess
    if symmetrize:
        info = 0.5 * (info + info.T)
    return info


def observed_information(
    design: Design,
    params: ParameterVector,
    sink: list | None = None,
    symmetrize: bool = True,
) -> np.ndarray:
    """Negative Hessian of the log-likelihood at ``params``.

    Columns are central finite differences of the analytic score with step
    1e-5 * (1 + |theta_t|); the result is symmetrized as (H + H')/2 unless
    ``symmetrize`` is disabled (useful for checking the raw residual).
    """
    theta = _check_params(design, params)
    return _information_free(design, theta, sink, symmetrize)
