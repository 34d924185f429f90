"""Maximum-likelihood fitting: Newton ascent, ridge penalty, inference.

The optimizer climbs the (optionally ridge-penalized) log-likelihood using
the observed information as curvature, falling back to steepest ascent with
step halving whenever the Newton direction is unavailable or not an ascent
direction.  Convergence is certified by the sup-norm of the penalized score,
so a converged fit is a verified stationary point.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, EvaluationError, HetmnlError, NonIdentifiedError
from .likelihood import _information_free, _loglike_free, _score_free, observed_information
from .model import Design, ModelSpec, ParameterVector

__all__ = ["FitOptions", "FitResult", "fit", "penalty", "starting_values", "inference"]


@dataclass(frozen=True)
class FitOptions:
    """Optimizer controls.  ``penalty=None`` inherits the ModelSpec value."""

    max_iterations: int = 200
    gradient_tolerance: float = 1e-6
    step_halving_max: int = 30
    penalty: float | None = None
    start: Sequence[float] | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")
        if self.gradient_tolerance <= 0:
            raise ConfigError("gradient_tolerance must be positive")
        if self.step_halving_max < 0:
            raise ConfigError("step_halving_max must be nonnegative")
        if self.penalty is not None and self.penalty < 0:
            raise ConfigError("penalty must be nonnegative")
        if self.start is not None:
            start = np.array(self.start, dtype=float).reshape(-1)
            start.flags.writeable = False
            object.__setattr__(self, "start", start)


@dataclass(frozen=True, eq=False)
class FitResult:
    """Estimates plus inference output and convergence diagnostics.

    ``covariance`` is the inverse observed information at the estimate (None
    when the information is singular; a warning records why).  ``converged``
    is True only if the final penalized score passed the gradient tolerance.
    ``objective_trace`` holds the accepted penalized objective values.
    """

    params: ParameterVector
    covariance: np.ndarray | None
    std_errors: np.ndarray | None
    t_values: np.ndarray | None
    log_likelihood: float
    iterations: int
    converged: bool
    warnings: tuple[str, ...]
    objective_trace: tuple[float, ...]


def penalty(
    theta: Sequence[float], spec: ModelSpec, lam: float
) -> tuple[float, np.ndarray]:
    """Ridge penalty lam * sum(theta_t^2) over non-constant coordinates.

    Alternative constants are exempt.  Returns (value, gradient); the fitted
    objective is log-likelihood minus this value.
    """
    if lam < 0:
        raise ConfigError("penalty weight must be nonnegative")
    theta = np.asarray(theta, dtype=float).reshape(-1)
    mask = spec.penalized_mask()
    if theta.size != mask.size:
        raise ConfigError(
            f"parameter vector has length {theta.size}, expected {mask.size}"
        )
    value = lam * float(np.sum(theta[mask] ** 2))
    grad = 2.0 * lam * np.where(mask, theta, 0.0)
    return value, grad


def _strip_heterogeneity(design: Design) -> tuple[Design, ModelSpec]:
    spec = dataclasses.replace(design.spec, w_names=())
    plain = Design(
        spec,
        design.chooser_ids,
        design.x,
        np.zeros((design.n_choosers, 0)),
        design.choices,
    )
    return plain, spec


def starting_values(design: Design, spec: ModelSpec, sink: list | None = None) -> np.ndarray:
    """Deterministic start: gamma = 0, location from a 10-step plain-MNL pre-fit.

    A failed pre-fit falls back to the zero vector with a warning.
    """
    theta0 = np.zeros(spec.n_free)
    plain_design, plain_spec = _strip_heterogeneity(design)
    try:
        opts = FitOptions(max_iterations=10, start=np.zeros(spec.n_location), penalty=0.0)
        theta_loc, _, _, _ = _maximize(plain_design, plain_spec, opts, 0.0, [])
        theta0[: spec.n_location] = theta_loc
    except HetmnlError as exc:
        if sink is not None:
            sink.append(f"starting-value pre-fit failed ({exc}); starting from zeros")
    return theta0


def _maximize(
    design: Design,
    spec: ModelSpec,
    options: FitOptions,
    lam: float,
    sink: list,
) -> tuple[np.ndarray, int, bool, list[float]]:
    """Newton ascent with step halving; returns (theta, iterations, converged, trace)."""
    mask = spec.penalized_mask()

    def objective(theta: np.ndarray) -> float:
        value, _ = penalty(theta, spec, lam)
        return _loglike_free(design, theta, sink) - value

    def pen_score(theta: np.ndarray) -> np.ndarray:
        _, grad = penalty(theta, spec, lam)
        return _score_free(design, theta, sink) - grad

    if options.start is not None:
        theta = np.array(options.start, dtype=float).reshape(-1)
        if theta.size != spec.n_free:
            raise ConfigError(
                f"start vector has length {theta.size}, expected {spec.n_free}"
            )
    else:
        theta = starting_values(design, spec, sink)

    current = objective(theta)
    trace = [current]
    converged = False
    iterations = 0
    fallback_noted = False
    for _ in range(options.max_iterations):
        grad = pen_score(theta)
        if np.max(np.abs(grad)) <= options.gradient_tolerance:
            converged = True
            break
        direction = None
        try:
            info_pen = _information_free(design, theta, sink) + 2.0 * lam * np.diag(
                mask.astype(float)
            )
            candidate = np.linalg.solve(info_pen, grad)
            if np.all(np.isfinite(candidate)) and float(candidate @ grad) > 0.0:
                direction = candidate
        except np.linalg.LinAlgError:
            direction = None
        if direction is None:
            direction = grad
            if not fallback_noted:
                sink.append(
                    "newton direction unavailable or not an ascent direction; "
                    "falling back to steepest ascent"
                )
                fallback_noted = True
        grad_norm = np.max(np.abs(grad))
        step = 1.0
        accepted = False
        for _half in range(options.step_halving_max + 1):
            trial = theta + step * direction
            try:
                value = objective(trial)
            except EvaluationError:
                value = -np.inf
            if np.isfinite(value) and value > current:
                theta = trial
                current = value
                accepted = True
                break
            # Near the optimum the true gain can drop below the objective's
            # float resolution; accept a flat step if it strictly shrinks the
            # gradient, so the trace stays non-decreasing while the iterate
            # still closes in on stationarity.
            if value == current:
                try:
                    trial_norm = np.max(np.abs(pen_score(trial)))
                except EvaluationError:
                    trial_norm = np.inf
                if trial_norm < grad_norm:
                    theta = trial
                    accepted = True
                    break
            step *= 0.5
        iterations += 1
        trace.append(current)
        if not accepted:
            sink.append(
                "step halving could not improve the objective; stopping before "
                "the gradient tolerance was met"
            )
            break
    if not converged:
        grad = pen_score(theta)
        converged = bool(np.max(np.abs(grad)) <= options.gradient_tolerance)
    return theta, iterations, converged, trace


def inference(
    design: Design, fit_params: ParameterVector, sink: list | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Covariance (inverse observed information), standard errors, t-values.

    Raises NonIdentifiedError naming the dominant coordinate of the near-null
    eigenvector when the information matrix is not positive definite.
    """
    info = observed_information(design, fit_params, sink=sink)
    eigvals, eigvecs = np.linalg.eigh(info)
    floor = max(abs(eigvals[-1]), 1.0) * 1e-12
    if eigvals[0] <= floor:
        vec = eigvecs[:, 0]
        coord = int(np.argmax(np.abs(vec)))
        labels = design.spec.labels()
        label = labels[coord] if coord < len(labels) else f"coordinate {coord}"
        raise NonIdentifiedError(
            "observed information is singular or indefinite; the near-null "
            f"direction is dominated by {label}"
        )
    covariance = (eigvecs / eigvals) @ eigvecs.T
    std_errors = np.sqrt(np.diag(covariance))
    t_values = fit_params.pack() / std_errors
    return covariance, std_errors, t_values


def fit(design: Design, spec: ModelSpec, options: FitOptions | None = None) -> FitResult:
    """Maximize the (penalized) log-likelihood and attach inference output.

    Non-convergence is reported through the ``converged`` flag and a warning,
    not an exception, so partial results stay available for diagnosis.
    """
    options = options or FitOptions()
    if design.choices is None:
        raise ConfigError("design has no recorded choices; fitting needs outcomes")
    n = design.n_choosers
    if spec.n_free > n:
        raise ConfigError(
            f"model has {spec.n_free} free parameters but only {n} choosers"
        )
    if spec.w_names and n > 1:
        spread = design.w.max(axis=0) - design.w.min(axis=0)
        for name, rng in zip(spec.w_names, spread):
            if rng == 0.0:
                raise ConfigError(
                    f"heterogeneity column {name!r} is constant; a constant scale "
                    "shift is not identified (rescale the location coefficients instead)"
                )
    lam = spec.penalty if options.penalty is None else options.penalty
    sink: list[str] = []
    theta, iterations, converged, trace = _maximize(design, spec, options, lam, sink)
    if not converged:
        sink.append(
            f"did not reach the gradient tolerance within {options.max_iterations} "
            "iteration(s)"
        )
    params = ParameterVector.unpack(theta, spec)
    loglike = _loglike_free(design, theta, sink)
    covariance = std_errors = t_values = None
    try:
        covariance, std_errors, t_values = inference(design, params, sink=sink)
    except NonIdentifiedError as exc:
        sink.append(f"covariance unavailable: {exc}")
    return FitResult(
        params=params,
        covariance=covariance,
        std_errors=std_errors,
        t_values=t_values,
        log_likelihood=loglike,
        iterations=iterations,
        converged=converged,
        warnings=tuple(dict.fromkeys(sink)),
        objective_trace=tuple(trace),
    )
