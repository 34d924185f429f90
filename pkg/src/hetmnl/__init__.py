"""Maximum-likelihood toolkit for multinomial logit models with
chooser-specific scale heterogeneity.

Utilities are (x_ij . delta) * exp(w_i . gamma): the exponential factor is the
inverse standard deviation of the latent Gumbel noise, so chooser attributes
in w govern how distinctly (or how randomly) a chooser picks among the J
alternatives.  gamma empty recovers the standard multinomial logit.

Submodules are imported lazily so lightweight entry points (the CLI) can set
threading environment variables before numpy loads.
"""

from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    # model
    "ChoiceRow": ".model",
    "ChoiceDataset": ".model",
    "ModelSpec": ".model",
    "ParameterVector": ".model",
    "DesignBlock": ".model",
    "Design": ".model",
    "build_design": ".model",
    "make_block": ".model",
    "pack": ".model",
    "unpack": ".model",
    "build_proximity": ".model",
    # likelihood
    "heterogeneity_factor": ".likelihood",
    "choice_probabilities": ".likelihood",
    "probability_table": ".likelihood",
    "odds": ".likelihood",
    "log_likelihood": ".likelihood",
    "score": ".likelihood",
    "observed_information": ".likelihood",
    # estimation
    "FitOptions": ".estimate",
    "FitResult": ".estimate",
    "fit": ".estimate",
    "penalty": ".estimate",
    "starting_values": ".estimate",
    "inference": ".estimate",
    # simulation
    "CovariateGenerator": ".simulate",
    "ScenarioSpec": ".simulate",
    "CurveGrid": ".simulate",
    "sample_choice": ".simulate",
    "sample_choices": ".simulate",
    "simulate_dataset": ".simulate",
    "probability_curves": ".simulate",
    "scenario_from_dict": ".simulate",
    # io
    "ModelConfig": ".io",
    "read_config": ".io",
    "read_dataset": ".io",
    "write_dataset": ".io",
    "read_scenario": ".io",
    "read_params": ".io",
    "write_report": ".io",
    "read_report": ".io",
    # errors
    "HetmnlError": ".errors",
    "ConfigError": ".errors",
    "DataError": ".errors",
    "EvaluationError": ".errors",
    "NonIdentifiedError": ".errors",
    "ServiceError": ".errors",
}

__all__ = ["__version__", *_EXPORTS]


def __getattr__(name: str):
    module = _EXPORTS.get(name)
    if module is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    return getattr(import_module(module, __name__), name)


def __dir__():
    return sorted(__all__)
