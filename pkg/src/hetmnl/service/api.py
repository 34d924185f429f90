"""Service operations: pydantic models in, pydantic models out.

These functions hold the full request-to-core-to-response translation and are
shared by the HTTP routes and the in-process CLI client, so both surfaces
behave identically.  Core exceptions propagate; the HTTP layer maps them to
status codes.
"""

from __future__ import annotations

import numpy as np

from .. import __version__
from ..errors import ConfigError
from ..io import ModelConfig, build_report_doc
from ..likelihood import probability_table
from ..model import ChoiceDataset, ChoiceRow, ParameterVector, build_design, make_block
from ..simulate import RNG_ALGORITHM, probability_curves, scenario_from_dict, simulate_dataset
from . import schemas

__all__ = ["run_fit", "run_predict", "run_simulate", "run_curves", "health"]


def _dataset(rows: list[schemas.RowModel]) -> ChoiceDataset:
    return ChoiceDataset(
        tuple(
            sorted(
                (ChoiceRow(r.chooser, r.alternative, r.chosen, dict(r.covariates)) for r in rows),
                key=lambda r: (r.chooser_id, r.alternative),
            )
        )
    )


def _config(model: schemas.ConfigModel) -> ModelConfig:
    return ModelConfig.from_dict(model.model_dump())


def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


def run_fit(request: schemas.FitRequest) -> schemas.FitReportModel:
    """Fit the model to the posted rows and return the full report document."""
    config = _config(request.config)
    spec = config.model_spec()
    dataset = _dataset(request.rows)
    design = build_design(dataset, spec)

    from ..estimate import fit  # heavy import kept local to the operations

    result = fit(design, spec, config.fit_options())
    doc = build_report_doc(result, config)
    return schemas.FitReportModel.model_validate(doc)


def run_predict(request: schemas.PredictRequest) -> schemas.PredictResponse:
    """Per-chooser choice probabilities under the posted parameters."""
    config = _config(request.config)
    spec = config.model_spec()
    dataset = _dataset(request.rows)
    design = build_design(dataset, spec)
    params = ParameterVector.from_dict(request.params.model_dump(), spec)
    probs = probability_table(design, params)
    rows = [
        schemas.PredictedRow(
            chooser=design.chooser_ids[i],
            probabilities=[float(p) for p in probs[i]],
            predicted=int(np.argmax(probs[i])) + 1,
        )
        for i in range(design.n_choosers)
    ]
    return schemas.PredictResponse(n_alternatives=spec.n_alternatives, rows=rows)


def run_simulate(request: schemas.SimulateRequest) -> schemas.SimulateResponse:
    """Draw a dataset from the scenario's random-utility process."""
    scenario = scenario_from_dict(request.scenario.model_dump())
    dataset = simulate_dataset(scenario)
    rows = [
        schemas.RowModel(
            chooser=r.chooser_id,
            alternative=r.alternative,
            chosen=r.chosen,
            covariates=dict(r.covariates),
        )
        for r in dataset.rows
    ]
    meta = schemas.SimulateMeta(
        seed=scenario.seed,
        rng=RNG_ALGORITHM,
        n_choosers=scenario.n_choosers,
        scenario=request.scenario,
        software=schemas.SoftwareModel(name="hetmnl", version=__version__),
    )
    return schemas.SimulateResponse(rows=rows, meta=meta)


def run_curves(request: schemas.CurvesRequest) -> schemas.CurvesResponse:
    """Probability trajectories over a heterogeneity grid for one block."""
    config = _config(request.config)
    spec = config.model_spec()
    params = ParameterVector.from_dict(request.params.model_dump(), spec)
    grid_spec = request.gridspec
    if grid_spec.w_name not in spec.w_names:
        raise ConfigError(
            f"{grid_spec.w_name!r} is not a heterogeneity column of this model "
            f"(w_names: {list(spec.w_names)})"
        )
    w_index = spec.w_names.index(grid_spec.w_name)
    block = make_block(
        spec,
        z=grid_spec.block.z,
        s=grid_spec.block.s,
        w=grid_spec.block.w,
    )
    curve = probability_curves(block, params, w_index, grid_spec.grid, grid_spec.sweep)
    return schemas.CurvesResponse(
        w_name=grid_spec.w_name,
        sweep=grid_spec.sweep,
        grid=list(curve.grid),
        base=list(curve.base),
        curves=[list(c) for c in curve.curves],
    )
