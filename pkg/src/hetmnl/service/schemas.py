"""Pydantic request/response models for the estimation service.

These mirror the JSON file formats one to one, so the CLI can validate a
config or scenario file with ``Model.model_validate(json.load(...))`` and
ship it to the service unchanged.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field

__all__ = [
    "RowModel",
    "FitOptionsModel",
    "ConfigModel",
    "ParamsModel",
    "GeneratorModel",
    "ModelSpecModel",
    "ScenarioModel",
    "BlockModel",
    "GridSpecModel",
    "FitRequest",
    "FitReportModel",
    "PredictRequest",
    "PredictedRow",
    "PredictResponse",
    "SimulateRequest",
    "SimulateMeta",
    "SimulateResponse",
    "CurvesRequest",
    "CurvesResponse",
    "SoftwareModel",
    "HealthResponse",
]


class RowModel(BaseModel):
    chooser: str
    alternative: int = Field(ge=1)
    chosen: int | None = Field(default=None, ge=0, le=1)
    covariates: dict[str, float] = Field(default_factory=dict)


class FitOptionsModel(BaseModel):
    max_iterations: int = Field(default=200, ge=1)
    gradient_tolerance: float = Field(default=1e-6, gt=0)
    step_halving_max: int = Field(default=30, ge=0)
    penalty: float | None = Field(default=None, ge=0)
    start: list[float] | None = None


class ConfigModel(BaseModel):
    n_alternatives: int = Field(ge=2)
    response: str = "chosen"
    chooser: str = "chooser_id"
    alternative: str = "alternative"
    z_names: list[str] = Field(default_factory=list)
    z_enabled: bool = True
    s_names: list[str] = Field(default_factory=list)
    s_enabled: bool = True
    w_names: list[str] = Field(default_factory=list)
    reference_alternative: int = Field(default=1, ge=1)
    penalty: float = Field(default=0.0, ge=0)
    fit: FitOptionsModel = Field(default_factory=FitOptionsModel)


class ParamsModel(BaseModel):
    constants: list[float]
    alpha: list[float] = Field(default_factory=list)
    betas: list[list[float]] = Field(default_factory=list)
    gamma: list[float] = Field(default_factory=list)
    reference_alternative: int = Field(default=1, ge=1)


class ConstantGenerator(BaseModel):
    kind: Literal["constant"]
    value: float


class UniformGenerator(BaseModel):
    kind: Literal["uniform"]
    low: float
    high: float


class NormalGenerator(BaseModel):
    kind: Literal["normal"]
    mean: float
    sd: float = Field(ge=0)


class BernoulliGenerator(BaseModel):
    kind: Literal["bernoulli"]
    p: float = Field(ge=0, le=1)


GeneratorModel = Annotated[
    Union[ConstantGenerator, UniformGenerator, NormalGenerator, BernoulliGenerator],
    Field(discriminator="kind"),
]


class ModelSpecModel(BaseModel):
    n_alternatives: int = Field(ge=2)
    z_names: list[str] = Field(default_factory=list)
    s_names: list[str] = Field(default_factory=list)
    w_names: list[str] = Field(default_factory=list)
    reference_alternative: int = Field(default=1, ge=1)
    penalty: float = Field(default=0.0, ge=0)


class ScenarioModel(BaseModel):
    n_choosers: int = Field(ge=1)
    seed: int
    model: ModelSpecModel
    true_params: ParamsModel
    generators: dict[str, GeneratorModel] = Field(default_factory=dict)


class BlockModel(BaseModel):
    z: dict[str, list[float]] = Field(default_factory=dict)
    s: dict[str, float] = Field(default_factory=dict)
    w: dict[str, float] = Field(default_factory=dict)


class GridSpecModel(BaseModel):
    w_name: str
    grid: list[float]
    block: BlockModel = Field(default_factory=BlockModel)
    sweep: Literal["coefficient", "covariate"] = "coefficient"


class SoftwareModel(BaseModel):
    name: str
    version: str


class FitRequest(BaseModel):
    rows: list[RowModel]
    config: ConfigModel


class EstimatesModel(BaseModel):
    free: list[float]
    constants: list[float]
    alpha: list[float]
    betas: list[list[float]]
    gamma: list[float]
    reference_alternative: int


class FitReportModel(BaseModel):
    schema_id: str = Field(alias="schema", default="hetmnl.fit-report/1")
    model: ConfigModel
    labels: list[str]
    estimates: EstimatesModel
    log_likelihood: float
    neg_log_likelihood: float
    converged: bool
    iterations: int
    std_errors: list[float] | None
    t_values: list[float] | None
    covariance: list[list[float]] | None
    warnings: list[str]
    software: SoftwareModel

    model_config = {"populate_by_name": True}


class PredictRequest(BaseModel):
    rows: list[RowModel]
    config: ConfigModel
    params: ParamsModel


class PredictedRow(BaseModel):
    chooser: str
    probabilities: list[float]
    predicted: int


class PredictResponse(BaseModel):
    n_alternatives: int
    rows: list[PredictedRow]


class SimulateRequest(BaseModel):
    scenario: ScenarioModel


class SimulateMeta(BaseModel):
    seed: int
    rng: str
    n_choosers: int
    scenario: ScenarioModel
    software: SoftwareModel


class SimulateResponse(BaseModel):
    rows: list[RowModel]
    meta: SimulateMeta


class CurvesRequest(BaseModel):
    config: ConfigModel
    params: ParamsModel
    gridspec: GridSpecModel


class CurvesResponse(BaseModel):
    w_name: str
    sweep: str
    grid: list[float]
    base: list[float]
    curves: list[list[float]]


class HealthResponse(BaseModel):
    status: str
    version: str
