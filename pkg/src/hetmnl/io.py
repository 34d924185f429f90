"""File formats: long-format CSV data, JSON configs, fit reports, exports.

The long format is CSV with a header: one row per chooser-alternative pair,
a chooser id column, a 1..J alternative index, a 0/1 chosen indicator, and
covariate columns.  Column roles come from the config, never from naming
conventions.  Configs, scenarios, grid specs, and the machine-readable fit
report are JSON; floats survive the JSON round trip bit for bit.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, DataError
from .estimate import FitOptions, FitResult
from .model import ChoiceDataset, ChoiceRow, ModelSpec, ParameterVector
from .simulate import CurveGrid, ScenarioSpec, scenario_from_dict

__all__ = [
    "ModelConfig",
    "read_config",
    "read_dataset",
    "write_dataset",
    "read_scenario",
    "read_params",
    "build_report_doc",
    "render_report_text",
    "write_report_doc",
    "write_report",
    "read_report",
    "write_predictions",
    "write_curves",
]

_MISSING_TOKENS = {"", "na", "nan", "null", "none"}

_CONFIG_KEYS = {
    "n_alternatives", "response", "chooser", "alternative",
    "z_names", "z_enabled", "s_names", "s_enabled", "w_names",
    "reference_alternative", "penalty", "fit",
}
_FIT_KEYS = {"max_iterations", "gradient_tolerance", "step_halving_max", "penalty", "start"}


@dataclass(frozen=True)
class ModelConfig:
    """Column roles plus model and fit settings, as stored in a config file.

    ``z_enabled`` / ``s_enabled`` switch whole roles off without editing the
    name lists; ``w_names`` has no switch (leave it empty for a plain MNL).
    """

    n_alternatives: int
    response: str = "chosen"
    chooser: str = "chooser_id"
    alternative: str = "alternative"
    z_names: tuple[str, ...] = ()
    z_enabled: bool = True
    s_names: tuple[str, ...] = ()
    s_enabled: bool = True
    w_names: tuple[str, ...] = ()
    reference_alternative: int = 1
    penalty: float = 0.0
    fit: FitOptions = field(default_factory=FitOptions)

    def __post_init__(self):
        object.__setattr__(self, "z_names", tuple(self.z_names))
        object.__setattr__(self, "s_names", tuple(self.s_names))
        object.__setattr__(self, "w_names", tuple(self.w_names))
        self.model_spec()  # validates roles, reference, penalty

    def model_spec(self) -> ModelSpec:
        return ModelSpec(
            n_alternatives=self.n_alternatives,
            z_names=self.z_names if self.z_enabled else (),
            s_names=self.s_names if self.s_enabled else (),
            w_names=self.w_names,
            reference_alternative=self.reference_alternative,
            penalty=self.penalty,
        )

    def fit_options(self) -> FitOptions:
        return self.fit

    @classmethod
    def from_dict(cls, d: Mapping) -> "ModelConfig":
        unknown = set(d) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        if "n_alternatives" not in d:
            raise ConfigError("config is missing required key 'n_alternatives'")
        kwargs = dict(d)
        fit_val = kwargs.pop("fit", None)
        if fit_val is None:
            options = FitOptions()
        elif isinstance(fit_val, FitOptions):
            options = fit_val
        else:
            unknown = set(fit_val) - _FIT_KEYS
            if unknown:
                raise ConfigError(f"unknown fit option(s): {sorted(unknown)}")
            options = FitOptions(**fit_val)
        return cls(fit=options, **kwargs)

    def to_dict(self) -> dict:
        start = self.fit.start
        return {
            "n_alternatives": self.n_alternatives,
            "response": self.response,
            "chooser": self.chooser,
            "alternative": self.alternative,
            "z_names": list(self.z_names),
            "z_enabled": self.z_enabled,
            "s_names": list(self.s_names),
            "s_enabled": self.s_enabled,
            "w_names": list(self.w_names),
            "reference_alternative": self.reference_alternative,
            "penalty": self.penalty,
            "fit": {
                "max_iterations": self.fit.max_iterations,
                "gradient_tolerance": self.fit.gradient_tolerance,
                "step_halving_max": self.fit.step_halving_max,
                "penalty": self.fit.penalty,
                "start": None if start is None else list(np.asarray(start, float)),
            },
        }

    def referenced_columns(self) -> tuple[str, ...]:
        spec = self.model_spec()
        seen: dict[str, None] = {}
        for name in spec.z_names + spec.s_names + spec.w_names:
            seen.setdefault(name)
        return tuple(seen)


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None


def read_config(path) -> ModelConfig:
    return ModelConfig.from_dict(_load_json(path))


def read_scenario(path) -> ScenarioSpec:
    return scenario_from_dict(_load_json(path))


def read_params(path, spec: ModelSpec) -> ParameterVector:
    """Read parameters from a fit report or a bare parameter JSON file."""
    doc = _load_json(path)
    if "estimates" in doc:
        doc = doc["estimates"]
    return ParameterVector.from_dict(doc, spec)


def read_dataset(
    path,
    config: ModelConfig,
    require_response: bool = True,
    sink: list | None = None,
) -> ChoiceDataset:
    """Parse and validate a long-format CSV file.

    Choosers with a missing value in any referenced covariate column are
    dropped (listwise deletion); the count lands in ``sink``.  Structural
    violations (bad chosen flag, bad alternative index, non-numeric cells,
    wrong row counts) raise DataError with the offending line or chooser.
    """
    covariate_cols = config.referenced_columns()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        if len(set(header)) != len(header):
            raise DataError(f"{path}: header has duplicate column names")
        col = {name: i for i, name in enumerate(header)}
        for name in (config.chooser, config.alternative):
            if name not in col:
                raise ConfigError(f"{path}: required column {name!r} is missing")
        has_response = config.response in col
        if require_response and not has_response:
            raise ConfigError(f"{path}: required column {config.response!r} is missing")
        for name in covariate_cols:
            if name not in col:
                raise ConfigError(f"{path}: covariate column {name!r} is missing")

        rows: list[ChoiceRow] = []
        incomplete: set[str] = set()
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise DataError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(record)}"
                )
            cid = record[col[config.chooser]].strip()
            if not cid:
                raise DataError(f"{path}:{lineno}: empty chooser id")
            alt_text = record[col[config.alternative]].strip()
            try:
                alternative = int(alt_text)
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: alternative index {alt_text!r} is not an integer"
                ) from None
            if not 1 <= alternative <= config.n_alternatives:
                raise DataError(
                    f"{path}:{lineno}: alternative index {alternative} outside "
                    f"1..{config.n_alternatives}"
                )
            chosen: int | None = None
            if has_response:
                flag = record[col[config.response]].strip()
                if flag not in ("0", "1"):
                    raise DataError(
                        f"{path}:{lineno}: chosen indicator must be 0 or 1, got {flag!r}"
                    )
                chosen = int(flag)
            covariates: dict[str, float] = {}
            for name in covariate_cols:
                cell = record[col[name]].strip()
                if cell.lower() in _MISSING_TOKENS:
                    incomplete.add(cid)
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: covariate {name!r} value {cell!r} "
                        "is not numeric"
                    ) from None
                if not np.isfinite(value):
                    raise DataError(
                        f"{path}:{lineno}: covariate {name!r} is not finite"
                    )
                covariates[name] = value
            rows.append(ChoiceRow(cid, alternative, chosen, covariates))

    if incomplete:
        rows = [r for r in rows if r.chooser_id not in incomplete]
        if sink is not None:
            sink.append(
                f"dropped {len(incomplete)} chooser(s) with missing values in "
                "referenced columns"
            )
    if not rows:
        raise DataError(f"{path}: no usable rows after validation")
    dataset = ChoiceDataset(tuple(sorted(rows, key=lambda r: (r.chooser_id, r.alternative))))
    dataset.validate(config.n_alternatives)
    return dataset


def write_dataset(dataset: ChoiceDataset, path, config: ModelConfig | None = None) -> None:
    """Write long-format CSV; covariate columns in sorted name order."""
    chooser = config.chooser if config else "chooser_id"
    alternative = config.alternative if config else "alternative"
    response = config.response if config else "chosen"
    names = sorted({name for row in dataset.rows for name in row.covariates})
    has_response = dataset.rows[0].chosen is not None if dataset.rows else False
    header = [chooser, alternative] + ([response] if has_response else []) + names
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in sorted(dataset.rows, key=lambda r: (r.chooser_id, r.alternative)):
            record = [row.chooser_id, row.alternative]
            if has_response:
                record.append(row.chosen)
            record += [repr(float(row.covariates[name])) for name in names]
            writer.writerow(record)


# ---------------------------------------------------------------------------
# Fit reports
# ---------------------------------------------------------------------------

def build_report_doc(
    result: FitResult,
    config: ModelConfig,
    extra_warnings: Sequence[str] = (),
) -> dict:
    """Assemble the machine-readable report document for a fit."""
    spec = config.model_spec()
    cov = result.covariance
    return {
        "schema": "hetmnl.fit-report/1",
        "model": config.to_dict(),
        "labels": list(spec.labels()),
        "estimates": {
            "free": result.params.pack().tolist(),
            **result.params.to_dict(),
        },
        "log_likelihood": result.log_likelihood,
        "neg_log_likelihood": -result.log_likelihood,
        "converged": result.converged,
        "iterations": result.iterations,
        "std_errors": None if result.std_errors is None else result.std_errors.tolist(),
        "t_values": None if result.t_values is None else result.t_values.tolist(),
        "covariance": None if cov is None else cov.tolist(),
        "warnings": list(result.warnings) + list(extra_warnings),
        "software": {"name": "hetmnl", "version": __version__},
    }


def _fmt(value: float | None) -> str:
    return "-" if value is None else format(value, ".6g")


def render_report_text(doc: dict) -> str:
    """Fixed-width table: location section, heterogeneity section, footnote.

    The displayed t column is recomputed from the displayed coef and s.e. so
    the printed rows are arithmetically self-consistent at display precision;
    the machine-readable document keeps the exact values.
    """
    model = doc["model"]
    labels = doc["labels"]
    free = doc["estimates"]["free"]
    ses = doc["std_errors"]
    j = model["n_alternatives"]
    ref = model["reference_alternative"]
    n_het = len(model["w_names"])

    def row(i: int) -> tuple[str, str, str, str]:
        coef_s = _fmt(free[i])
        if ses is None:
            return labels[i], coef_s, "-", "-"
        se_s = _fmt(ses[i])
        t_s = _fmt(float(coef_s) / float(se_s)) if float(se_s) > 0 else "-"
        return labels[i], coef_s, se_s, t_s

    rows = [row(i) for i in range(len(free))]
    name_w = max([len(r[0]) for r in rows] + [len("coefficient")]) + 2
    col_w = 12
    header = f"{'':<{name_w}}{'coef.':>{col_w}}{'s.e.':>{col_w}}{'t-value':>{col_w}}"
    lines = [
        "heterogeneous multinomial logit fit",
        "=" * len(header),
        f"alternatives: {j}    reference: {ref}    "
        f"converged: {'yes' if doc['converged'] else 'NO'} "
        f"({doc['iterations']} iteration(s))",
        f"log-likelihood: {_fmt(doc['log_likelihood'])}    "
        f"-log-likelihood: {_fmt(doc['neg_log_likelihood'])}",
        "",
        "Location Term",
        "-" * len(header),
        header,
    ]
    n_loc = len(free) - n_het
    for name, coef_s, se_s, t_s in rows[:n_loc]:
        lines.append(f"{name:<{name_w}}{coef_s:>{col_w}}{se_s:>{col_w}}{t_s:>{col_w}}")
    if n_het:
        lines += ["", "Heterogeneity Term", "-" * len(header), header]
        for name, coef_s, se_s, t_s in rows[n_loc:]:
            lines.append(f"{name:<{name_w}}{coef_s:>{col_w}}{se_s:>{col_w}}{t_s:>{col_w}}")
    lines += [
        "",
        f"note: alternative {ref} is the reference; its constant and "
        "chooser-attribute coefficients are fixed at 0.",
    ]
    if doc["warnings"]:
        lines.append("")
        lines += [f"warning: {w}" for w in doc["warnings"]]
    return "\n".join(lines) + "\n"


def write_report_doc(doc: dict, out_prefix) -> tuple[Path, Path]:
    """Write ``<out_prefix>.json`` and ``<out_prefix>.txt``; returns the paths."""
    prefix = Path(out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    json_path = prefix.with_name(prefix.name + ".json")
    txt_path = prefix.with_name(prefix.name + ".txt")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    with open(txt_path, "w", encoding="utf-8") as fh:
        fh.write(render_report_text(doc))
    return json_path, txt_path


def write_report(
    result: FitResult,
    config: ModelConfig,
    out_prefix,
    extra_warnings: Sequence[str] = (),
) -> tuple[Path, Path]:
    return write_report_doc(build_report_doc(result, config, extra_warnings), out_prefix)


def read_report(path) -> dict:
    doc = _load_json(path)
    if doc.get("schema") != "hetmnl.fit-report/1":
        raise ConfigError(f"{path}: not a fit report (unexpected schema)")
    return doc


# ---------------------------------------------------------------------------
# Prediction and curve exports
# ---------------------------------------------------------------------------

def write_predictions(
    chooser_ids: Sequence[str], probabilities: np.ndarray, path
) -> None:
    """CSV with one row per chooser: id, per-alternative probability, argmax."""
    probabilities = np.asarray(probabilities, dtype=float)
    n, j = probabilities.shape
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["chooser_id"] + [f"alt_{a}" for a in range(1, j + 1)] + ["predicted"])
        for i in range(n):
            # argmax takes the lowest index on ties
            predicted = int(np.argmax(probabilities[i])) + 1
            writer.writerow(
                [chooser_ids[i]] + [repr(float(p)) for p in probabilities[i]] + [predicted]
            )


def write_curves(
    curve: CurveGrid, out_prefix, w_name: str, sweep: str = "coefficient"
) -> tuple[Path, Path]:
    """Write ``<out_prefix>.csv`` (grid_value, alt_1..alt_J) and ``<out_prefix>.json``."""
    prefix = Path(out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path = prefix.with_name(prefix.name + ".csv")
    json_path = prefix.with_name(prefix.name + ".json")
    j = len(curve.curves)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["grid_value"] + [f"alt_{a}" for a in range(1, j + 1)])
        for k, value in enumerate(curve.grid):
            writer.writerow([repr(float(value))] + [repr(p) for p in curve.at(k)])
    doc = {
        "schema": "hetmnl.curves/1",
        "w_name": w_name,
        "sweep": sweep,
        "grid": list(curve.grid),
        "base": list(curve.base),
        "curves": [list(c) for c in curve.curves],
        "software": {"name": "hetmnl", "version": __version__},
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return csv_path, json_path
