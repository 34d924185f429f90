"""Regenerate the checked-in recovery dataset and its golden fit report.

Run from the repository root:  python tests/data/make_recovery.py
The golden report is a regression anchor: it is produced by the package
itself, so refresh it only when a deliberate numerical change is made.
"""

import json
from pathlib import Path

from hetmnl import (
    CovariateGenerator,
    ModelConfig,
    ModelSpec,
    ParameterVector,
    ScenarioSpec,
    build_design,
    fit,
    simulate_dataset,
    write_dataset,
)
from hetmnl.io import build_report_doc

HERE = Path(__file__).parent

SPEC = ModelSpec(3, z_names=("attraction",), s_names=("income",), w_names=("engagement",))
TRUTH = ParameterVector(
    [0.0, 0.4, -0.3],
    [0.8],
    [[0.0], [0.5], [-0.4]],
    [0.5],
    reference=1,
)
SCENARIO = ScenarioSpec(
    n_choosers=400,
    spec=SPEC,
    true_params=TRUTH,
    generators={
        "attraction": CovariateGenerator.normal(0.0, 1.0),
        "income": CovariateGenerator.normal(0.0, 1.0),
        "engagement": CovariateGenerator.normal(0.0, 1.0),
    },
    seed=20240401,
)


def main() -> None:
    config = ModelConfig(
        n_alternatives=3,
        z_names=("attraction",),
        s_names=("income",),
        w_names=("engagement",),
    )
    dataset = simulate_dataset(SCENARIO)
    write_dataset(dataset, HERE / "recovery.csv", config)
    with open(HERE / "recovery_config.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "n_alternatives": 3,
                "z_names": ["attraction"],
                "s_names": ["income"],
                "w_names": ["engagement"],
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    with open(HERE / "recovery_scenario.json", "w", encoding="utf-8") as fh:
        json.dump(SCENARIO.to_dict(), fh, indent=2)
        fh.write("\n")
    result = fit(build_design(dataset, SPEC), SPEC, config.fit_options())
    with open(HERE / "recovery_golden.json", "w", encoding="utf-8") as fh:
        json.dump(build_report_doc(result, config), fh, indent=2)
        fh.write("\n")
    print("regenerated recovery.csv, configs, and recovery_golden.json")


if __name__ == "__main__":
    main()
