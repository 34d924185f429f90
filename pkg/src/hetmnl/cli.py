"""Command-line client for the estimation service.

The CLI only parses local files into service requests and writes service
responses back out; all numerics run behind the service API.  By default the
service layer is called in process (no server needed); ``--server URL``
posts the same requests to a running instance instead.

Output paths are prefixes: ``fit`` writes ``<out>.json`` and ``<out>.txt``,
``predict`` writes ``<out>.csv``, ``simulate`` writes ``<out>.csv`` and
``<out>.meta.json``, ``curves`` writes ``<out>.csv`` and ``<out>.json``.

Exit status: 0 success, 1 input or service error (nothing written),
2 fit did not converge (report still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .errors import ConfigError, HetmnlError, ServiceError

_THREAD_ENV_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)

log = logging.getLogger("hetmnl")


def _build_parser() -> argparse.ArgumentParser:
    # Global flags live on a parent parser shared with every subcommand, so
    # they are accepted both before and after the subcommand name.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for simulation (recorded in output metadata)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="cap numeric thread count (default: HETMNL_THREADS "
                             "env var, else available parallelism)")
    common.add_argument("--server", default=argparse.SUPPRESS,
                        help="URL of a running service; default runs in process")
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS,
                        help="more logging on stderr (-vv for debug)")
    common.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="errors only on stderr")

    parser = argparse.ArgumentParser(
        prog="hetmnl",
        parents=[common],
        description=(
            "Fit, predict, simulate, and export probability curves for "
            "multinomial logit models with chooser-specific scale heterogeneity."
        ),
    )
    parser.set_defaults(seed=None, threads=None, server=None, verbose=0, quiet=False)
    sub = parser.add_subparsers(dest="command")

    p_fit = sub.add_parser("fit", parents=[common],
                           help="fit the model to a long-format CSV")
    p_fit.add_argument("data", help="long-format CSV file")
    p_fit.add_argument("config", help="model config JSON")
    p_fit.add_argument("out", help="output prefix (.json and .txt are written)")
    p_fit.set_defaults(handler=cmd_fit)

    p_pred = sub.add_parser("predict", parents=[common], help="choice probabilities for fitted parameters")
    p_pred.add_argument("data", help="long-format CSV file (chosen column optional)")
    p_pred.add_argument("config", help="model config JSON")
    p_pred.add_argument("params", help="fit report JSON or bare parameter JSON")
    p_pred.add_argument("out", help="output prefix (.csv is written)")
    p_pred.set_defaults(handler=cmd_predict)

    p_sim = sub.add_parser("simulate", parents=[common], help="draw a dataset from a scenario")
    p_sim.add_argument("scenario", help="scenario JSON file or packaged name (e.g. figure1)")
    p_sim.add_argument("out", help="output prefix (.csv and .meta.json are written)")
    p_sim.set_defaults(handler=cmd_simulate)

    p_cur = sub.add_parser("curves", parents=[common], help="probability curves over a heterogeneity grid")
    p_cur.add_argument("config", help="model config JSON or packaged name")
    p_cur.add_argument("params", help="parameter JSON or packaged name")
    p_cur.add_argument("gridspec", help="grid spec JSON or packaged name")
    p_cur.add_argument("out", help="output prefix (.csv and .json are written)")
    p_cur.set_defaults(handler=cmd_curves)

    p_srv = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.set_defaults(handler=cmd_serve)
    return parser


def _apply_thread_limit(threads: int | None) -> None:
    # Must run before numpy is imported; handlers import the service lazily.
    resolved = threads if threads is not None else os.environ.get("HETMNL_THREADS")
    if resolved is None:
        return
    for var in _THREAD_ENV_VARS:
        os.environ[var] = str(resolved)


def _configure_logging(verbose: int, quiet: bool) -> None:
    level = logging.ERROR if quiet else (
        logging.WARNING if verbose == 0 else
        logging.INFO if verbose == 1 else logging.DEBUG
    )
    logging.basicConfig(stream=sys.stderr, level=level, format="%(message)s")


def _load_json_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None


def _load_json_arg(value: str, kind: str) -> dict:
    """A path to a JSON file, or the name of a packaged asset."""
    if os.path.exists(value):
        return _load_json_file(value)
    from . import scenarios

    if value in scenarios.available():
        return scenarios.load(value, kind)
    raise ConfigError(f"{value!r} is neither a file nor a packaged {kind} name")


def _make_client(server: str):
    import httpx

    return httpx.Client(base_url=server, timeout=600.0)


def _dispatch(args, route: str, request, response_type):
    """Run a request in process, or POST it to --server."""
    if args.server is None:
        from .service import api

        handler = {
            "/fit": api.run_fit,
            "/predict": api.run_predict,
            "/simulate": api.run_simulate,
            "/curves": api.run_curves,
        }[route]
        return handler(request)
    import httpx

    try:
        with _make_client(args.server) as client:
            response = client.post(route, json=request.model_dump(mode="json"))
    except httpx.HTTPError as exc:
        raise ServiceError(f"request to {args.server}{route} failed: {exc}") from None
    if response.status_code == 422:
        detail = response.json().get("detail", response.text)
        raise ServiceError(f"service rejected the request: {detail}")
    if response.status_code != 200:
        raise ServiceError(
            f"service returned status {response.status_code}: {response.text[:500]}"
        )
    return response_type.model_validate(response.json())


def _print_warnings(warnings) -> None:
    for message in warnings:
        print(f"warning: {message}", file=sys.stderr)


def cmd_fit(args) -> int:
    from . import io as dio
    from .service import schemas

    config_model = schemas.ConfigModel.model_validate(_load_json_arg(args.config, "config"))
    config = dio.ModelConfig.from_dict(config_model.model_dump())
    io_warnings: list[str] = []
    dataset = dio.read_dataset(args.data, config, sink=io_warnings)
    rows = [
        schemas.RowModel(chooser=r.chooser_id, alternative=r.alternative,
                         chosen=r.chosen, covariates=dict(r.covariates))
        for r in dataset.rows
    ]
    request = schemas.FitRequest(rows=rows, config=config_model)
    report = _dispatch(args, "/fit", request, schemas.FitReportModel)
    doc = report.model_dump(by_alias=True)
    doc["warnings"] = list(doc["warnings"]) + io_warnings
    json_path, txt_path = dio.write_report_doc(doc, args.out)
    _print_warnings(doc["warnings"])
    log.info("wrote %s and %s", json_path, txt_path)
    print(
        f"log-likelihood {doc['log_likelihood']:.6f}  "
        f"converged={'yes' if doc['converged'] else 'no'}  "
        f"iterations={doc['iterations']}"
    )
    return 0 if doc["converged"] else 2


def cmd_predict(args) -> int:
    from . import io as dio
    from .service import schemas

    config_model = schemas.ConfigModel.model_validate(_load_json_arg(args.config, "config"))
    config = dio.ModelConfig.from_dict(config_model.model_dump())
    io_warnings: list[str] = []
    dataset = dio.read_dataset(args.data, config, require_response=False, sink=io_warnings)
    params_doc = _load_json_arg(args.params, "params")
    if "estimates" in params_doc:
        params_doc = params_doc["estimates"]
    rows = [
        schemas.RowModel(chooser=r.chooser_id, alternative=r.alternative,
                         chosen=r.chosen, covariates=dict(r.covariates))
        for r in dataset.rows
    ]
    request = schemas.PredictRequest(
        rows=rows,
        config=config_model,
        params=schemas.ParamsModel.model_validate(params_doc),
    )
    response = _dispatch(args, "/predict", request, schemas.PredictResponse)
    out_csv = f"{args.out}.csv"
    import numpy as np

    dio.write_predictions(
        [r.chooser for r in response.rows],
        np.array([r.probabilities for r in response.rows]),
        out_csv,
    )
    _print_warnings(io_warnings)
    log.info("wrote %s", out_csv)
    print(f"predicted {len(response.rows)} chooser(s)")
    return 0


def cmd_simulate(args) -> int:
    from . import io as dio
    from .service import schemas

    doc = _load_json_arg(args.scenario, "scenario")
    if args.seed is not None:
        doc["seed"] = args.seed
    elif "seed" not in doc:
        doc["seed"] = int.from_bytes(os.urandom(8), "big") % (2**63)
        log.info("no seed given; drew %d", doc["seed"])
    scenario_model = schemas.ScenarioModel.model_validate(doc)
    request = schemas.SimulateRequest(scenario=scenario_model)
    response = _dispatch(args, "/simulate", request, schemas.SimulateResponse)
    from .model import ChoiceDataset, ChoiceRow

    dataset = ChoiceDataset(
        tuple(
            ChoiceRow(r.chooser, r.alternative, r.chosen, dict(r.covariates))
            for r in response.rows
        )
    )
    out_csv = f"{args.out}.csv"
    meta_path = f"{args.out}.meta.json"
    dio.write_dataset(dataset, out_csv)
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(response.meta.model_dump(), fh, indent=2)
        fh.write("\n")
    log.info("wrote %s and %s", out_csv, meta_path)
    print(f"simulated {response.meta.n_choosers} chooser(s) with seed {response.meta.seed}")
    return 0


def cmd_curves(args) -> int:
    from . import io as dio
    from .service import schemas
    from .simulate import CurveGrid

    config_model = schemas.ConfigModel.model_validate(_load_json_arg(args.config, "config"))
    params_doc = _load_json_arg(args.params, "params")
    if "estimates" in params_doc:
        params_doc = params_doc["estimates"]
    request = schemas.CurvesRequest(
        config=config_model,
        params=schemas.ParamsModel.model_validate(params_doc),
        gridspec=schemas.GridSpecModel.model_validate(_load_json_arg(args.gridspec, "gridspec")),
    )
    response = _dispatch(args, "/curves", request, schemas.CurvesResponse)
    curve = CurveGrid(
        grid=tuple(response.grid),
        curves=tuple(tuple(c) for c in response.curves),
        base=tuple(response.base),
    )
    csv_path, json_path = dio.write_curves(curve, args.out, response.w_name, response.sweep)
    log.info("wrote %s and %s", csv_path, json_path)
    print(f"evaluated {len(response.grid)} grid point(s) for {response.w_name!r}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    _apply_thread_limit(args.threads)
    _configure_logging(args.verbose, args.quiet)
    if not hasattr(args, "handler"):
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.handler(args)
    except HetmnlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
