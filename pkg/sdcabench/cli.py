import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from sdcabench.core.config import settings
from sdcabench.core.errors import ContractError, LibsvmParseError, MisuseError, SdcaBenchError
from sdcabench.core.logging import configure_logging
from sdcabench.crud.dataset import save_libsvm
from sdcabench.schemas.experiment import ExperimentConfig
from sdcabench.schemas.problem import SynthSpec
from sdcabench.services import datagen, experiment, plotting, presets

logger = logging.getLogger(__name__)

USAGE_ERRORS = (ValidationError, ContractError, MisuseError, LibsvmParseError, json.JSONDecodeError)


def _experiment_config(args) -> ExperimentConfig:
    if bool(args.config) == bool(args.preset):
        raise ContractError("give exactly one of --config or --preset")
    if args.preset:
        cfg = presets.get_preset(args.preset, dataset_path=args.dataset, epochs=args.epochs)
    else:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if args.epochs is not None:
            raw["epochs"] = args.epochs
        cfg = ExperimentConfig.model_validate(raw)
    if args.seed is not None:
        cfg = cfg.model_copy(update={"seeds": [args.seed]})
    return cfg


def cmd_run(args) -> int:
    if args.rerun:
        manifest = experiment.rerun_from_manifest(args.rerun, args.out)
    else:
        manifest = experiment.run_experiment(_experiment_config(args), args.out)
    out = Path(args.out or manifest.config.output_dir or settings.SDCA_OUTPUT_DIR)
    for run in manifest.runs:
        print(f"{run.solver}\tseed={run.seed}\t{run.status}\tepochs={run.epochs_run:g}\tgap={run.final_gap}")
    print(out / "manifest.json")
    return 0


def cmd_tune(args) -> int:
    cfg = _experiment_config(args)
    print(f"{experiment.tune_rate(cfg, args.solver):.17g}")
    return 0


def cmd_plot(args) -> int:
    sources: List[Path] = [Path(p) for p in args.csv]
    if args.run_dir:
        sources.extend(sorted(Path(args.run_dir).glob("*_seed*.csv")))
    out = args.out or "convergence.svg"
    print(plotting.plot_svg(sources, out, title=args.title, column=args.column))
    return 0


def cmd_gen(args) -> int:
    if bool(args.config) == bool(args.preset):
        raise ContractError("give exactly one of --config or --preset")
    if args.preset:
        synth = presets.get_preset(args.preset).problem.synth
    else:
        synth = SynthSpec.model_validate_json(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        synth = synth.model_copy(update={"seed": args.seed})
    d, w_star = datagen.generate(synth)
    if args.out:
        save_libsvm(d, args.out)
    print(json.dumps({**d.summary(), "w_star_nnz": int((w_star != 0).sum())}, indent=2))
    return 0


def cmd_presets(args) -> int:
    for name in presets.list_presets():
        marker = " (needs --dataset)" if presets.needs_dataset(name) else ""
        print(f"{name}{marker}")
    return 0


def cmd_schema(args) -> int:
    print(json.dumps(ExperimentConfig.model_json_schema(), indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("sdcabench.main:app", host=args.host, port=args.port, reload=args.reload,
                log_level=args.log_level.lower())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdcabench", description="Dual-free SDCA benchmark harness")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="Logging level")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_flags(p):
        p.add_argument("--config", help="ExperimentConfig JSON file")
        p.add_argument("--preset", help="Named preset (see `presets`)")
        p.add_argument("--dataset", help="LIBSVM file for real-data presets")
        p.add_argument("--seed", type=int, help="Run this single seed")
        p.add_argument("--epochs", type=int, help="Override the epoch budget")

    run = sub.add_parser("run", help="Run an experiment and write traces")
    experiment_flags(run)
    run.add_argument("--out", help="Output directory")
    run.add_argument("--rerun", help="Re-run the experiment recorded in this manifest")
    run.set_defaults(func=cmd_run)

    tune = sub.add_parser("tune", help="Pick a learning rate from the exponential grid")
    experiment_flags(tune)
    tune.add_argument("--solver", required=True)
    tune.set_defaults(func=cmd_tune)

    plot = sub.add_parser("plot", help="Render trace CSVs to SVG")
    plot.add_argument("csv", nargs="*", help="Trace CSV files")
    plot.add_argument("--run-dir", help="Plot every trace in this run directory")
    plot.add_argument("--out", help="SVG path")
    plot.add_argument("--title")
    plot.add_argument("--column", default="gap", choices=["gap", "objective", "A", "B", "C"])
    plot.set_defaults(func=cmd_plot)

    gen = sub.add_parser("gen", help="Generate a synthetic dataset")
    gen.add_argument("--config", help="SynthSpec JSON file")
    gen.add_argument("--preset", help="Take the synthetic spec of this preset")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", help="LIBSVM output path (.gz compresses)")
    gen.set_defaults(func=cmd_gen)

    listing = sub.add_parser("presets", help="List preset names")
    listing.set_defaults(func=cmd_presets)

    schema = sub.add_parser("schema", help="Print the experiment config JSON schema")
    schema.set_defaults(func=cmd_schema)

    serve = sub.add_parser("serve", help="Serve the HTTP API")
    serve.add_argument("--host", default="127.0.0.1", help="Host to bind to")
    serve.add_argument("--port", default=8000, type=int, help="Port to bind to")
    serve.add_argument("--reload", action="store_true", help="Enable auto-reload")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SdcaBenchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
