"""Command-line front end.

Exit codes: 0 success, 1 invalid configuration or failed parameter
validation, 2 identity / consistency / inequality failure, 3 I/O error,
64 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import __version__, harness, ledger, params, plots, rates
from .errors import ConsistencyFailure, DivergentIdentity, InequalityViolated, MiddevError
from .estimate import CSV_HEADER, full_estimate
from .simulate import generate, write_csv

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SCIENCE = 2
EXIT_IO = 3
EXIT_USAGE = 64

EXPERIMENT_COMMANDS = {
    "concentration": (harness.Experiment.CONCENTRATION, "concentration"),
    "variance": (harness.Experiment.VARIANCE_MATCH, "variance"),
    "tailslope": (harness.Experiment.TAIL_SLOPE, "tailslope"),
    "bercu-touati": (harness.Experiment.BERCU_TOUATI, "generic"),
    "truncation": (harness.Experiment.TRUNCATION, "generic"),
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config (model, or experiment with a 'model' key)")
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory (MIDDEV_OUT overrides)")
    common.add_argument("--replicas", type=int)
    common.add_argument("--threads", type=int, default=0, help="worker threads, 0 = all cores")
    common.add_argument("--format", choices=("csv", "json"), help="default: json, or both for experiments")
    common.add_argument("--n", type=int, help="override the sample size")

    parser = _Parser(prog="middev", description="Simulate and analyse the two-stage least-squares estimators.")
    parser.add_argument("--version", action="version", version=f"middev {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("simulate", parents=[common], help="write one trajectory")
    sub.add_parser("estimate", parents=[common], help="estimates for one trajectory")
    sub.add_parser("identities", parents=[common], help="exact decomposition identities on one trajectory")
    p = sub.add_parser("validate-params", parents=[common], help="growth conditions on a_n and kappa_n")
    p.add_argument("--n-grid", type=lambda s: [int(float(v)) for v in s.split(",")],
                   default=[10**3, 10**4, 10**5, 10**6])
    for name in EXPERIMENT_COMMANDS:
        p = sub.add_parser(name, parents=[common], help=f"{name} experiment")
        p.add_argument("--no-plot", action="store_true")
    sub.add_parser("rates", parents=[common], help="limiting matrices, rates and their consistency")
    p = sub.add_parser("report", parents=[common], help="merge run manifests into a markdown summary")
    p.add_argument("manifests", nargs="*", type=Path)
    return parser


def _read_config(path: Path | None) -> dict:
    if path is None:
        raise MiddevError("--config is required for this command")
    return json.loads(Path(path).read_text())


def _model(raw: dict, args) -> params.ModelConfig:
    data = dict(raw.get("model", raw))
    if args.n is not None:
        data["n"] = args.n
    return params.ModelConfig.from_dict(data)


def _experiment(raw: dict, args, kind: harness.Experiment) -> harness.ExperimentConfig:
    data = dict(raw) if "model" in raw else {"model": raw}
    data["model"] = _model(raw, args).to_dict()
    data["experiment"] = kind.value
    if args.replicas is not None:
        data["replicas"] = args.replicas
    data.setdefault("replicas", 100)
    if args.seed or "master_seed" not in data:
        data["master_seed"] = args.seed
    return harness.ExperimentConfig.from_dict(data)


def _write(out: Path, name: str, text: str, outputs: list) -> Path:
    p = out / name
    p.write_text(text)
    outputs.append(str(p))
    return p


def _dispatch(args, out: Path, outputs: list, summary: dict) -> int:
    cmd = args.command
    if cmd == "report":
        files = args.manifests or sorted(out.glob("manifest-*.json"))
        lines = ["# middev report", ""]
        for f in files:
            m = json.loads(Path(f).read_text())
            lines += [f"## {m['command']}", "", f"- input hash: `{m['input_hash']}`",
                      f"- exit code: {m['exit_code']}", f"- outputs: {', '.join(m['outputs']) or 'none'}", ""]
            for k, v in sorted(m.get("summary", {}).items()):
                lines.append(f"- {k}: {v}")
            lines.append("")
        _write(out, "report.md", "\n".join(lines), outputs)
        summary["manifests"] = len(files)
        return EXIT_OK

    raw = _read_config(args.config)

    if cmd == "rates":
        data = raw.get("model", raw)
        model = rates.build(float(data["gamma1"]), float(data["gamma2"]), float(data.get("sigma", 1.0)))
        report = rates.consistency_check(model, strict=False)
        body = {"model": model.to_dict(), "consistency": report.to_dict()}
        _write(out, "rates.json", json.dumps(body, indent=2, sort_keys=True) + "\n", outputs)
        summary["passed"] = report.passed
        return EXIT_OK if report.passed else EXIT_SCIENCE

    if cmd in EXPERIMENT_COMMANDS:
        kind, plot_kind = EXPERIMENT_COMMANDS[cmd]
        cfg = _experiment(raw, args, kind)
        result = harness.run(cfg, threads=args.threads)
        for p in harness.write_result(result, out, args.format or "both"):
            outputs.append(str(p))
        if not args.no_plot:
            outputs.append(str(plots.emit_plot(result, plot_kind, out / f"{kind.value.lower()}.svg")))
        summary["statistics"] = len(result.statistics)
        if kind is harness.Experiment.BERCU_TOUATI:
            ok = result.extras["all_cells_passed"] and result.extras["pointwise_violations"] == 0
            summary["passed"] = ok
            return EXIT_OK if ok else EXIT_SCIENCE
        return EXIT_OK

    model = _model(raw, args)
    if cmd == "validate-params":
        report = params.validate_conditions(model, args.n_grid)
        _write(out, "conditions.json", report.to_json() + "\n", outputs)
        summary["passed"] = report.passed
        return EXIT_OK if report.passed else EXIT_INVALID

    traj = generate(model, args.seed)
    if cmd == "simulate":
        if args.format == "csv":
            write_csv(traj, out / "trajectory.csv")
            outputs.append(str(out / "trajectory.csv"))
        else:
            body = {"n": traj.n, "V": traj.V.tolist(), "eps": traj.eps.tolist(), "X": traj.X.tolist()}
            _write(out, "trajectory.json", json.dumps(body) + "\n", outputs)
        return EXIT_OK

    est = full_estimate(traj)
    if cmd == "estimate":
        if args.format == "csv":
            row = ",".join(repr(v) if isinstance(v, float) else str(v) for v in est.row(args.seed))
            _write(out, "estimates.csv", ",".join(CSV_HEADER) + "\n" + row + "\n", outputs)
        else:
            _write(out, "estimates.json", est.to_json() + "\n", outputs)
        return EXIT_OK

    # identities
    lg = ledger.build_ledger(traj, est)
    report = ledger.check_identities(traj, est, lg, strict=False)
    if args.format == "csv":
        report.to_csv(out / "identities.csv")
        outputs.append(str(out / "identities.csv"))
    else:
        body = {"tol": report.tol, "passed": report.passed,
                "records": [r.__dict__ for r in report.records]}
        _write(out, "identities.json", json.dumps(body, indent=2) + "\n", outputs)
    summary["passed"] = report.passed
    summary["max_rel_residual"] = report.max_rel_residual
    return EXIT_OK if report.passed else EXIT_SCIENCE


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(str(exc))
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE

    out = Path(os.environ.get("MIDDEV_OUT") or args.out)
    outputs: list[str] = []
    summary: dict = {}
    started = time.perf_counter()
    config_text = ""
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.config is not None:
            config_text = Path(args.config).read_text()
        code = _dispatch(args, out, outputs, summary)
    except (DivergentIdentity, ConsistencyFailure, InequalityViolated) as exc:
        sys.stderr.write(f"middev: {exc}\n")
        return EXIT_SCIENCE
    except OSError as exc:
        sys.stderr.write(f"middev: {exc}\n")
        return EXIT_IO
    except (MiddevError, ValueError, KeyError, TypeError) as exc:
        sys.stderr.write(f"middev: invalid input: {exc}\n")
        return EXIT_INVALID

    manifest = {
        "tool_version": __version__,
        "command": args.command,
        "config": json.loads(config_text) if config_text else None,
        "input_hash": hashlib.sha256(config_text.encode()).hexdigest(),
        "seed": args.seed,
        "outputs": outputs,
        "wall_clock_seconds": round(time.perf_counter() - started, 3),
        "exit_code": code,
        "summary": summary,
    }
    try:
        (out / f"manifest-{args.command}.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        sys.stderr.write(f"middev: {exc}\n")
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
