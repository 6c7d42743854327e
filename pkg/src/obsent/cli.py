"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
Configuration errors are reported as a JSON object on stderr so callers
can parse them.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .runner import ConfigError, ExperimentConfig, config_from_mapping, make_config, run, validate


def _int_list(text):
    return [int(x) for x in text.split(",") if x]


def _float_list(text):
    return [float(x) for x in text.split(",") if x]


def _mid_count(text):
    try:
        return int(text)
    except ValueError:
        return text  # "all" or "L/<k>"


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--preset", choices=("fig1", "fig3", "fig4", "fig5", "custom"), default=None)
    p.add_argument("--config", metavar="FILE", default=None, help="JSON config file")
    p.add_argument("--L", type=_int_list, metavar="N[,N...]", default=None)
    p.add_argument("--delta", type=_float_list, metavar="X[,X...]", default=None)
    p.add_argument("--m", type=_int_list, metavar="N[,N...]", default=None)
    p.add_argument("--basis", choices=("real", "momentum", "both"), default=None)
    p.add_argument("--bc", choices=("open", "periodic"), default=None)
    p.add_argument("--n-phi", dest="n_phi", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mid-count", dest="mid_count", type=_mid_count, default=None,
                   help="states per realization: integer, 'all', or 'L/<k>'")
    p.add_argument("--selector", choices=("mid", "ground"), default=None)
    p.add_argument("--t-min", dest="t_min", type=float, default=None)
    p.add_argument("--t-max", dest="t_max", type=float, default=None)
    p.add_argument("--t-points", dest="t_points", type=int, default=None)
    p.add_argument("--times", type=_float_list, metavar="T[,T...]", default=None)
    p.add_argument("--fit-lo", dest="fit_lo", type=float, default=None)
    p.add_argument("--fit-hi", dest="fit_hi", type=float, default=None)
    p.add_argument("--initial-site", dest="initial_site", type=int, default=None)
    p.add_argument("--momentum-order", dest="momentum_order",
                   choices=("index", "kinetic"), default=None)
    p.add_argument("--jobs", type=int, default=None,
                   help="parallel workers (default: OBSENT_JOBS or 1)")
    p.add_argument("--out", default=None, metavar="DIR")


def _config_from_args(args) -> ExperimentConfig:
    mapping = {}
    if args.config:
        with open(args.config) as fh:
            mapping.update(json.load(fh))
    overrides = {
        key: getattr(args, key)
        for key in ("L", "delta", "m", "basis", "bc", "n_phi", "seed", "mid_count",
                    "selector", "t_min", "t_max", "t_points", "times", "initial_site",
                    "momentum_order", "jobs", "out")
        if getattr(args, key, None) is not None
    }
    if args.fit_lo is not None or args.fit_hi is not None:
        base = mapping.get("fit_window", (3.0, 30.0))
        overrides["fit_window"] = (
            args.fit_lo if args.fit_lo is not None else base[0],
            args.fit_hi if args.fit_hi is not None else base[1],
        )
    mapping.update(overrides)
    if args.preset is not None:
        mapping["preset"] = args.preset
    if "jobs" not in mapping and os.environ.get("OBSENT_JOBS"):
        mapping["jobs"] = int(os.environ["OBSENT_JOBS"])
    return config_from_mapping(mapping)


def _fail(kind: str, payload, code: int) -> int:
    print(json.dumps({"error": kind, **payload}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="obsent",
        description="Coarse-grained observational entropy sweeps for the quasiperiodic chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute a preset or custom sweep")
    _add_run_flags(run_p)
    val_p = sub.add_parser("validate", help="check a configuration without running it")
    _add_run_flags(val_p)

    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
    except ConfigError as exc:
        return _fail("config", {"diagnostics": exc.diagnostics}, 2)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail("config", {"diagnostics": [str(exc)]}, 2)

    if args.command == "validate":
        diagnostics = validate(config)
        print(json.dumps({"valid": not diagnostics, "diagnostics": diagnostics}, indent=2))
        return 0 if not diagnostics else 2

    try:
        outputs = run(config)
    except ConfigError as exc:
        return _fail("config", {"diagnostics": exc.diagnostics}, 2)
    except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
        return _fail("numerical", {"message": str(exc)}, 3)
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
