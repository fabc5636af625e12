"""Command line entry points: ``superatom run`` and ``superatom validate``.

Exit codes: 0 success, 2 config parse error, 3 capacity error (atom
number beyond the supported cap), 4 integration failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .algebra import DimensionError, N_ATOMS_MAX
from .config import ConfigError, blockade_line, effective_parameters, load_config
from .mesolve import IntegrationError
from .runner import run_experiment

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CAPACITY = 3
EXIT_INTEGRATION = 4


def _load(path: str):
    cfg = load_config(path)
    for n in cfg.n_atoms_list:
        if n < 1 or n > N_ATOMS_MAX:
            raise DimensionError(
                f"n_atoms = {n} outside supported range 1..{N_ATOMS_MAX}"
            )
    return cfg


def cmd_run(args) -> int:
    try:
        cfg = _load(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    try:
        manifest = run_experiment(cfg, config_echo=Path(args.config).read_text())
    except DimensionError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except IntegrationError as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    for entry in manifest["runs"]:
        print(f"{entry['name']}: {entry['file']} "
              f"(final P_r(1) = {entry['final_pr1']:.4f}, "
              f"{entry['wall_time_s']:.1f}s)")
    print(f"manifest: {Path(cfg.output_dir) / 'manifest.json'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = _load(args.config)
        eff = effective_parameters(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    print("effective parameters:")
    for key, val in eff.items():
        print(f"  {key} = {val}")
    print(blockade_line(cfg))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="superatom",
        description="Dissipative adiabatic-passage simulations of a "
                    "blockaded three-level ensemble",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute the experiment in a config file")
    p_run.add_argument("config", help="path to the flat key=value config")
    p_run.set_defaults(func=cmd_run)
    p_val = sub.add_parser("validate", help="check a config and print "
                                            "effective parameters without running")
    p_val.add_argument("config", help="path to the flat key=value config")
    p_val.set_defaults(func=cmd_validate)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
