"""Command-line front end.

Each command loads one JSON scenario config, runs it, and writes three
artifacts into the output directory: the sweep table (CSV), a summary
with trends and fits (JSON), and a manifest holding the fully resolved
config plus the package version.  Nothing in the artifacts depends on
wall-clock time, so reruns of the same config are byte-identical.

Exit codes: 0 all trends hold, 2 bad config, 3 numerical failure,
4 a trend assertion failed, 64 unknown command.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .errors import ConfigError, NumericalError
from .experiments import ScenarioResult, SweepConfig, run_scenario

# each command admits a fixed set of scenarios; `instability` covers the
# three perturbation families
COMMANDS = {
    "simulate": ("simulate",),
    "wkb": ("wkb_fidelity",),
    "cascade": ("cascade_orders",),
    "instability": ("theorem_strong", "caslim", "cor_weak"),
    "linear": ("linear",),
    "inflate": ("norm_inflation",),
    "flowmap": ("flow_scaling",),
    "validate-config": None,
}

USAGE = """\
usage: wkblab <command> --config <path> [--out <dir>] [--threads <n>] [--seed <int>]
commands:
  simulate         plain evolution sweep with snapshot observables
  wkb              geometric-optics fidelity sweep (reconstruction, corrector)
  cascade          small-time expansion residual orders
  instability      nearby-data divergence sweeps
  linear           potential-perturbation sweep of the linear flow
  inflate          Sobolev-norm inflation under concentration scaling
  flowmap          scaling identities of the cubic flow
  validate-config  parse and check a config, run nothing
"""


def _load_config(path: str) -> SweepConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return SweepConfig.from_dict(raw)


def _write_outputs(result: ScenarioResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    result.write_csv(os.path.join(out_dir, f"{result.scenario}.csv"))
    result.write_summary(os.path.join(out_dir, "summary.json"))
    manifest = {"config": result.config, "version": __version__}
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(USAGE, end="")
        return 0
    command, rest = argv[0], argv[1:]
    if command not in COMMANDS:
        sys.stderr.write(f"unknown command {command!r}\n{USAGE}")
        return 64

    parser = argparse.ArgumentParser(prog=f"wkblab {command}", add_help=True)
    parser.add_argument("--config", required=True, help="path to a JSON scenario config")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--threads", type=int, default=None, help="sweep workers")
    parser.add_argument("--seed", type=int, default=None, help="noise-profile seed")
    try:
        args = parser.parse_args(rest)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, which matches the config-error code
        return int(exc.code or 0)

    try:
        cfg = _load_config(args.config)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError(f"--threads must be >= 1, got {args.threads}")
            cfg.threads = args.threads
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out_dir = args.out

        allowed = COMMANDS[command]
        if allowed is not None and cfg.scenario not in allowed:
            raise ConfigError(
                f"config declares scenario {cfg.scenario!r}, but"
                f" `{command}` runs one of {list(allowed)}"
            )
        if command == "validate-config":
            print(f"ok: {cfg.scenario} config is valid")
            return 0

        result = run_scenario(cfg)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3

    if cfg.out_dir is not None:
        _write_outputs(result, cfg.out_dir)

    for name, ok in sorted(result.trends.items()):
        print(f"{'PASS' if ok else 'FAIL'}  {result.scenario}.{name}")
    if not result.passed:
        sys.stderr.write("trend assertions failed\n")
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
