"""Command-line entry point: ``ionforge <subcommand> [--config PATH] ...``.

Exit codes: 0 success, 2 configuration error, 3 physics precondition
error, 4 numerical non-convergence.
"""

import argparse
import logging
import os
import sys

from . import report as rp
from .config import load_config
from .errors import ConfigError, IonForgeError

log = logging.getLogger("ionforge")

SUBCOMMANDS = ("trap", "chain", "gate", "optics", "cooling", "readout", "report")


def build_parser():
    parser = argparse.ArgumentParser(prog="ionforge", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="config file (default: $IONFORGE_CONFIG, else built-in defaults)")
    parser.add_argument("--format", choices=("json", "csv"), help="output format (overrides config)")
    parser.add_argument("--seed", type=int, help="random seed (overrides config)")
    parser.add_argument("--out", help="write output here instead of stdout")
    parser.add_argument("--script", help="pulse script for the gate subcommand (default: bundled CNOT)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _read_script(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read pulse script {path}: {exc.strerror}") from None


def run(args):
    path = args.config or os.environ.get("IONFORGE_CONFIG") or None
    cfg = load_config(path)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed must be >= 0", key="seed")
        cfg = cfg.with_overrides(seed=args.seed)
    fmt = args.format or cfg["format"]
    log.debug("config=%s format=%s", path, fmt)

    cmd = args.command
    if cmd == "report":
        return rp.emit(rp.run_design_report(cfg), fmt)
    if cmd == "trap":
        return rp.emit(rp.run_trap_report(cfg), fmt)
    if cmd == "chain":
        return rp.emit(rp.run_chain_report(cfg), fmt)
    if cmd == "optics":
        return rp.emit(rp.run_optics_report(cfg), fmt)
    if cmd == "cooling":
        return rp.emit(rp.run_cooling_report(cfg), fmt)
    if cmd == "readout":
        report, result = rp.run_readout(cfg)
        if fmt == "csv":
            return rp.emit_histogram_csv(result)
        return rp.emit_readout_json(report, result)
    if cmd == "gate":
        script_path = args.script or cfg["gate.script"]
        text = _read_script(script_path) if script_path else rp.bundled_script()
        return rp.emit(rp.run_gate_demo(cfg, text), fmt)
    raise AssertionError(cmd)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        payload = run(args)
    except IonForgeError as exc:
        print(f"ionforge: error: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
