"""Command line entry point: ``nctopo run|validate|presets``."""

from __future__ import annotations

import argparse
import json
import sys

from .runner import THREADS_ENV, ConfigError, default_threads, load_config, preset_catalogue, run, validate_config

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_COMPUTE_FAILED = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nctopo", description="Topological invariants of disordered lattice models.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory (default: config 'output' or ./nctopo_out)")
    r.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
    r.add_argument("--assert", dest="assert_mode", action="store_true",
                   help="exit non-zero unless integrality and route agreement checks pass")
    v = sub.add_parser("validate", help="validate a config without computing")
    v.add_argument("config")
    sub.add_parser("presets", help="list model presets and their parameters")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "presets":
        print(json.dumps(preset_catalogue(), indent=2, sort_keys=True))
        return EXIT_OK
    try:
        config = load_config(args.config)
        if args.command == "validate":
            validate_config(config)
            print(f"{args.config}: valid")
            return EXIT_OK
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
        record = run(config, threads=args.threads or default_threads())
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    out = args.out or config.get("output") or "nctopo_out"
    rj, rc = record.write(out)
    for agg in record.aggregates:
        print(f"L={agg['L']} I={agg['I']} {agg['route']:>5}: mean={agg['mean']:+.6f} std={agg['std']:.2e} "
              f"rounded={agg['rounded']}")
    for chk in record.checks:
        print(f"[{'PASS' if chk['passed'] else 'FAIL'}] {chk['name']}: {chk['value']:.3e} (tol {chk['tolerance']})")
    for f in record.failures:
        print(f"failed L={f['L']} seed={f['seed']}: {f['message']}", file=sys.stderr)
    print(f"wrote {rj} and {rc}")
    if record.failures:
        return EXIT_COMPUTE_FAILED
    if args.assert_mode and not record.passed:
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
