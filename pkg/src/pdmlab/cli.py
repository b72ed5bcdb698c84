"""``pdmlab <config-path> [--out DIR] [--seed INT] [--quiet]``

Exit codes: 0 every asserted check passed, 1 a check failed, 2 config
error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, parse_config
from .experiments import emit_csv, emit_json, run

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("pdmlab")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pdmlab", description="Position-dependent-mass effective Hamiltonian lab.")
    p.add_argument("config", help="experiment config file")
    p.add_argument("--out", help="output directory (overrides [output] dir)")
    p.add_argument("--seed", type=int, help="random seed for inverse iteration and spot checks")
    p.add_argument("--quiet", action="store_true", help="only report failures")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config(text)
    except (OSError, ConfigError) as err:
        log.error("config error: %s", err)
        return EXIT_CONFIG
    if args.out:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed

    try:
        report = run(cfg)
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = emit_csv(report, out / cfg.csv_file)
        json_path = emit_json(report, out / cfg.report_name)
    except Exception as err:  # noqa: BLE001 - any failure while running maps to exit code 3
        log.error("runtime error: %s: %s", type(err).__name__, err)
        return EXIT_RUNTIME

    for c in report.checks:
        status = "PASS" if c.passed else ("FAIL" if c.asserted else "info")
        line = f"[{status}] {c.name}: {c.detail}"
        if c.passed or not c.asserted:
            log.info(line)
        else:
            log.warning(line)
    log.info("wrote %s and %s", csv_path, json_path)
    if not report.passed:
        log.warning("failed checks: %s", ", ".join(report.failed_checks()))
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
