"""Command line entry point: ``skg <kind> --config <path> [--out DIR] [--seed N] [--threads N]``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ..errors import ConfigError, NumericError, ParameterError, ResourceError, SKGError, TruncationError
from .config import KINDS, parse_config
from .experiments import run
from .output import write_json

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="skg", description="Run a dressed Yukawa model experiment.")
    ap.add_argument("kind", choices=KINDS + tuple(k.replace("_", "-") for k in KINDS))
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="output directory (default: config 'out' or ./skg_out/<kind>)")
    ap.add_argument("--seed", type=int, help="overrides the config seed")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for sweeps (SKG_THREADS wins)")
    return ap


def _threads(arg: int) -> int:
    env = os.environ.get("SKG_THREADS")
    if env:
        try:
            arg = int(env)
        except ValueError:
            raise ConfigError(f"SKG_THREADS must be an integer, got {env!r}") from None
    if arg < 1:
        raise ConfigError("threads must be >= 1")
    return arg


def _fail(code: int, exc: Exception, out) -> int:
    report = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, NumericError) and exc.diagnostics:
        report["diagnostics"] = exc.diagnostics
    print(json.dumps(report, default=str), file=sys.stderr)
    if out is not None:
        try:
            write_json(Path(out) / "error.json", report)
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    kind = args.kind.replace("-", "_")
    out = args.out
    try:
        cfg = parse_config(args.config)
        update = {"kind": kind}
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must lie in [0, 2**64)")
            update["seed"] = args.seed
        cfg = cfg.model_copy(update=update)
        out = args.out or cfg.out or os.path.join("skg_out", kind)
        threads = _threads(args.threads)
        summary = run(cfg, out, threads)
    except (ConfigError, ParameterError) as exc:
        return _fail(EXIT_CONFIG, exc, out)
    except (NumericError, TruncationError, ResourceError, SKGError) as exc:
        return _fail(EXIT_NUMERIC, exc, out)
    failed = sorted(k for k, c in summary["checks"].items() if not c["passed"])
    print(json.dumps({"kind": kind, "out": str(out), "passed": summary["passed"], "failed": failed,
                      "wall_time_s": round(summary["wall_time_s"], 3)}))
    return EXIT_OK if summary["passed"] else EXIT_ACCEPTANCE


if __name__ == "__main__":
    sys.exit(main())
