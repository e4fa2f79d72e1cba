"""Command-line entry point: ``contactlab list | run <name> | run-all``.

Exit codes: 0 ok, 1 check failure, 2 usage error, 3 evaluation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import registry
from .report import export_plotdata

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ERROR = 0, 1, 2, 3

# config keys accepted in --config files; flags mirror them
CONFIG_KEYS = ("samples", "seed", "step", "steps", "tol_scale", "params")


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="contactlab",
                                description="Run numerical verification scenarios for contact fibrations.")
    sub = p.add_subparsers(dest="command")

    ls = sub.add_parser("list", help="list registered scenarios")
    ls.add_argument("--anchor", help="keep rows whose claim id contains this substring")
    ls.add_argument("--format", choices=("table", "json"), default="table")

    def common(sp):
        sp.add_argument("--samples", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--step", type=float, help="integrator step size in the path parameter")
        sp.add_argument("--tol-scale", type=float, dest="tol_scale")
        sp.add_argument("--config", help="JSON file with override keys " + ", ".join(CONFIG_KEYS))
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--plotdata", help="directory for payload CSV files")

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("name")
    run.add_argument("--out", help="write the report here instead of stdout")
    common(run)

    ra = sub.add_parser("run-all", help="run every scenario")
    ra.add_argument("--out", help="directory for one report per scenario")
    common(ra)
    return p


def _overrides(args) -> dict:
    o: dict = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        bad = sorted(set(cfg) - set(CONFIG_KEYS))
        if bad:
            raise UsageError(f"invalid config key(s) {bad}; valid keys: {list(CONFIG_KEYS)}")
        o.update(cfg)
    for k in ("samples", "seed", "step", "tol_scale"):
        v = getattr(args, k, None)
        if v is not None:
            o[k] = v
    return o


def _render(rep, fmt: str) -> str:
    return rep.to_json() if fmt == "json" else rep.to_csv()


def _write(text: str, out: Optional[str]):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_one(name: str, overrides: dict):
    try:
        return registry.run_scenario(name, overrides)
    except (KeyError, ValueError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        raise UsageError(str(msg)) from None


def _status(rep) -> int:
    if rep.error is not None:
        return EXIT_ERROR
    return EXIT_OK if rep.ok else EXIT_FAIL


def _summary(rep) -> str:
    state = "ERROR" if rep.error else ("ok" if rep.ok else "FAIL")
    return f"{rep.scenario:32s} {state:5s} {len(rep.checks):3d} checks  {rep.wall_time:7.2f}s"


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "list":
            rows = registry.list_scenarios(args.anchor)
            if args.format == "json":
                print(json.dumps([dict(zip(("name", "anchor", "description"), r)) for r in rows],
                                 indent=2))
            else:
                for name, anchor, desc in rows:
                    print(f"{name:30s} {anchor:26s} {desc}")
            return EXIT_OK

        overrides = _overrides(args)
        if args.command == "run":
            rep = _run_one(args.name, overrides)
            _write(_render(rep, args.format), args.out)
            if args.plotdata:
                export_plotdata(rep, args.plotdata)
            if rep.error:
                print(f"evaluation error: {rep.error}", file=sys.stderr)
            return _status(rep)

        # run-all
        worst = EXIT_OK
        for name, _, _ in registry.list_scenarios():
            rep = _run_one(name, overrides)
            if args.out:
                _write(_render(rep, args.format), str(Path(args.out) / f"{name}.{args.format}"))
            if args.plotdata:
                export_plotdata(rep, args.plotdata)
            print(_summary(rep), flush=True)
            worst = max(worst, _status(rep))
        return worst
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PermissionError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
