"""Command-line front end.

Exit codes: 0 success, 1 property or expectation violation, 2 usage or parse
error, 3 state cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import checker
from .mutants import MUTANTS
from .scenario import ScenarioError, format_scenario, parse_scenario, run_scenario
from .state import InvariantId, hash_state, to_json

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def corpus_dir() -> Path:
    return Path(str(resources.files("mhr_acl") / "corpus"))


# -- run ---------------------------------------------------------------------

def _run_file(path: Path, echo: bool = False):
    """Returns (exit_code, run_result_or_None)."""
    try:
        text = path.read_text()
    except OSError as exc:
        _err(f"{path}: {exc.strerror}")
        return EXIT_USAGE, None
    try:
        sc = parse_scenario(text)
    except ScenarioError as exc:
        _err(f"{path}:{exc.line}:{exc.col}: {exc.message}")
        return EXIT_USAGE, None
    res = run_scenario(sc)
    if echo:
        for r in res.results:
            outcome = "ok" if r.ok else f"deny ({r.error.guard}: {r.error.detail})"
            _err(f"{path}:{r.step.line}: {r.step.event} -> {outcome}")
    if res.mismatch is not None:
        r = res.mismatch
        got = "ok" if r.ok else f"deny ({r.error.guard}: {r.error.detail})"
        want = "ok" if r.step.expect else "deny"
        _err(f"{path}:{r.step.line}: expected {want}, got {got}")
        return EXIT_VIOLATION, res
    if res.violations:
        for v in res.violations:
            _err(f"{path}: final state violates {v}")
        return EXIT_VIOLATION, res
    return EXIT_OK, res


def cmd_run(args) -> int:
    path = Path(args.scenario)
    code, res = _run_file(path, echo=args.trace)
    if res is None:
        return code
    if args.dump:
        sys.stdout.write(to_json(res.final) + "\n")
    else:
        _emit({
            "scenario": path.name,
            "steps": len(res.results),
            "passed": code == EXIT_OK,
            "final_digest": f"{hash_state(res.final):016x}",
        })
    return code


def cmd_corpus(args) -> int:
    root = Path(args.dir) if args.dir else corpus_dir()
    files = sorted(root.glob("*.scenario"))
    if not files:
        _err(f"no scenario files in {root}")
        return EXIT_USAGE
    rows = []
    worst = EXIT_OK
    for f in files:
        code, _ = _run_file(f, echo=args.trace)
        rows.append({"file": f.name, "passed": code == EXIT_OK})
        worst = max(worst, code)
    _emit({"files": rows, "passed": sum(r["passed"] for r in rows),
           "failed": sum(not r["passed"] for r in rows)})
    return worst


# -- check -------------------------------------------------------------------

def cmd_check(args) -> int:
    mode = args.mode
    if mode == "exhaustive" and any(v is not None for v in (args.seed, args.traces, args.length)):
        _err("--seed/--traces/--length only apply to --mode random")
        return EXIT_USAGE
    if mode == "random" and args.depth is not None:
        _err("--depth only applies to --mode exhaustive")
        return EXIT_USAGE
    kw = dict(people=args.people, spaces=args.spaces, records=args.records,
              providers=args.providers, operators=args.operators, mode=mode,
              stop_on_violation=args.stop_on_violation, mutant=args.mutant)
    if args.depth is not None:
        kw["max_depth"] = args.depth
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.traces is not None:
        kw["trace_count"] = args.traces
    if args.length is not None:
        kw["trace_length"] = args.length
    if args.cap is not None:
        kw["cap"] = args.cap
    try:
        if args.invariants:
            kw["invariants"] = tuple(InvariantId.parse(x) for x in args.invariants.split(","))
        cfg = checker.CheckerConfig(**kw)
    except (ValueError, KeyError) as exc:
        _err(f"invalid configuration: {exc}")
        return EXIT_USAGE
    try:
        report = checker.run(cfg)
    except checker.StateCapExceeded as exc:
        _err(str(exc))
        return EXIT_CAP
    out = report.to_dict(timing=args.timing)
    if report.violations:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        files = []
        for i, cx in enumerate(report.violations, start=1):
            ids = ",".join(sorted({str(v.id) for v in cx.violated}))
            p = out_dir / f"counterexample_{i:02d}.scenario"
            p.write_text(format_scenario(
                cfg.sizes(), cx.trace.events(), [err for _, err in cx.trace.steps],
                comment=f"violates {ids}" + (f" under mutant {cfg.mutant}" if cfg.mutant else "")))
            files.append(str(p))
        out["counterexample_files"] = files
        _emit(out)
        return EXIT_VIOLATION
    _emit(out)
    return EXIT_OK


# -- entry point -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mhr-acl", description="Run, check and test the health-record access model.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="replay a scenario file")
    r.add_argument("scenario")
    r.add_argument("--dump", action="store_true", help="print the final state as canonical JSON")
    r.add_argument("--trace", action="store_true", help="echo each step's outcome on stderr")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="bounded exhaustive or random checking")
    c.add_argument("--people", type=int, default=2)
    c.add_argument("--spaces", type=int, default=2)
    c.add_argument("--records", type=int, default=2)
    c.add_argument("--providers", type=int, default=1)
    c.add_argument("--operators", type=int, default=1)
    c.add_argument("--depth", type=int)
    c.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    c.add_argument("--seed", type=int)
    c.add_argument("--traces", type=int)
    c.add_argument("--length", type=int)
    c.add_argument("--cap", type=int, help="state cap (default $MHR_ACL_CAP or 5000000)")
    c.add_argument("--invariants", help="comma-separated subset, e.g. INV-9,INV-10")
    c.add_argument("--mutant", choices=sorted(MUTANTS))
    c.add_argument("--stop-on-violation", action="store_true")
    c.add_argument("--out-dir", default="counterexamples")
    c.add_argument("--timing", action="store_true", help="include elapsed seconds in the report")
    c.set_defaults(func=cmd_check)

    k = sub.add_parser("corpus", help="run every shipped scenario")
    k.add_argument("--dir", help="scenario directory (default: bundled corpus)")
    k.add_argument("--trace", action="store_true")
    k.set_defaults(func=cmd_corpus)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
