"""Command-line front end: check scenario files, run the bundled corpus.

Exit codes: 0 all checks consistent with the expected invariants and any
expectation blocks; 2 hypothesis failures under --strict-hypotheses, or an
unmet expectation block; 3 a theorem violation (hypotheses pass, conclusion
fails) -- always a defect; 4 schema or precondition errors.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import os
import sys
from importlib import resources
from pathlib import Path

from .exactalg.rings import Ring
from .scenario import (
    SEV_ERROR,
    Scenario,
    SchemaError,
    emit,
    parse_scenario_text,
    ring_from_flag,
    run_scenario,
)

CORPUS_ENV = "SHEAFCHECK_CORPUS_DIR"


def _check_one(path: str, strict: bool, ring_flag: str | None) -> tuple[dict, int]:
    ring = ring_from_flag(ring_flag) if ring_flag else None
    try:
        text = Path(path).read_text()
    except OSError as exc:
        return ({"scenario": path, "status": "error", "error": f"unreadable file: {exc}"}, SEV_ERROR)
    try:
        scenario = parse_scenario_text(text)
    except SchemaError as exc:
        return ({"scenario": path, "status": "error", "error": str(exc)}, SEV_ERROR)
    return run_scenario(scenario, strict_hypotheses=strict, default_ring=ring)


def _run_files(paths: list[str], fmt: str, strict: bool, jobs: int,
               ring_flag: str | None, out) -> int:
    if jobs > 1 and len(paths) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_check_one, paths,
                                    [strict] * len(paths), [ring_flag] * len(paths)))
    else:
        results = [_check_one(p, strict, ring_flag) for p in paths]
    worst = 0
    counts = {"ok": 0, "hypothesis-failure": 0, "theorem-violation": 0, "error": 0}
    for report, severity in results:
        out.write(emit(report, fmt))
        worst = max(worst, severity)
        counts[report.get("status", "error")] = counts.get(report.get("status", "error"), 0) + 1
    summary = {
        "checked": len(results),
        "ok": counts.get("ok", 0),
        "hypothesis_failures": counts.get("hypothesis-failure", 0),
        "theorem_violations": counts.get("theorem-violation", 0),
        "errors": counts.get("error", 0),
        "exit_code": worst,
    }
    out.write(emit({"summary": summary}, fmt))
    return worst


def corpus_dir(override: str | None = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get(CORPUS_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("sheafcheck") / "corpus"))


def corpus_files(override: str | None = None) -> list[str]:
    base = corpus_dir(override)
    return [str(p) for p in sorted(base.glob("*.json"))]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sheafcheck",
        description="Exact checkers for tower constancy, sheaf-section deformation, and micro-support scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="check one or more scenario files")
    p_check.add_argument("files", nargs="+")
    p_corpus = sub.add_parser("corpus", help="run every bundled scenario")
    p_corpus.add_argument("--dir", default=None,
                          help=f"corpus directory (default: bundled; env {CORPUS_ENV} overrides)")
    for p in (p_check, p_corpus):
        p.add_argument("--format", choices=("json", "markdown"), default="json")
        p.add_argument("--jobs", type=int, default=1, help="check scenarios in parallel")
        p.add_argument("--strict-hypotheses", action="store_true",
                       help="exit 2 when any hypothesis fails, even if theorem-consistent")
        p.add_argument("--ring", default=None, metavar="q|fp:<p>|z",
                       help="default ring for scenarios that do not fix one")

    args = parser.parse_args(argv)
    out = sys.stdout.buffer
    if args.command == "check":
        paths = args.files
    else:
        paths = corpus_files(args.dir)
        if not paths:
            out.write(emit({"status": "error", "error": "corpus directory has no scenarios"}))
            return SEV_ERROR
    return _run_files(paths, args.format, args.strict_hypotheses, args.jobs, args.ring, out)


if __name__ == "__main__":
    sys.exit(main())
