"""Command line entry point: run verification suites from a JSON config."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .characters import BudgetExceeded
from .config import ConfigError, RunConfig
from .suites import list_suites, run_suite

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_BUDGET = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ugamma", description=__doc__)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--suite", action="append", help="suite to run (repeatable); overrides the config list")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--format", choices=("json", "csv"), help="report format (default json; --list-suites prints a table unless json)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--budget", type=int)
    ap.add_argument("--list-suites", action="store_true", help="print the suite registry")
    return ap


def load_config(args) -> RunConfig:
    d = {}
    if args.config:
        try:
            with open(args.config) as fh:
                d = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError("<root>", f"invalid JSON: {e}") from None
        except OSError as e:
            raise ConfigError("--config", str(e)) from None
    if args.suite:
        d["suites"] = args.suite
    if args.seed is not None:
        d["seed"] = args.seed
    if args.budget is not None:
        d["budget"] = args.budget
    return RunConfig.from_dict(d)


def to_csv(records: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "lemma", "status", "instance", "witness"])
    for r in records:
        w.writerow([r["suite"], r["lemma"], r["status"], json.dumps(r["instance"], sort_keys=True),
                    json.dumps(r.get("witness"), sort_keys=True) if "witness" in r else ""])
    return buf.getvalue()


def run(args) -> tuple[int, str]:
    cfg = load_config(args)
    records = []
    code = EXIT_OK
    for name in cfg.suites:
        try:
            recs = run_suite(name, cfg)
        except BudgetExceeded as e:
            records.append({"suite": name, "lemma": "budget", "status": "budget-exceeded",
                            "instance": {}, "witness": {"message": str(e)}})
            code = EXIT_BUDGET
            continue
        for r in recs:
            r["suite"] = name
            records.append(r)
            if r["status"] == "fail" and code == EXIT_OK:
                code = EXIT_FAIL
    report = {"config": cfg.to_dict(), "records": records,
              "summary": {"records": len(records), "failed": sum(r["status"] != "pass" for r in records)}}
    if args.format == "csv":
        body = to_csv(records)
    else:
        body = json.dumps(report, sort_keys=True, indent=2, default=str) + "\n"
    return code, body


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list_suites:
        table = list_suites()
        if args.format == "json":
            print(json.dumps(table, indent=2))
        else:
            for s in table:
                print(f"{s['name']:<22}{s['anchor']}")
        return EXIT_OK
    try:
        code, body = run(args)
    except ConfigError as e:
        print(f"config error in field '{e.field}': {e}", file=sys.stderr)
        return EXIT_SCHEMA
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return code


if __name__ == "__main__":
    sys.exit(main())
