"""Command-line entry point.

`hubscan scan` runs the pipeline locally (or, with --server, posts the
path to a running service and prints its response).  `hubscan serve`
starts the HTTP service.  Exit codes: 0 clean, 1 findings at or above
the --fail-on threshold, 2 usage error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from hubscan.pipeline import (
    ScanConfig,
    Severity,
    load_scan_config,
    report_to_json,
    report_to_text,
    scan_repo,
)

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hubscan", description="Model-hub artifact scanner")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="scan one or more repository directories")
    scan.add_argument("paths", nargs="*", type=Path, help="repository roots to scan")
    scan.add_argument("--manifest", type=Path, help="file listing repo paths, one per line")
    scan.add_argument("--rules", type=Path, help="directory of .rules files (default: bundled)")
    scan.add_argument("--taint-config", type=Path, help="taint sources/sinks config file")
    scan.add_argument("--api-table", type=Path, help="unsafe-API table (TSV)")
    scan.add_argument("--format", choices=["json", "text"], default="json")
    scan.add_argument("--jobs", type=int, default=1, help="parallel workers per repo")
    scan.add_argument(
        "--fail-on",
        choices=["info", "low", "medium", "high", "critical"],
        default="high",
        help="exit 1 when any finding reaches this severity",
    )
    scan.add_argument(
        "--deterministic",
        action="store_true",
        help="zero out durations so identical scans emit identical bytes",
    )
    scan.add_argument("--out", type=Path, help="write the report here instead of stdout")
    scan.add_argument("--server", help="base URL of a running scan service to delegate to")
    scan.add_argument(
        "--artifacts", type=Path, help="directory for extracted Lambda bytecode (.pyc) files"
    )

    serve = sub.add_parser("serve", help="run the HTTP scan service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--rules", type=Path)
    serve.add_argument("--taint-config", type=Path)
    serve.add_argument("--api-table", type=Path)
    return parser


def _collect_paths(args: argparse.Namespace) -> List[Path]:
    paths = list(args.paths)
    if args.manifest is not None:
        for line in args.manifest.read_text().splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                paths.append(Path(line))
    return paths


def _scan_remote(server: str, paths: List[Path], args: argparse.Namespace) -> int:
    import httpx

    reports = []
    for path in paths:
        response = httpx.post(
            server.rstrip("/") + "/scan",
            json={
                "path": str(path.resolve()),
                "jobs": args.jobs,
                "deterministic": args.deterministic,
            },
            timeout=300.0,
        )
        response.raise_for_status()
        reports.append(response.json())
    payload = reports[0] if len(reports) == 1 else reports
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    _emit(text, args.out)
    threshold = Severity[args.fail_on.upper()]
    severities = [
        Severity[f["severity"].upper()]
        for rep in reports
        for f in rep.get("findings", [])
    ]
    return EXIT_FINDINGS if any(s >= threshold for s in severities) else EXIT_CLEAN


def _emit(text: str, out: Optional[Path]) -> None:
    if out is not None:
        out.write_text(text)
    else:
        sys.stdout.write(text)


def _config_from_args(args: argparse.Namespace) -> ScanConfig:
    return load_scan_config(
        rules_dir=args.rules,
        taint_path=args.taint_config,
        table_path=args.api_table,
        artifacts_dir=getattr(args, "artifacts", None),
    )


def _run_scan(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    paths = _collect_paths(args)
    if not paths:
        parser.error("no paths given (positional or --manifest)")
    for path in paths:
        if not path.is_dir():
            print(f"hubscan: not a directory: {path}", file=sys.stderr)
            return EXIT_USAGE
    if args.server:
        return _scan_remote(args.server, paths, args)

    config = _config_from_args(args)
    reports = [
        scan_repo(path, config, jobs=args.jobs, deterministic=args.deterministic)
        for path in paths
    ]
    if args.format == "json":
        _emit(report_to_json(reports), args.out)
    else:
        _emit("\n".join(report_to_text(r) for r in reports), args.out)
    threshold = Severity[args.fail_on.upper()]
    exceeded = any(f.severity >= threshold for r in reports for f in r.findings)
    return EXIT_FINDINGS if exceeded else EXIT_CLEAN


def _run_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from hubscan.service import create_app

    app = create_app(_config_from_args(args))
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_CLEAN


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return int(exc.code or 0)
    try:
        if args.command == "scan":
            return _run_scan(args, parser)
        return _run_serve(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as exc:
        print(f"hubscan: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
