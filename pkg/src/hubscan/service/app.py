"""HTTP front end over the scanning pipeline.

The service only reads server-local paths or request-supplied bytes; it
never fetches artifacts from the network itself.
"""

from __future__ import annotations

import base64
import binascii
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException

import hubscan
from hubscan.formats import identify_format
from hubscan.pipeline import (
    ArtifactRef,
    ScanConfig,
    aggregate_report,
    load_scan_config,
    scan_artifact,
    scan_repo,
)
from hubscan.service.models import (
    ArtifactScanRequest,
    HealthResponse,
    ScanReportModel,
    ScanRequest,
)


def create_app(config: Optional[ScanConfig] = None) -> FastAPI:
    app = FastAPI(title="hubscan", version=hubscan.__version__)
    scan_config = config if config is not None else load_scan_config()

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok",
            tool_version=hubscan.__version__,
            rule_pack_hash=scan_config.rule_pack_hash,
        )

    @app.post("/scan", response_model=ScanReportModel)
    def scan(request: ScanRequest) -> ScanReportModel:
        root = Path(request.path)
        if not root.is_dir():
            raise HTTPException(status_code=404, detail=f"not a directory: {request.path}")
        report = scan_repo(
            root, scan_config, jobs=request.jobs, deterministic=request.deterministic
        )
        return ScanReportModel(**report.to_dict())

    @app.post("/scan/artifact", response_model=ScanReportModel)
    def scan_one(request: ArtifactScanRequest) -> ScanReportModel:
        try:
            data = base64.b64decode(request.content_b64, validate=True)
        except (ValueError, binascii.Error) as exc:
            raise HTTPException(status_code=400, detail=f"invalid base64 content: {exc}")
        name = Path(request.filename).name or "artifact"
        fmt = identify_format(name, data[:512])
        ref = ArtifactRef(repo_id=name, repo_kind="Model", rel_path=name, format=fmt)
        findings = scan_artifact(ref, data, scan_config)
        report = aggregate_report(name, findings, 1, scan_config.rule_pack_hash)
        return ScanReportModel(**report.to_dict())

    return app
