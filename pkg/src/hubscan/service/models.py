"""Request/response schemas for the scan service."""

from __future__ import annotations

from typing import List, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    tool_version: str
    rule_pack_hash: str


class ScanRequest(BaseModel):
    path: str = Field(description="Server-local repository directory to scan")
    jobs: int = Field(default=1, ge=1, le=64)
    deterministic: bool = True


class ArtifactScanRequest(BaseModel):
    filename: str = Field(description="Name used for format identification")
    content_b64: str = Field(description="Base64-encoded artifact bytes")


class FindingModel(BaseModel):
    kind: str
    severity: str
    path: str
    line: Optional[int] = None
    offset: Optional[int] = None
    api: Optional[str] = None
    rule: Optional[str] = None
    category: Optional[str] = None
    snippet: Optional[str] = None
    detail: str


class ScanReportModel(BaseModel):
    schema_version: int
    repo_id: str
    verdict: str
    behavior: str
    scanned_files: int
    findings: List[FindingModel]
    tool_version: str
    rule_pack_hash: str
    duration_ms: int
