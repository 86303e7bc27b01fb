from hubscan.service.app import create_app
from hubscan.service.models import (
    ArtifactScanRequest,
    FindingModel,
    HealthResponse,
    ScanReportModel,
    ScanRequest,
)

__all__ = [
    "ArtifactScanRequest",
    "FindingModel",
    "HealthResponse",
    "ScanReportModel",
    "ScanRequest",
    "create_app",
]
