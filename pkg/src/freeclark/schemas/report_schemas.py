"""
Instance and report schemas for the command-line surface.
"""

from __future__ import annotations

from enum import StrEnum, auto
from typing import Any

from pydantic import BaseModel, Field, model_validator

from freeclark.schemas.series_schemas import CommSeriesModel, FreeSeriesModel, SeriesMode

# ============================================================================
# Enums
# ============================================================================


class CheckStatus(StrEnum):
    PASS = auto()
    FAIL = auto()


class Certification(StrEnum):
    """Which norm bound certified the series as contractive."""

    L1 = auto()
    COMPRESSED = auto()
    NONE = auto()


class Suite(StrEnum):
    ALL = auto()
    HERGLOTZ = auto()
    GNS = auto()
    CLARK = auto()
    LIFT = auto()
    REALIZE = auto()


# ============================================================================
# Instances
# ============================================================================


class InstanceMetadata(BaseModel):
    seed: int | None = None
    d: int = Field(ge=1, le=9)
    m: int = Field(ge=1)
    deg: int = Field(ge=0)
    rho: float | None = Field(default=None, gt=0, lt=1)
    certification: Certification = Certification.NONE
    generator: str = Field(default="manual", description="Name of the routine that produced it")
    extension: str | None = Field(
        default=None, description="For free lifts: 'tight' or 'random:<seed>'"
    )


class InstanceModel(BaseModel):
    """A free or commutative Schur series together with provenance metadata."""

    mode: SeriesMode
    free: FreeSeriesModel | None = None
    comm: CommSeriesModel | None = None
    lift_of: CommSeriesModel | None = Field(
        default=None, description="Commutative series this free instance claims to lift"
    )
    metadata: InstanceMetadata

    @model_validator(mode="after")
    def validate_payload(self) -> InstanceModel:
        if self.mode == SeriesMode.FREE and self.free is None:
            raise ValueError("Free instance requires a 'free' series payload")
        if self.mode == SeriesMode.COMM and self.comm is None:
            raise ValueError("Commutative instance requires a 'comm' series payload")
        if self.mode == SeriesMode.COMM and self.lift_of is not None:
            raise ValueError("'lift_of' only applies to free instances")
        return self


# ============================================================================
# Reports
# ============================================================================


class CheckResult(BaseModel):
    name: str
    status: CheckStatus
    max_error: float
    tolerance: float
    safe_degree: int | None = None
    runtime_ms: float = 0.0
    detail: str | None = None


class Report(BaseModel):
    """Outcome of a verification run; checks are kept sorted by name."""

    suite: Suite
    checks: list[CheckResult] = Field(default_factory=list)
    passed: bool
    version: str
    config: dict[str, Any] = Field(default_factory=dict)
    seed: int | None = None

    @model_validator(mode="after")
    def validate_checks(self) -> Report:
        self.checks.sort(key=lambda c: c.name)
        expected = all(c.status == CheckStatus.PASS for c in self.checks)
        if self.passed != expected:
            raise ValueError("Report.passed must equal the conjunction of its checks")
        return self
