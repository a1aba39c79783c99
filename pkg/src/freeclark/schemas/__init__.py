from freeclark.schemas.report_schemas import (
    Certification,
    CheckResult,
    CheckStatus,
    InstanceMetadata,
    InstanceModel,
    Report,
    Suite,
)
from freeclark.schemas.series_schemas import (
    ColligationModel,
    CommMomentModel,
    CommSeriesModel,
    EvaluationModel,
    FreeSeriesModel,
    MomentModel,
    NCPointModel,
    SeriesMode,
    decode_matrix,
    encode_matrix,
)

__all__ = [
    "Certification",
    "CheckResult",
    "CheckStatus",
    "ColligationModel",
    "CommMomentModel",
    "CommSeriesModel",
    "EvaluationModel",
    "FreeSeriesModel",
    "InstanceMetadata",
    "InstanceModel",
    "MomentModel",
    "NCPointModel",
    "Report",
    "SeriesMode",
    "Suite",
    "decode_matrix",
    "encode_matrix",
]
