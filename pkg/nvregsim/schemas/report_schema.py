from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

SCHEMA_VERSION = "1.0"


class ErrorDetail(BaseModel):
    field: str
    message: str


class ErrorResponse(BaseModel):
    code: str
    message: str
    details: Optional[List[ErrorDetail]] = None


class ErrorEnvelope(BaseModel):
    success: bool = False
    error: ErrorResponse


class Provenance(BaseModel):
    """Everything needed to reproduce the numbers in a summary; no timestamps."""
    config_hash: str
    seed: Optional[int] = None
    step_density: Optional[float] = None
    frame: Optional[str] = None
    tool_version: str
    schema_version: str = SCHEMA_VERSION


class RunSummary(BaseModel):
    success: bool = True
    command: str
    provenance: Provenance
    results: Dict[str, Any] = Field(default_factory=dict)
    artifacts: List[str] = Field(default_factory=list)


class TableSpec(BaseModel):
    """A CSV table: documented columns and their rows."""
    name: str
    description: str
    columns: List[str]
    rows: List[List[Any]] = Field(default_factory=list)
