from typing import Dict, Optional

from pydantic import BaseModel

from app.schemas.graph import SizeReport


class RunManifest(BaseModel):
    command: str = "train"
    config: Dict[str, str] = {}
    inputs: Dict[str, str] = {}  # role -> path
    digests: Dict[str, str] = {}  # role -> sha256
    seed: int
    duration_seconds: float = 0.0
    size_report: Optional[SizeReport] = None


class RunListItem(BaseModel):
    id: str
    command: str
    model: Optional[str]
    output_path: Optional[str]
    seed: Optional[int]
    duration_seconds: Optional[float]
    metrics: Dict[str, float] = {}

    class Config:
        from_attributes = True
