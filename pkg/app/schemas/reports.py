# app/schemas/reports.py
from datetime import datetime
from typing import Dict, Optional

from app.schemas.base import FrozenModel


class RunManifest(FrozenModel):
    command: str
    seed: Optional[int] = None
    version: str
    timestamp: datetime
    input_digests: Dict[str, str] = {}
