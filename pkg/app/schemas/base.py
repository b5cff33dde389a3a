# app/schemas/base.py
from pydantic import BaseModel


class FrozenModel(BaseModel):
    """Immutable domain value; infinities survive a JSON round trip"""

    class Config:
        frozen = True
        ser_json_inf_nan = "constants"
