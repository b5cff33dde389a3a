# app/api/routes/tables.py
from fastapi import APIRouter, Query
from typing import Optional

from app.services.tables import reproduce_table

router = APIRouter()


@router.get("/{table_id}")
def get_table(
    table_id: int,
    replicates: Optional[int] = Query(default=None, ge=1),
    seed: Optional[int] = Query(default=None, ge=0),
):
    """Reproduce a reference table; quantile columns need a replicate count"""
    return reproduce_table(table_id, replicates, seed)
