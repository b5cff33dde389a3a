# app/services/ingestion.py
"""
Event CSV reader.

Grammar: UTF-8, header exactly `subject_id,time,event,group`, then one record
per line; time is a finite non-negative decimal, event and group are 0 or 1.
Row numbers in errors count the header as row 1.
"""
import csv
import io
import logging
import math
from typing import IO, Iterator, List, Union

from pydantic import ValidationError

from app.core.exceptions import IngestionError
from app.schemas.evidence import SurvivalRecord

logger = logging.getLogger(__name__)

HEADER = ["subject_id", "time", "event", "group"]


def _parse_flag(value: str, name: str, row: int) -> int:
    if value not in ("0", "1"):
        raise IngestionError(f"{name} must be 0 or 1, got {value!r}", row=row)
    return int(value)


def _parse_time(value: str, row: int) -> float:
    try:
        time = float(value)
    except ValueError:
        raise IngestionError(f"time is not a number: {value!r}", row=row)
    if not math.isfinite(time) or time < 0:
        raise IngestionError(f"time must be finite and non-negative, got {value!r}", row=row)
    return time


def iter_records(stream: IO[str]) -> Iterator[SurvivalRecord]:
    """Parse records lazily; raises IngestionError on the first bad row"""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        return
    if [column.strip() for column in header] != HEADER:
        raise IngestionError(f"header must be {','.join(HEADER)}", row=1)

    for row_number, fields in enumerate(reader, start=2):
        if not fields or all(not f.strip() for f in fields):
            continue
        if len(fields) != len(HEADER):
            raise IngestionError(f"expected {len(HEADER)} fields, got {len(fields)}", row=row_number)
        subject_id, time, event, group = (f.strip() for f in fields)
        if not subject_id:
            raise IngestionError("empty subject_id", row=row_number)
        try:
            yield SurvivalRecord(
                subject_id=subject_id,
                time=_parse_time(time, row_number),
                event=_parse_flag(event, "event", row_number),
                group=_parse_flag(group, "group", row_number),
            )
        except ValidationError as e:
            raise IngestionError(str(e.errors()[0]["msg"]), row=row_number)


def decode_text(content: bytes) -> str:
    """UTF-8 with an optional byte order mark"""
    try:
        return content.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        raise IngestionError(f"file is not valid UTF-8 (byte {e.start})")


def read_records(source: Union[str, bytes, IO[str]]) -> List[SurvivalRecord]:
    """Read every record from text, bytes or an open text stream"""
    if isinstance(source, bytes):
        source = decode_text(source)
    if isinstance(source, str):
        source = io.StringIO(source)
    records = list(iter_records(source))
    logger.info(f"Read {len(records)} records")
    return records


def write_records(records: List[SurvivalRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HEADER)
    for r in records:
        writer.writerow([r.subject_id, repr(r.time), r.event, r.group])
    return buffer.getvalue()
