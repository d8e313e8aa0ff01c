"""CSV / JSON emission of study tables, theory curves and basis dumps."""
import io
import json
import logging
import math
from typing import Any, Dict, Optional, Union

import click
import pandas as pd

from .errors import IO_EXIT_CODE
from .rates import StudyTable
from .theory import CurveTable

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
FORMATS = ("csv", "json")

Emittable = Union[StudyTable, CurveTable, pd.DataFrame]


def _num(value: Any) -> Any:
    """Round floats to 12 significant digits; NaN and inf become null."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(f"{value:.12g}")
    if hasattr(value, "item"):  # numpy scalar
        return _num(value.item())
    return value


def _records(frame: pd.DataFrame):
    return [{k: _num(v) for k, v in row.items()} for row in frame.to_dict(orient="records")]


def _study_document(table: StudyTable) -> Dict[str, Any]:
    rows = []
    for row, record in zip(table.rows, _records(table.to_frame())):
        record.update(
            lower_bound_only=row.lower_bound_only if row.reg is not None else None,
            regime_name=row.regime_name,
            strategy_observed=row.strategy_observed,
            errors_noreg=[{"n": n, "error": _num(e), "std_error": _num(se)} for n, e, se in row.noreg.errors],
            errors_reg=None if row.reg is None else
            [{"n": n, "error": _num(e), "std_error": _num(se)} for n, e, se in row.reg.errors],
            sigma=[_num(s) for s in row.sigmas],
            beta=[_num(b) for b in row.betas] or None,
        )
        rows.append(record)
    return {"kind": "study", "config": table.config.echo(), "rows": rows}


def _curve_document(curves: CurveTable) -> Dict[str, Any]:
    return {"kind": "curves", "s_a": curves.s_a, "s_r": curves.s_r, "d": curves.d,
            "rows": _records(curves.to_frame())}


def render(data: Emittable, fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown output format {fmt!r}")

    if isinstance(data, StudyTable):
        frame, document = data.to_frame(), (lambda: _study_document(data))
    elif isinstance(data, CurveTable):
        frame, document = data.to_frame(), (lambda: _curve_document(data))
    else:
        frame, document = data, (lambda: {"rows": _records(data)})

    if fmt == "json":
        return json.dumps(document(), indent=2) + "\n"
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    return buffer.getvalue()


def emit(data: Emittable, fmt: str = "csv", path: Optional[str] = None) -> int:
    """Write ``data`` to ``path`` (standard output for None or "-"); returns an exit status."""
    text = render(data, fmt)
    if path is None or path == "-":
        click.echo(text, nl=False)
        return 0
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        logger.error("cannot write %s: %s", path, exc)
        return IO_EXIT_CODE
    logger.info("wrote %s", path)
    return 0
