"""
Deterministic text, CSV and JSON rendering for command and API output
"""
import csv
import io
import json
import math
from typing import Any, Dict, List, Sequence

FLOAT_DIGITS = 12


def format_float(value: float) -> str:
    """Fixed 12-significant-digit form; identical input gives identical text"""
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    if value == 0:
        return '0'
    return f'{value:.{FLOAT_DIGITS}g}'


def format_value(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, (list, tuple)):
        return ' '.join(format_value(v) for v in value)
    return str(value)


def jsonable(value: Any) -> Any:
    """Round floats to the printed precision so JSON output is reproducible"""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return format_float(value)
        return float(format_float(value))
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, 'item'):
        return jsonable(value.item())
    return str(value)


def render_text(columns: Sequence[str], rows: List[Dict[str, Any]]) -> str:
    """One `name: value` line per field for a single row, a space-aligned table otherwise"""
    if len(rows) == 1:
        width = max(len(c) for c in columns)
        return '\n'.join(f'{c.ljust(width)}  {format_value(rows[0].get(c))}' for c in columns)
    table = [list(columns)] + [[format_value(row.get(c)) for c in columns] for row in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(columns))]
    return '\n'.join(
        '  '.join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip()
        for line in table
    )


def render_csv(columns: Sequence[str], rows: List[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buffer.getvalue().rstrip('\n')


def render_json(payload: Any) -> str:
    return json.dumps(jsonable(payload), indent=2)


def render(columns: Sequence[str], rows: List[Dict[str, Any]], output_format: str) -> str:
    if output_format == 'csv':
        return render_csv(columns, rows)
    if output_format == 'json':
        payload = rows[0] if len(rows) == 1 else rows
        return render_json(payload)
    return render_text(columns, rows)
