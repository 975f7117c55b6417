"""CSV output with a JSON config echo on the first line.

Reals are written with 17 significant digits, which round-trips every double.
"""

import csv
import io
import json
import math


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        text = format(value, ".17g")
        # keep integral floats (and -0.0) distinguishable from integers
        return text + ".0" if text.lstrip("-").isdigit() else text
    return str(value)


def _json_default(obj):
    if hasattr(obj, "tolist"):  # numpy scalars and arrays
        return obj.tolist()
    return str(obj)


def render_csv(rows, schema, config=None) -> str:
    """Text of the CSV file; ``schema`` lists the columns in order."""
    schema = list(schema)
    for row in rows:
        extra = set(row) - set(schema)
        if extra:
            raise ValueError(f"row has columns outside the schema: {sorted(extra)}")
    buf = io.StringIO()
    buf.write("#" + json.dumps(config or {}, sort_keys=True, default=_json_default) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(schema)
    for row in rows:
        writer.writerow([_cell(row.get(col)) for col in schema])
    return buf.getvalue()


def write_csv(rows, schema, path, config=None) -> None:
    """Write to ``path``; ``"-"`` or ``None`` means standard output."""
    text = render_csv(rows, schema, config)
    if path in (None, "-"):
        import sys

        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _parse(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path):
    """Inverse of ``write_csv``: returns ``(config, schema, rows)``."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError("missing config echo line")
        config = json.loads(first[1:])
        reader = csv.reader(fh)
        schema = next(reader, [])
        rows = [dict(zip(schema, map(_parse, r))) for r in reader]
    return config, schema, rows
