"""Shared CSV helpers.

All writers in this package emit a header row, comma-separated columns, and
floats formatted with 17 significant digits so that values round-trip
bit-exactly through the files.
"""


def fmt_float(v):
    return format(float(v), ".17g")


def write_rows(path, header, rows):
    """Write pre-formatted string tuples under a header. One row per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def read_rows(path):
    """Read a CSV written by write_rows; returns (header, list of row tuples)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].split(",")
    return header, [tuple(line.split(",")) for line in lines[1:]]
