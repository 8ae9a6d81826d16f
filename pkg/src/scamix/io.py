"""File output: portable images (PGM/PBM) and CSV with a metadata block.

CSV files start with ``# key: value`` comment lines (tool version, seed, and
the parameters of the run), then a header row, then data rows.  Floats are
written with repr so a round trip preserves them bit-for-bit.
"""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import ValidationError


def write_pgm(path: str | Path, values: np.ndarray) -> None:
    """Grayscale P5 image of an array of values in [0, 1], maxval 255."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValidationError(f"image data must be 2-D, got shape {values.shape}")
    if values.size and (not np.isfinite(values).all() or values.min() < 0 or values.max() > 1):
        raise ValidationError("image values must lie in [0, 1]")
    height, width = values.shape
    pixels = np.round(values * 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def write_pbm(path: str | Path, bits: np.ndarray) -> None:
    """Bitmap P4 image of a 0/1 array; ones render black."""
    bits = np.asarray(bits)
    if bits.ndim != 2:
        raise ValidationError(f"image data must be 2-D, got shape {bits.shape}")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValidationError("bitmap values must be 0 or 1")
    height, width = bits.shape
    packed = np.packbits(bits.astype(np.uint8), axis=1)
    with open(path, "wb") as fh:
        fh.write(f"P4\n{width} {height}\n".encode("ascii"))
        fh.write(packed.tobytes())


def _format_cell(value: object) -> str:
    # np.float64 subclasses float, so one branch covers both; going through
    # float() strips the numpy repr wrapper while keeping the exact value.
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def write_csv(
    target: str | Path | _io.TextIOBase,
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
    metadata: dict[str, object] | None = None,
) -> None:
    """CSV with a #-prefixed metadata block, a header row, then data rows."""

    def _emit(fh) -> None:
        for key, value in (metadata or {}).items():
            fh.write(f"# {key}: {value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_format_cell(cell) for cell in row])

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            _emit(fh)
    else:
        _emit(target)


def read_csv(path: str | Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Read back a write_csv file: (metadata, header, rows), all as strings."""
    metadata: dict[str, str] = {}
    header: list[str] = []
    rows: list[list[str]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        data_lines = []
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                key, sep, value = body.partition(":")
                if sep:
                    metadata[key.strip()] = value.strip()
                continue
            if line.strip():
                data_lines.append(line)
    for i, record in enumerate(csv.reader(data_lines)):
        if i == 0:
            header = record
        else:
            rows.append(record)
    return metadata, header, rows