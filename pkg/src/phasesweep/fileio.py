"""Deterministic file formats: CSV, PGM/PPM images, key-value configs.

Every writer here produces byte-identical output for identical inputs
(floats are rendered with shortest round-trip repr, no timestamps), so
experiment reruns can be checksummed.
"""

import csv
import hashlib

import numpy as np


def _format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows) -> None:
    """CSV with a header row; floats keep full round-trip precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_value(v) for v in row])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Header and raw string rows of a CSV written by write_csv."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def write_pgm(path, image) -> None:
    """Binary (P5) grayscale image, max value 255.

    Boolean or float input in [0, 1] is scaled to 0..255; integer input
    must already be within range.
    """
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise ValueError("PGM image must be 2-D")
    data = _to_bytes(arr)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode())
        fh.write(data.tobytes())


def write_ppm(path, image) -> None:
    """Binary (P6) color image, max value 255; expects (rows, cols, 3)."""
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError("PPM image must have shape (rows, cols, 3)")
    data = _to_bytes(arr)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode())
        fh.write(data.tobytes())


def _to_bytes(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == bool:
        return (arr.astype(np.uint8)) * np.uint8(255)
    if np.issubdtype(arr.dtype, np.floating):
        return np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    if np.issubdtype(arr.dtype, np.integer):
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("integer image values must lie in 0..255")
        return arr.astype(np.uint8)
    raise ValueError(f"unsupported image dtype {arr.dtype}")


def read_pnm(path) -> np.ndarray:
    """Read back a binary PGM (P5) or PPM (P6) written by this module."""
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        dims = fh.readline().split()
        maxval = int(fh.readline())
        width, height = int(dims[0]), int(dims[1])
        if maxval != 255:
            raise ValueError("only maxval 255 is supported")
        data = np.frombuffer(fh.read(), dtype=np.uint8)
    if magic == b"P5":
        return data.reshape(height, width)
    if magic == b"P6":
        return data.reshape(height, width, 3)
    raise ValueError(f"unsupported PNM magic {magic!r}")


def parse_keyvalue(text: str) -> dict[str, str]:
    """Flat `key = value` lines; blank lines and #-comments ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def read_keyvalue_file(path) -> dict[str, str]:
    with open(path) as fh:
        return parse_keyvalue(fh.read())


def format_keyvalue(mapping: dict) -> str:
    """Canonical flat key-value rendering (sorted keys)."""
    lines = [f"{key} = {_format_value(mapping[key])}"
             for key in sorted(mapping)]
    return "\n".join(lines) + "\n"


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
