"""File formats: SCP1 binary arrays, channel CSV, key=value configs, PGM images.

SCP1 layout (little endian): magic ``b"SCP1"``, ``u32`` rank, ``rank`` x
``u32`` dims, then the ``float64`` payload in row-major order.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from chanprot.channel import Channel

MAGIC = b"SCP1"


class FormatError(ValueError):
    pass


def write_array(path, arr) -> None:
    arr = np.ascontiguousarray(arr, dtype="<f8")
    header = MAGIC + struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    Path(path).write_bytes(header + arr.tobytes(order="C"))


def read_array(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise FormatError(f"{path}: not an SCP1 file")
    (rank,) = struct.unpack_from("<I", raw, 4)
    dims = struct.unpack_from(f"<{rank}I", raw, 8)
    offset = 8 + 4 * rank
    count = int(np.prod(dims)) if rank else 1
    if len(raw) != offset + 8 * count:
        raise FormatError(f"{path}: payload size does not match dims {dims}")
    return np.frombuffer(raw, dtype="<f8", offset=offset).reshape(dims).astype(float)


def write_channel_csv(path, h: Channel) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "k", "support", "taps"])
        w.writerow([h.m, h.k, " ".join(map(str, h.support)),
                    " ".join(repr(float(t)) for t in h.taps)])


def read_channel_csv(path) -> Channel:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) != 1:
        raise FormatError(f"{path}: expected exactly one channel row")
    row = rows[0]
    support = [int(s) for s in row["support"].split()]
    taps = [float(t) for t in row["taps"].split()]
    h = Channel(int(row["m"]), support, taps)
    if h.k != int(row["k"]):
        raise FormatError(f"{path}: k does not match support length")
    return h


def read_config(path) -> dict[str, str]:
    """Flat ``key=value`` file; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def write_pgm(path, pixels) -> None:
    """8-bit binary (P5) greymap; ``pixels`` is ``rows x cols`` of 0..255."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    rows, cols = pixels.shape
    Path(path).write_bytes(f"P5\n{cols} {rows}\n255\n".encode("ascii") + pixels.tobytes())


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while not raw[pos:pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    if fields[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM")
    cols, rows, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval > 255:
        raise FormatError(f"{path}: 16-bit PGM not supported")
    data = raw[pos + 1:pos + 1 + rows * cols]
    return np.frombuffer(data, dtype=np.uint8).reshape(rows, cols).copy()
