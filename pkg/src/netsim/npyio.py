"""Reading and writing of activation matrices as NPY v1.0 files.

Only the subset needed for activation dumps is supported: version 1.0,
little-endian float32/float64 payloads, C order, 2-D shape. Files written
here are readable by ``numpy.load`` and vice versa.
"""

import ast
import struct

import numpy as np

from .errors import DataError, FormatError, ShapeError

MAGIC = b"\x93NUMPY"
_VERSION = b"\x01\x00"
_DESCR_TO_DTYPE = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8")}


def validate_matrix(values: np.ndarray) -> np.ndarray:
    """Check the ActivationMatrix invariants: 2-D, rows >= 2, cols >= 1, finite."""
    if values.ndim != 2:
        raise ShapeError(f"activation matrix must be 2-D, got shape {values.shape}")
    rows, cols = values.shape
    if rows < 2:
        raise DataError(f"activation matrix needs at least 2 rows, got {rows}")
    if cols < 1:
        raise DataError("activation matrix needs at least 1 column")
    if not np.isfinite(values).all():
        raise DataError("activation matrix contains non-finite values")
    return values


def read_array(path) -> np.ndarray:
    """Read a 2-D float matrix from an NPY v1.0 file, widened to float64.

    Raises FormatError for malformed magic/header, ShapeError for non-2-D
    payloads, DataError for non-finite values or too few rows/columns.
    """
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < 10 or buf[:6] != MAGIC:
        raise FormatError(f"{path}: not an NPY file (bad magic)")
    if buf[6:8] != _VERSION:
        raise FormatError(f"{path}: unsupported NPY version {buf[6]}.{buf[7]}")
    (header_len,) = struct.unpack("<H", buf[8:10])
    header_end = 10 + header_len
    if len(buf) < header_end:
        raise FormatError(f"{path}: truncated header")
    try:
        header = ast.literal_eval(buf[10:header_end].decode("latin1"))
    except (ValueError, SyntaxError) as exc:
        raise FormatError(f"{path}: unparseable header") from exc
    if not isinstance(header, dict) or {"descr", "fortran_order", "shape"} - set(header):
        raise FormatError(f"{path}: header missing required keys")
    descr = header["descr"]
    if descr not in _DESCR_TO_DTYPE:
        raise FormatError(f"{path}: unsupported descr {descr!r} (need '<f4' or '<f8')")
    if header["fortran_order"]:
        raise FormatError(f"{path}: fortran_order payloads are not supported")
    shape = header["shape"]
    if not (isinstance(shape, tuple) and all(isinstance(d, int) for d in shape)):
        raise FormatError(f"{path}: malformed shape {shape!r}")
    if len(shape) != 2:
        raise ShapeError(f"{path}: expected a 2-D array, header says shape {shape}")
    dtype = _DESCR_TO_DTYPE[descr]
    expected = dtype.itemsize * shape[0] * shape[1]
    payload = buf[header_end:]
    if len(payload) != expected:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype=dtype).reshape(shape).astype(np.float64)
    return validate_matrix(values)


def write_array(values: np.ndarray, path, precision: str = "f64") -> None:
    """Write a 2-D float matrix as NPY v1.0. f64 round-trips bit-exactly."""
    if precision not in ("f32", "f64"):
        raise ValueError(f"precision must be 'f32' or 'f64', got {precision!r}")
    values = validate_matrix(np.asarray(values, dtype=np.float64))
    dtype = np.dtype("<f4") if precision == "f32" else np.dtype("<f8")
    payload = np.ascontiguousarray(values.astype(dtype))
    header = "{'descr': '%s', 'fortran_order': False, 'shape': (%d, %d), }" % (
        dtype.str, values.shape[0], values.shape[1])
    # pad with spaces so the full preamble is a multiple of 64 bytes, numpy-style
    unpadded = len(MAGIC) + 2 + 2 + len(header) + 1
    header = header + " " * (-unpadded % 64) + "\n"
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_VERSION)
        fh.write(struct.pack("<H", len(header)))
        fh.write(header.encode("latin1"))
        fh.write(payload.tobytes())
