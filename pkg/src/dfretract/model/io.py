"""Binary model files.

Layout (all integers little-endian)::

    magic        8 bytes   b"DFRMODEL"
    header_len   uint32
    header       header_len bytes of UTF-8 JSON
    payload      D, V, factors as little-endian float64, row-major;
                 complex arrays store interleaved (re, im) pairs
    checksum     8 bytes, BLAKE2b (digest_size=8) of everything above

The header carries ``schema_version``, ``dim``, ``rank``, ``dtype``
(``"float64"`` or ``"complex128"``), ``alpha``, ``Z``, ``q`` and ``basis_meta``.
Floats are written with ``repr`` precision, so a round trip is bit-exact.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct

import numpy as np

from ..exceptions import ChecksumMismatch, ModelFileError, SchemaMismatch
from .space import ModelSpace

__all__ = ["save_model", "load_model", "model_digest", "SCHEMA_VERSION", "MAGIC"]

MAGIC = b"DFRMODEL"
SCHEMA_VERSION = 1
_CHECK_LEN = 8


def _payload(m: ModelSpace) -> tuple[str, bytes]:
    dtype = "complex128" if m.is_complex else "float64"
    parts = []
    for a in (m.D, m.V, m.factors):
        arr = np.ascontiguousarray(a, dtype=np.dtype(dtype).newbyteorder("<"))
        parts.append(arr.tobytes(order="C"))
    return dtype, b"".join(parts)


def _header(m: ModelSpace, dtype: str) -> bytes:
    head = {
        "schema_version": SCHEMA_VERSION,
        "dim": m.dim,
        "rank": m.rank,
        "dtype": dtype,
        "alpha": m.alpha,
        "Z": m.Z,
        "q": m.q,
        "basis_meta": m.basis_meta,
    }
    return json.dumps(head, sort_keys=True, separators=(",", ":")).encode("utf-8")


def model_digest(m: ModelSpace) -> str:
    """Hex BLAKE2b digest of header and payload (independent of file name)."""
    dtype, payload = _payload(m)
    h = hashlib.blake2b(digest_size=16)
    h.update(_header(m, dtype))
    h.update(payload)
    return h.hexdigest()


def save_model(m: ModelSpace, path) -> None:
    """Write ``m`` to ``path`` atomically."""
    dtype, payload = _payload(m)
    head = _header(m, dtype)
    body = MAGIC + struct.pack("<I", len(head)) + head + payload
    check = hashlib.blake2b(body, digest_size=_CHECK_LEN).digest()
    tmp = f"{os.fspath(path)}.tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(body + check)
        os.replace(tmp, path)
    except OSError as exc:
        raise ModelFileError(f"cannot write model file {path}: {exc}") from exc


def load_model(path) -> ModelSpace:
    """Read a model written by :func:`save_model`."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ModelFileError(f"cannot read model file {path}: {exc}") from exc
    if raw[: len(MAGIC)] != MAGIC:
        raise ModelFileError(f"{path} is not a model file")
    if len(raw) < len(MAGIC) + 4 + _CHECK_LEN:
        raise ChecksumMismatch(f"{path} is truncated")
    body, check = raw[:-_CHECK_LEN], raw[-_CHECK_LEN:]
    (hlen,) = struct.unpack("<I", raw[len(MAGIC) : len(MAGIC) + 4])
    start = len(MAGIC) + 4
    try:
        head = json.loads(raw[start : start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        head = None
    if isinstance(head, dict) and head.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"model file schema {head.get('schema_version')!r}, expected {SCHEMA_VERSION}"
        )
    if hashlib.blake2b(body, digest_size=_CHECK_LEN).digest() != check or head is None:
        raise ChecksumMismatch(f"{path}: checksum mismatch (file corrupted or truncated)")
    n, r = int(head["dim"]), int(head["rank"])
    dt = np.dtype(head["dtype"]).newbyteorder("<")
    payload = body[start + hlen :]
    sizes = [n * n, n * n, r * n * n]
    if len(payload) != sum(sizes) * dt.itemsize:
        raise ChecksumMismatch(f"{path}: payload size does not match header")
    arr = np.frombuffer(payload, dtype=dt)
    D = arr[: sizes[0]].reshape(n, n)
    V = arr[sizes[0] : sizes[0] + sizes[1]].reshape(n, n)
    L = arr[sizes[0] + sizes[1] :].reshape(r, n, n)
    native = np.dtype(head["dtype"])
    return ModelSpace(
        D=D.astype(native),
        V=V.astype(native),
        factors=L.astype(native),
        alpha=head["alpha"],
        Z=head["Z"],
        q=head["q"],
        basis_meta=head["basis_meta"],
    )
