"""Network checkpoints.

Layout::

    ORDMTL-NET v1\\n
    key=value\\n ...        flat network config
    \\n                     end of config block
    <u64 count><count x f64>  per tensor, declaration order, little-endian
    CRC32=<hex>\\n          over every preceding byte
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .network import Network, NetworkConfig, init_network

MAGIC = b"ORDMTL-NET v1\n"


class CheckpointError(ValueError):
    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


def dumps_network(net: Network) -> bytes:
    parts = [MAGIC]
    for key, value in net.config.to_flat().items():
        parts.append(f"{key}={value}\n".encode("utf-8"))
    parts.append(b"\n")
    for _, _, arr in net.tensors():
        flat = np.ascontiguousarray(arr, dtype="<f8").reshape(-1)
        parts.append(struct.pack("<Q", flat.size))
        parts.append(flat.tobytes())
    body = b"".join(parts)
    return body + f"CRC32={zlib.crc32(body):08x}\n".encode("ascii")


def save_network(net: Network, path) -> None:
    Path(path).write_bytes(dumps_network(net))


def loads_network(data: bytes) -> Network:
    if not data:
        raise CheckpointError("missing header", 0)
    if not data.startswith(MAGIC):
        raise CheckpointError("missing header", 0)
    pos = len(MAGIC)
    flat = {}
    while True:
        end = data.find(b"\n", pos)
        if end < 0:
            raise CheckpointError("unterminated config block", pos)
        line = data[pos:end].decode("utf-8", errors="replace")
        if not line:
            pos = end + 1
            break
        key, sep, value = line.partition("=")
        if not sep:
            raise CheckpointError(f"malformed config line {line!r}", pos)
        flat[key] = value
        pos = end + 1
    try:
        config = NetworkConfig.from_flat(flat)
        net = init_network(config, 0)
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"invalid network config: {exc}", len(MAGIC)) from None

    for i, name, arr in list(net.tensors()):
        if pos + 8 > len(data):
            raise CheckpointError(f"truncated before tensor {i}:{name}", pos)
        (count,) = struct.unpack_from("<Q", data, pos)
        if count != arr.size:
            raise CheckpointError(f"tensor {i}:{name} has {count} values, expected {arr.size}", pos)
        pos += 8
        nbytes = 8 * count
        if pos + nbytes > len(data):
            raise CheckpointError(f"truncated inside tensor {i}:{name}", pos)
        values = np.frombuffer(data, dtype="<f8", count=count, offset=pos).reshape(arr.shape)
        arr[...] = values
        pos += nbytes

    trailer = data[pos:]
    if not trailer.startswith(b"CRC32="):
        raise CheckpointError("missing CRC32 trailer", pos)
    try:
        expected = int(trailer[6:].strip(), 16)
    except ValueError:
        raise CheckpointError("malformed CRC32 trailer", pos) from None
    actual = zlib.crc32(data[:pos])
    if actual != expected:
        raise CheckpointError(f"checksum mismatch: file says {expected:08x}, content hashes to {actual:08x}", pos)
    return net


def load_network(path) -> Network:
    return loads_network(Path(path).read_bytes())
