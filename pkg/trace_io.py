"""
Trace file reader/writer.

Layout (little-endian unless noted):
    "AMTJ"             4 bytes magic
    version            uint16
    meta_length        uint32
    meta               UTF-8 JSON (TraceMeta fields, plus "key" hex when present)
    plaintexts         n_traces × uint64, big-endian
    samples            n_traces × n_samples float32, row-major
"""
import json
import logging
import struct

import numpy as np
import pandas as pd

from present_cipher import format_key, format_state, parse_key_hex
from trace_lab import TraceMeta, TraceSet

logger = logging.getLogger(__name__)

MAGIC = b"AMTJ"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sHI")


class TraceFileError(ValueError):
    """Malformed trace file"""


class BadMagicError(TraceFileError):
    pass


class VersionMismatchError(TraceFileError):
    pass


class TruncatedPayloadError(TraceFileError):
    pass


class DimensionMismatchError(TraceFileError):
    pass


class MetadataError(TraceFileError):
    """Metadata block that is not a UTF-8 JSON object with a valid key"""


def _meta_bytes(ts):
    meta = ts.meta.to_dict()
    if ts.key is not None:
        meta['key'] = format_key(ts.key)
    return json.dumps(meta, sort_keys=True).encode('utf-8')


def encode_trace_set(ts):
    meta = _meta_bytes(ts)
    return b"".join([
        HEADER.pack(MAGIC, FORMAT_VERSION, len(meta)),
        meta,
        ts.plaintexts.astype('>u8').tobytes(),
        np.ascontiguousarray(ts.samples, dtype='<f4').tobytes(),
    ])


def decode_trace_set(blob):
    if len(blob) < HEADER.size:
        raise TruncatedPayloadError(f"file shorter than the {HEADER.size}-byte header")
    magic, version, meta_length = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported format version {version} (reader supports {FORMAT_VERSION})")

    offset = HEADER.size
    if len(blob) < offset + meta_length:
        raise TruncatedPayloadError("metadata block is truncated")
    try:
        raw = json.loads(blob[offset:offset + meta_length].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise MetadataError(f"unreadable metadata: {e}") from e
    if not isinstance(raw, dict):
        raise MetadataError(f"metadata must be a JSON object, got {type(raw).__name__}")
    try:
        meta = TraceMeta.from_dict(raw)
    except (TypeError, ValueError) as e:
        raise DimensionMismatchError(f"inconsistent metadata: {e}") from e
    key = None
    if 'key' in raw:
        if not isinstance(raw['key'], str):
            raise MetadataError("key must be stored as a hex string")
        try:
            key = parse_key_hex(raw['key'])
        except ValueError as e:
            raise MetadataError(f"bad key in metadata: {e}") from e
    if meta.key_present != (key is not None):
        raise DimensionMismatchError("key_present flag disagrees with the stored key")
    offset += meta_length

    n, m = meta.n_traces, meta.n_samples
    expected = n * 8 + n * m * 4
    payload = len(blob) - offset
    if payload < expected:
        raise TruncatedPayloadError(
            f"payload holds {payload} bytes, header announces {n} × {m} traces ({expected} bytes)"
        )
    if payload > expected:
        raise DimensionMismatchError(
            f"payload holds {payload} bytes, {payload - expected} more than {n} × {m} traces"
        )
    plaintexts = np.frombuffer(blob, dtype='>u8', count=n, offset=offset).astype(np.uint64)
    offset += n * 8
    samples = np.frombuffer(blob, dtype='<f4', count=n * m, offset=offset).reshape(n, m).astype(np.float32)
    return TraceSet(meta=meta, plaintexts=plaintexts, samples=samples, key=key)


def write_trace_file(ts, path):
    with open(path, 'wb') as f:
        f.write(encode_trace_set(ts))
    logger.info("Wrote %d traces to %s", len(ts), path)


def read_trace_file(path):
    with open(path, 'rb') as f:
        blob = f.read()
    ts = decode_trace_set(blob)
    logger.info("Read %s from %s", ts.describe(), path)
    return ts


def export_csv(ts, path):
    """One row per trace: plaintext hex then samples at 9 significant digits"""
    if len(ts) == 0:
        raise ValueError("cannot export an empty trace set")
    df = pd.DataFrame(ts.samples.astype(float), columns=[f"s{i}" for i in range(ts.meta.n_samples)])
    df.insert(0, 'plaintext', [format_state(int(pt)) for pt in ts.plaintexts])
    with open(path, 'w', newline='') as f:
        f.write("# " + _meta_bytes(ts).decode('utf-8') + "\n")
        df.to_csv(f, index=False, float_format='%.9g', lineterminator='\n')
    logger.info("Exported %d traces to %s", len(ts), path)
