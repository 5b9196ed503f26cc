"""Binary container for models, measurements and cached factorizations.

Layout (all integers little-endian):

====== ======= ====================================================
offset size    field
====== ======= ====================================================
0      8       magic ``b"MMPINH1\\0"``
8      1       payload kind: 1 model, 2 measurements, 3 svd
9      1       directionality: 0 unidirectional, 1 bidirectional
10     2       reserved (zero)
12     4       T (rows / measurement count), uint32
16     4       N (scene points), uint32
20     4       K (retained singular values, 0 unless kind=3), uint32
24     16      config fingerprint, ASCII hex
40     ...     payload
====== ======= ====================================================

Complex payloads are interleaved re/im float32 pairs; the singular-value
block of an svd payload is plain float32.  Payload order: model ``B`` row
major; measurements ``y``; svd ``U`` (T x K), ``S`` (K), ``V`` (N x K).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

MAGIC = b"MMPINH1\x00"
_KINDS = {"model": 1, "measurements": 2, "svd": 3}
_KIND_NAMES = {v: k for k, v in _KINDS.items()}
_DIRS = {"unidirectional": 0, "bidirectional": 1}
_DIR_NAMES = {v: k for k, v in _DIRS.items()}
_HEADER = struct.Struct("<8sBBHIII16s")


@dataclass
class ContainerPayload:
    kind: str
    directionality: str
    fingerprint: str
    arrays: dict


def _complex_to_f32(arr: np.ndarray) -> bytes:
    flat = np.ascontiguousarray(arr, dtype=np.complex64).view(np.float32)
    return flat.astype("<f4", copy=False).tobytes()


def _f32_to_complex(buf: bytes, count: int) -> np.ndarray:
    flat = np.frombuffer(buf, dtype="<f4", count=2 * count)
    return flat.view(np.complex64).astype(np.complex128)


def write_container(path, kind: str, *, fingerprint: str, directionality: str,
                    arrays: dict) -> None:
    """Serialize one payload; see module docstring for the expected arrays."""
    if kind not in _KINDS:
        raise ParameterError(f"unknown container kind {kind!r}")
    if directionality not in _DIRS:
        raise ParameterError(f"unknown directionality {directionality!r}")
    fp = fingerprint.encode()
    if len(fp) != 16:
        raise ParameterError("fingerprint must be 16 hex characters")
    if kind == "model":
        B = arrays["B"]
        T, N = B.shape
        K = 0
        payload = _complex_to_f32(B)
    elif kind == "measurements":
        y = arrays["y"]
        T, N, K = y.size, int(arrays.get("n_points", 0)), 0
        payload = _complex_to_f32(y)
    else:
        U, S, V = arrays["U"], arrays["S"], arrays["V"]
        T, K = U.shape
        N = V.shape[0]
        payload = (_complex_to_f32(U)
                   + np.asarray(S, dtype="<f4").tobytes()
                   + _complex_to_f32(V))
    header = _HEADER.pack(MAGIC, _KINDS[kind], _DIRS[directionality], 0, T, N, K, fp)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_container(path) -> ContainerPayload:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size or raw[:8] != MAGIC:
        raise ParameterError(f"{path} is not a recognized container file")
    magic, kind_code, dir_code, _, T, N, K, fp = _HEADER.unpack_from(raw)
    body = raw[_HEADER.size:]
    kind = _KIND_NAMES.get(kind_code)
    if kind is None:
        raise ParameterError(f"unknown container kind code {kind_code}")
    if kind == "model":
        arrays = {"B": _f32_to_complex(body, T * N).reshape(T, N)}
    elif kind == "measurements":
        arrays = {"y": _f32_to_complex(body, T), "n_points": N}
    else:
        off = 0
        U = _f32_to_complex(body[off:], T * K).reshape(T, K)
        off += 8 * T * K
        S = np.frombuffer(body[off:off + 4 * K], dtype="<f4").astype(float)
        off += 4 * K
        V = _f32_to_complex(body[off:], N * K).reshape(N, K)
        arrays = {"U": U, "S": S, "V": V}
    return ContainerPayload(kind=kind, directionality=_DIR_NAMES[dir_code],
                            fingerprint=fp.decode(), arrays=arrays)


def measurements_to_csv(path, y: np.ndarray) -> None:
    """Small-case CSV form: one row per sample with re/im columns."""
    with open(path, "w", newline="") as fh:
        fh.write("sample,re,im\r\n")
        for t, v in enumerate(np.asarray(y)):
            fh.write(f"{t},{float(v.real)!r},{float(v.imag)!r}\r\n")


def model_to_csv(path, B: np.ndarray) -> None:
    """Small-case CSV form of a sensing matrix."""
    with open(path, "w", newline="") as fh:
        fh.write("row,col,re,im\r\n")
        T, N = B.shape
        for t in range(T):
            for j in range(N):
                v = B[t, j]
                fh.write(f"{t},{j},{float(v.real)!r},{float(v.imag)!r}\r\n")
