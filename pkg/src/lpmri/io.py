"""File formats: raw images, PGM import and key=value experiment configs."""

from __future__ import annotations

import dataclasses
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ConfigError, LpmriError, SolverConfig, as_array

__all__ = ["FormatError", "MAGIC", "VERSION", "write_image", "read_image", "read_pgm",
           "load_image", "ExperimentConfig", "load_config"]

MAGIC = b"RIMG"
VERSION = 1
_HEADER = struct.Struct("<4sHBII")
_REAL, _COMPLEX = 0, 1


class FormatError(LpmriError, ValueError):
    """Malformed or unsupported file content."""


def write_image(path, data) -> None:
    """Write a real or complex 2-D array as a RIMG file (float32, little-endian)."""
    arr = np.asarray(as_array(data))
    if arr.ndim != 2:
        raise FormatError(f"expected a 2-D array, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        dtype = _COMPLEX
        payload = np.empty(arr.shape + (2,), dtype="<f4")
        payload[..., 0] = arr.real
        payload[..., 1] = arr.imag
    else:
        dtype = _REAL
        payload = np.asarray(arr, dtype="<f4")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, dtype, h, w))
        fh.write(np.ascontiguousarray(payload).tobytes())


def read_image(path) -> np.ndarray:
    """Read a RIMG file into a float32 or complex64 array."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: file too short for a RIMG header")
    magic, version, dtype, h, w = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dtype not in (_REAL, _COMPLEX):
        raise FormatError(f"{path}: unknown dtype code {dtype}")
    comps = 2 if dtype == _COMPLEX else 1
    expected = h * w * comps * 4
    body = raw[_HEADER.size:]
    if len(body) != expected:
        raise FormatError(f"{path}: payload has {len(body)} bytes, expected {expected}")
    vals = np.frombuffer(body, dtype="<f4")
    if dtype == _REAL:
        return vals.reshape(h, w).copy()
    pairs = vals.reshape(h, w, 2)
    out = np.empty((h, w), dtype=np.complex64)
    out.real = pairs[..., 0]
    out.imag = pairs[..., 1]
    return out


def _pgm_tokens(raw: bytes, count: int) -> tuple[list[int], int]:
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        tokens.append(raw[start:pos])
    return tokens, pos + 1  # a single whitespace byte precedes the raster


def read_pgm(path) -> np.ndarray:
    """Binary (P5) 8- or 16-bit PGM, normalized to ``[0, 1]`` by maxval."""
    raw = Path(path).read_bytes()
    tokens, pos = _pgm_tokens(raw, 4)
    if tokens[0] != b"P5":
        raise FormatError(f"{path}: only binary P5 PGM is supported")
    w, h, maxval = (int(t) for t in tokens[1:])
    if not 0 < maxval < 65536:
        raise FormatError(f"{path}: invalid maxval {maxval}")
    dt = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    need = w * h * dt.itemsize
    if len(raw) - pos < need:
        raise FormatError(f"{path}: truncated PGM raster")
    img = np.frombuffer(raw, dtype=dt, count=w * h, offset=pos).reshape(h, w)
    return img.astype(np.float64) / maxval


def load_image(path) -> np.ndarray:
    """Dispatch on content: RIMG files or PGM images."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return read_image(path)
    if head[:2] == b"P5":
        return read_pgm(path)
    raise FormatError(f"{path}: unrecognized image format")


_SOLVER_KEYS = {f.name: f for f in dataclasses.fields(SolverConfig)}


@dataclass
class ExperimentConfig:
    """Everything a CLI run needs, parsed from ``key = value`` lines.

    Solver keys carry the :class:`SolverConfig` field names. The remaining
    keys configure the mask, denoiser, phantom and Rician alternation.
    """

    solver: dict = field(default_factory=dict)
    denoiser: str = "identity"
    variant: str = "full"
    seed: int = 0
    size: int = 64
    phantom: str = "shepp-logan"
    mask_kind: str = "radial"
    mask_ratio: float = 0.2
    rician_sigma: float = 0.0
    rho1: float = 0.01
    lambda1: float = 1.0
    lambda2: float = 1.0
    outer_iters: int = 3
    intensity_scale: float = 255.0

    def solver_config(self) -> SolverConfig:
        return SolverConfig(**self.solver)

    def rician_config(self, sigma: float | None = None):
        from .rician import RicianSolverConfig

        return RicianSolverConfig(
            rho1=self.rho1, lambda1=self.lambda1, lambda2=self.lambda2,
            inner=self.solver_config(), outer_iters=self.outer_iters,
            sigma=self.rician_sigma if sigma is None else sigma,
            intensity_scale=self.intensity_scale,
        )

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> ExperimentConfig:
        cfg = cls()
        own = {f.name: f for f in dataclasses.fields(cls) if f.name != "solver"}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in _SOLVER_KEYS:
                cfg.solver[key] = _convert(value, _SOLVER_KEYS[key].type, key, source, lineno)
            elif key in own:
                setattr(cfg, key, _convert(value, own[key].type, key, source, lineno))
            else:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        cfg.solver_config()  # validate early
        return cfg


def _convert(value: str, annotation, key: str, source: str, lineno: int):
    ann = str(annotation)
    try:
        if "bool" in ann:
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(value)
            return low in ("true", "1", "yes")
        if value.lower() == "none" and "None" in ann:
            return None
        if "int" in ann:
            return int(value)
        if "float" in ann:
            return float(value)
        return value
    except ValueError:
        raise ConfigError(f"{source}:{lineno}: invalid value {value!r} for {key}") from None


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.parse(Path(path).read_text(), str(path))
