"""Binary containers for features, logits, and labels.

All three pack kinds share one on-disk layout so a single reader serves
three validators:

    offset  size  field
    0       4     magic: b"FLTS" (features), b"FLTG" (logits), b"FLTL" (labels)
    4       4     format version, u32 little-endian, currently 1
    8       8     n_rows, u64 little-endian
    16      8     dim (columns), u64 little-endian
    24      1     dtype tag, u8, 0 = real32
    25      -     payload, little-endian float32, row-major

The writer is byte-stable: writing the same matrix twice produces identical
files. A CSV fallback (header row ``f0,...,f{m-1}``) is accepted on load for
hand-authored fixtures under 10k rows and is converted to the in-memory
representation; writing always emits the binary form.

Loaded packs are immutable (arrays are marked read-only) and safe to share
across threads.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadMagic, ClassTooSmall, IoFailure, NonFinite, SizeMismatch

MAGIC_FEATURES = b"FLTS"
MAGIC_LOGITS = b"FLTG"
MAGIC_LABELS = b"FLTL"

_FORMAT_VERSION = 1
_DTYPE_REAL32 = 0
_HEADER = struct.Struct("<4sIQQB")
_CSV_ROW_LIMIT = 10_000


def _check_finite(values: np.ndarray, context: str) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise NonFinite(f"{context}: non-finite value at row {row}, col {col}")


@dataclass(frozen=True)
class FeaturePack:
    """Dense n_rows x dim matrix of real32 embedding coordinates.

    Rows are samples. ``dim >= 2`` is required on disk; in-memory packs admit
    ``dim == 1`` so the synthetic laboratory can hold scalar draws.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=np.float32)
        if vals.ndim != 2:
            raise SizeMismatch(f"feature pack needs a 2-D matrix, got ndim={vals.ndim}")
        if vals.shape[0] < 1 or vals.shape[1] < 1:
            raise SizeMismatch(f"feature pack needs n_rows >= 1 and dim >= 1, got {vals.shape}")
        _check_finite(vals, "feature pack")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LogitPack:
    """Raw classifier outputs, one row per sample, one column per class."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=np.float32)
        if vals.ndim != 2 or vals.shape[0] < 1:
            raise SizeMismatch(f"logit pack needs a non-empty 2-D matrix, got shape {vals.shape}")
        if vals.shape[1] < 2:
            raise SizeMismatch(f"logit pack needs at least 2 classes, got {vals.shape[1]}")
        _check_finite(vals, "logit pack")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_classes(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelPack:
    """Integer class ids in [0, K).

    Every class id up to the maximum must occur at least twice: downstream
    covariance estimation needs two samples per class, and a gap in the id
    range would silently drop a class mean.
    """

    labels: np.ndarray
    n_classes: int = field(init=False)

    def __post_init__(self) -> None:
        raw = np.asarray(self.labels)
        if raw.ndim == 2 and raw.shape[1] == 1:
            raw = raw[:, 0]
        if raw.ndim != 1 or raw.shape[0] < 1:
            raise SizeMismatch(f"label pack needs a non-empty column, got shape {raw.shape}")
        _check_finite(np.asarray(raw, dtype=np.float64).reshape(-1, 1), "label pack")
        as_int = np.asarray(raw, dtype=np.int64)
        if not np.array_equal(np.asarray(raw, dtype=np.float64), as_int):
            bad = np.nonzero(np.asarray(raw, dtype=np.float64) != as_int)[0][0]
            raise SizeMismatch(f"label pack: non-integral class id at row {bad}")
        if as_int.min() < 0:
            bad = np.nonzero(as_int < 0)[0][0]
            raise SizeMismatch(f"label pack: negative class id at row {bad}")
        n_classes = int(as_int.max()) + 1
        counts = np.bincount(as_int, minlength=n_classes)
        thin = np.nonzero(counts < 2)[0]
        if thin.size:
            raise ClassTooSmall(
                f"label pack: class {thin[0]} has {counts[thin[0]]} samples, need >= 2"
            )
        as_int.flags.writeable = False
        object.__setattr__(self, "labels", as_int)
        object.__setattr__(self, "n_classes", n_classes)

    @property
    def n_rows(self) -> int:
        return self.labels.shape[0]


# -- shared reader/writer --------------------------------------------------

def _encode(magic: bytes, matrix: np.ndarray) -> bytes:
    n_rows, dim = matrix.shape
    header = _HEADER.pack(magic, _FORMAT_VERSION, n_rows, dim, _DTYPE_REAL32)
    payload = np.ascontiguousarray(matrix, dtype="<f4").tobytes()
    return header + payload


def _parse_csv(path: Path, data: bytes) -> np.ndarray:
    text = data.decode("utf-8")
    reader = io.StringIO(text)
    header = reader.readline().strip()
    cols = header.split(",")
    if not cols or cols[0].strip() != "f0":
        raise BadMagic(f"{path}: expected magic {MAGIC_FEATURES!r}/{MAGIC_LOGITS!r}/{MAGIC_LABELS!r} or a CSV header 'f0,...', found {data[:4]!r} at offset 0")
    expected = [f"f{i}" for i in range(len(cols))]
    if [c.strip() for c in cols] != expected:
        raise BadMagic(f"{path}: malformed CSV header {header!r}")
    try:
        matrix = np.loadtxt(reader, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise SizeMismatch(f"{path}: ragged or non-numeric CSV payload ({exc})") from exc
    if matrix.size and matrix.shape[1] != len(cols):
        raise SizeMismatch(f"{path}: CSV header declares {len(cols)} columns, rows hold {matrix.shape[1]}")
    if matrix.shape[0] >= _CSV_ROW_LIMIT:
        raise SizeMismatch(f"{path}: CSV fallback is limited to packs under {_CSV_ROW_LIMIT} rows, got {matrix.shape[0]}")
    return np.asarray(matrix, dtype=np.float32)


def _read_matrix(path: str | Path, magic: bytes) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if len(data) >= 1 and not data[:4] == magic:
        if data[:4] in (MAGIC_FEATURES, MAGIC_LOGITS, MAGIC_LABELS):
            raise BadMagic(f"{path}: expected magic {magic!r}, found {data[:4]!r} at offset 0")
        # not one of ours: try the CSV fallback before giving up
        try:
            return _parse_csv(path, data)
        except UnicodeDecodeError:
            raise BadMagic(f"{path}: expected magic {magic!r}, found {data[:4]!r} at offset 0") from None

    if len(data) < _HEADER.size:
        raise SizeMismatch(f"{path}: truncated header, {len(data)} bytes < {_HEADER.size}")
    found_magic, version, n_rows, dim, dtype_tag = _HEADER.unpack_from(data, 0)
    if found_magic != magic:
        raise BadMagic(f"{path}: expected magic {magic!r}, found {found_magic!r} at offset 0")
    if version != _FORMAT_VERSION:
        raise SizeMismatch(f"{path}: unsupported format version {version} at offset 4")
    if dtype_tag != _DTYPE_REAL32:
        raise SizeMismatch(f"{path}: unsupported dtype tag {dtype_tag} at offset 24")
    expected = n_rows * dim * 4
    actual = len(data) - _HEADER.size
    if expected != actual:
        raise SizeMismatch(
            f"{path}: header declares {n_rows}x{dim} ({expected} payload bytes) "
            f"but payload holds {actual} bytes after offset {_HEADER.size}"
        )
    if n_rows < 1 or dim < 1:
        raise SizeMismatch(f"{path}: header declares empty matrix {n_rows}x{dim}")
    flat = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    return flat.reshape(n_rows, dim)


def _write_bytes(path: str | Path, blob: bytes) -> None:
    try:
        Path(path).write_bytes(blob)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# -- public API ------------------------------------------------------------

def load_feature_pack(path: str | Path) -> FeaturePack:
    """Read a feature pack, validating header, size, and finiteness."""
    matrix = _read_matrix(path, MAGIC_FEATURES)
    if matrix.shape[1] < 2:
        raise SizeMismatch(f"{path}: feature packs require dim >= 2, got {matrix.shape[1]}")
    try:
        return FeaturePack(matrix)
    except NonFinite as exc:
        raise NonFinite(f"{path}: {exc}") from None


def write_feature_pack(pack: FeaturePack, path: str | Path) -> None:
    """Write ``pack`` so that :func:`load_feature_pack` reads it back bit-exactly."""
    if pack.dim < 2:
        raise SizeMismatch(f"feature packs require dim >= 2 on disk, got {pack.dim}")
    _check_finite(pack.values, "feature pack")
    _write_bytes(path, _encode(MAGIC_FEATURES, pack.values))


def load_logit_pack(path: str | Path) -> LogitPack:
    matrix = _read_matrix(path, MAGIC_LOGITS)
    try:
        return LogitPack(matrix)
    except (NonFinite, SizeMismatch) as exc:
        raise type(exc)(f"{path}: {exc}") from None


def write_logit_pack(pack: LogitPack, path: str | Path) -> None:
    _check_finite(pack.values, "logit pack")
    _write_bytes(path, _encode(MAGIC_LOGITS, pack.values))


def load_label_pack(path: str | Path) -> LabelPack:
    matrix = _read_matrix(path, MAGIC_LABELS)
    if matrix.shape[1] != 1:
        raise SizeMismatch(f"{path}: label packs hold one column, got {matrix.shape[1]}")
    try:
        return LabelPack(matrix)
    except (NonFinite, SizeMismatch, ClassTooSmall) as exc:
        raise type(exc)(f"{path}: {exc}") from None


def write_label_pack(pack: LabelPack, path: str | Path) -> None:
    column = np.asarray(pack.labels, dtype=np.float32).reshape(-1, 1)
    _write_bytes(path, _encode(MAGIC_LABELS, column))


def peek_pack(path: str | Path) -> dict:
    """Header-only inspection: kind, rows, columns. Reads CSV fully if needed."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            head = fh.read(_HEADER.size)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    kinds = {MAGIC_FEATURES: "features", MAGIC_LOGITS: "logits", MAGIC_LABELS: "labels"}
    if head[:4] in kinds:
        if len(head) < _HEADER.size:
            raise SizeMismatch(f"{path}: truncated header, {len(head)} bytes < {_HEADER.size}")
        magic, version, n_rows, dim, _ = _HEADER.unpack(head)
        return {"kind": kinds[magic], "version": version, "n_rows": int(n_rows), "dim": int(dim)}
    matrix = _parse_csv(path, path.read_bytes())
    return {"kind": "csv", "version": _FORMAT_VERSION, "n_rows": int(matrix.shape[0]), "dim": int(matrix.shape[1])}
