"""Field and mask export: binary PGM/PPM images and raw float dumps.

All writers produce deterministic bytes. Grayscale mapping is linear
min-max onto 0..255 (a constant field maps to all zeros). Raw dumps are
little-endian float32, row major, no header; shape travels out of band
(the corpus manifest or a --shape flag).
"""

from pathlib import Path

import numpy as np

__all__ = [
    "to_gray",
    "write_pgm",
    "write_ppm",
    "save_field",
    "read_raw_field",
    "render_side_by_side",
]

RAW_EXTENSIONS = (".f32", ".raw")


def to_gray(field: np.ndarray, lo: float = None, hi: float = None) -> np.ndarray:
    """Linear min-max mapping to uint8. lo/hi override the data range so
    several panels can share one scale."""
    f = np.asarray(field, dtype=np.float64)
    if f.ndim != 2:
        raise ValueError(f"expected a 2D field, got shape {f.shape}")
    if not np.isfinite(f).all():
        raise ValueError("field contains non-finite values")
    lo = float(f.min()) if lo is None else float(lo)
    hi = float(f.max()) if hi is None else float(hi)
    if hi <= lo:
        return np.zeros(f.shape, dtype=np.uint8)
    scaled = (f - lo) * (255.0 / (hi - lo))
    return np.clip(np.rint(scaled), 0, 255).astype(np.uint8)


def write_pgm(path, image: np.ndarray) -> None:
    """Binary PGM (P5), max value 255; image must already be uint8."""
    img = np.ascontiguousarray(image)
    if img.dtype != np.uint8 or img.ndim != 2:
        raise ValueError("write_pgm expects a 2D uint8 image")
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(img.tobytes())


def write_ppm(path, image: np.ndarray) -> None:
    """Binary PPM (P6). Accepts HxW grayscale (replicated to RGB) or HxWx3."""
    img = np.ascontiguousarray(image)
    if img.dtype != np.uint8:
        raise ValueError("write_ppm expects a uint8 image")
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"write_ppm expects HxW or HxWx3, got {img.shape}")
    h, w = img.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(img.tobytes())


def save_field(path, field: np.ndarray) -> None:
    """Write a 2D field; the format follows the file extension.

    .pgm -> 8-bit graymap, min-max normalized; .ppm -> the same as RGB;
    .f32 / .raw -> headerless little-endian float32 dump.
    """
    path = Path(path)
    ext = path.suffix.lower()
    field = np.asarray(field)
    if ext == ".pgm":
        write_pgm(path, to_gray(field))
    elif ext == ".ppm":
        write_ppm(path, to_gray(field))
    elif ext in RAW_EXTENSIONS:
        path.write_bytes(np.ascontiguousarray(field, dtype="<f4").tobytes())
    else:
        raise ValueError(f"unsupported extension {ext!r} (use .pgm, .ppm, .f32, .raw)")


def read_raw_field(path, shape) -> np.ndarray:
    """Read back a headerless little-endian float32 dump of known shape."""
    data = np.fromfile(path, dtype="<f4")
    expected = int(np.prod(shape))
    if data.size != expected:
        raise ValueError(f"{path}: expected {expected} float32 values, found {data.size}")
    return data.reshape(shape)


def render_side_by_side(left: np.ndarray, right: np.ndarray, gutter: int = 8,
                        gutter_value: int = 127) -> np.ndarray:
    """Two fields as grayscale panels with a gutter column between.

    Panels share one min-max scale so equal inputs render identically.
    Returns a uint8 image of shape (H, 2 W + gutter).
    """
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    if left.shape != right.shape:
        raise ValueError(f"shape mismatch: {left.shape} vs {right.shape}")
    if left.ndim != 2:
        raise ValueError(f"expected 2D fields, got shape {left.shape}")
    lo = min(float(left.min()), float(right.min()))
    hi = max(float(left.max()), float(right.max()))
    h, w = left.shape
    canvas = np.full((h, 2 * w + gutter), np.uint8(gutter_value), dtype=np.uint8)
    canvas[:, :w] = to_gray(left, lo, hi)
    canvas[:, w + gutter:] = to_gray(right, lo, hi)
    return canvas
