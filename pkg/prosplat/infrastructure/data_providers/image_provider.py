"""
Image I/O — 8-bit RGB PNG (Pillow) and PPM.

Images live in memory as float64 H x W x 3 arrays in [0, 1].
PNG and PPM (P3 / P6) are read through Pillow; PPM is written as ASCII P3.
"""

from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from ...domain.enums import ImageFormat
from ...domain.exceptions import MissingFile, ShapeMismatch

PathLike = Union[str, Path]


def to_uint8(rgb: np.ndarray) -> np.ndarray:
    return np.round(np.clip(np.asarray(rgb, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)


def read_image(path: PathLike) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MissingFile([path])
    with Image.open(path) as img:
        data = np.asarray(img.convert("RGB"), dtype=np.float64)
    return data / 255.0


def read_mask(path: PathLike) -> np.ndarray:
    """Binary H x W mask: pixels brighter than mid-gray are selected."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile([path])
    with Image.open(path) as img:
        return np.asarray(img.convert("L")) > 127


def write_png(path: PathLike, rgb: np.ndarray) -> Path:
    path = Path(path)
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ShapeMismatch("PNG writer expects H x W x 3", shape=list(rgb.shape))
    Image.fromarray(to_uint8(rgb)).save(path, format="PNG")
    return path


def write_gray_png(path: PathLike, values: np.ndarray) -> Path:
    """Min-max normalized grayscale PNG (constant maps render black)."""
    path = Path(path)
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    scaled = (values - lo) / (hi - lo) if hi > lo else np.zeros_like(values)
    Image.fromarray(to_uint8(scaled)).save(path, format="PNG")
    return path


def format_ppm(rgb: np.ndarray) -> str:
    """ASCII P3 text for an H x W x 3 image, one pixel row per line."""
    data = to_uint8(rgb)
    h, w = data.shape[:2]
    rows = [" ".join(str(v) for v in row.ravel()) for row in data]
    return f"P3\n{w} {h}\n255\n" + "\n".join(rows) + "\n"


def write_ppm(path: PathLike, rgb: np.ndarray) -> Path:
    path = Path(path)
    path.write_text(format_ppm(rgb), encoding="ascii")
    return path


def write_image(path: PathLike, rgb: np.ndarray, fmt: ImageFormat = ImageFormat.PNG) -> Path:
    if fmt is ImageFormat.PPM:
        return write_ppm(path, rgb)
    return write_png(path, rgb)
