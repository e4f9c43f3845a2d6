"""
Artifact repository — persists command outputs (JSON reports, TSV tables,
images) under one output directory.

Outputs carry no wall-clock timestamps so identical runs produce
byte-identical files.
"""

import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ...domain.enums import ImageFormat
from ..data_providers.image_provider import write_gray_png, write_image


def dumps_report(data) -> str:
    """Canonical JSON text: indent 2, sorted keys, inf written as Infinity."""
    return json.dumps(data, indent=2, sort_keys=True, default=_default) + "\n"


def _default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return value.as_posix()
    return str(value)


def format_tsv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


class ArtifactRepository:
    """Save reports, tables and images for one command run."""

    def __init__(self, output_dir: str = "output"):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def path(self, *parts: str) -> Path:
        target = self.output_dir.joinpath(*parts)
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def save_json(self, name: str, data) -> Path:
        target = self.path(name)
        target.write_text(dumps_report(data), encoding="utf-8")
        return target

    def save_tsv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        target = self.path(name)
        target.write_text(format_tsv(header, rows), encoding="utf-8")
        return target

    def save_image(self, name: str, rgb: np.ndarray, fmt: ImageFormat = ImageFormat.PNG) -> Path:
        return write_image(self.path(f"{name}.{fmt.value}"), rgb, fmt)

    def save_gray(self, name: str, values: np.ndarray) -> Path:
        return write_gray_png(self.path(f"{name}.png"), values)

    def save_array(self, name: str, values: np.ndarray) -> Path:
        """Raw float64 array (.npy) for downstream numeric checks."""
        target = self.path(f"{name}.npy")
        np.save(target, np.asarray(values, dtype=np.float64))
        return target


def view_image_stem(index: int) -> str:
    return f"view_{index:03d}"


def fused_image_stem(index: int) -> str:
    return f"fused_{index:03d}"


def find_view_image(directory, index: int) -> Path:
    """Image of view ``index`` in ``directory``.

    Rendered views are preferred over fused outputs, PNG over PPM.
    """
    directory = Path(directory)
    for stem in (view_image_stem(index), fused_image_stem(index)):
        for fmt in (ImageFormat.PNG, ImageFormat.PPM):
            candidate = directory / f"{stem}.{fmt.value}"
            if candidate.is_file():
                return candidate
    return directory / f"{view_image_stem(index)}.{ImageFormat.PNG.value}"
