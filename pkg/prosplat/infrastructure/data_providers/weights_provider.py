"""
Projection-weight bundles.

    <stem>.json  {"dtype": "<f4", "tensors": [{"name", "shape", "offset"}, ...]}
    <stem>.bin   concatenated little-endian float32 tensors (offsets in bytes)
"""

import json
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from ...domain.entities import ProjectionWeights
from ...domain.exceptions import InvalidConfig, MissingFile

DTYPE = "<f4"


def bundle_paths(stem: Union[str, Path]) -> Tuple[Path, Path]:
    stem = Path(stem)
    return stem.with_suffix(".json"), stem.with_suffix(".bin")


def save_weights(stem: Union[str, Path], weights: ProjectionWeights) -> Tuple[Path, Path]:
    header_path, blob_path = bundle_paths(stem)
    entries, chunks, offset = [], [], 0
    for name, tensor in weights.tensors().items():
        raw = np.ascontiguousarray(tensor, dtype=DTYPE).tobytes()
        entries.append({"name": name, "shape": list(tensor.shape), "offset": offset})
        chunks.append(raw)
        offset += len(raw)
    blob_path.write_bytes(b"".join(chunks))
    with open(header_path, "w", encoding="utf-8") as f:
        json.dump({"dtype": DTYPE, "tensors": entries}, f, indent=2)
        f.write("\n")
    return header_path, blob_path


def load_weights(stem: Union[str, Path]) -> ProjectionWeights:
    header_path, blob_path = bundle_paths(stem)
    missing = [p for p in (header_path, blob_path) if not p.is_file()]
    if missing:
        raise MissingFile(missing)
    with open(header_path, encoding="utf-8") as f:
        header = json.load(f)
    if header.get("dtype") != DTYPE:
        raise InvalidConfig("unsupported weight dtype", dtype=header.get("dtype"))
    blob = blob_path.read_bytes()
    tensors: Dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape))
        end = entry["offset"] + count * 4
        if end > len(blob):
            raise InvalidConfig("weight bundle truncated", tensor=entry["name"])
        arr = np.frombuffer(blob, dtype=DTYPE, count=count, offset=entry["offset"])
        tensors[entry["name"]] = arr.astype(np.float64).reshape(shape)
    try:
        return ProjectionWeights.from_tensors(tensors)
    except KeyError as exc:
        raise InvalidConfig("weight bundle is missing a tensor", tensor=str(exc)) from None
