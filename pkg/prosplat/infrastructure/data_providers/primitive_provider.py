"""Gaussian primitive files: {"primitives": [{mean, sh, rotation, scale, opacity}, ...]}."""

import json
from pathlib import Path
from typing import List, Sequence, Union

from ...domain.exceptions import InvalidPrimitive, MissingFile
from ...domain.value_objects import GaussianPrimitive


def primitive_to_dict(prim: GaussianPrimitive) -> dict:
    return {
        "mean": prim.mean.tolist(),
        "sh": prim.sh.tolist(),
        "rotation": prim.rotation.tolist(),
        "scale": prim.scale.tolist(),
        "opacity": prim.opacity,
    }


def primitive_from_dict(entry: dict, index: int = 0) -> GaussianPrimitive:
    try:
        kwargs = {"mean": entry["mean"], "sh": entry["sh"]}
    except (KeyError, TypeError):
        raise InvalidPrimitive("primitive entry needs 'mean' and 'sh'", index=index) from None
    for key in ("rotation", "scale", "opacity"):
        if key in entry:
            kwargs[key] = entry[key]
    try:
        return GaussianPrimitive(**kwargs)
    except InvalidPrimitive as exc:
        exc.details["index"] = index
        raise


def load_primitives(path: Union[str, Path]) -> List[GaussianPrimitive]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile([path])
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    entries = data.get("primitives", []) if isinstance(data, dict) else data
    return [primitive_from_dict(e, i) for i, e in enumerate(entries)]


def save_primitives(path: Union[str, Path], prims: Sequence[GaussianPrimitive]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"primitives": [primitive_to_dict(p) for p in prims]}, f, indent=2)
        f.write("\n")
    return path
