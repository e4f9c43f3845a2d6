"""
Scene manifests — JSON description of one scene (see docs/manifest.schema.json).

    {
      "scene_id": "...", "pose_file": "poses.txt",
      "image_width": W, "image_height": H, "near": n, "far": f,
      "views": [{"image": "images/000.png", "timestamp": 0, "near": ?, "far": ?}, ...],
      "input_indices": [...], "target_indices": [...],
      "primitives": "primitives.json"            (optional)
    }

Paths are relative to the manifest's directory. Views are matched to
pose-file records by timestamp.
"""

import json
import logging
import os
from pathlib import Path
from typing import List, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ...domain.entities import SceneManifest, SceneView
from ...domain.exceptions import InvalidConfig, InvalidIndices, MissingFile
from .pose_provider import PARSE_ROTATION_TOLERANCE, read_pose_file, write_pose_file

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class ViewEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    image: str
    timestamp: int
    near: Optional[float] = Field(default=None, gt=0)
    far: Optional[float] = Field(default=None, gt=0)


class ManifestModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scene_id: str
    pose_file: str = "poses.txt"
    image_width: int = Field(gt=0)
    image_height: int = Field(gt=0)
    near: float = Field(gt=0)
    far: float = Field(gt=0)
    views: List[ViewEntry]
    input_indices: List[int]
    target_indices: List[int] = Field(default_factory=list)
    primitives: Optional[str] = None


def validate_indices(count: int, inputs: Sequence[int], targets: Sequence[int]) -> None:
    """Indices in range, no duplicates, disjoint sets, at least two inputs."""
    out_of_range = sorted({i for i in (*inputs, *targets) if not 0 <= i < count})
    if out_of_range:
        raise InvalidIndices("view indices out of range", indices=out_of_range, views=count)
    if len(set(inputs)) != len(inputs) or len(set(targets)) != len(targets):
        raise InvalidIndices("duplicate view indices",
                             input_indices=list(inputs), target_indices=list(targets))
    overlap = sorted(set(inputs) & set(targets))
    if overlap:
        raise InvalidIndices("input and target indices overlap", indices=overlap)
    if len(inputs) < 2:
        raise InvalidIndices("a scene needs at least two input views", inputs=len(inputs))


def load_scene_manifest(path: Union[str, Path],
                        tolerance: float = PARSE_ROTATION_TOLERANCE) -> SceneManifest:
    """Load and fully validate a manifest (a directory means <dir>/manifest.json)."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.is_file():
        raise MissingFile([path])
    root = path.parent

    with open(path, encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"manifest is not valid JSON: {exc.msg}",
                                path=str(path), line=exc.lineno) from None
    try:
        model = ManifestModel.model_validate(raw)
    except ValidationError as exc:
        raise InvalidConfig("manifest does not match the schema", path=str(path),
                            errors=[e["msg"] for e in exc.errors()]) from None

    referenced = [root / model.pose_file] + [root / v.image for v in model.views]
    if model.primitives:
        referenced.append(root / model.primitives)
    missing = [p for p in referenced if not p.is_file()]
    if missing:
        raise MissingFile(missing)

    validate_indices(len(model.views), model.input_indices, model.target_indices)

    header, records = read_pose_file(root / model.pose_file, tolerance)
    by_timestamp = {}
    for rec in records:
        by_timestamp.setdefault(rec.timestamp, rec)

    views: List[SceneView] = []
    for index, entry in enumerate(model.views):
        rec = by_timestamp.get(entry.timestamp)
        if rec is None:
            raise InvalidConfig("view timestamp not found in the pose file",
                                view=index, timestamp=entry.timestamp)
        camera = rec.camera_view(
            model.image_width, model.image_height,
            entry.near if entry.near is not None else model.near,
            entry.far if entry.far is not None else model.far,
        )
        views.append(SceneView(image_path=root / entry.image, pose=rec, camera=camera))

    logger.debug("Loaded scene %s: %d views (%d inputs, %d targets)", model.scene_id,
                 len(views), len(model.input_indices), len(model.target_indices))
    return SceneManifest(
        scene_id=model.scene_id,
        root=root,
        views=views,
        input_indices=tuple(model.input_indices),
        target_indices=tuple(model.target_indices),
        image_width=model.image_width,
        image_height=model.image_height,
        near=model.near,
        far=model.far,
        pose_file=model.pose_file,
        header=header,
        primitives_path=root / model.primitives if model.primitives else None,
    )


def _relative(path: Path, root: Path) -> str:
    return Path(os.path.relpath(Path(path).resolve(), root.resolve())).as_posix()


def manifest_to_dict(manifest: SceneManifest, root: Path) -> dict:
    views = []
    for view in manifest.views:
        entry = {"image": _relative(view.image_path, root), "timestamp": view.timestamp}
        if view.camera.near != manifest.near:
            entry["near"] = view.camera.near
        if view.camera.far != manifest.far:
            entry["far"] = view.camera.far
        views.append(entry)
    data = {
        "scene_id": manifest.scene_id,
        "pose_file": manifest.pose_file,
        "image_width": manifest.image_width,
        "image_height": manifest.image_height,
        "near": manifest.near,
        "far": manifest.far,
        "views": views,
        "input_indices": list(manifest.input_indices),
        "target_indices": list(manifest.target_indices),
    }
    if manifest.primitives_path is not None:
        data["primitives"] = _relative(manifest.primitives_path, root)
    return data


def save_scene_manifest(manifest: SceneManifest, path: Union[str, Path]) -> Path:
    """Write the manifest JSON and its pose file; image paths become relative to ``path``."""
    path = Path(path)
    if path.suffix != ".json":
        path = path / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    root = path.parent

    write_pose_file(root / manifest.pose_file, [v.pose for v in manifest.views], manifest.header)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest_to_dict(manifest, root), f, indent=2)
        f.write("\n")
    return path
