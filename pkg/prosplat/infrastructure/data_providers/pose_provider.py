"""
Camera pose files — one camera per line, RealEstate10K layout:

    timestamp fx fy cx cy u1 u2 r11 r12 r13 t1 r21 r22 r23 t2 r31 r32 r33 t3

Intrinsics are normalized by image width / height; the 3x4 block is the
world-to-camera [R|T]. An optional first line that does not start with a
number (typically the source URL) is kept as the header.
"""

import math
from pathlib import Path
from typing import Iterable, List, TextIO, Tuple, Union

import numpy as np

from ...domain.entities import PoseRecord
from ...domain.exceptions import MalformedLine, NonRigidRotation
from ...domain.value_objects import check_rotation

POSE_FIELDS = 19
PARSE_ROTATION_TOLERANCE = 1e-5


def _is_numeric(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _parse_line(tokens: List[str], line_number: int, tolerance: float) -> PoseRecord:
    if len(tokens) != POSE_FIELDS:
        raise MalformedLine(line_number, f"expected {POSE_FIELDS} fields, got {len(tokens)}")
    try:
        timestamp = int(tokens[0])
    except ValueError:
        raise MalformedLine(line_number, f"timestamp '{tokens[0]}' is not an integer") from None
    try:
        values = [float(t) for t in tokens[1:]]
    except ValueError as exc:
        raise MalformedLine(line_number, str(exc)) from None
    if not all(math.isfinite(v) for v in values):
        raise MalformedLine(line_number, "non-finite value")

    fx, fy, cx, cy, u1, u2 = values[:6]
    if fx <= 0 or fy <= 0:
        raise MalformedLine(line_number, "focal lengths must be positive")

    extrinsic = tuple(values[6:])
    rotation = np.array(extrinsic).reshape(3, 4)[:, :3]
    try:
        check_rotation(rotation, tolerance)
    except NonRigidRotation as exc:
        exc.details["line_number"] = line_number
        raise

    return PoseRecord(timestamp=timestamp, fx=fx, fy=fy, cx=cx, cy=cy,
                      extrinsic=extrinsic, unused=(u1, u2))


def parse_pose_file(
    source: Union[str, TextIO, Iterable[str]],
    tolerance: float = PARSE_ROTATION_TOLERANCE,
) -> Tuple[str, List[PoseRecord]]:
    """Parse pose text (string or line iterable) into (header, records)."""
    lines = source.splitlines() if isinstance(source, str) else source
    header = ""
    records: List[PoseRecord] = []
    for line_number, line in enumerate(lines, start=1):
        tokens = line.split()
        if not tokens:
            continue
        if not records and not header and not _is_numeric(tokens[0]):
            header = line.strip()
            continue
        records.append(_parse_line(tokens, line_number, tolerance))
    return header, records


def read_pose_file(path: Union[str, Path],
                   tolerance: float = PARSE_ROTATION_TOLERANCE) -> Tuple[str, List[PoseRecord]]:
    with open(path, encoding="utf-8") as f:
        return parse_pose_file(f, tolerance)


def serialize_pose_file(records: Iterable[PoseRecord], header: str = "") -> str:
    """Inverse of parse_pose_file; floats use repr so values round-trip exactly."""
    lines = [header] if header else []
    for rec in records:
        fields = [str(rec.timestamp)]
        fields += [repr(float(v)) for v in (rec.fx, rec.fy, rec.cx, rec.cy, *rec.unused)]
        fields += [repr(float(v)) for v in rec.extrinsic]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def write_pose_file(path: Union[str, Path], records: Iterable[PoseRecord], header: str = "") -> Path:
    path = Path(path)
    path.write_text(serialize_pose_file(records, header), encoding="utf-8")
    return path


def pose_record(timestamp: int, view, width: int, height: int) -> PoseRecord:
    """PoseRecord of a CameraView, normalizing intrinsics by the image size."""
    k = view.intrinsics
    m = np.hstack([view.extrinsics.rotation, view.extrinsics.translation[:, None]])
    return PoseRecord(
        timestamp=int(timestamp),
        fx=k.fx / width, fy=k.fy / height,
        cx=k.cx / width, cy=k.cy / height,
        extrinsic=tuple(float(v) for v in m.ravel()),
    )
