"""Error hierarchy for the prosplat library.

Every error carries a ``details`` mapping so the CLI can emit it as
machine-readable JSON without knowing the concrete type.
"""

from typing import Any, Dict, Iterable, Optional


class ProSplatError(Exception):
    """Base class of all library errors."""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": self.details,
        }


# ── Geometry ────────────────────────────────────────────────────
class InvalidCamera(ProSplatError, ValueError):
    """Camera intrinsics / extrinsics / depth bounds violate their invariants."""


class DegenerateBaseline(ProSplatError, ValueError):
    """Two views share a camera center; epipolar geometry is undefined."""


class DegenerateLine(ProSplatError, ValueError):
    """A target pixel coincides with the epipole (line coefficients vanish)."""


class NonRigidRotation(ProSplatError, ValueError):
    """A rotation block is not orthonormal with determinant +1."""


# ── Rendering ───────────────────────────────────────────────────
class InvalidPrimitive(ProSplatError, ValueError):
    """A Gaussian primitive violates its invariants."""


class BehindCamera(ProSplatError):
    """Primitive mean at or behind the near plane; the primitive is culled."""


# ── Selection / sweep / attention ───────────────────────────────
class EmptyInputSet(ProSplatError, ValueError):
    """No candidate views were supplied."""


class InvalidRange(ProSplatError, ValueError):
    """Depth range or candidate count is unusable."""


class ShapeMismatch(ProSplatError, ValueError):
    """Array / grid shapes are inconsistent."""


class InvalidConfig(ProSplatError, ValueError):
    """A configuration value is out of its allowed range."""


# ── Metrics ─────────────────────────────────────────────────────
class ImageTooSmall(ProSplatError, ValueError):
    """Image smaller than the SSIM window."""


class EmptyBatch(ProSplatError, ValueError):
    """Joint loss requested over zero views."""


# ── Scene I/O ───────────────────────────────────────────────────
class MalformedLine(ProSplatError, ValueError):
    """A pose-file line cannot be parsed."""

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}", line_number=line_number)
        self.line_number = line_number


class MissingFile(ProSplatError):
    """One or more referenced files do not exist."""

    def __init__(self, paths: Iterable[str], message: Optional[str] = None):
        paths = [str(p) for p in paths]
        super().__init__(message or f"missing files: {', '.join(paths)}", paths=paths)
        self.paths = paths


class InvalidIndices(ProSplatError, ValueError):
    """Input / target index sets are out of range, overlapping or too small."""


class NoTargets(ProSplatError, ValueError):
    """A scene has no target views to curate."""
