"""Domain enums for prosplat. Values are the CLI spellings."""

from enum import Enum


class FMatrixForm(Enum):
    """Which fundamental-matrix formula to evaluate."""
    CONSISTENT = "consistent"   # K_ref^-T [t]x R K_tgt^-1, x_ref^T F x_tgt = 0
    LITERAL = "literal"         # K_ref^-1 on the left, comparison only


class DepthSpacing(Enum):
    """How depth candidates are spread between near and far."""
    INVERSE = "inverse"
    LINEAR = "linear"


class DepthReadout(Enum):
    """How a depth map is read out of a cost volume."""
    ARGMAX = "argmax"
    SOFT_ARGMAX = "soft-argmax"


class NormScope(Enum):
    """Scope of the min-max normalization of the epipolar modulation."""
    ROW = "row"
    GLOBAL = "global"


class DistanceMode(Enum):
    """What the view-selection distance is measured between."""
    CAMERA_CENTER = "center"        # C = -R^T T, rigid-invariant
    RAW_TRANSLATION = "translation"  # world-to-camera T as stored


class ViewingAxisFrame(Enum):
    """Which rotation the viewing z-axis is read from."""
    CAMERA_TO_WORLD = "c2w"   # third column of R^T: world-space viewing direction
    WORLD_TO_CAMERA = "w2c"   # third column of R as stored


class SelectionStrategy(Enum):
    """Reference-view scoring rule."""
    OVERLAP = "overlap"    # inverse distance + angular term
    DISTANCE = "distance"  # inverse distance only
    ANGLE = "angle"        # angular term only


class ImageFormat(Enum):
    """Image container written by the repositories."""
    PNG = "png"
    PPM = "ppm"


class FusionMode(Enum):
    """How the reference view enters the enhancement of a target view."""
    EPIPOLAR = "epipolar"  # overlap-selected reference, distance-weighted attention
    PLAIN = "plain"        # same reference, attention without epipolar modulation
    NONE = "none"          # target latent only, no reference injection
