"""
Configuration / Settings for prosplat.
Centralizes every default parameter and switchable convention.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

from ..domain.enums import (
    DepthReadout,
    DepthSpacing,
    DistanceMode,
    FMatrixForm,
    FusionMode,
    ImageFormat,
    NormScope,
    SelectionStrategy,
    ViewingAxisFrame,
)
from ..domain.value_objects import AttentionConfig


@dataclass
class RenderSettings:
    """Gaussian splatting rasterizer settings."""
    background: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    sh_degree: int = 0              # 0..3
    dilation: float = 0.3           # px^2 added to the cov2d diagonal; 0 disables
    sigma_cutoff: float = 3.0       # splat support in standard deviations
    max_alpha: float = 0.999        # per-splat effective alpha clamp


@dataclass
class GeometrySettings:
    """Epipolar geometry settings."""
    fmatrix_form: FMatrixForm = FMatrixForm.CONSISTENT
    sentinel: Optional[float] = None   # None: max finite distance in the map
    strict: bool = False               # raise on epipole-on-pixel rows


@dataclass
class SelectionSettings:
    """Reference-view selection settings."""
    strategy: SelectionStrategy = SelectionStrategy.OVERLAP
    distance_mode: DistanceMode = DistanceMode.CAMERA_CENTER
    axis_frame: ViewingAxisFrame = ViewingAxisFrame.CAMERA_TO_WORLD
    normalize_distance: bool = False
    eps: float = 1e-8


@dataclass
class SweepSettings:
    """Plane-sweep cost volume settings."""
    depth_candidates: int = 32
    spacing: DepthSpacing = DepthSpacing.INVERSE
    readout: DepthReadout = DepthReadout.ARGMAX
    feature_scale: int = 4          # image -> feature grid downsample factor


@dataclass
class AttentionSettings:
    """Epipolar attention fusion settings."""
    channels: int = 8
    dk: Optional[int] = None        # None: same as channels
    apply_softmax: bool = True
    apply_sigmoid: bool = True
    latent_scale: int = 8
    norm_scope: NormScope = NormScope.ROW
    fusion: FusionMode = FusionMode.EPIPOLAR
    backend: str = "identity"
    timestep: int = 999
    weights_path: str = ""

    def to_attention_config(self) -> AttentionConfig:
        return AttentionConfig(
            dk=self.dk or self.channels,
            apply_softmax=self.apply_softmax,
            apply_sigmoid=self.apply_sigmoid,
            latent_scale=self.latent_scale,
            norm_scope=self.norm_scope,
            fusion=self.fusion,
        )


@dataclass
class MetricSettings:
    """Evaluation / loss settings."""
    max_val: float = 1.0
    perceptual_weight: float = 5.0  # lambda
    mask_path: str = ""


@dataclass
class CurationSettings:
    """Dataset curation settings."""
    min_targets: int = 5
    max_targets: int = 7


@dataclass
class AppConfig:
    """Root configuration — aggregates all settings."""
    render: RenderSettings = field(default_factory=RenderSettings)
    geometry: GeometrySettings = field(default_factory=GeometrySettings)
    selection: SelectionSettings = field(default_factory=SelectionSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    attention: AttentionSettings = field(default_factory=AttentionSettings)
    metrics: MetricSettings = field(default_factory=MetricSettings)
    curation: CurationSettings = field(default_factory=CurationSettings)

    # Pipeline inputs / outputs
    command: str = ""
    scene_path: str = ""
    output_dir: str = "output"
    primitives_path: str = ""
    renders_dir: str = ""
    pred_path: str = ""
    gt_path: str = ""
    image_format: ImageFormat = ImageFormat.PNG
    seed: int = 0
    threads: Optional[int] = None
    save_chart: str = ""
    log_level: str = ""

    # synth
    synth_views: int = 8
    synth_inputs: int = 3
    synth_primitives: int = 64
    synth_width: int = 64
    synth_height: int = 48
