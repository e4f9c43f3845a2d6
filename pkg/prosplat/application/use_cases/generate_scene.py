"""
Use case: Generate Scene
Build a synthetic scene: random Gaussians around the origin, look-at
cameras on an arc, ground-truth images rendered from the Gaussians.
"""

import logging
from pathlib import Path
from typing import List

import numpy as np
from scipy.spatial.transform import Rotation

from ...config import AppConfig
from ...domain.entities import SceneManifest, SceneView
from ...domain.exceptions import InvalidConfig
from ...domain.value_objects import CameraIntrinsics, CameraView, GaussianPrimitive
from ...infrastructure.data_providers.image_provider import write_image
from ...infrastructure.data_providers.manifest_provider import save_scene_manifest, validate_indices
from ...infrastructure.data_providers.pose_provider import pose_record
from ...infrastructure.data_providers.primitive_provider import save_primitives
from ..services.geometry_service import GeometryService
from ..services.spherical_harmonics import rgb_to_sh_dc
from ..services.splat_renderer import SplatRenderer

logger = logging.getLogger(__name__)

ARC_RADIUS = 4.0
ARC_HALF_ANGLE = 0.6      # radians
CAMERA_HEIGHT = -0.3      # world y points down
FOCAL = 0.9               # fx / image width
NEAR, FAR = 0.5, 10.0
FRAME_STEP_US = 33366     # timestamp step, ~30 fps in microseconds


class GenerateSceneUseCase:

    def __init__(self, config: AppConfig):
        self.config = config
        self.renderer = SplatRenderer(config.render, config.threads)

    def random_primitives(self, rng: np.random.Generator) -> List[GaussianPrimitive]:
        n = self.config.synth_primitives
        means = rng.uniform(-1.0, 1.0, (n, 3))
        colors = rng.uniform(0.1, 0.9, (n, 3))
        scales = rng.uniform(0.08, 0.25, (n, 3))
        opacities = rng.uniform(0.6, 0.95, n)
        quats = Rotation.random(n, random_state=rng).as_quat()  # (x, y, z, w)
        return [
            GaussianPrimitive(
                mean=means[i],
                sh=rgb_to_sh_dc(colors[i]).reshape(1, 3),
                rotation=np.roll(quats[i], 1),
                scale=scales[i],
                opacity=float(opacities[i]),
            )
            for i in range(n)
        ]

    def execute(self, out_dir: str, scene_id: str = "synthetic") -> SceneManifest:
        cfg = self.config
        count, width, height = cfg.synth_views, cfg.synth_width, cfg.synth_height
        if not 2 <= cfg.synth_inputs < count:
            raise InvalidConfig("synthetic scenes need 2 <= inputs < views",
                                inputs=cfg.synth_inputs, views=count)

        rng = np.random.default_rng(cfg.seed)
        prims = self.random_primitives(rng)

        root = Path(out_dir)
        (root / "images").mkdir(parents=True, exist_ok=True)
        intrinsics = CameraIntrinsics(fx=FOCAL * width, fy=FOCAL * width,
                                      cx=0.5 * width, cy=0.5 * height,
                                      width=width, height=height)

        views: List[SceneView] = []
        for k, theta in enumerate(np.linspace(-ARC_HALF_ANGLE, ARC_HALF_ANGLE, count)):
            eye = np.array([ARC_RADIUS * np.sin(theta), CAMERA_HEIGHT, -ARC_RADIUS * np.cos(theta)])
            extrinsics = GeometryService.look_at(eye, np.zeros(3))
            record = pose_record(k * FRAME_STEP_US, CameraView(intrinsics, extrinsics, NEAR, FAR),
                                 width, height)
            camera = record.camera_view(width, height, NEAR, FAR)
            frame = self.renderer.render_view(prims, camera)
            image_path = write_image(root / "images" / f"{k:03d}.{cfg.image_format.value}",
                                     frame.rgb, cfg.image_format)
            views.append(SceneView(image_path=image_path, pose=record, camera=camera))

        inputs = sorted({int(i) for i in np.round(np.linspace(0, count - 1, cfg.synth_inputs))})
        targets = [i for i in range(count) if i not in inputs]
        validate_indices(count, inputs, targets)

        primitives_path = save_primitives(root / "primitives.json", prims)
        manifest = SceneManifest(
            scene_id=scene_id,
            root=root,
            views=views,
            input_indices=tuple(inputs),
            target_indices=tuple(targets),
            image_width=width,
            image_height=height,
            near=NEAR,
            far=FAR,
            header=f"prosplat synthetic scene seed={cfg.seed}",
            primitives_path=primitives_path,
        )
        save_scene_manifest(manifest, root)
        logger.info("Generated scene %s: %d views, %d primitives", scene_id, count, len(prims))
        return manifest
