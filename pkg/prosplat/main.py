"""
ProSplat — Main Entry Point
===========================
Usage:
    # Generate a synthetic scene:
    python -m prosplat synth --out scenes/demo --seed 7

    # Render the target views from the scene's primitives:
    python -m prosplat render --scene scenes/demo --out out/render

    # Reference-view table, epipolar maps, plane-sweep volumes:
    python -m prosplat select-ref --scene scenes/demo --out out/select
    python -m prosplat epimap --scene scenes/demo --out out/epimap --latent-scale 8
    python -m prosplat costvol --scene scenes/demo --out out/costvol --depth-candidates 32

    # Attention fusion, evaluation and dataset curation:
    python -m prosplat fuse --scene scenes/demo --renders out/render --out out/fuse
    python -m prosplat eval --scene scenes/demo --renders out/render --out out/eval
    python -m prosplat eval --pred a.png --gt b.png --out out/eval
    python -m prosplat curate --scene scenes/demo --renders out/render --out dataset

    # Fusion variants, scored against the ground truth:
    python -m prosplat fuse --scene scenes/demo --renders out/render --out out/plain --fusion plain
    python -m prosplat eval --scene scenes/demo --renders out/plain --out out/eval_plain

Errors are written to stderr as one JSON object; exit status 2 for library
errors, 1 for anything unexpected.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import (
    AppConfig,
    AttentionSettings,
    CurationSettings,
    GeometrySettings,
    MetricSettings,
    RenderSettings,
    SelectionSettings,
    SweepSettings,
)
from .config.settings import get_settings
from .domain.enums import (
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
from .domain.exceptions import InvalidConfig, MissingFile, ProSplatError
from .application.use_cases.cost_volumes import CostVolumesUseCase
from .application.use_cases.curate_dataset import CurateDatasetUseCase
from .application.use_cases.epipolar_maps import EpipolarMapsUseCase
from .application.use_cases.evaluate_views import EvaluateViewsUseCase
from .application.use_cases.fuse_views import FuseViewsUseCase
from .application.use_cases.generate_scene import GenerateSceneUseCase
from .application.use_cases.render_views import RenderViewsUseCase
from .application.use_cases.select_reference import SelectReferenceUseCase
from .infrastructure.data_providers.manifest_provider import load_scene_manifest
from .infrastructure.data_providers.primitive_provider import load_primitives
from .infrastructure.repositories.artifact_repository import ArtifactRepository
from .infrastructure.repositories.dataset_repository import DatasetRepository
from .presentation import chart_output, console_output

logger = logging.getLogger("prosplat")

COMMANDS = ("synth", "render", "select-ref", "epimap", "costvol", "fuse", "eval", "curate")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)

    # Inputs / outputs
    common.add_argument("--scene", default="", help="Scene manifest (file or directory)")
    common.add_argument("--out", default="output", help="Output directory")
    common.add_argument("--primitives", default="", help="Primitives JSON (default: from manifest)")
    common.add_argument("--renders", default="", help="Directory of rendered target views")
    common.add_argument("--pred", default="", help="Predicted image (eval of two files)")
    common.add_argument("--gt", default="", help="Ground-truth image (eval of two files)")
    common.add_argument("--mask", default="", help="Valid-region mask image for metrics")
    common.add_argument("--format", choices=[f.value for f in ImageFormat], default="png",
                        help="Image format of written views")
    common.add_argument("--seed", type=int, default=0, help="Random seed")
    common.add_argument("--threads", type=int, default=None,
                        help="Worker threads, capped by PROSPLAT_THREADS (default: CPU count)")
    common.add_argument("--log-level", default="", help="Logging level (default: PROSPLAT_LOG_LEVEL)")
    common.add_argument("--save-chart", default="", help="Save a matplotlib chart to this path")

    # Rendering
    common.add_argument("--sh-degree", type=int, choices=range(4), default=0,
                        help="Spherical-harmonics degree")
    common.add_argument("--no-dilation", action="store_true",
                        help="Disable the anti-alias covariance dilation")
    common.add_argument("--background", type=float, nargs=3, default=(0.0, 0.0, 0.0),
                        metavar=("R", "G", "B"), help="Background color in [0, 1]")

    # Geometry / selection
    common.add_argument("--literal-fmatrix", action="store_true",
                        help="Use the literal (non-epipolar) fundamental-matrix form")
    common.add_argument("--strict-epipolar", action="store_true",
                        help="Fail on target pixels that coincide with the epipole")
    common.add_argument("--selection", choices=[s.value for s in SelectionStrategy],
                        default=SelectionStrategy.OVERLAP.value, help="Reference scoring")
    common.add_argument("--distance-mode", choices=[d.value for d in DistanceMode],
                        default=DistanceMode.CAMERA_CENTER.value,
                        help="Distance between camera centers or raw translations")
    common.add_argument("--axis-frame", choices=[a.value for a in ViewingAxisFrame],
                        default=ViewingAxisFrame.CAMERA_TO_WORLD.value,
                        help="Rotation whose third column is the viewing axis")
    common.add_argument("--normalize-distance", action="store_true",
                        help="Divide distances by the largest candidate distance")

    # Plane sweep
    common.add_argument("--depth-candidates", type=int, default=32, help="Depth candidates D")
    common.add_argument("--depth-spacing", choices=[d.value for d in DepthSpacing],
                        default=DepthSpacing.INVERSE.value, help="Depth candidate spacing")
    common.add_argument("--depth-readout", choices=[d.value for d in DepthReadout],
                        default=DepthReadout.ARGMAX.value, help="Depth map readout")
    common.add_argument("--feature-scale", type=int, default=4,
                        help="Image to cost-volume grid downsample factor")

    # Attention / fusion
    common.add_argument("--latent-scale", type=int, choices=(1, 2, 4, 8), default=8,
                        help="Image to latent grid downsample factor")
    common.add_argument("--channels", type=int, default=8, help="Latent channels")
    common.add_argument("--no-softmax", action="store_true", help="Skip the attention softmax")
    common.add_argument("--no-sigmoid", action="store_true", help="Skip the sigmoid gate")
    common.add_argument("--norm-scope", choices=[n.value for n in NormScope],
                        default=NormScope.ROW.value, help="Distance-map normalization scope")
    common.add_argument("--fusion", choices=[f.value for f in FusionMode],
                        default=FusionMode.EPIPOLAR.value,
                        help="Reference fusion: epipolar, plain attention, or none")
    common.add_argument("--backend", default="identity", help="Denoising backend")
    common.add_argument("--weights", default="", help="Projection weight bundle stem")

    # Synthetic scenes
    common.add_argument("--views", type=int, default=8, help="synth: number of views")
    common.add_argument("--inputs", type=int, default=3, help="synth: number of input views")
    common.add_argument("--num-primitives", type=int, default=64, help="synth: Gaussians")
    common.add_argument("--width", type=int, default=64, help="synth: image width")
    common.add_argument("--height", type=int, default=48, help="synth: image height")

    parser = argparse.ArgumentParser(
        prog="prosplat",
        description="ProSplat — Gaussian splatting view enhancement toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def parse_args(argv: Optional[List[str]] = None) -> AppConfig:
    """Parse CLI arguments into AppConfig."""
    args = build_parser().parse_args(argv)

    return AppConfig(
        render=RenderSettings(
            background=tuple(args.background),
            sh_degree=args.sh_degree,
            dilation=0.0 if args.no_dilation else RenderSettings.dilation,
        ),
        geometry=GeometrySettings(
            fmatrix_form=FMatrixForm.LITERAL if args.literal_fmatrix else FMatrixForm.CONSISTENT,
            strict=args.strict_epipolar,
        ),
        selection=SelectionSettings(
            strategy=SelectionStrategy(args.selection),
            distance_mode=DistanceMode(args.distance_mode),
            axis_frame=ViewingAxisFrame(args.axis_frame),
            normalize_distance=args.normalize_distance,
        ),
        sweep=SweepSettings(
            depth_candidates=args.depth_candidates,
            spacing=DepthSpacing(args.depth_spacing),
            readout=DepthReadout(args.depth_readout),
            feature_scale=args.feature_scale,
        ),
        attention=AttentionSettings(
            channels=args.channels,
            apply_softmax=not args.no_softmax,
            apply_sigmoid=not args.no_sigmoid,
            latent_scale=args.latent_scale,
            norm_scope=NormScope(args.norm_scope),
            fusion=FusionMode(args.fusion),
            backend=args.backend,
            weights_path=args.weights,
        ),
        metrics=MetricSettings(mask_path=args.mask),
        curation=CurationSettings(),
        command=args.command,
        scene_path=args.scene,
        output_dir=args.out,
        primitives_path=args.primitives,
        renders_dir=args.renders,
        pred_path=args.pred,
        gt_path=args.gt,
        image_format=ImageFormat(args.format),
        seed=args.seed,
        threads=args.threads,
        save_chart=args.save_chart,
        log_level=args.log_level,
        synth_views=args.views,
        synth_inputs=args.inputs,
        synth_primitives=args.num_primitives,
        synth_width=args.width,
        synth_height=args.height,
    )


def configure_logging(config: AppConfig) -> None:
    level = (config.log_level or get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _require(value: str, flag: str, command: str) -> str:
    if not value:
        raise InvalidConfig(f"{flag} is required for '{command}'", flag=flag)
    return value


def run(config: AppConfig) -> None:
    """Execute one subcommand; library errors propagate to main()."""
    command = config.command
    console_output.print_header(command)

    if command == "synth":
        manifest = GenerateSceneUseCase(config).execute(config.output_dir,
                                                        Path(config.output_dir).name or "synthetic")
        console_output.print_scene(manifest)
        return

    if command == "eval" and config.pred_path:
        report = EvaluateViewsUseCase(config, ArtifactRepository(config.output_dir)).evaluate_pairs(
            [("pred", Path(config.pred_path), Path(_require(config.gt_path, "--gt", command)))]
        )
        console_output.print_metrics(report)
        return

    manifest = load_scene_manifest(_require(config.scene_path, "--scene", command))
    console_output.print_scene(manifest)

    if command == "curate":
        result = CurateDatasetUseCase(config, DatasetRepository(config.output_dir)).execute(
            manifest, _require(config.renders_dir, "--renders", command)
        )
        console_output.print_curation(result)
        return

    repository = ArtifactRepository(config.output_dir)

    if command == "render":
        source = config.primitives_path or manifest.primitives_path
        if not source:
            raise MissingFile(["primitives"], "no primitives file given or referenced by the scene")
        report = RenderViewsUseCase(config, repository).execute(manifest, load_primitives(source))
        console_output.print_render(report)

    elif command == "select-ref":
        report = SelectReferenceUseCase(config, repository).execute(manifest)
        console_output.print_selection(report, manifest.input_indices)
        if config.save_chart:
            rows = report.rows(manifest.input_indices)
            chart_output.plot_scores([f"t{r[0]}:v{r[1]}" for r in rows], [r[4] for r in rows],
                                     [bool(r[5]) for r in rows], "Reference overlap scores",
                                     config.save_chart)

    elif command == "epimap":
        console_output.print_epipolar(EpipolarMapsUseCase(config, repository).execute(manifest))

    elif command == "costvol":
        report = CostVolumesUseCase(config, repository).execute(manifest)
        console_output.print_cost_volumes(report)
        if config.save_chart and report.volumes:
            first = min(report.volumes)
            volume = report.volumes[first]
            curves = {f"view {i:03d} center": v.values[v.h // 2, v.w // 2]
                      for i, v in sorted(report.volumes.items())}
            chart_output.plot_cost_curves(curves, volume.depths, "Matching cost at grid center",
                                          config.save_chart)

    elif command == "fuse":
        report = FuseViewsUseCase(config, repository).execute(manifest, config.renders_dir or None)
        console_output.print_fusion(report)

    elif command == "eval":
        report = EvaluateViewsUseCase(config, repository).execute(
            manifest, _require(config.renders_dir, "--renders", command)
        )
        console_output.print_metrics(report)
        if config.save_chart:
            chart_output.plot_metrics([v.name for v in report.views],
                                      [v.psnr for v in report.views],
                                      [v.ssim for v in report.views], config.save_chart)


def main(argv: Optional[List[str]] = None) -> int:
    config = parse_args(argv)
    configure_logging(config)
    try:
        run(config)
    except ProSplatError as exc:
        print(json.dumps(exc.to_dict(), sort_keys=True, default=str), file=sys.stderr)
        return 2
    except OSError as exc:
        error = {"error": type(exc).__name__, "message": str(exc),
                 "details": {"path": str(exc.filename) if exc.filename else None}}
        print(json.dumps(error, sort_keys=True), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        logger.exception("Unexpected failure in '%s'", config.command)
        error = {"error": type(exc).__name__, "message": str(exc), "details": {}}
        print(json.dumps(error, sort_keys=True), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
