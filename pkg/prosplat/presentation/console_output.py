"""Console output — pretty-prints command results to the terminal."""

from typing import Sequence

from ..application.use_cases.cost_volumes import CostVolumeReport
from ..application.use_cases.epipolar_maps import EpipolarReport
from ..application.use_cases.evaluate_views import EvaluationReport
from ..application.use_cases.fuse_views import FusionReport
from ..application.use_cases.render_views import RenderReport
from ..application.use_cases.select_reference import SelectionReport
from ..domain.entities import CurationResult, SceneManifest
from .formatters import format_db, format_float, format_grid


# ============================================================================
# ANSI color helpers
# ============================================================================
class _C:
    RESET = "\033[0m"
    BOLD = "\033[1m"
    GREEN = "\033[92m"
    RED = "\033[91m"
    YELLOW = "\033[93m"
    CYAN = "\033[96m"
    DIM = "\033[2m"


def _colored(text: str, color: str) -> str:
    return f"{color}{text}{_C.RESET}"


def _row(label: str, value: str, color: str = _C.CYAN) -> None:
    print(f"  {label:<22}{_colored(value, color)}")


# ============================================================================
# Main output
# ============================================================================
def print_header(command: str) -> None:
    border = _colored("=" * 62, _C.GREEN)
    print(border)
    print(_colored(f"  PROSPLAT — {command}", _C.GREEN + _C.BOLD))
    print(border)


def print_scene(manifest: SceneManifest) -> None:
    _row("Scene", manifest.scene_id)
    _row("Views", str(len(manifest.views)))
    _row("Inputs", ", ".join(str(i) for i in manifest.input_indices))
    _row("Targets", ", ".join(str(i) for i in manifest.target_indices) or "-")
    _row("Resolution", f"{manifest.image_width} x {manifest.image_height}")


def print_render(report: RenderReport) -> None:
    _row("Primitives", str(report.primitives))
    for view in report.summary()["views"]:
        _row(f"view {view['index']:03d}", f"coverage {format_float(view['coverage'], 3)}")


def print_selection(report: SelectionReport, input_indices: Sequence[int]) -> None:
    print(_colored("  target  view       dist    angle      score", _C.DIM))
    for target, view, dist, angle, score, selected in report.rows(input_indices):
        line = f"  {target:>6}  {view:>4}  {dist:>9.4f}  {angle:>7.4f}  {score:>9.4f}"
        print(_colored(line + "  *", _C.GREEN + _C.BOLD) if selected else line)


def print_epipolar(report: EpipolarReport) -> None:
    _row("Latent grid", format_grid(report.grid))
    for entry in report.summary()["maps"]:
        color = _C.YELLOW if entry["degenerate_rows"] else _C.CYAN
        _row(f"target {entry['target_index']:03d}",
             f"ref {entry['reference_index']:03d}, degenerate rows {entry['degenerate_rows']}",
             color)


def print_cost_volumes(report: CostVolumeReport) -> None:
    for entry in report.summary()["volumes"]:
        _row(f"reference {entry['reference_index']:03d}",
             f"grid {format_grid(entry['grid'])}, valid {format_float(entry['valid_fraction'], 3)}, "
             f"mean depth {format_float(entry['mean_depth'], 3)}")


def print_fusion(report: FusionReport) -> None:
    _row("Backend", f"{report.backend} ({report.fusion.value} fusion)")
    for entry in report.summary()["views"]:
        ref = entry["reference_index"]
        ref_text = "no ref" if ref is None else f"ref {ref:03d}"
        _row(f"target {entry['target_index']:03d}",
             f"{ref_text}, mean gate {format_float(entry['mean_gate'])}")


def print_metrics(report: EvaluationReport) -> None:
    for view in report.views:
        _row(view.name, f"PSNR {format_db(view.psnr)}  SSIM {format_float(view.ssim)}")
    mean = report.mean()
    _row("mean", f"PSNR {format_db(mean['psnr'])}  SSIM {format_float(mean['ssim'])}",
         _C.GREEN + _C.BOLD)
    if report.loss is not None:
        color = _C.YELLOW if report.loss.perceptual_placeholder else _C.CYAN
        _row("joint loss", format_float(report.loss.total, 6), color)


def print_curation(result: CurationResult) -> None:
    _row("Available targets", str(result.available_targets),
         _C.YELLOW if result.below_range else _C.CYAN)
    for pair in result.pairs:
        _row(f"target {pair.target_index:03d}",
             f"ref {pair.reference_index:03d}, score {format_float(pair.score.score)}")

