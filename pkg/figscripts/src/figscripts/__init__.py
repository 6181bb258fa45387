"""Figure rendering for the ndsf command-line pipeline's CSV/JSON outputs."""

from .spec import FigureSpec, SpecError
from .render import render_heatmap, render_kcut_stack, render_scan

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "SpecError",
    "render_heatmap",
    "render_kcut_stack",
    "render_scan",
]
