"""Transformada de Hough suave e extração de retas"""

from .hough_transform import HoughAccumulator, HoughGrid, accumulate_numpy, build_grid, soft_accumulate, squash
from .line_extraction import Line, LineSet, extract_lines, render_lines

__all__ = [
    "HoughAccumulator",
    "HoughGrid",
    "Line",
    "LineSet",
    "accumulate_numpy",
    "build_grid",
    "extract_lines",
    "render_lines",
    "soft_accumulate",
    "squash",
]
