"""SVG rendering of point clouds on a fixed 1024 x 1024 viewport."""

from __future__ import annotations

import numpy as np

from . import __version__
from .errors import DomainError
from .ifs import PointCloud

SIZE = 1024


def render_svg(cloud: PointCloud, box, title: str | None = None) -> str:
    """Rasterise the cloud (first two coordinates) into 1024 x 1024 pixels.

    Occupied pixels are merged into horizontal runs and written as one path,
    so the output is byte-identical for identical input apart from the
    version comment.
    """
    box = np.asarray(box, dtype=float)
    if box.shape[0] != 2 or box.shape[1] < 1:
        raise DomainError("box must be [[lo...], [hi...]]")
    pts = cloud.points
    if pts.shape[1] == 1:
        pts = np.concatenate([pts, np.zeros_like(pts)], axis=1)
        box = np.concatenate([box, np.array([[-0.5], [0.5]])], axis=1)
    lo, hi = box[0, :2], box[1, :2]
    span = np.where(hi > lo, hi - lo, 1.0)
    px = np.clip(np.floor((pts[:, 0] - lo[0]) / span[0] * SIZE), 0, SIZE - 1).astype(np.int64)
    py = np.clip(np.floor((hi[1] - pts[:, 1]) / span[1] * SIZE), 0, SIZE - 1).astype(np.int64)
    grid = np.zeros((SIZE, SIZE), dtype=bool)
    grid[py, px] = True
    parts = []
    for y in range(SIZE):
        row = grid[y]
        if not row.any():
            continue
        edges = np.flatnonzero(np.diff(np.concatenate([[0], row.astype(np.int8), [0]])))
        for a, b in zip(edges[::2], edges[1::2]):
            parts.append(f"M{a} {y}h{b - a}v1h{a - b}z")
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- fraclab {__version__} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
    ]
    if title:
        lines.append(f"<title>{_escape(title)}</title>")
    lines.append(f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>')
    lines.append(f'<path fill="black" d="{"".join(parts)}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
