"""SVG figures of solver results, built with ElementTree.

Layers, bottom to top: one translucent layer per class (its maximal compact), the best maximal
compact, the boundary, the minimal compact's points. Output depends only on the result, so the
same result always gives the same bytes.
"""

import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from faststeiner.compacts import Compact, FiniteCompact, GridSpec, RasterCompact
from faststeiner.files import ResultFile

__all__ = ["render_svg", "write_svg"]

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


class _Frame:
    "World-to-pixel mapping for the grid's box, y axis pointing up."
    def __init__(self, grid: GridSpec, size: int):
        x0, y0, x1, y1 = grid.bounds
        self.x0, self.y1 = x0, y1
        self.scale = size / max(x1 - x0, y1 - y0)
        self.w, self.h = (x1 - x0) * self.scale, (y1 - y0) * self.scale

    def xy(self, p) -> tuple[str, str]: return f"{(p[0] - self.x0) * self.scale:.3f}", f"{(self.y1 - p[1]) * self.scale:.3f}"


def _root(frame: _Frame) -> ET.Element:
    return ET.Element("svg", xmlns="http://www.w3.org/2000/svg", version="1.1", width=f"{frame.w:.0f}px",
                      height=f"{frame.h:.0f}px", viewBox=f"0 0 {frame.w:.3f} {frame.h:.3f}")


def _cells(parent: ET.Element, frame: _Frame, K: RasterCompact, **style: str) -> None:
    "Occupied cells as one rectangle per vertical run."
    g = ET.SubElement(parent, "g", **style)
    grid, cell = K.grid, K.grid.cell
    x0, y0 = grid.min_corner
    for i in range(grid.nx):
        col = K.mask[i]
        if not col.any(): continue
        edges = np.flatnonzero(np.diff(np.concatenate([[0], col.astype(np.int8), [0]])))
        for start, stop in zip(edges[::2], edges[1::2]):
            x, y = frame.xy((x0 + i * cell, y0 + stop * cell))
            ET.SubElement(g, "rect", x=x, y=y, width=f"{cell * frame.scale:.3f}", height=f"{(stop - start) * cell * frame.scale:.3f}")


def _points(parent: ET.Element, frame: _Frame, pts, r: float, **style: str) -> None:
    g = ET.SubElement(parent, "g", **style)
    for p in pts:
        cx, cy = frame.xy(p)
        ET.SubElement(g, "circle", cx=cx, cy=cy, r=f"{r:.3f}")


def _compact(parent: ET.Element, frame: _Frame, K: Compact, color: str) -> None:
    if isinstance(K, RasterCompact): _cells(parent, frame, K, fill=color, opacity="0.6")
    elif isinstance(K, FiniteCompact): _points(parent, frame, K.points, 4, fill=color)
    else:
        coords = " L".join(" ".join(frame.xy(p)) for p in K.vertices)
        closing = "" if K.is_segment else " z"
        fill = "none" if K.is_segment else color
        ET.SubElement(parent, "path", d=f"M{coords}{closing}", stroke=color, fill=fill, **{"fill-opacity": "0.3", "stroke-width": "2"})


def render_svg(rf: ResultFile, size: int = 640) -> ET.Element:
    frame = _Frame(rf.config.grid, size)
    svg = _root(frame)
    classes = ET.SubElement(svg, "g", id="classes")
    for i, c in enumerate(rf.classes):
        if isinstance(c.K, RasterCompact): _cells(classes, frame, c.K, fill=PALETTE[i % len(PALETTE)], opacity="0.25")
    if isinstance(rf.maximal.K, RasterCompact): _cells(svg, frame, rf.maximal.K, id="maximal", fill="#999999", opacity="0.6")
    boundary = ET.SubElement(svg, "g", id="boundary")
    for i, K in enumerate(rf.source.boundary): _compact(boundary, frame, K, PALETTE[i % len(PALETTE)])
    minimal = rf.minimal.K
    pts = minimal.points if isinstance(minimal, (FiniteCompact, RasterCompact)) else minimal.vertices
    _points(svg, frame, pts, 3, id="minimal", fill="black")
    return svg


def write_svg(rf: ResultFile, path: Path | str, size: int = 640) -> None:
    ET.ElementTree(render_svg(rf, size)).write(path, encoding="utf-8", xml_declaration=True)
