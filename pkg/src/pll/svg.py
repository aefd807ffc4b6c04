"""SVG drawing of circle packings."""

from __future__ import annotations

from .packing import CirclePacking


def render_packing_svg(p: CirclePacking, root: int | None = 0, edges: bool = True, size: int = 600,
                       margin: float = 0.05) -> str:
    """One <circle> per vertex, optional tangency segments, root filled in red."""
    c, r = p.centers, p.radii
    lo = (c - r[:, None]).min(axis=0)
    hi = (c + r[:, None]).max(axis=0)
    span = float(max(hi - lo)) or 1.0
    scale = size * (1 - 2 * margin) / span
    off = size * margin

    def tx(pt):
        x = off + (pt[0] - lo[0]) * scale
        y = off + (hi[1] - pt[1]) * scale  # flip y so the picture is not mirrored
        return x, y

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    if edges:
        out.append('<g stroke="#888" stroke-width="0.6">')
        for u, v in p.graph.edges():
            x1, y1 = tx(c[u])
            x2, y2 = tx(c[v])
            out.append(f'<line x1="{x1:.4f}" y1="{y1:.4f}" x2="{x2:.4f}" y2="{y2:.4f}"/>')
        out.append("</g>")
    out.append('<g fill="none" stroke="#1f4e9c" stroke-width="0.8">')
    for v in range(p.graph.n):
        x, y = tx(c[v])
        attrs = ' fill="#d62728" fill-opacity="0.5"' if root is not None and v == root else ""
        out.append(f'<circle cx="{x:.4f}" cy="{y:.4f}" r="{r[v] * scale:.4f}"{attrs}/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def count_elements(svg: str) -> tuple[int, int]:
    """(circles, lines) in an SVG produced by :func:`render_packing_svg`."""
    return svg.count("<circle "), svg.count("<line ")

