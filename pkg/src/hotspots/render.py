"""Self-contained SVG emission: eigenfunction contour plots (marching
squares over a field grid) with the nodal arc and critical points overlaid,
and the moduli-simplex classification map.

Output is deterministic: fixed-precision coordinates, no timestamps.
"""

import numpy as np

from . import field as field_mod

VERDICT_COLORS = {"CRIT": "#2e9e4f", "NOCRIT": "#3a6fd8", "AMBIGUOUS": "#c7b03c"}


def _fmt(x):
    return f"{x:.4f}"


def marching_squares(xs, ys, grid, level):
    """Line segments of the `level` isoline of grid (NaN = outside).

    grid[i, j] is the value at (xs[i], ys[j]); returns [(x0,y0,x1,y1), ...].
    """
    segs = []
    f = grid - level
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            c = [f[i, j], f[i + 1, j], f[i + 1, j + 1], f[i, j + 1]]
            if any(np.isnan(v) for v in c):
                continue
            idx = sum(1 << n for n, v in enumerate(c) if v > 0.0)
            if idx in (0, 15):
                continue
            x0, x1 = xs[i], xs[i + 1]
            y0, y1 = ys[j], ys[j + 1]

            def interp(pa, pb, fa, fb):
                t = fa / (fa - fb) if fa != fb else 0.5
                return (pa[0] + t * (pb[0] - pa[0]),
                        pa[1] + t * (pb[1] - pa[1]))

            corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
            edges = {}
            for n in range(4):
                a, b = n, (n + 1) % 4
                if (c[a] > 0) != (c[b] > 0):
                    edges[n] = interp(corners[a], corners[b], c[a], c[b])
            pts = list(edges.values())
            if len(pts) == 2:
                segs.append((*pts[0], *pts[1]))
            elif len(pts) == 4:  # saddle cell: pair by edge order
                keys = sorted(edges)
                segs.append((*edges[keys[0]], *edges[keys[1]]))
                segs.append((*edges[keys[2]], *edges[keys[3]]))
    return segs


def field_grid(ep, n=120):
    """u on a regular bbox grid, NaN outside the triangle."""
    tri = ep.triangle
    verts = np.array(tri.vertices, dtype=complex)
    x_lo, x_hi = verts.real.min(), verts.real.max()
    y_lo, y_hi = verts.imag.min(), verts.imag.max()
    pad = 0.02 * tri.diameter
    xs = np.linspace(x_lo - pad, x_hi + pad, n)
    ys = np.linspace(y_lo - pad, y_hi + pad, n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = (gx + 1j * gy).ravel()
    inside = np.array([tri.contains(p, tol=1e-12) for p in pts])
    u = np.full(len(pts), np.nan)
    if np.any(inside):
        u[inside] = field_mod.eval_fields(ep, pts[inside], want_grad=False)[0]
    return xs, ys, u.reshape(gx.shape)


def contour_svg(ep, header, n_grid=120, n_levels=12, nodal=None, crits=()):
    """Contour plot of the eigenfunction with optional overlays."""
    tri = ep.triangle
    xs, ys, grid = field_grid(ep, n_grid)
    lo, hi = np.nanmin(grid), np.nanmax(grid)
    levels = np.linspace(lo, hi, n_levels + 2)[1:-1]

    size = 560.0
    margin = 20.0
    span = max(xs[-1] - xs[0], ys[-1] - ys[0])
    sc = (size - 2 * margin) / span

    def sx(x):
        return margin + (x - xs[0]) * sc

    def sy(y):
        return size - margin - (y - ys[0]) * sc

    out = [f"<!-- {header} -->",
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" '
           f'height="{size:.0f}" viewBox="0 0 {size:.0f} {size:.0f}">',
           f'<rect width="{size:.0f}" height="{size:.0f}" fill="white"/>']

    for lev in levels:
        color = "#c0392b" if lev > 0 else "#2980b9"
        path = []
        for x0, y0, x1, y1 in marching_squares(xs, ys, grid, lev):
            path.append(f"M{_fmt(sx(x0))} {_fmt(sy(y0))}L{_fmt(sx(x1))} {_fmt(sy(y1))}")
        if path:
            out.append(f'<path d="{"".join(path)}" stroke="{color}" '
                       'stroke-width="0.8" fill="none" opacity="0.75"/>')

    pts = " ".join(f"{_fmt(sx(v.real))},{_fmt(sy(v.imag))}"
                   for v in tri.vertices)
    out.append(f'<polygon points="{pts}" fill="none" stroke="black" '
               'stroke-width="1.5"/>')

    if nodal is not None and len(nodal) > 1:
        d = "M" + "L".join(f"{_fmt(sx(p.real))} {_fmt(sy(p.imag))}"
                           for p in nodal)
        out.append(f'<path d="{d}" stroke="black" stroke-width="2" '
                   'fill="none" stroke-dasharray="6 3"/>')

    for p in crits:
        out.append(f'<circle cx="{_fmt(sx(p.real))}" cy="{_fmt(sy(p.imag))}" '
                   'r="5" fill="none" stroke="#8e24aa" stroke-width="2.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def moduli_svg(records, header, resolution, margin):
    """Colored simplex map of sweep verdicts, one cell per node."""
    size = 640.0
    pad = 40.0
    sc = (size - 2 * pad) / np.pi
    h = (np.pi - 3.0 * margin) / resolution

    def sx(b1):
        return pad + b1 * sc

    def sy(b2):
        return size - pad - b2 * sc

    out = [f"<!-- {header} -->",
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" '
           f'height="{size:.0f}" viewBox="0 0 {size:.0f} {size:.0f}">',
           f'<rect width="{size:.0f}" height="{size:.0f}" fill="white"/>']

    # simplex boundary and right-angle loci (three right-isosceles corners)
    tri_pts = [(0.0, 0.0), (np.pi, 0.0), (0.0, np.pi)]
    pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in tri_pts)
    out.append(f'<polygon points="{pts}" fill="#f4f4f4" stroke="#555" '
               'stroke-width="1"/>')
    half = np.pi / 2.0
    loci = [((half, 0.0), (half, half)), ((0.0, half), (half, half)),
            ((half, 0.0), (0.0, half))]
    for (a1, b1), (a2, b2) in loci:
        out.append(f'<line x1="{_fmt(sx(a1))}" y1="{_fmt(sy(b1))}" '
                   f'x2="{_fmt(sx(a2))}" y2="{_fmt(sy(b2))}" '
                   'stroke="#999" stroke-width="0.8" stroke-dasharray="4 3"/>')

    cell = h * sc * 0.92
    for rec in records:
        color = VERDICT_COLORS.get(rec.verdict, "#999")
        out.append(
            f'<rect x="{_fmt(sx(rec.beta1) - cell / 2)}" '
            f'y="{_fmt(sy(rec.beta2) - cell / 2)}" '
            f'width="{_fmt(cell)}" height="{_fmt(cell)}" fill="{color}"/>')

    for i, (name, color) in enumerate(VERDICT_COLORS.items()):
        y = pad + 18.0 * i
        out.append(f'<rect x="{size - 150:.0f}" y="{y:.1f}" width="12" '
                   f'height="12" fill="{color}"/>')
        out.append(f'<text x="{size - 132:.0f}" y="{y + 11:.1f}" '
                   f'font-size="13" font-family="sans-serif">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
