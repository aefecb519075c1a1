"""Deterministic emitters shared by the command-line front end.

CSV uses '.' decimals, ',' separators, '\n' line endings and 17
significant digits; JSON is emitted with sorted keys and a trailing
newline; SVG is a tiny hand-rolled canvas (polylines, circle markers
and text labels only).  Identical inputs produce identical bytes,
which the golden tests rely on.
"""

import json
import math

import numpy as np


def fmt_float(x):
    """Locale-independent decimal form with 17 significant digits."""
    v = float(x)
    if not math.isfinite(v):
        raise ValueError("refusing to serialize non-finite value %r" % (v,))
    return "%.17g" % v


def csv_bytes(header, rows):
    """Encode a table; numeric cells go through fmt_float, strings are
    taken verbatim (they must not contain separators)."""
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError("row width %d != header width %d"
                             % (len(row), len(header)))
        cells = []
        for c in row:
            if isinstance(c, str):
                if "," in c or "\n" in c:
                    raise ValueError("string cell %r needs quoting" % (c,))
                cells.append(c)
            else:
                cells.append(fmt_float(c))
        lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode("ascii")


def write_csv(path, header, rows):
    with open(path, "wb") as fh:
        fh.write(csv_bytes(header, rows))


def jsonable(obj):
    """Recursively convert numpy scalars/arrays so json.dumps accepts
    the object."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def json_bytes(obj):
    return (json.dumps(jsonable(obj), indent=2, sort_keys=True,
                       allow_nan=False) + "\n").encode("ascii")


def write_json(path, obj):
    with open(path, "wb") as fh:
        fh.write(json_bytes(obj))


# ---------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------

def _px(v):
    return "%.2f" % float(v)


def _escape(s):
    return (s.replace("&", "&amp;").replace("<", "&lt;")
             .replace(">", "&gt;"))


class Projector:
    """Affine map from a data window onto the pixel canvas, y flipped."""

    def __init__(self, lo, hi, width, height, margin=42.0):
        self.lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        span = hi - self.lo
        span[span <= 0] = 1.0
        self.sx = (width - 2.0 * margin) / span[0]
        self.sy = (height - 2.0 * margin) / span[1]
        self.margin = margin
        self.height = height

    def __call__(self, u):
        x = self.margin + (u[0] - self.lo[0]) * self.sx
        y = self.height - self.margin - (u[1] - self.lo[1]) * self.sy
        return x, y

    @classmethod
    def fit(cls, point_sets, width, height, pad=0.08):
        pts = np.vstack([np.asarray(p, dtype=float).reshape(-1, 2)
                         for p in point_sets if len(p)])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        span = np.maximum(hi - lo, 1e-9)
        return cls(lo - pad * span, hi + pad * span, width, height)


class SvgCanvas:
    """Minimal SVG writer: polylines, circles and text, nothing else."""

    def __init__(self, width=720, height=560):
        self.width = int(width)
        self.height = int(height)
        self._parts = []

    def polyline(self, pts, stroke="#333333", width=1.2, dash=None):
        if len(pts) < 2:
            return
        coords = " ".join("%s,%s" % (_px(x), _px(y)) for x, y in pts)
        extra = "" if dash is None else ' stroke-dasharray="%s"' % dash
        self._parts.append(
            '<polyline fill="none" stroke="%s" stroke-width="%s"%s '
            'points="%s"/>' % (stroke, _px(width), extra, coords))

    def circle(self, xy, r=3.5, fill="#000000", stroke="none"):
        self._parts.append(
            '<circle cx="%s" cy="%s" r="%s" fill="%s" stroke="%s"/>'
            % (_px(xy[0]), _px(xy[1]), _px(r), fill, stroke))

    def text(self, xy, s, size=12, fill="#333333", anchor="start"):
        self._parts.append(
            '<text x="%s" y="%s" font-size="%s" fill="%s" '
            'text-anchor="%s" font-family="sans-serif">%s</text>'
            % (_px(xy[0]), _px(xy[1]), int(size), fill, anchor,
               _escape(s)))

    def tostring(self):
        head = ('<svg xmlns="http://www.w3.org/2000/svg" width="%d" '
                'height="%d" viewBox="0 0 %d %d">'
                % (self.width, self.height, self.width, self.height))
        return head + "".join(self._parts) + "</svg>\n"

    def write(self, path):
        with open(path, "wb") as fh:
            fh.write(self.tostring().encode("ascii"))
