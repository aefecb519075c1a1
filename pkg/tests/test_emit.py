"""Deterministic serialization helpers: number formatting, CSV/JSON
byte stability, and the minimal SVG canvas."""

import json
import math

import numpy as np
import pytest

from hyperlaw.emit import (Projector, SvgCanvas, csv_bytes, fmt_float,
                           json_bytes, jsonable)


def test_fmt_float_round_trips_17_digits():
    rng = np.random.default_rng(7)
    vals = list(rng.standard_normal(200) * 10.0 ** rng.integers(
        -200, 200, size=200))
    vals += [0.0, -0.0, 1.0 / 3.0, 0.1, 2.0 ** -1074, math.pi]
    for v in vals:
        s = fmt_float(v)
        assert float(s) == float(v), v
        assert "e" in s or "." in s or float(s) == int(float(s))


def test_fmt_float_rejects_non_finite():
    for bad in (math.inf, -math.inf, math.nan):
        with pytest.raises(ValueError):
            fmt_float(bad)


def test_csv_bytes_exact():
    out = csv_bytes(("a", "b", "label"),
                    [(1.0, 0.5, "x"), (np.float64(-2.0), 1e-3, "y")])
    assert out == b"a,b,label\n1,0.5,x\n-2,0.001,y\n"


def test_csv_bytes_validates_rows():
    with pytest.raises(ValueError):
        csv_bytes(("a", "b"), [(1.0,)])
    with pytest.raises(ValueError):
        csv_bytes(("a",), [("has,comma",)])


def test_jsonable_preserves_python_bools():
    # bool is a subclass of int; it must not be serialized as 0/1
    assert jsonable(True) is True
    assert jsonable({"flag": np.bool_(False)}) == {"flag": False}
    doc = json.loads(json_bytes({"flag": True}))
    assert doc["flag"] is True


def test_jsonable_converts_numpy():
    obj = {"arr": np.arange(3.0), "i": np.int64(4), "x": np.float64(0.5),
           "nested": [np.array([[1.0, 2.0]]), (np.int32(1),)]}
    out = jsonable(obj)
    assert out == {"arr": [0.0, 1.0, 2.0], "i": 4, "x": 0.5,
                   "nested": [[[1.0, 2.0]], [1]]}
    json.dumps(out, allow_nan=False)


def test_json_bytes_sorted_and_terminated():
    out = json_bytes({"b": 1, "a": 2})
    assert out.endswith(b"\n")
    assert out.index(b'"a"') < out.index(b'"b"')
    with pytest.raises(ValueError):
        json_bytes({"x": math.nan})


def test_svg_canvas_elements():
    cv = SvgCanvas(200, 100)
    cv.polyline([(0.0, 0.0), (10.0, 5.0), (20.0, 0.0)])
    cv.polyline([(0.0, 0.0)])  # degenerate: dropped
    cv.circle((5.0, 5.0), r=2.0, fill="#ff0000")
    cv.text((1.0, 99.0), "a<b & c>d")
    s = cv.tostring()
    assert s.startswith('<svg xmlns="http://www.w3.org/2000/svg"')
    assert s.endswith("</svg>\n")
    assert s.count("<polyline") == 1
    assert s.count("<circle") == 1
    assert "a&lt;b &amp; c&gt;d" in s
    s.encode("ascii")


def test_projector_maps_and_flips():
    proj = Projector((0.0, 0.0), (2.0, 4.0), 200, 100, margin=10.0)
    x0, y0 = proj((0.0, 0.0))
    x1, y1 = proj((2.0, 4.0))
    assert (x0, y0) == (10.0, 90.0)
    assert (x1, y1) == (200.0 - 10.0, 10.0)
    fit = Projector.fit([np.array([[0.0, 0.0], [1.0, 1.0]])], 200, 100)
    for u in ([0.0, 0.0], [1.0, 1.0], [0.5, 0.5]):
        x, y = fit(u)
        assert 0 <= x <= 200 and 0 <= y <= 100
