"""Command-line front end.

Single JSON configuration document (versioned ``schema: 1``) plus one
of six subcommands: analyze, hugoniot, levelset, t4-search, transform,
figure8.  All file outputs land under ``--out DIR`` (or the config's
``out``) and are byte-reproducible for a fixed config and seed.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 when ``t4-search --expect-none`` finds a passing candidate.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import emit
from .errors import (ConfigurationError, DomainError, EmptyLevelError,
                     DecompositionError, RankOneConnectionError)
from .eigen import sector_search
from .hypotheses import hypothesis_report
from .levelsets import decompose, qtilde_extrema, trace_level_set
from .shocks import dissipation_profile, liu_lax_check, trace_hugoniot
from .systems import make_system, tilt
from .tn import t4_search
from .transform import to_eulerian, to_lagrangian

_TOP_KEYS = {"schema", "system", "window", "tilt_grid", "level_grid",
             "budget", "seed", "out", "emit", "hugoniot", "levelset",
             "search", "transform", "figure8"}

_HUGONIOT_HEADER = ("s", "u1", "u2", "sigma", "rh_residual",
                    "dissipation_direct", "dissipation_integral")
_LEVELSET_HEADER = ("t", "u1", "u2", "qtilde", "arc-label")


# ---------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------

def load_config(path):
    """Parse and structurally check one config document."""
    try:
        with open(path, "rb") as fh:
            blob = json.load(fh)
    except OSError as e:
        raise ConfigurationError("cannot read config %s: %s" % (path, e))
    except json.JSONDecodeError as e:
        raise ConfigurationError("config is not valid JSON: %s" % (e,))
    if not isinstance(blob, dict):
        raise ConfigurationError("config must be a JSON object")
    if blob.get("schema") != 1:
        raise ConfigurationError("config must declare \"schema\": 1")
    unknown = sorted(set(blob) - _TOP_KEYS)
    if unknown:
        raise ConfigurationError("unknown config keys: %s" % (unknown,))
    if not isinstance(blob.get("system"), dict):
        raise ConfigurationError("config needs a system record")
    if "budget" in blob and int(blob["budget"]) < 1:
        raise ConfigurationError("budget must be >= 1")
    return blob


def _point(val, what):
    arr = np.asarray(val, dtype=float)
    if arr.shape != (2,) or not np.all(np.isfinite(arr)):
        raise ConfigurationError("%s must be a finite pair, got %r"
                                 % (what, val))
    return arr


def _region(blob, system):
    """Analysis window, defaulting to the system's own; explicit
    windows must sit inside the domain."""
    w = blob.get("window")
    if w is None:
        lo, hi = system.window
        return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    if not isinstance(w, (list, tuple)) or len(w) != 2:
        raise ConfigurationError("window must be [[lo1, lo2], [hi1, hi2]]")
    lo = _point(w[0], "window")
    hi = _point(w[1], "window")
    if not np.all(lo < hi):
        raise ConfigurationError("window needs lo < hi componentwise")
    corners = (lo, hi, np.array([lo[0], hi[1]]), np.array([hi[0], lo[1]]))
    for corner in corners:
        if not system.contains(corner):
            raise ConfigurationError("window corner %s is outside the "
                                     "system domain" % (corner.tolist(),))
    return lo, hi


def _emit_flags(blob):
    flags = {"csv": True, "json": True, "svg": True}
    for key, val in (blob.get("emit") or {}).items():
        if key not in flags:
            raise ConfigurationError("unknown emit flag %r" % (key,))
        flags[key] = bool(val)
    return flags


def _wrote(outdir, name):
    print("wrote %s" % os.path.join(outdir, name))


# ---------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------

def _cmd_analyze(blob, system, outdir, flags, args):
    rep = hypothesis_report(system, region=_region(blob, system),
                            tilt_grid=blob.get("tilt_grid"),
                            level_grid=blob.get("level_grid"))
    doc = rep.as_dict()
    doc["schema"] = 1
    if flags["json"]:
        emit.write_json(os.path.join(outdir, "analyze_report.json"), doc)
        _wrote(outdir, "analyze_report.json")
    for name, group in (("H1", rep.h1), ("H2", rep.h2)):
        for key in ("i", "ii", "iii", "iv", "v"):
            print("%s(%s): %s" % (name, key, group[key].status))
    if rep.recommendation:
        print("recommendation: %s" % rep.recommendation)
    return 0


def _cmd_hugoniot(blob, system, outdir, flags, args):
    sec = blob.get("hugoniot")
    if not sec:
        raise ConfigurationError("the hugoniot subcommand needs a "
                                 "\"hugoniot\" config section")
    points = [_point(p, "base_points") for p in sec.get("base_points", [])]
    if not points:
        raise ConfigurationError("hugoniot.base_points must be nonempty")
    families = sec.get("families", [1, 2])
    span = tuple(float(v) for v in sec.get("span", (-2.0, 2.0)))
    step = float(sec.get("step", 0.02))
    for bi, u0 in enumerate(points):
        for fam in families:
            if fam not in (1, 2):
                raise ConfigurationError("families must contain 1 or 2")
            curve = trace_hugoniot(system, u0, int(fam), span=span,
                                   step=step)
            check = liu_lax_check(system, curve)
            prof = dissipation_profile(system, curve)
            rows = [(sm.s, sm.u[0], sm.u[1], sm.sigma, sm.rh_residual,
                     d.direct, d.integral)
                    for sm, d in zip(curve.samples, prof)]
            name = "hugoniot_b%d_f%d.csv" % (bi, fam)
            if flags["csv"]:
                emit.write_csv(os.path.join(outdir, name),
                               _HUGONIOT_HEADER, rows)
                _wrote(outdir, name)
            print("hugoniot b%d f%d: %d samples, liu %s, lax %s"
                  % (bi, fam, len(rows),
                     "ok" if check.liu_ok else "violated",
                     "ok" if check.lax_ok else "violated"))
    return 0


def _cmd_levelset(blob, system, outdir, flags, args):
    sec = blob.get("levelset") or {}
    tilts = sec.get("tilts") or blob.get("tilt_grid")
    levels = sec.get("levels") or blob.get("level_grid")
    if not tilts:
        raise ConfigurationError("levelset needs tilts (section or "
                                 "tilt_grid)")
    if not levels:
        raise ConfigurationError("levelset needs levels (section or "
                                 "level_grid)")
    region = _region(blob, system)
    vectors = sector_search(system, region)
    sectors = vectors if vectors else None
    base_note = None if sectors else vectors.message
    curves = []
    for ti, cval in enumerate(tilts):
        c = _point(cval, "tilts")
        tl = tilt(system, c)
        for li, level in enumerate(levels):
            curve = trace_level_set(tl, float(level), window=region)
            labels, counts, note = None, None, base_note
            if sectors is not None:
                try:
                    dec = decompose(curve, tl, sectors)
                    labels = dec.labels
                    counts = {a: len(dec.arc(a))
                              for a in ("I", "II", "III", "IV")}
                except DecompositionError as e:
                    note = str(e)
            crit = qtilde_extrema(tl, curve)
            rows = [(sm.t, sm.u[0], sm.u[1], tl.q(sm.u),
                     labels[i] if labels else "")
                    for i, sm in enumerate(curve.samples)]
            name = "levelset_t%d_l%d.csv" % (ti, li)
            if flags["csv"]:
                emit.write_csv(os.path.join(outdir, name),
                               _LEVELSET_HEADER, rows)
                _wrote(outdir, name)
            curves.append({
                "tilt": [float(c[0]), float(c[1])],
                "level": float(level),
                "closed": bool(curve.closed),
                "clipped": bool(curve.clipped),
                "n_samples": len(curve.samples),
                "sectors": (None if sectors is None else
                            {"w1": sectors.w1, "w2": sectors.w2}),
                "sector_note": note,
                "arc_counts": counts,
                "critical_points": [
                    {"t": cp.t, "u": cp.u, "value": cp.value,
                     "kind": cp.kind,
                     "lagrange_residual": cp.lagrange_residual}
                    for cp in crit],
            })
            print("levelset t%d l%d: %d samples, %s, %d critical points"
                  % (ti, li, len(rows),
                     "closed" if curve.closed else "clipped", len(crit)))
    if flags["json"]:
        doc = {"schema": 1, "system": system.label, "curves": curves}
        emit.write_json(os.path.join(outdir, "levelset.json"), doc)
        _wrote(outdir, "levelset.json")
    return 0


def _cmd_t4_search(blob, system, outdir, flags, args):
    sec = blob.get("search") or {}
    if "seed" not in sec and "seed" not in blob:
        raise ConfigurationError("a search needs an explicit seed")
    strategy = sec.get("strategy", "reduced")
    budget = int(sec.get("budget", blob.get("budget", 10000)))
    seed = int(sec.get("seed", blob.get("seed", 0)))
    kwargs = {}
    for key in ("tilts", "levels", "q_levels", "n_levels",
                "solver_starts"):
        if key in sec:
            kwargs[key] = sec[key]
    rep = t4_search(system, strategy=strategy, budget=budget, seed=seed,
                    timing=args.timing, **kwargs)
    doc = rep.as_dict()
    doc["schema"] = 1
    if flags["json"]:
        emit.write_json(os.path.join(outdir, "search_report.json"), doc)
        _wrote(outdir, "search_report.json")
    best = ("none" if doc["best_residual"] is None
            else "%.6g" % doc["best_residual"])
    print("t4-search %s: examined %d, sign-rejected %d, solver attempts "
          "%d, best residual %s" % (strategy, rep.examined,
                                    rep.sign_rejected, rep.solver_attempts,
                                    best))
    if rep.found:
        print("passing candidate found")
        if args.expect_none:
            return 3
    return 0


def _cmd_transform(blob, system, outdir, flags, args):
    sec = blob.get("transform") or {}
    direction = sec.get("direction", "to-lagrangian")
    strip = sec.get("strip")
    if strip is not None:
        strip = (float(strip[0]), float(strip[1]))
    if direction == "to-lagrangian":
        if strip is None:
            raise ConfigurationError("to-lagrangian needs a strip "
                                     "[eps, M] with 0 < eps < M")
        target, record = to_lagrangian(system, strip)
    elif direction == "to-eulerian":
        target, record = to_eulerian(system, strip)
    else:
        raise ConfigurationError("transform direction must be "
                                 "to-lagrangian or to-eulerian")
    doc = {"schema": 1, "system": record.as_record()}
    if flags["json"]:
        emit.write_json(os.path.join(outdir, "transformed_system.json"),
                        doc)
        _wrote(outdir, "transformed_system.json")
    print("transform %s: %s -> %s" % (direction, system.label,
                                      target.label))
    return 0


def _flux_zeros(tl, curve, level):
    """Zeros of the tilted entropy flux along the level curve, polished
    by a two-residual Newton iteration; tangential (double) zeros are
    picked up from extremal points with value ~ 0."""
    qs = np.array([tl.q(sm.u) for sm in curve.samples])
    scale = max(1.0, float(np.max(np.abs(qs))))
    pts = []
    for i, j in curve.segment_pairs():
        a, b = qs[i], qs[j]
        if a == 0.0:
            pts.append(np.array(curve.samples[i].u, dtype=float))
        elif a * b < 0.0:
            x = (curve.samples[i].u
                 + (a / (a - b)) * (curve.samples[j].u
                                    - curve.samples[i].u))
            pts.append(_zero_newton(tl, np.array(x, dtype=float), level))
    for cp in qtilde_extrema(tl, curve):
        if abs(cp.value) <= 1e-9 * scale:
            pts.append(np.asarray(cp.u, dtype=float))
    kept = []
    for p in pts:
        if all(np.linalg.norm(p - k) > 1e-6 for k in kept):
            kept.append(p)
    center = np.mean(curve.states(), axis=0)
    kept.sort(key=lambda p: np.arctan2(p[1] - center[1], p[0] - center[0]))
    return kept


def _zero_newton(tl, x, level):
    for _ in range(40):
        res = np.array([tl.eta(x) - level, tl.q(x)])
        if np.max(np.abs(res)) < 1e-13 * max(1.0, abs(level)):
            break
        jac = np.vstack([tl.grad_eta(x), tl.grad_q(x)])
        try:
            x = x - np.linalg.solve(jac, res)
        except np.linalg.LinAlgError:
            break
    return x


def _figure8_geometry(system, sec, region):
    """Level curve, its flux extrema and flux zeros, and both shock
    families through each zero."""
    c = _point(sec.get("tilt", (-2.0, 0.0)), "figure8.tilt")
    level = float(sec.get("level", 2.0))
    span = tuple(float(v) for v in sec.get("shock_span", (-0.5, 0.5)))
    step = float(sec.get("shock_step", 0.02))
    tl = tilt(system, c)
    curve = trace_level_set(tl, level, window=region)
    extrema = qtilde_extrema(tl, curve)
    zeros = _flux_zeros(tl, curve, level)
    branches = []
    for z in zeros:
        for fam in (1, 2):
            cv = trace_hugoniot(system, z, fam, span=span, step=step)
            sv = cv.s_values()
            st = cv.states()
            branches.append((fam, st[sv <= 0.0]))
            branches.append((fam, st[sv >= 0.0]))
    return {"tilt": c, "level": level, "curve": curve.states(),
            "closed": curve.closed, "extrema": extrema, "zeros": zeros,
            "branches": branches}


def _render_figure8(geo, path):
    canvas = emit.SvgCanvas(720, 560)
    sets = [geo["curve"]] + [st for _, st in geo["branches"] if len(st)]
    proj = emit.Projector.fit(sets, canvas.width, canvas.height)
    pts = [proj(u) for u in geo["curve"]]
    if geo["closed"] and len(pts) > 1:
        pts.append(pts[0])
    canvas.polyline(pts, stroke="#333333", width=1.6)
    for fam, st in geo["branches"]:
        color = "#1f77b4" if fam == 1 else "#d62728"
        canvas.polyline([proj(u) for u in st], stroke=color, width=1.3)
    for cp in geo["extrema"]:
        canvas.circle(proj(cp.u), r=4.0, fill="#ffffff", stroke="#333333")
    for i, z in enumerate(geo["zeros"]):
        xy = proj(z)
        canvas.circle(xy, r=3.2, fill="#000000")
        canvas.text((xy[0] + 6.0, xy[1] - 6.0), "q=0 #%d" % (i + 1),
                    size=11)
    canvas.text((16.0, 24.0),
                "level {eta + c.U = %g}, c = (%g, %g)"
                % (geo["level"], geo["tilt"][0], geo["tilt"][1]), size=13)
    canvas.text((16.0, 42.0),
                "open circles: flux extrema; filled: flux zeros with "
                "both shock families", size=11)
    canvas.write(path)


def _cmd_figure8(blob, system, outdir, flags, args):
    geo = _figure8_geometry(system, blob.get("figure8") or {},
                            _region(blob, system))
    if flags["svg"]:
        _render_figure8(geo, os.path.join(outdir, "figure8.svg"))
        _wrote(outdir, "figure8.svg")
    print("figure8: level %g, %s curve, %d flux extrema, %d flux zeros, "
          "%d shock branches" % (geo["level"],
                                 "closed" if geo["closed"] else "clipped",
                                 len(geo["extrema"]), len(geo["zeros"]),
                                 len(geo["branches"])))
    return 0


_HANDLERS = {
    "analyze": _cmd_analyze,
    "hugoniot": _cmd_hugoniot,
    "levelset": _cmd_levelset,
    "t4-search": _cmd_t4_search,
    "transform": _cmd_transform,
    "figure8": _cmd_figure8,
}


# ---------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(prog="hyperlaw",
                     description="conservation-law analysis toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in sorted(_HANDLERS):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True,
                        help="JSON configuration document (schema 1)")
        sp.add_argument("--out", default=None,
                        help="output directory (default: config's out "
                             "field, else '.')")
        if name == "t4-search":
            sp.add_argument("--expect-none", action="store_true",
                            dest="expect_none",
                            help="exit 3 if a passing candidate appears")
            sp.add_argument("--timing", action="store_true",
                            help="include wall time in the report")
    return parser


def run_cli(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print("error: %s" % e, file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as e:
        return int(e.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1
    try:
        blob = load_config(args.config)
        system = make_system(blob["system"])
        outdir = args.out or blob.get("out") or "."
        os.makedirs(outdir, exist_ok=True)
        return _HANDLERS[args.command](blob, system, outdir,
                                       _emit_flags(blob), args)
    except (ConfigurationError, DomainError) as e:
        print("configuration error: %s" % e, file=sys.stderr)
        return 1
    except (EmptyLevelError, RankOneConnectionError) as e:
        print("numerical failure: %s" % e, file=sys.stderr)
        return 2
    except ValueError as e:
        print("configuration error: %s" % e, file=sys.stderr)
        return 1
    except (ArithmeticError, RuntimeError) as e:
        print("numerical failure: %s" % e, file=sys.stderr)
        return 2


def main():
    raise SystemExit(run_cli())
