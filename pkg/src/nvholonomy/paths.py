"""Piecewise-smooth paths on the orientation sphere.

A path is a sequence of segments, each a map ``s -> (theta(s), phi(s))`` on
``s in [0, 1]``. Segments carry their own derivatives so that callers never
need to difference them numerically.

Path files are YAML::

    label: square
    units: rad            # or deg; applies to every angle below
    segments:
      - latitude: {theta: pi/3, phi_start: 0, phi_end: pi/3}
      - longitude: {phi: pi/3, theta_start: pi/3, theta_end: 2*pi/3}
      - parametric:
          points: [[1.0, 0.0], [1.1, 0.5], [1.0, 1.0]]   # (theta, phi) pairs

Angles may be numbers or arithmetic expressions in ``pi``. Parametric
segments pass a natural cubic spline through the points at equally spaced
``s``.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import yaml
from scipy.interpolate import CubicSpline

Curve = Callable[[np.ndarray], np.ndarray]

JUNCTION_TOL = 1e-12


class PathError(ValueError):
    pass


def _const(value: float) -> Curve:
    return lambda s: np.full(np.shape(s), float(value))


def _linear(start: float, end: float) -> Curve:
    return lambda s: start + (end - start) * np.asarray(s, dtype=float)


def wrap_angle(x):
    """Map angles into ``(-pi, pi]``."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


@dataclass(frozen=True)
class Segment:
    theta: Curve
    phi: Curve
    dtheta: Curve
    dphi: Curve
    label: str = ""

    def at(self, s) -> tuple[np.ndarray, np.ndarray]:
        s = np.asarray(s, dtype=float)
        return self.theta(s), self.phi(s)

    def start(self) -> tuple[float, float]:
        t, p = self.at(0.0)
        return float(t), float(p)

    def end(self) -> tuple[float, float]:
        t, p = self.at(1.0)
        return float(t), float(p)

    def reversed(self) -> Segment:
        return Segment(
            theta=lambda s, f=self.theta: f(1.0 - np.asarray(s, dtype=float)),
            phi=lambda s, f=self.phi: f(1.0 - np.asarray(s, dtype=float)),
            dtheta=lambda s, f=self.dtheta: -f(1.0 - np.asarray(s, dtype=float)),
            dphi=lambda s, f=self.dphi: -f(1.0 - np.asarray(s, dtype=float)),
            label=f"reverse({self.label})",
        )


def latitude(theta: float, phi_start: float, phi_end: float) -> Segment:
    """Constant polar angle, azimuth swept linearly."""
    return Segment(
        theta=_const(theta),
        phi=_linear(phi_start, phi_end),
        dtheta=_const(0.0),
        dphi=_const(phi_end - phi_start),
        label=f"latitude({theta:.6g}, {phi_start:.6g}, {phi_end:.6g})",
    )


def longitude(phi: float, theta_start: float, theta_end: float) -> Segment:
    """Constant azimuth, polar angle swept linearly."""
    return Segment(
        theta=_linear(theta_start, theta_end),
        phi=_const(phi),
        dtheta=_const(theta_end - theta_start),
        dphi=_const(0.0),
        label=f"longitude({phi:.6g}, {theta_start:.6g}, {theta_end:.6g})",
    )


def parametric(points, label: str = "parametric") -> Segment:
    """Cubic spline through ``(theta, phi)`` samples at equally spaced ``s``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise PathError("parametric segment needs at least two (theta, phi) points")
    s = np.linspace(0.0, 1.0, len(pts))
    bc = "natural" if len(pts) > 2 else "not-a-knot"
    th = CubicSpline(s, pts[:, 0], bc_type=bc)
    ph = CubicSpline(s, pts[:, 1], bc_type=bc)
    # spline values at the knots are exact, so junction continuity survives
    return Segment(theta=th, phi=ph, dtheta=th.derivative(), dphi=ph.derivative(), label=label)


@dataclass(frozen=True)
class SpherePath:
    segments: tuple[Segment, ...]
    label: str = ""

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise PathError("path has no segments")
        object.__setattr__(self, "segments", segs)
        grid = np.linspace(0.0, 1.0, 65)
        for k, seg in enumerate(segs):
            th = seg.theta(grid)
            if np.any(th < -JUNCTION_TOL) or np.any(th > np.pi + JUNCTION_TOL):
                raise PathError(f"segment {k} leaves theta in [0, pi]")
        for k in range(len(segs) - 1):
            if not _same_point(segs[k].end(), segs[k + 1].start()):
                raise PathError(
                    f"segments {k} and {k + 1} do not meet: {segs[k].end()} vs {segs[k + 1].start()}"
                )

    def start(self) -> tuple[float, float]:
        return self.segments[0].start()

    def end(self) -> tuple[float, float]:
        return self.segments[-1].end()

    def is_loop(self) -> bool:
        return _same_point(self.start(), self.end())

    def reversed(self) -> SpherePath:
        return SpherePath(
            tuple(seg.reversed() for seg in reversed(self.segments)),
            label=f"reverse({self.label})",
        )

    def then(self, other: SpherePath) -> SpherePath:
        """This path followed by ``other``."""
        return SpherePath(self.segments + other.segments, label=f"{self.label}+{other.label}")


def concat(*paths: SpherePath) -> SpherePath:
    out = paths[0]
    for p in paths[1:]:
        out = out.then(p)
    return out


def _same_point(a, b, tol: float = JUNCTION_TOL) -> bool:
    # phi only matters away from the poles and is periodic
    if abs(a[0] - b[0]) > tol:
        return False
    if min(a[0], np.pi - a[0]) <= tol:
        return True
    return abs(float(wrap_angle(a[1] - b[1]))) <= tol


def circle(theta: float = np.pi / 3, phi_start: float = 0.0, turns: float = 1.0) -> SpherePath:
    return SpherePath((latitude(theta, phi_start, phi_start + 2 * np.pi * turns),), label="circle")


def square(
    theta_lo: float = np.pi / 3,
    theta_hi: float = 2 * np.pi / 3,
    phi_lo: float = 0.0,
    phi_hi: float = np.pi / 3,
) -> SpherePath:
    """Four constant-latitude/longitude legs through
    ``(phi, theta) = (lo, lo) -> (hi, lo) -> (hi, hi) -> (lo, hi) -> (lo, lo)``."""
    return SpherePath(
        (
            latitude(theta_lo, phi_lo, phi_hi),
            longitude(phi_hi, theta_lo, theta_hi),
            latitude(theta_hi, phi_hi, phi_lo),
            longitude(phi_lo, theta_hi, theta_lo),
        ),
        label="square",
    )


def longitude_sweep(sweep: float, phi: float = 0.0, theta_start: float = np.pi / 4) -> SpherePath:
    return SpherePath((longitude(phi, theta_start, theta_start + sweep),), label="longitude")


BUILTIN_PATHS: dict[str, Callable[[], SpherePath]] = {
    "circle": circle,
    "square": square,
}


# --- path files -------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_NAMES = {"pi": math.pi}
_FUNCS = {"sqrt": math.sqrt}


def parse_angle(value) -> float:
    """Evaluate a number or an arithmetic expression such as ``"2*pi/3"``."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, str):
        raise PathError(f"cannot read angle from {value!r}")
    try:
        tree = ast.parse(value.strip(), mode="eval")
        return float(_eval_node(tree.body))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise PathError(f"bad angle expression {value!r}: {exc}") from None


def _eval_node(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_node(node.operand))
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise PathError(f"unsupported expression element: {ast.dump(node)}")


_SEGMENT_KEYS = {
    "latitude": ("theta", "phi_start", "phi_end"),
    "longitude": ("phi", "theta_start", "theta_end"),
}


def path_from_dict(doc: dict) -> SpherePath:
    if not isinstance(doc, dict) or "segments" not in doc:
        raise PathError("path document needs a 'segments' list")
    unknown = set(doc) - {"label", "units", "segments"}
    if unknown:
        raise PathError(f"unknown path keys: {sorted(unknown)}")
    units = doc.get("units", "rad")
    if units not in ("rad", "deg"):
        raise PathError(f"units must be 'rad' or 'deg', got {units!r}")
    scale = math.pi / 180 if units == "deg" else 1.0

    segments = []
    for k, entry in enumerate(doc["segments"]):
        if not isinstance(entry, dict) or len(entry) != 1:
            raise PathError(f"segment {k} must be a single-key mapping")
        (kind, args), = entry.items()
        if kind in _SEGMENT_KEYS:
            keys = _SEGMENT_KEYS[kind]
            if not isinstance(args, dict) or set(args) != set(keys):
                raise PathError(f"segment {k} ({kind}) needs exactly {keys}")
            vals = [parse_angle(args[key]) * scale for key in keys]
            segments.append(latitude(*vals) if kind == "latitude" else longitude(*vals))
        elif kind == "parametric":
            if not isinstance(args, dict) or set(args) != {"points"}:
                raise PathError(f"segment {k} (parametric) needs exactly 'points'")
            pts = [[parse_angle(a) * scale, parse_angle(b) * scale] for a, b in args["points"]]
            segments.append(parametric(pts, label=f"parametric[{k}]"))
        else:
            raise PathError(f"segment {k}: unknown kind {kind!r}")
    return SpherePath(tuple(segments), label=str(doc.get("label", "file")))


def load_path(source: str | Path) -> SpherePath:
    """Load a path file, or build a builtin path by name (``circle``, ``square``)."""
    if str(source) in BUILTIN_PATHS:
        return BUILTIN_PATHS[str(source)]()
    path = Path(source)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise PathError(f"{path}: {exc}") from None
    return path_from_dict(doc)
