"""Scalar density grids: I/O, synthetic mixtures, slicing, smoothing, normalization."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage
from scipy.integrate import trapezoid


class GridFormatError(ValueError):
    """Raised when a grid file cannot be parsed; messages carry the line number."""


@dataclass(frozen=True)
class SliceFrame:
    """Embedding of a 2D slice in 3D: ``p = origin + x * u + y * v``."""

    origin: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name in ("origin", "u", "v"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    @property
    def normal(self) -> np.ndarray:
        return np.cross(self.u, self.v)

    def lift(self, xy) -> np.ndarray:
        xy = np.atleast_2d(np.asarray(xy, dtype=float)).reshape(-1, 2)
        return self.origin + xy[:, :1] * self.u + xy[:, 1:2] * self.v

    def to_dict(self) -> dict:
        return {"origin": self.origin.tolist(), "u": self.u.tolist(), "v": self.v.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "SliceFrame":
        return cls(data["origin"], data["u"], data["v"])


@dataclass(frozen=True)
class ScalarField:
    """Values on a regular axis-aligned grid.

    ``values[i, j(, k)]`` sits at ``origin + (i, j(, k)) * spacing``.
    """

    values: np.ndarray
    spacing: tuple
    origin: tuple = None
    frame: SliceFrame | None = field(default=None, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim not in (2, 3):
            raise ValueError("fields are 2D or 3D")
        spacing = np.broadcast_to(np.asarray(self.spacing, dtype=float), (values.ndim,)).copy()
        if np.any(spacing <= 0):
            raise ValueError("grid spacing must be strictly positive on every axis")
        origin = np.zeros(values.ndim) if self.origin is None else np.asarray(self.origin, float)
        if origin.shape != (values.ndim,):
            raise ValueError("origin must have one coordinate per axis")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @property
    def dims(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def axes(self) -> list[np.ndarray]:
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.shape)]

    def coordinates(self) -> np.ndarray:
        """Physical coordinates of every grid point, shape ``shape + (dims,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.origin.copy(), self.origin + self.spacing * (np.array(self.shape) - 1)

    def integral(self) -> float:
        return integrate(self.values, self.spacing)

    def with_values(self, values) -> "ScalarField":
        return replace(self, values=np.asarray(values, dtype=float))

    def __mul__(self, c: float) -> "ScalarField":
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        d = {
            "dims": self.dims,
            "shape": list(self.shape),
            "spacing": self.spacing.tolist(),
            "origin": self.origin.tolist(),
            "values": self.values.reshape(-1).tolist(),
        }
        if self.frame is not None:
            d["frame"] = self.frame.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ScalarField":
        try:
            dims = int(data["dims"])
            shape = tuple(int(n) for n in data["shape"])
            values = np.asarray(data["values"], dtype=float)
            spacing = data["spacing"]
            origin = data.get("origin")
        except (KeyError, TypeError, ValueError) as exc:
            raise GridFormatError(f"json-grid: missing or malformed field: {exc}") from exc
        if len(shape) != dims:
            raise GridFormatError(f"json-grid: shape {shape} does not have {dims} axes")
        if values.size != math.prod(shape):
            raise GridFormatError(
                f"json-grid: shape {shape} needs {math.prod(shape)} values, got {values.size}"
            )
        if np.any(np.asarray(spacing, dtype=float) <= 0):
            raise GridFormatError("json-grid: non-positive spacing")
        frame = SliceFrame.from_dict(data["frame"]) if data.get("frame") else None
        return cls(values.reshape(shape), spacing, origin, frame)


@dataclass(frozen=True)
class GaussianComponent:
    center: tuple
    variance: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError("Gaussian variance must be positive")
        if self.amplitude <= 0:
            raise ValueError("Gaussian amplitude must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianComponent":
        return cls(data["center"], data["variance"], data.get("amplitude", 1.0))

    def to_dict(self) -> dict:
        return {"center": list(self.center), "variance": self.variance, "amplitude": self.amplitude}


def integrate(values: np.ndarray, spacing) -> float:
    """Trapezoidal integral over every axis."""
    out = np.asarray(values, dtype=float)
    for h in spacing:
        out = trapezoid(out, dx=float(h), axis=0)
    return float(out)


def gaussian(points: np.ndarray, center, variance: float) -> np.ndarray:
    """Normalized isotropic Gaussian evaluated at ``points[..., d]``."""
    center = np.asarray(center, dtype=float)
    d = center.size
    r2 = ((points - center) ** 2).sum(axis=-1)
    return (2.0 * math.pi * variance) ** (-d / 2.0) * np.exp(-r2 / (2.0 * variance))


# -- grid files -------------------------------------------------------------

_DX_COUNTS = re.compile(r"object\s+1\s+class\s+gridpositions\s+counts\s+(\d+)\s+(\d+)\s+(\d+)\s*$")
_DX_ARRAY = re.compile(r"object\s+3\s+class\s+array\b.*\bdata\s+follows\s*$")
_DX_TRAILER = ("attribute", "object", "component")


def _floats(line: str, lineno: int, n: int, what: str) -> list[float]:
    parts = line.split()[1:]
    if len(parts) != n:
        raise GridFormatError(f"dx line {lineno}: expected {n} numbers after {what!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise GridFormatError(f"dx line {lineno}: non-numeric {what!r} entry") from None


def _read_dx(text: str) -> ScalarField:
    lines = text.splitlines()
    counts = origin = None
    deltas = []
    data_start = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if m := _DX_COUNTS.match(line):
            counts = tuple(int(g) for g in m.groups())
        elif line.startswith("origin"):
            origin = _floats(line, lineno, 3, "origin")
        elif line.startswith("delta"):
            vec = _floats(line, lineno, 3, "delta")
            axis = len(deltas)
            if axis > 2:
                raise GridFormatError(f"dx line {lineno}: more than three delta lines")
            if any(v != 0.0 for k, v in enumerate(vec) if k != axis):
                raise GridFormatError(f"dx line {lineno}: only axis-aligned deltas are supported")
            if vec[axis] <= 0:
                raise GridFormatError(f"dx line {lineno}: non-positive spacing {vec[axis]}")
            deltas.append(vec[axis])
        elif line.startswith("object 2"):
            continue
        elif _DX_ARRAY.match(line):
            data_start = lineno
            break
        else:
            raise GridFormatError(f"dx line {lineno}: unexpected header line {line!r}")
    if counts is None:
        raise GridFormatError("dx: missing 'object 1 class gridpositions counts' line")
    if origin is None:
        raise GridFormatError("dx: missing 'origin' line")
    if len(deltas) != 3:
        raise GridFormatError(f"dx: expected three delta lines, found {len(deltas)}")
    if data_start is None:
        raise GridFormatError("dx: missing 'object 3 class array ... data follows' line")

    n_expected = math.prod(counts)
    vals: list[float] = []
    for lineno in range(data_start + 1, len(lines) + 1):
        line = lines[lineno - 1].strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith(_DX_TRAILER):
            break
        try:
            vals.extend(float(tok) for tok in line.split())
        except ValueError:
            raise GridFormatError(f"dx line {lineno}: non-numeric data value") from None
    if len(vals) != n_expected:
        raise GridFormatError(
            f"dx: counts {counts[0]} {counts[1]} {counts[2]} need {n_expected} values, "
            f"found {len(vals)} after line {data_start}"
        )
    return ScalarField(np.array(vals).reshape(counts), deltas, origin)


def _write_dx(f: ScalarField) -> str:
    if f.dims != 3:
        raise ValueError("dx output requires a 3D field")
    nx, ny, nz = f.shape
    hx, hy, hz = (repr(float(h)) for h in f.spacing)
    out = [
        f"object 1 class gridpositions counts {nx} {ny} {nz}",
        "origin " + " ".join(repr(float(o)) for o in f.origin),
        f"delta {hx} 0 0",
        f"delta 0 {hy} 0",
        f"delta 0 0 {hz}",
        f"object 2 class gridconnections counts {nx} {ny} {nz}",
        f"object 3 class array type double rank 0 items {f.values.size} data follows",
    ]
    flat = [repr(float(v)) for v in f.values.reshape(-1)]
    out.extend(" ".join(flat[i : i + 3]) for i in range(0, len(flat), 3))
    out.append('attribute "dep" string "positions"')
    out.append('object "density" class field')
    return "\n".join(out) + "\n"


def _guess_format(path: Path) -> str:
    return "dx" if path.suffix.lower() == ".dx" else "json-grid"


def load_grid(path, format: str | None = None) -> ScalarField:
    """Read a density grid from an OpenDX (subset) or json-grid file."""
    path = Path(path)
    fmt = format or _guess_format(path)
    text = path.read_text()
    if fmt == "dx":
        return _read_dx(text)
    if fmt == "json-grid":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GridFormatError(f"json-grid line {exc.lineno}: {exc.msg}") from exc
        return ScalarField.from_dict(data)
    raise ValueError(f"unknown grid format {fmt!r}")


def save_grid(f: ScalarField, path, format: str | None = None) -> None:
    path = Path(path)
    fmt = format or _guess_format(path)
    if fmt == "dx":
        path.write_text(_write_dx(f))
    elif fmt == "json-grid":
        path.write_text(json.dumps(f.to_dict()))
    else:
        raise ValueError(f"unknown grid format {fmt!r}")


# -- operations -------------------------------------------------------------


def synthesize_mixture(
    components: Sequence[GaussianComponent], template: ScalarField
) -> ScalarField:
    """Sum of amplitude-weighted normalized Gaussians sampled on ``template``'s grid."""
    if not components:
        raise ValueError("need at least one Gaussian component")
    lo, hi = template.bounds()
    pts = template.coordinates()
    total = np.zeros(template.shape)
    for comp in components:
        c = np.asarray(comp.center, dtype=float)
        if c.size != template.dims:
            raise ValueError(f"component center {comp.center} does not match {template.dims}D grid")
        if np.any(c < lo - 1e-12) or np.any(c > hi + 1e-12):
            raise ValueError(f"component center {comp.center} lies outside the grid")
        total += comp.amplitude * gaussian(pts, c, comp.variance)
    return ScalarField(total, template.spacing, template.origin)


@dataclass(frozen=True)
class Plane:
    """Slicing plane through ``origin`` spanned by orthonormal ``u`` and ``v``."""

    origin: tuple
    u: tuple
    v: tuple

    def __post_init__(self):
        o, u, v = (np.asarray(x, dtype=float) for x in (self.origin, self.u, self.v))
        if o.shape != (3,) or u.shape != (3,) or v.shape != (3,):
            raise ValueError("plane origin and axes must be 3-vectors")
        gram = np.array([[u @ u, u @ v], [v @ u, v @ v]])
        if not np.allclose(gram, np.eye(2), atol=1e-9):
            raise ValueError("plane axes must be orthonormal")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def normal(self) -> np.ndarray:
        return np.cross(self.u, self.v)


def _snap(idx: np.ndarray) -> np.ndarray:
    near = np.round(idx)
    return np.where(np.abs(idx - near) < 1e-9, near, idx)


def slice_volume(
    volume: ScalarField,
    plane: Plane,
    n_slices: int = 6,
    spacing: float = 0.5,
    shape: tuple | None = None,
    step: float | None = None,
) -> list[ScalarField]:
    """Resample a 3D field on ``n_slices`` parallel planes ``spacing`` apart.

    Slice ``k`` is the base plane shifted by ``k * spacing`` along its normal. Each
    slice is a 2D field on a ``shape`` grid of pitch ``step`` centered on the plane
    origin, sampled by trilinear interpolation (zero outside the volume), and
    carries the frame needed to lift its coordinates back to 3D.
    """
    if volume.dims != 3:
        raise ValueError("slice_volume needs a 3D field")
    if n_slices < 1:
        raise ValueError("n_slices must be >= 1")
    if step is None:
        step = float(np.min(volume.spacing))
    if shape is None:
        lo, hi = volume.bounds()
        n = int(math.ceil(np.linalg.norm(hi - lo) / step)) + 1
        shape = (n, n)
    nu, nv = (int(s) for s in shape)
    xs = (np.arange(nu) - (nu - 1) / 2.0) * step
    ys = (np.arange(nv) - (nv - 1) / 2.0) * step
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    lo, hi = volume.bounds()
    slices = []
    any_inside = False
    for k in range(n_slices):
        origin_k = plane.origin + k * spacing * plane.normal
        pts = origin_k + gx[..., None] * plane.u + gy[..., None] * plane.v
        idx = _snap((pts - volume.origin) / volume.spacing)
        inside = np.all((pts >= lo - 1e-9) & (pts <= hi + 1e-9), axis=-1)
        any_inside |= bool(inside.any())
        vals = ndimage.map_coordinates(
            volume.values, np.moveaxis(idx, -1, 0), order=1, mode="constant", cval=0.0
        )
        frame = SliceFrame(origin_k, plane.u, plane.v)
        slices.append(ScalarField(vals, (step, step), (xs[0], ys[0]), frame))
    if not any_inside:
        raise ValueError("slicing plane lies entirely outside the grid")
    return slices


def log_smooth(f: ScalarField, sigma: float) -> ScalarField:
    """Negated Laplacian-of-Gaussian response clamped at zero.

    Gaussian blur of width ``sigma`` (grid cells) followed by the 5-point
    Laplacian, with reflected borders. Density blobs become positive peaks.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    blurred = ndimage.gaussian_filter(f.values, sigma=sigma, mode="reflect")
    lap = ndimage.laplace(blurred, mode="reflect")
    return f.with_values(np.maximum(-lap, 0.0))


def normalize(f: ScalarField) -> ScalarField:
    """Clamp negatives to zero and scale to unit trapezoidal integral."""
    vals = np.maximum(f.values, 0.0)
    total = integrate(vals, f.spacing)
    if not total > 0:
        raise ValueError("cannot normalize a field with zero integral")
    return f.with_values(vals / total)
