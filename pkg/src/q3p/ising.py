"""Gaussian-mixture placement as a constrained Ising problem.

Fitting a density ``g`` with unit Gaussians switched on at sites ``q_i`` gives
the cost

    I^2 = K - sum_i Gamma_i n_i + sum_{i != j} V_ij n_i n_j

with ``Gamma_i = 2 A_i <g, G_i> - A_i^2 <G_i, G_i>`` and ``V_ij = A_i A_j <G_i, G_j>``.
The pair sum runs over ordered pairs, so each unordered pair counts twice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial.distance import cdist

from . import bits as _bits
from .field import ScalarField, SliceFrame, gaussian, integrate

_MAX_EXACT = 25
_NORM_TOL = 1e-6


def interaction(variance: float, dims: int, r) -> np.ndarray | float:
    """Overlap of two normalized isotropic Gaussians whose centers are ``r`` apart.

    ``(4 pi s2)^(-d/2) * exp(-r^2 / (4 s2))``: the convolution of two Gaussians of
    variance ``s2`` is a Gaussian of variance ``2 s2``.
    """
    if variance <= 0:
        raise ValueError("variance must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("separation must be non-negative")
    out = (4.0 * math.pi * variance) ** (-dims / 2.0) * np.exp(-(r**2) / (4.0 * variance))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PlacementProblem:
    sites: np.ndarray
    variance: float
    amplitudes: np.ndarray
    gamma: np.ndarray
    v: np.ndarray
    k_const: float = 0.0
    exclusion_radius: float = 0.0
    dims: int = 2
    double_count: bool = True
    frame: SliceFrame | None = None
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("sites", "amplitudes", "gamma", "v"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        m = len(self.gamma)
        if self.v.shape != (m, m):
            raise ValueError("V must be an M x M matrix")
        if not np.allclose(self.v, self.v.T, rtol=0, atol=1e-15 * max(1.0, np.abs(self.v).max())):
            raise ValueError("V must be symmetric")
        if self.sites.shape[0] != m:
            raise ValueError("one site per Gamma coefficient required")

    @property
    def n_sites(self) -> int:
        return len(self.gamma)

    @property
    def pair_factor(self) -> float:
        return 1.0 if self.double_count else 0.5

    def coupling(self) -> np.ndarray:
        """Off-diagonal pair matrix ``V`` with the self-overlaps removed."""
        v0 = self.v.copy()
        np.fill_diagonal(v0, 0.0)
        return v0

    def conflicts(self) -> np.ndarray:
        """Boolean matrix of site pairs that may not both be occupied."""
        m = self.n_sites
        if self.exclusion_radius <= 0 or m == 1:
            return np.zeros((m, m), dtype=bool)
        d = cdist(self.sites, self.sites)
        c = d <= self.exclusion_radius
        np.fill_diagonal(c, False)
        return c

    def is_admissible(self, b) -> bool:
        n = _bits.as_bits(b, self.n_sites).astype(bool)
        return not self.conflicts()[np.ix_(n, n)].any()

    def to_dict(self) -> dict:
        d = {
            "sites": self.sites.tolist(),
            "variance": self.variance,
            "amplitudes": self.amplitudes.tolist(),
            "gamma": self.gamma.tolist(),
            "v": self.v.tolist(),
            "k_const": self.k_const,
            "exclusion_radius": self.exclusion_radius,
            "dims": self.dims,
            "double_count": self.double_count,
            "warnings": list(self.warnings),
        }
        if self.frame is not None:
            d["frame"] = self.frame.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "PlacementProblem":
        frame = SliceFrame.from_dict(data["frame"]) if data.get("frame") else None
        return cls(
            sites=data["sites"],
            variance=data["variance"],
            amplitudes=data["amplitudes"],
            gamma=data["gamma"],
            v=data["v"],
            k_const=data.get("k_const", 0.0),
            exclusion_radius=data.get("exclusion_radius", 0.0),
            dims=data.get("dims", 2),
            double_count=data.get("double_count", True),
            frame=frame,
            warnings=tuple(data.get("warnings", ())),
        )


@dataclass(frozen=True)
class Placement:
    bitstring: str
    positions: np.ndarray
    cost: float

    @property
    def count(self) -> int:
        return self.bitstring.count("1")

    def to_dict(self) -> dict:
        return {
            "bitstring": self.bitstring,
            "cost": self.cost,
            "count": self.count,
            "positions": np.asarray(self.positions).tolist(),
        }


def local_amplitudes(g: ScalarField, sites: np.ndarray, variance: float) -> np.ndarray:
    """Amplitudes that make each Gaussian's peak equal the local density."""
    idx = (np.asarray(sites, dtype=float) - g.origin) / g.spacing
    local = ndimage.map_coordinates(g.values, idx.T, order=1, mode="nearest")
    return np.maximum(local, 0.0) * (2.0 * math.pi * variance) ** (g.dims / 2.0)


def compile_problem(
    g: ScalarField,
    sites,
    variance: float,
    amplitudes: float | Sequence[float] | str = 1.0,
    exclusion_radius: float = 0.0,
    double_count: bool = True,
) -> PlacementProblem:
    """Build the Ising coefficients for fitting ``g`` with Gaussians at ``sites``.

    ``Gamma`` is computed by trapezoidal quadrature on ``g``'s grid; ``V`` uses the
    closed-form overlap on infinite space. ``amplitudes`` may be a scalar, one
    value per site, or ``"local"`` (see :func:`local_amplitudes`).
    """
    if variance <= 0:
        raise ValueError("variance must be positive")
    sites = np.atleast_2d(np.asarray(sites, dtype=float))
    m, d = sites.shape
    if d != g.dims:
        raise ValueError(f"sites are {d}D but the field is {g.dims}D")
    if m > _MAX_EXACT:
        raise ValueError(f"at most {_MAX_EXACT} sites supported")
    total = g.integral()
    if abs(total - 1.0) > _NORM_TOL:
        raise ValueError(f"density must be normalized (integral is {total:.6g})")
    lo, hi = g.bounds()
    outside = np.any((sites < lo - 1e-9) | (sites > hi + 1e-9), axis=1)
    if outside.any():
        raise ValueError(f"site {int(np.argmax(outside))} lies outside the density grid")

    if isinstance(amplitudes, str):
        if amplitudes != "local":
            raise ValueError(f"unknown amplitude rule {amplitudes!r}")
        amps = local_amplitudes(g, sites, variance)
    else:
        amps = np.broadcast_to(np.asarray(amplitudes, dtype=float), (m,)).copy()
    if np.any(amps < 0):
        raise ValueError("amplitudes must be non-negative")

    pts = g.coordinates()
    gamma = np.empty(m)
    warnings = []
    for i, q in enumerate(sites):
        gi = gaussian(pts, q, variance)
        mass = integrate(gi, g.spacing)
        if mass < 0.99:
            warnings.append(f"site {i}: only {mass:.3f} of the Gaussian mass lies on the grid")
        cross = integrate(g.values * gi, g.spacing)
        self_overlap = integrate(gi * gi, g.spacing)
        gamma[i] = 2.0 * amps[i] * cross - amps[i] ** 2 * self_overlap

    v = np.outer(amps, amps) * interaction(variance, d, cdist(sites, sites))
    k_const = integrate(g.values**2, g.spacing)
    return PlacementProblem(
        sites=sites,
        variance=variance,
        amplitudes=amps,
        gamma=gamma,
        v=v,
        k_const=k_const,
        exclusion_radius=exclusion_radius,
        dims=d,
        double_count=double_count,
        frame=g.frame,
        warnings=tuple(warnings),
    )


def cost(problem: PlacementProblem, b) -> float:
    """``-sum Gamma_i n_i + sum_{i != j} V_ij n_i n_j`` (constant K excluded)."""
    n = _bits.as_bits(b, problem.n_sites)
    on = np.flatnonzero(n)
    total = -float(problem.gamma[on].sum())
    pair = 0.0
    for a in range(len(on)):
        for c in range(a + 1, len(on)):
            pair += problem.v[on[a], on[c]]
    return total + 2.0 * problem.pair_factor * pair


def costs(problem: PlacementProblem, rows: np.ndarray) -> np.ndarray:
    """Vectorized cost for a ``(k, M)`` array of occupations."""
    rows = np.asarray(rows, dtype=float)
    v0 = problem.coupling()
    return -rows @ problem.gamma + problem.pair_factor * np.einsum(
        "bi,ij,bj->b", rows, v0, rows
    )


def diagonal(problem: PlacementProblem) -> np.ndarray:
    """Problem-Hamiltonian eigenvalue for every basis index (bit i of index = n_i)."""
    return costs(problem, _bits.occupation_table(problem.n_sites))


def _tolerance(problem: PlacementProblem) -> float:
    scale = max(float(np.abs(problem.gamma).max(initial=0.0)), float(np.abs(problem.v).max(initial=0.0)))
    return 1e-12 * max(scale, 1e-300) * max(problem.n_sites, 1)


def exact_solve(problem: PlacementProblem, enforce_exclusion: bool = True) -> Placement:
    """Exact ground state by include-first branch and bound.

    Bound: the cost so far plus every remaining site's marginal gain when it is
    negative, which is valid because all pair couplings are non-negative. Ties
    go to fewer excitations, then to the lowest site indices.
    """
    m = problem.n_sites
    if m > _MAX_EXACT:
        raise ValueError(f"exact solver limited to {_MAX_EXACT} sites")
    if np.any(problem.coupling() < 0):
        raise ValueError("branch and bound requires non-negative couplings")
    conflict = problem.conflicts() if enforce_exclusion else np.zeros((m, m), dtype=bool)
    pair2 = 2.0 * problem.pair_factor * problem.coupling()
    tol = _tolerance(problem)
    best = {"cost": 0.0, "count": 0, "chosen": ()}

    def rec(i, chosen, cur, marg, allowed):
        remaining = np.minimum(marg[i:], 0.0)[allowed[i:]].sum()
        bound = cur + remaining
        if bound > best["cost"] + tol:
            return
        if bound >= best["cost"] - tol and len(chosen) >= best["count"]:
            return
        if i == m:
            if cur < best["cost"] - tol or len(chosen) < best["count"]:
                best.update(cost=cur, count=len(chosen), chosen=tuple(chosen))
            return
        if allowed[i]:
            chosen.append(i)
            rec(i + 1, chosen, cur + marg[i], marg + pair2[i], allowed & ~conflict[i])
            chosen.pop()
        rec(i + 1, chosen, cur, marg, allowed)

    rec(0, [], 0.0, -problem.gamma.astype(float), np.ones(m, dtype=bool))
    n = np.zeros(m, dtype=np.int8)
    n[list(best["chosen"])] = 1
    return extract_placement(problem, n)


def extract_placement(problem: PlacementProblem, b, frame: SliceFrame | None = None) -> Placement:
    """Positions and count of the occupied sites, lifted to 3D through a slice frame."""
    n = _bits.as_bits(b, problem.n_sites)
    frame = frame if frame is not None else problem.frame
    pos = problem.sites[n.astype(bool)]
    if frame is not None and problem.dims == 2:
        pos = frame.lift(pos) if len(pos) else np.zeros((0, 3))
    return Placement(_bits.to_str(n), pos, cost(problem, n))
