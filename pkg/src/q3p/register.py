"""Atom registers over density maps, trap-layout fitting and blockade graphs."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import pdist, squareform

from .constants import (
    C6_DEFAULT,
    LATTICE_SPACING_DEFAULT,
    MAX_REGISTER_SITES,
    OMEGA_MAX_DEFAULT,
    blockade_radius as _blockade_radius,
)


class RegisterError(ValueError):
    pass


@dataclass(frozen=True)
class Register:
    """Physical atom positions (um) plus the density-grid positions they stand for.

    ``field_sites`` are the same sites expressed in the coordinates of the
    density they were built from; ``sites = (field_sites - offset) * scale``
    holds until the register is reshaped onto a trap layout, after which only
    ``sites`` moves.
    """

    sites: np.ndarray
    c6: float = C6_DEFAULT
    blockade_radius: float = field(default=None)
    field_sites: np.ndarray | None = None
    scale: float = 1.0
    offset: np.ndarray | None = None

    def __post_init__(self):
        sites = np.atleast_2d(np.asarray(self.sites, dtype=float))
        if sites.shape[1] != 2:
            raise RegisterError("register sites must be 2D coordinates")
        if not 1 <= len(sites) <= MAX_REGISTER_SITES:
            raise RegisterError(
                f"register must hold between 1 and {MAX_REGISTER_SITES} sites, got {len(sites)}"
            )
        if len(sites) > 1 and np.min(pdist(sites)) <= 0:
            raise RegisterError("register contains duplicate sites")
        object.__setattr__(self, "sites", sites)
        if self.blockade_radius is None:
            object.__setattr__(
                self, "blockade_radius", _blockade_radius(self.c6, OMEGA_MAX_DEFAULT)
            )
        offset = np.zeros(2) if self.offset is None else np.asarray(self.offset, dtype=float)
        object.__setattr__(self, "offset", offset)
        if self.field_sites is None:
            object.__setattr__(self, "field_sites", sites / self.scale + offset)
        else:
            fs = np.atleast_2d(np.asarray(self.field_sites, dtype=float))
            if fs.shape != sites.shape:
                raise RegisterError("field_sites must match sites in shape")
            object.__setattr__(self, "field_sites", fs)

    def __len__(self) -> int:
        return len(self.sites)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def distances(self) -> np.ndarray:
        return squareform(pdist(self.sites))

    def interactions(self) -> np.ndarray:
        """Matrix of C6/r^6 couplings (rad/s), zero on the diagonal."""
        d = self.distances()
        with np.errstate(divide="ignore"):
            u = self.c6 / d**6
        np.fill_diagonal(u, 0.0)
        return u

    def to_um(self, field_xy) -> np.ndarray:
        return (np.asarray(field_xy, dtype=float) - self.offset) * self.scale

    def to_field(self, um_xy) -> np.ndarray:
        return np.asarray(um_xy, dtype=float) / self.scale + self.offset

    def to_dict(self) -> dict:
        return {
            "sites": self.sites.tolist(),
            "c6": self.c6,
            "blockade_radius": self.blockade_radius,
            "field_sites": self.field_sites.tolist(),
            "scale": self.scale,
            "offset": self.offset.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Register":
        return cls(
            sites=data["sites"],
            c6=data.get("c6", C6_DEFAULT),
            blockade_radius=data.get("blockade_radius"),
            field_sites=data.get("field_sites"),
            scale=data.get("scale", 1.0),
            offset=data.get("offset"),
        )


@dataclass(frozen=True)
class BlockadeGraph:
    n_nodes: int
    edges: tuple
    weights: np.ndarray | None = None

    def __post_init__(self):
        edges = tuple(sorted({(min(i, j), max(i, j)) for i, j in self.edges}))
        for i, j in edges:
            if i == j:
                raise ValueError("blockade graph cannot contain self-loops")
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise ValueError(f"edge ({i}, {j}) refers to a missing node")
        object.__setattr__(self, "edges", edges)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (self.n_nodes,):
                raise ValueError("one weight per node required")
            object.__setattr__(self, "weights", w)

    @property
    def nodes(self) -> range:
        return range(self.n_nodes)

    def neighbors(self, i: int) -> list[int]:
        return sorted({b for a, b in self.edges if a == i} | {a for a, b in self.edges if b == i})

    def adjacency_masks(self) -> list[int]:
        masks = [0] * self.n_nodes
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return masks

    def is_independent(self, nodes) -> bool:
        s = set(nodes)
        return not any(i in s and j in s for i, j in self.edges)


def triangular_lattice(
    xmin: float, xmax: float, ymin: float, ymax: float, pitch: float
) -> np.ndarray:
    """Triangular lattice points (nearest-neighbour distance ``pitch``) covering a box."""
    if pitch <= 0:
        raise ValueError("pitch must be positive")
    row_step = pitch * math.sqrt(3.0) / 2.0
    n_rows = int(math.floor((ymax - ymin) / row_step + 1e-9)) + 1
    pts = []
    for r in range(n_rows):
        y = ymin + r * row_step
        x0 = xmin + (pitch / 2.0 if r % 2 else 0.0)
        n_cols = int(math.floor((xmax - x0) / pitch + 1e-9)) + 1
        pts.extend((x0 + c * pitch, y) for c in range(max(n_cols, 0)))
    return np.array(pts, dtype=float).reshape(-1, 2)


def triangular_layout(rows: int, cols: int, spacing: float = LATTICE_SPACING_DEFAULT) -> np.ndarray:
    """Centered ``rows x cols`` triangular trap layout in um."""
    row_step = spacing * math.sqrt(3.0) / 2.0
    pts = np.array(
        [
            (c * spacing + (spacing / 2.0 if r % 2 else 0.0), r * row_step)
            for r in range(rows)
            for c in range(cols)
        ],
        dtype=float,
    )
    return pts - pts.mean(axis=0)


def build_register(
    density,
    threshold: float,
    lattice_spacing: float = LATTICE_SPACING_DEFAULT,
    pitch: float | None = None,
    c6: float = C6_DEFAULT,
    omega_max: float = OMEGA_MAX_DEFAULT,
) -> Register:
    """Cover the dense parts of a 2D field with traps of a triangular lattice.

    Candidate traps are laid ``pitch`` field units apart over the field's bounding
    box; those whose bilinearly interpolated density reaches ``threshold *
    max(field)`` are kept. The kept sites are rescaled so that neighbouring traps
    sit ``lattice_spacing`` um apart and centered on their centroid.

    ``pitch`` defaults to five grid cells.
    """
    if density.dims != 2:
        raise RegisterError("registers are built on 2D fields")
    if not 0 < threshold < 1:
        raise RegisterError("threshold must be in (0, 1)")
    if lattice_spacing <= 0:
        raise RegisterError("lattice_spacing must be positive")
    if pitch is None:
        pitch = 5.0 * float(min(density.spacing))
    lo, hi = density.bounds()
    cand = triangular_lattice(lo[0], hi[0], lo[1], hi[1], pitch)
    idx = (cand - density.origin) / density.spacing
    local = ndimage.map_coordinates(density.values, idx.T, order=1, mode="nearest")
    vmax = float(np.max(density.values))
    if vmax <= 0:
        raise RegisterError("field has no positive density")
    keep = cand[local >= threshold * vmax]
    if len(keep) == 0:
        raise RegisterError("no trap reaches the density threshold")
    if len(keep) > MAX_REGISTER_SITES:
        raise RegisterError(
            f"{len(keep)} traps selected, above the emulation ceiling of {MAX_REGISTER_SITES}"
        )
    scale = lattice_spacing / pitch
    offset = keep.mean(axis=0)
    return Register(
        sites=(keep - offset) * scale,
        c6=c6,
        blockade_radius=_blockade_radius(c6, omega_max),
        field_sites=keep,
        scale=scale,
        offset=offset,
    )


def _translation_cost(sites, layout, t):
    cost = ((sites[:, None, :] + t - layout[None, :, :]) ** 2).sum(axis=2)
    rows, cols = linear_sum_assignment(cost)
    return cost[rows, cols].sum(), cols


def fit_to_traps(register: Register, layout, refine_steps: int = 20) -> Register:
    """Move every site onto a distinct trap of ``layout``.

    The returned sites minimise the summed squared displacement from the input
    sites, up to a free rigid translation of the register. Candidate translations
    are every site-to-trap offset plus a small grid around the centroid match;
    each is polished by alternating optimal assignment and mean-offset updates.
    """
    layout = np.asarray(layout, dtype=float).reshape(-1, 2)
    sites = register.sites
    n = len(sites)
    if len(layout) < n:
        raise RegisterError(f"layout has {len(layout)} traps for {n} sites")

    d_layout = pdist(layout) if len(layout) > 1 else np.array([1.0])
    granularity = float(np.min(d_layout))
    base = layout.mean(axis=0) - sites.mean(axis=0)
    grid = np.linspace(-granularity / 2, granularity / 2, 5)
    candidates = [layout[j] - sites[i] for i in range(n) for j in range(len(layout))]
    candidates += [base + np.array([gx, gy]) for gx in grid for gy in grid]

    best = (math.inf, math.inf, None)
    seen = set()
    for t in candidates:
        cols = None
        for _ in range(refine_steps):
            c, new_cols = _translation_cost(sites, layout, t)
            key = tuple(new_cols)
            if cols is not None and key == tuple(cols):
                break
            cols = new_cols
            t = (layout[cols] - sites).mean(axis=0)
        key = tuple(cols)
        if key in seen:
            continue
        seen.add(key)
        resid = layout[cols] - sites
        c = float(((resid - resid.mean(axis=0)) ** 2).sum())
        raw = float((resid**2).sum())
        # among equally good fits prefer the one that moves the register least
        if c < best[0] - 1e-9 or (c <= best[0] + 1e-9 and raw < best[1] - 1e-9):
            best = (c, raw, cols)
    return replace(register, sites=layout[best[2]].copy())


def fit_cost(sites, fitted) -> float:
    """Summed squared displacement between two site lists after the best translation."""
    resid = np.asarray(fitted, dtype=float) - np.asarray(sites, dtype=float)
    return float(((resid - resid.mean(axis=0)) ** 2).sum())


def blockade_graph(
    register: Register, blockade_radius: float | None = None, weights=None
) -> BlockadeGraph:
    r = register.blockade_radius if blockade_radius is None else blockade_radius
    if r <= 0:
        raise ValueError("blockade radius must be positive")
    d = register.distances()
    n = len(register)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if d[i, j] <= r]
    return BlockadeGraph(n, tuple(edges), weights)


def _mis_key(size, weight, nodes):
    # larger size, then larger weight, then lowest indices
    return (size, weight, tuple(-i for i in nodes))


def mis_bruteforce(graph: BlockadeGraph) -> set[int]:
    """Exact maximum independent set by include-first backtracking.

    Ties in cardinality are broken by larger total node weight, then by the
    lexicographically smallest sorted index tuple.
    """
    n = graph.n_nodes
    if n > MAX_REGISTER_SITES:
        raise ValueError(f"brute-force MIS limited to {MAX_REGISTER_SITES} nodes")
    adj = graph.adjacency_masks()
    w = graph.weights if graph.weights is not None else np.zeros(n)
    best = {"key": None, "nodes": ()}

    def rec(i, chosen, banned, weight):
        if i == n:
            key = _mis_key(len(chosen), weight, chosen)
            if best["key"] is None or key > best["key"]:
                best["key"], best["nodes"] = key, tuple(chosen)
            return
        free = sum(1 for k in range(i, n) if not banned >> k & 1)
        if best["key"] is not None and len(chosen) + free < best["key"][0]:
            return
        if not banned >> i & 1:
            chosen.append(i)
            rec(i + 1, chosen, banned | adj[i], weight + w[i])
            chosen.pop()
        rec(i + 1, chosen, banned, weight)

    rec(0, [], 0, 0.0)
    return set(best["nodes"])


def maximum_independent_sets(graph: BlockadeGraph) -> list[frozenset]:
    """All independent sets of maximum cardinality (exhaustive; small graphs only)."""
    n = graph.n_nodes
    best, found = -1, []
    for size in range(n, -1, -1):
        for combo in itertools.combinations(range(n), size):
            if graph.is_independent(combo):
                found.append(frozenset(combo))
        if found:
            best = size
            break
    assert best >= 0
    return found
