"""Auxiliary-channel search and frontier assembly for independent inputs.

Channels are enumerated under the cardinality cap |U_l| <= |X_l|:
deterministic symbol maps always, plus an optional quantized-stochastic grid.
Each decodable tuple yields one extreme region point; time-sharing between
tuples is realized as the up-set of the convex hull of those points, decided
by a small LP feasibility problem.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from . import probcore as pc
from . import regions as rg
from .errors import ConfigError, PreconditionError
from .probcore import Channel, FunctionSpec, JointPMF
from .regions import CollusionFamily, RateLeakagePoint

LP_TOL = 1e-9


@dataclass(frozen=True)
class SearchConfig:
    mode: str = "deterministic"        # "deterministic" | "grid"
    grid_step: float = 0.125
    dedupe: bool = True
    max_tuples: int = 200_000

    def __post_init__(self):
        if self.mode not in ("deterministic", "grid"):
            raise ConfigError(f"unknown search mode {self.mode!r}")
        if not 0.0 < self.grid_step <= 0.5:
            raise ConfigError("grid_step must lie in (0, 0.5]")
        k = round(1.0 / self.grid_step)
        if abs(k * self.grid_step - 1.0) > 1e-9:
            raise ConfigError("grid_step must divide 1")
        if self.max_tuples < 1:
            raise ConfigError("max_tuples must be positive")

    @property
    def grid_denominator(self) -> int:
        return round(1.0 / self.grid_step)


@dataclass(frozen=True)
class ChannelTuple:
    channels: tuple[Channel, ...]
    tag: str  # "deterministic" | "quantized-stochastic"

    def canonical_key(self) -> tuple:
        """Relabeling-invariant key: per channel, the sorted tuple of
        output-symbol columns (rounded)."""
        key = []
        for ch in self.channels:
            cols = sorted(
                tuple(round(float(v), 12) for v in ch.matrix[:, j])
                for j in range(ch.matrix.shape[1])
            )
            key.append(tuple(cols))
        return tuple(key)


@dataclass(frozen=True)
class GeneratorPoint:
    point: RateLeakagePoint
    source: ChannelTuple


@dataclass
class EnumerationResult:
    tuples: list[ChannelTuple]
    truncated: bool = False
    considered: int = 0

    def __iter__(self):
        return iter(self.tuples)

    def __len__(self):
        return len(self.tuples)


# ---------------------------------------------------------------------------
# Per-user candidate matrices
# ---------------------------------------------------------------------------

def _canonical_map(mapping: tuple[int, ...]) -> tuple[int, ...]:
    """Relabel output symbols in first-occurrence order, making the map
    surjective onto an initial segment."""
    relabel: dict[int, int] = {}
    out = []
    for v in mapping:
        if v not in relabel:
            relabel[v] = len(relabel)
        out.append(relabel[v])
    return tuple(out)


def _deterministic_maps(k: int, canonical: bool) -> list[tuple[int, ...]]:
    maps: Iterable[tuple[int, ...]] = itertools.product(range(k), repeat=k)
    if not canonical:
        return list(maps)
    seen: dict[tuple[int, ...], None] = {}
    for m in maps:
        seen.setdefault(_canonical_map(m))
    return list(seen)


def _grid_rows(k: int, denom: int) -> list[tuple[float, ...]]:
    """All k-part probability rows with entries on the 1/denom grid."""
    rows = []
    for cuts in itertools.combinations_with_replacement(range(denom + 1),
                                                        k - 1):
        parts = []
        prev = 0
        for c in cuts:
            parts.append(c - prev)
            prev = c
        parts.append(denom - prev)
        rows.append(tuple(v / denom for v in parts))
    return rows


def _candidate_matrices(size: int, cfg: SearchConfig) -> list[np.ndarray]:
    """All candidate channel matrices for one user, |U| = |X| = size."""
    mats = []
    for m in _deterministic_maps(size, cfg.dedupe):
        mat = np.zeros((size, size))
        mat[np.arange(size), list(m)] = 1.0
        mats.append(mat)
    if cfg.mode == "grid":
        det_keys = {tuple(np.round(m.ravel(), 12)) for m in mats}
        rows = _grid_rows(size, cfg.grid_denominator)
        for combo in itertools.product(rows, repeat=size):
            mat = np.array(combo)
            if tuple(np.round(mat.ravel(), 12)) in det_keys:
                continue
            mats.append(mat)
    return mats


def _is_deterministic(mat: np.ndarray) -> bool:
    return bool(np.all((mat == 0.0) | (mat == 1.0)))


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def enumerate_channels(p_x: JointPMF, f: FunctionSpec,
                       cfg: SearchConfig | None = None,
                       l0: int | None = None,
                       tol: float = 1e-9) -> EnumerationResult:
    """Enumerate decodable channel tuples under the cardinality cap.

    In variant mode (l0 given) only the other users get channels and
    decodability conditions additionally on X_{l0}.  The stream is truncated
    (flagged, never silent) once max_tuples tuples have been considered.
    """
    cfg = cfg or SearchConfig()
    L = p_x.arity
    users = [l for l in range(L) if l0 is None or l != l0]
    per_user = [_candidate_matrices(p_x.alphabets[l].size, cfg)
                for l in users]

    result = EnumerationResult(tuples=[])
    seen_keys: set[tuple] = set()
    for combo in itertools.product(*per_user):
        if result.considered >= cfg.max_tuples:
            result.truncated = True
            break
        result.considered += 1
        chans: list[Channel | None] = [None] * L
        for u, mat in zip(users, combo):
            alpha = p_x.alphabets[u]
            chans[u] = Channel(alpha, pc.Alphabet(mat.shape[1]), mat)
        ext = pc.extend_with_channels(p_x, chans)
        pf = pc.append_function(ext, f)
        cond = tuple(range(len(users)))
        if l0 is not None:
            cond = cond + (len(users) + l0,)
        if not pc.check_decodable(pf, cond, tol):
            continue
        tag = ("deterministic" if all(_is_deterministic(m) for m in combo)
               else "quantized-stochastic")
        ct = ChannelTuple(tuple(chans[u] for u in users), tag)
        if cfg.dedupe:
            key = ct.canonical_key()
            if key in seen_keys:
                continue
            seen_keys.add(key)
        result.tuples.append(ct)
    return result


def generate_points(p_x: JointPMF, f: FunctionSpec, family: CollusionFamily,
                    cfg: SearchConfig | None = None,
                    l0: int | None = None) -> tuple[list[GeneratorPoint], EnumerationResult]:
    """Evaluate one extreme region point per enumerated channel tuple."""
    enum = enumerate_channels(p_x, f, cfg, l0)
    points = []
    for ct in enum.tuples:
        if l0 is None:
            pt = rg.capacity_point(p_x, ct.channels, f, family)
        else:
            chans: list[Channel | None] = [None] * p_x.arity
            for ch, u in zip(ct.channels,
                             [l for l in range(p_x.arity) if l != l0]):
                chans[u] = ch
            pt = rg.variant_capacity_point(p_x, chans, f, family, l0)
        points.append(GeneratorPoint(pt, ct))
    return points, enum


# ---------------------------------------------------------------------------
# Hull membership (time-sharing) and frontiers
# ---------------------------------------------------------------------------

def point_axes(point: RateLeakagePoint,
               family: CollusionFamily) -> list[str]:
    """Canonical coordinate names: rates, then delta, then collusion sets."""
    axes = [f"R{u + 1}" for u in point.users]
    if point.delta is not None:
        axes.append("delta")
    axes += [f"deltaA:{'+'.join(str(i + 1) for i in a)}"
             for a in family.sets]
    return axes


def point_vector(point: RateLeakagePoint,
                 family: CollusionFamily) -> np.ndarray:
    vec = list(point.rates)
    if point.delta is not None:
        vec.append(point.delta)
    for aset in family.sets:
        if aset not in point.delta_A:
            raise ValueError(
                f"point lacks a leakage for set {tuple(i + 1 for i in aset)}"
            )
        vec.append(point.delta_A[aset])
    return np.asarray(vec, dtype=np.float64)


@dataclass(frozen=True)
class CapacityHull:
    """Up-set of the convex hull of generator points.

    A query point is a member iff some convex combination of the generators
    is coordinatewise <= the query (all coordinates are 'smaller is better').
    """

    generators: np.ndarray        # (num_points, dim)
    axes: tuple[str, ...]

    @property
    def dim(self) -> int:
        return self.generators.shape[1]


def capacity_hull(points: Sequence[GeneratorPoint],
                  family: CollusionFamily) -> CapacityHull:
    if not points:
        raise ValueError("capacity_hull needs at least one generator point")
    axes = point_axes(points[0].point, family)
    rows = []
    for gp in points:
        if point_axes(gp.point, family) != axes:
            raise ValueError("generator points have inconsistent coordinates")
        rows.append(point_vector(gp.point, family))
    return CapacityHull(np.vstack(rows), tuple(axes))


def hull_membership(hull: CapacityHull, point: RateLeakagePoint | np.ndarray,
                    family: CollusionFamily | None = None,
                    tol: float = LP_TOL) -> bool:
    """LP feasibility: exists lambda >= 0, sum lambda = 1 with
    generators^T lambda <= point + tol coordinatewise."""
    if isinstance(point, RateLeakagePoint):
        if family is None:
            raise ValueError("family required to vectorize a point")
        vec = point_vector(point, family)
    else:
        vec = np.asarray(point, dtype=np.float64)
    if vec.shape != (hull.dim,):
        raise ValueError(
            f"point has dimension {vec.shape}, hull expects ({hull.dim},)"
        )
    n = hull.generators.shape[0]
    res = linprog(
        c=np.zeros(n),
        A_ub=hull.generators.T,
        b_ub=vec + tol,
        A_eq=np.ones((1, n)),
        b_eq=np.ones(1),
        bounds=[(0, None)] * n,
        method="highs",
    )
    return bool(res.status == 0)


def minimize_single_user_rate(p_x1: JointPMF, f: FunctionSpec,
                              cfg: SearchConfig | None = None
                              ) -> tuple[ChannelTuple, float]:
    """Minimum I(U;X) over enumerated decodable single-user channels."""
    if p_x1.arity != 1:
        raise ConfigError("single-user minimization needs a 1-variable input")
    enum = enumerate_channels(p_x1, f, cfg)
    if not enum.tuples:
        raise PreconditionError(
            "no decodable channel found; the identity channel should always "
            "qualify, so the function table is inconsistent"
        )
    best, best_val = None, None
    for ct in enum.tuples:
        ext = pc.extend_with_channels(p_x1, [ct.channels[0]])
        val = pc.cond_mutual_info(ext, (0,), (1,))
        if best_val is None or val < best_val - 1e-15:
            best, best_val = ct, val
    return best, float(best_val)


def frontier_2d(points: Sequence[GeneratorPoint], axis_x: str, axis_y: str,
                family: CollusionFamily) -> list[tuple[float, float]]:
    """Pareto-minimal (axis_x, axis_y) pairs of the generator cloud."""
    if not points:
        return []
    axes = point_axes(points[0].point, family)
    try:
        ix, iy = axes.index(axis_x), axes.index(axis_y)
    except ValueError:
        raise ValueError(
            f"unknown axis; available: {axes}"
        ) from None
    pairs = sorted(
        {(float(v[ix]), float(v[iy]))
         for v in (point_vector(gp.point, family) for gp in points)}
    )
    frontier: list[tuple[float, float]] = []
    best_y = np.inf
    for x, y in pairs:
        if y < best_y - 1e-15:
            frontier.append((x, y))
            best_y = y
    return frontier
