"""Rate/leakage region evaluation for broadcast function computation.

A problem instance is carried as a joint distribution over
(U_1..U_L, X_1..X_L): per-user auxiliary variables first, inputs second.
Such joints are produced by probcore.extend_with_channels.

The region of a fixed instance is a conjunction of half-space lower bounds:
one per non-empty user subset S on the rate sum R_S, one on the fusion-center
leakage, and one per colluding set on that set's leakage.  The subset rate
function is a contrapolymatroid rank function, so the dominant face of the
rate part is spanned by one corner point per user permutation; both facts are
verified by check_contrapolymatroid and the test suite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import probcore as pc
from .errors import ConfigError, PreconditionError
from .probcore import Channel, FunctionSpec, JointPMF, VarSet

DEFAULT_TOL = 1e-9

# Full permutation scans are capped here (8! = 40320 corner points).
MAX_PERMUTATION_USERS = 8

# check_contrapolymatroid scans all 2^L x 2^L subset pairs.
MAX_SCAN_USERS = 12


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CollusionFamily:
    """The fixed family of colluding user subsets (0-based user indices)."""

    num_users: int
    sets: tuple[tuple[int, ...], ...]

    def __init__(self, num_users: int, sets: Sequence[Sequence[int]]):
        num_users = int(num_users)
        norm = []
        for s in sets:
            t = tuple(sorted(int(i) for i in s))
            if not t:
                raise ConfigError("collusion sets must be non-empty")
            if len(set(t)) != len(t):
                raise ConfigError(f"duplicate users in collusion set {t}")
            if any(not 0 <= i < num_users for i in t):
                raise ConfigError(
                    f"collusion set {t} has users outside 0..{num_users - 1}"
                )
            if len(t) == num_users:
                # The complement would be empty and the leakage constraint
                # vacuous; reject rather than guess intent.
                raise ConfigError(
                    "a collusion set equal to the full user set is not "
                    "supported"
                )
            norm.append(t)
        if len(set(norm)) != len(norm):
            raise ConfigError("duplicate collusion sets")
        object.__setattr__(self, "num_users", num_users)
        object.__setattr__(self, "sets", tuple(norm))

    def complement(self, aset: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(i for i in range(self.num_users) if i not in aset)


@dataclass(frozen=True)
class RateLeakagePoint:
    """A ((R_l), fusion leakage, per-collusion-set leakage) tuple.

    `users` names the user each rate coordinate belongs to; the designated
    decoder variant drops one user's rate and has no fusion-leakage
    coordinate (delta=None).
    """

    rates: tuple[float, ...]
    delta: float | None
    delta_A: Mapping[tuple[int, ...], float]
    users: tuple[int, ...] = ()

    def __init__(self, rates, delta, delta_A, users=None):
        rates = tuple(float(r) for r in rates)
        if users is None:
            users = tuple(range(len(rates)))
        users = tuple(int(u) for u in users)
        if len(users) != len(rates):
            raise ConfigError("rates and users have different lengths")
        delta = None if delta is None else float(delta)
        damap = {tuple(sorted(int(i) for i in k)): float(v)
                 for k, v in dict(delta_A).items()}
        for v in list(rates) + ([delta] if delta is not None else []) + \
                list(damap.values()):
            if not math.isfinite(v) or v < -1e-9:
                raise ConfigError(
                    f"rate/leakage coordinates must be finite and >= 0, "
                    f"got {v!r}"
                )
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "delta_A", damap)
        object.__setattr__(self, "users", users)

    def rate_of(self, user: int) -> float:
        return self.rates[self.users.index(user)]


@dataclass(frozen=True)
class HalfSpaceRegion:
    """Explicit lower-bound map defining a region as a conjunction.

    rate_bounds is keyed by non-empty user subsets (sorted tuples); the map
    deliberately stores all 2^L - 1 subsets even when some are redundant.
    """

    num_users: int
    rate_bounds: Mapping[tuple[int, ...], float]
    delta_bound: float | None
    deltaA_bounds: Mapping[tuple[int, ...], float]


@dataclass(frozen=True)
class CornerPointSet:
    """Rate vectors of the dominant face, one per user permutation."""

    points: Mapping[tuple[int, ...], tuple[float, ...]]

    def max_sum_spread(self) -> float:
        sums = [sum(v) for v in self.points.values()]
        return max(sums) - min(sums) if sums else 0.0


@dataclass(frozen=True)
class ContrapolymatroidReport:
    normalized: bool
    nondecreasing: bool
    supermodular: bool
    worst_violation: float
    worst_by_property: Mapping[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.normalized and self.nondecreasing and self.supermodular


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    violation: str | None = None

    def __bool__(self) -> bool:
        return self.member


# ---------------------------------------------------------------------------
# Layout helpers and structural preconditions
# ---------------------------------------------------------------------------

def _split_layout(p: JointPMF) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
    if p.arity % 2 != 0:
        raise ValueError(
            f"expected an (auxiliaries, inputs) joint with even arity, got "
            f"arity {p.arity}"
        )
    L = p.arity // 2
    return L, tuple(range(L)), tuple(range(L, 2 * L))


def require_channel_structure(p: JointPMF, tol: float = DEFAULT_TOL):
    """Check that p factorizes as p(x) * prod_l p(u_l | x_l).

    Equivalent to the per-user chain U_l - X_l - (everything else).
    """
    L, u_ax, x_ax = _split_layout(p)
    for l in range(L):
        rest = tuple(a for a in u_ax + x_ax if a not in (u_ax[l], x_ax[l]))
        v = pc.cond_mutual_info(p, (u_ax[l],), rest, (x_ax[l],))
        if v > tol:
            raise PreconditionError(
                f"per-user channel structure violated for user {l + 1}: "
                f"I(U;rest|X) = {v:.3e} > {tol:.1e}"
            )


def require_outer_class(p: JointPMF, f: FunctionSpec, tol: float = DEFAULT_TOL):
    """Check membership in the outer evaluation class: the chain
    U_S - X_S - X_all for every subset S, and f decodable from all U's."""
    L, u_ax, x_ax = _split_layout(p)
    for mask in range(1, 2 ** L - 1):
        S = tuple(l for l in range(L) if mask >> l & 1)
        Sc = tuple(l for l in range(L) if not mask >> l & 1)
        v = pc.cond_mutual_info(
            p, tuple(u_ax[l] for l in S), tuple(x_ax[l] for l in Sc),
            tuple(x_ax[l] for l in S))
        if v > tol:
            raise PreconditionError(
                f"outer-class chain violated for subset "
                f"{tuple(l + 1 for l in S)}: I(U_S; X_rest | X_S) = {v:.3e}"
            )
    pf = pc.append_function(p, f)
    if not pc.check_decodable(pf, u_ax, tol):
        h = pc.entropy(pf, u_ax + (pf.arity - 1,)) - pc.entropy(pf, u_ax)
        raise PreconditionError(
            f"function not decodable from the auxiliaries: H(F|U) = {h:.3e}"
        )


def _subset_axes(p: JointPMF, users: Sequence[int], base: int):
    return tuple(base + int(l) for l in users)


# ---------------------------------------------------------------------------
# Set functions, corner points
# ---------------------------------------------------------------------------

def rate_rank(p: JointPMF, S: VarSet, *, check: bool = True,
              tol: float = DEFAULT_TOL) -> float:
    """Contrapolymatroid rank of user subset S: I(U_S ; X_all | U_{S^c})."""
    if check:
        require_channel_structure(p, tol)
    L, u_ax, x_ax = _split_layout(p)
    S = tuple(sorted(int(l) for l in S))
    if not S:
        return 0.0
    Sc = tuple(l for l in range(L) if l not in S)
    return pc.cond_mutual_info(p, tuple(u_ax[l] for l in S), x_ax,
                               tuple(u_ax[l] for l in Sc))


def _subset_rate_bound_formula(p: JointPMF, S: Sequence[int]) -> float:
    L, u_ax, x_ax = _split_layout(p)
    S = tuple(sorted(int(l) for l in S))
    if not S:
        return 0.0
    Sc = tuple(l for l in range(L) if l not in S)
    us = tuple(u_ax[l] for l in S)
    return (
        pc.cond_mutual_info(p, us, tuple(x_ax[l] for l in S),
                            tuple(u_ax[l] for l in Sc))
        - pc.cond_mutual_info(p, us, tuple(u_ax[l] for l in Sc),
                              tuple(x_ax[l] for l in S))
    )


def subset_rate_bound(p: JointPMF, S: VarSet, *, check: bool = True,
                      tol: float = DEFAULT_TOL) -> float:
    """The displayed rate-sum lower bound for subset S:
    I(U_S ; X_S | U_{S^c}) - I(U_S ; U_{S^c} | X_S).

    For per-user channel joints this equals rate_rank(p, S).
    """
    if check:
        require_channel_structure(p, tol)
    return _subset_rate_bound_formula(p, S)


def check_contrapolymatroid(p: JointPMF,
                            tol: float = DEFAULT_TOL) -> ContrapolymatroidReport:
    """Brute-force verify that the subset rank function is normalized,
    non-decreasing and supermodular over all subset pairs."""
    require_channel_structure(p, tol)
    L, _, _ = _split_layout(p)
    if L > MAX_SCAN_USERS:
        raise ValueError(
            f"subset-pair scan supports at most {MAX_SCAN_USERS} users"
        )
    g = np.empty(2 ** L)
    for mask in range(2 ** L):
        S = tuple(l for l in range(L) if mask >> l & 1)
        g[mask] = rate_rank(p, S, check=False)

    worst = {"normalized": abs(float(g[0])), "nondecreasing": 0.0,
             "supermodular": 0.0}
    for t_mask in range(2 ** L):
        sub = t_mask
        while True:  # iterate submasks of t_mask
            worst["nondecreasing"] = max(
                worst["nondecreasing"], float(g[sub] - g[t_mask]))
            if sub == 0:
                break
            sub = (sub - 1) & t_mask
    masks = np.arange(2 ** L)
    sm, tm = np.meshgrid(masks, masks, indexing="ij")
    viol = g[sm] + g[tm] - g[sm | tm] - g[sm & tm]
    worst["supermodular"] = max(float(viol.max()), 0.0)

    return ContrapolymatroidReport(
        normalized=worst["normalized"] <= tol,
        nondecreasing=worst["nondecreasing"] <= tol,
        supermodular=worst["supermodular"] <= tol,
        worst_violation=max(worst.values()),
        worst_by_property=dict(worst),
    )


def corner_point(p: JointPMF, pi: Sequence[int], *, check: bool = True,
                 tol: float = DEFAULT_TOL) -> tuple[float, ...]:
    """Corner point of the dominant face for decode order pi.

    The user decoded k-th gets rate I(U_{pi[k]} ; X_{pi[k]} | U_{pi[:k]});
    the coordinates sum to rate_rank(p, all users).
    """
    if check:
        require_channel_structure(p, tol)
    L, u_ax, x_ax = _split_layout(p)
    pi = tuple(int(l) for l in pi)
    if sorted(pi) != list(range(L)):
        raise ValueError(f"{pi} is not a permutation of 0..{L - 1}")
    rates = [0.0] * L
    for k, l in enumerate(pi):
        prev = tuple(u_ax[j] for j in pi[:k])
        rates[l] = pc.cond_mutual_info(p, (u_ax[l],), (x_ax[l],), prev)
    return tuple(rates)


def corner_point_set(p: JointPMF, tol: float = DEFAULT_TOL) -> CornerPointSet:
    """All permutation corner points (capped at 8 users)."""
    require_channel_structure(p, tol)
    L, _, _ = _split_layout(p)
    if L > MAX_PERMUTATION_USERS:
        raise ValueError(
            f"permutation enumeration supports at most "
            f"{MAX_PERMUTATION_USERS} users ({L} requested)"
        )
    points = {
        pi: corner_point(p, pi, check=False)
        for pi in itertools.permutations(range(L))
    }
    return CornerPointSet(points)


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

def _region_bounds(p: JointPMF, f: FunctionSpec,
                   family: CollusionFamily) -> HalfSpaceRegion:
    L, u_ax, x_ax = _split_layout(p)
    if family.num_users != L:
        raise ConfigError(
            f"collusion family is over {family.num_users} users, joint has {L}"
        )
    rate_bounds = {}
    for mask in range(1, 2 ** L):
        S = tuple(l for l in range(L) if mask >> l & 1)
        rate_bounds[S] = _subset_rate_bound_formula(p, S)
    pf = pc.append_function(p, f)
    delta = pc.cond_mutual_info(pf, u_ax, x_ax, (pf.arity - 1,))
    deltaA = {}
    for aset in family.sets:
        ac = family.complement(aset)
        deltaA[aset] = pc.cond_mutual_info(
            p, tuple(x_ax[l] for l in ac), tuple(u_ax[l] for l in ac),
            tuple(x_ax[l] for l in aset))
    return HalfSpaceRegion(L, rate_bounds, delta, deltaA)


def outer_region(p: JointPMF, f: FunctionSpec, family: CollusionFamily,
                 tol: float = DEFAULT_TOL) -> HalfSpaceRegion:
    """Converse region of a fixed outer-class joint: every achievable tuple
    satisfies all of the returned lower bounds."""
    require_outer_class(p, f, tol)
    return _region_bounds(p, f, family)


def inner_region(p: JointPMF, f: FunctionSpec, family: CollusionFamily,
                 tol: float = DEFAULT_TOL) -> HalfSpaceRegion:
    """Achievable region of a fixed per-user-channel joint; the bound map is
    definitionally identical to outer_region on such joints."""
    require_channel_structure(p, tol)
    pf = pc.append_function(p, f)
    if not pc.check_decodable(pf, tuple(range(p.arity // 2)), tol):
        raise PreconditionError(
            "function not decodable from the auxiliaries (H(F|U) > tol)"
        )
    return _region_bounds(p, f, family)


def membership(point: RateLeakagePoint, region: HalfSpaceRegion,
               tol: float = DEFAULT_TOL) -> MembershipResult:
    """Check every stored lower bound; returns the first violated one."""
    users = point.users or tuple(range(region.num_users))
    rate_by_user = dict(zip(users, point.rates))
    for S, bound in region.rate_bounds.items():
        missing = [l for l in S if l not in rate_by_user]
        if missing:
            raise ValueError(
                f"point has no rate for users {[l + 1 for l in missing]}"
            )
        rs = sum(rate_by_user[l] for l in S)
        if rs < bound - tol:
            label = ",".join(str(l + 1) for l in S)
            return MembershipResult(
                False, f"R_{{{label}}} = {rs:.9g} < {bound:.9g}")
    if region.delta_bound is not None:
        if point.delta is None:
            raise ValueError("region bounds the fusion leakage but the point "
                             "has no delta coordinate")
        if point.delta < region.delta_bound - tol:
            return MembershipResult(
                False,
                f"delta = {point.delta:.9g} < {region.delta_bound:.9g}")
    for aset, bound in region.deltaA_bounds.items():
        if aset not in point.delta_A:
            raise ValueError(
                f"point has no leakage for collusion set "
                f"{tuple(i + 1 for i in aset)}"
            )
        if point.delta_A[aset] < bound - tol:
            label = ",".join(str(i + 1) for i in aset)
            return MembershipResult(
                False,
                f"delta_{{{label}}} = {point.delta_A[aset]:.9g} < {bound:.9g}")
    return MembershipResult(True, None)


# ---------------------------------------------------------------------------
# Generator points (independent inputs)
# ---------------------------------------------------------------------------

def require_product_inputs(p_x: JointPMF, tol: float = DEFAULT_TOL):
    """Check joint independence of the inputs via the entropy identity
    H(X_all) = sum_l H(X_l)."""
    total = pc.entropy(p_x, tuple(range(p_x.arity)))
    parts = sum(pc.entropy(p_x, (l,)) for l in range(p_x.arity))
    if parts - total > tol:
        raise PreconditionError(
            f"inputs are not independent: sum H(X_l) - H(X) = "
            f"{parts - total:.3e} > {tol:.1e}"
        )


def capacity_point(p_x: JointPMF, channels: Sequence[Channel],
                   f: FunctionSpec, family: CollusionFamily,
                   tol: float = DEFAULT_TOL) -> RateLeakagePoint:
    """Extreme capacity-region point of one channel tuple, for independent
    inputs: rates I(U_l;X_l), fusion leakage I(U;X|F), collusion leakages
    I(X_{A^c};U_{A^c}).  Time-sharing across tuples is handled by the search
    module's convex hull."""
    require_product_inputs(p_x, tol)
    L = p_x.arity
    p = pc.extend_with_channels(p_x, list(channels))
    pf = pc.append_function(p, f)
    u_ax, x_ax = tuple(range(L)), tuple(range(L, 2 * L))
    if not pc.check_decodable(pf, u_ax, tol):
        h = pc.entropy(pf, u_ax + (pf.arity - 1,)) - pc.entropy(pf, u_ax)
        raise PreconditionError(
            f"channel tuple not decodable: H(F|U) = {h:.3e} > {tol:.1e}"
        )
    rates = [pc.cond_mutual_info(p, (u_ax[l],), (x_ax[l],)) for l in range(L)]
    delta = pc.cond_mutual_info(pf, u_ax, x_ax, (pf.arity - 1,))
    deltaA = {}
    for aset in family.sets:
        ac = family.complement(aset)
        deltaA[aset] = pc.cond_mutual_info(
            p, tuple(x_ax[l] for l in ac), tuple(u_ax[l] for l in ac))
    return RateLeakagePoint(rates, delta, deltaA)


def variant_capacity_point(p_x: JointPMF, channels: Sequence[Channel | None],
                           f: FunctionSpec, family: CollusionFamily, l0: int,
                           tol: float = DEFAULT_TOL) -> RateLeakagePoint:
    """Extreme point for the designated-decoder variant: user l0 computes f
    from the other users' messages and its own input.

    No fusion-leakage coordinate and no rate for l0.  The leakage bound for a
    colluding set containing l0 conditions on the function value and the
    colluders' inputs; for a set not containing l0 it is the unconditional
    information between the remaining senders' inputs and auxiliaries.
    """
    require_product_inputs(p_x, tol)
    L = p_x.arity
    l0 = int(l0)
    if not 0 <= l0 < L:
        raise ConfigError(f"designated user {l0} out of range")
    chans: list[Channel | None] = list(channels)
    if len(chans) != L:
        raise ConfigError(f"expected {L} channel slots, got {len(chans)}")
    if chans[l0] is not None:
        raise ConfigError("the designated user must have no channel (null)")
    senders = [l for l in range(L) if l != l0]
    if any(chans[l] is None for l in senders):
        raise ConfigError("every non-designated user needs a channel")

    p = pc.extend_with_channels(p_x, chans)
    # Layout: (U_l for l in senders, X_1..X_L); then F appended.
    u_axis = {l: j for j, l in enumerate(senders)}
    x_axis = {l: len(senders) + l for l in range(L)}
    pf = pc.append_function(p, f)
    f_ax = pf.arity - 1
    cond = tuple(u_axis[l] for l in senders) + (x_axis[l0],)
    if not pc.check_decodable(pf, cond, tol):
        h = pc.entropy(pf, tuple(sorted(cond)) + (f_ax,)) - \
            pc.entropy(pf, tuple(sorted(cond)))
        raise PreconditionError(
            f"not decodable at the designated user: H(F|U,X_l0) = {h:.3e}"
        )
    rates = [pc.cond_mutual_info(p, (u_axis[l],), (x_axis[l],))
             for l in senders]
    deltaA = {}
    for aset in family.sets:
        ac = family.complement(aset)
        if l0 in aset:
            deltaA[aset] = pc.cond_mutual_info(
                pf, tuple(x_axis[l] for l in ac),
                tuple(u_axis[l] for l in ac),
                (f_ax,) + tuple(x_axis[l] for l in aset))
        else:
            ac_s = tuple(l for l in ac if l != l0)
            if not ac_s:
                deltaA[aset] = 0.0
            else:
                deltaA[aset] = pc.cond_mutual_info(
                    p, tuple(x_axis[l] for l in ac_s),
                    tuple(u_axis[l] for l in ac_s))
    return RateLeakagePoint(rates, None, deltaA, users=senders)


def single_user_tradeoff(p_x1: JointPMF, f: FunctionSpec,
                         cfg=None) -> tuple[float, float]:
    """Single-user closed form: the minimum rate is min I(U;X) over decodable
    channels, and the minimum leakage on the tradeoff line is that rate minus
    I(X;F)."""
    if p_x1.arity != 1:
        raise ConfigError("single-user tradeoff needs a 1-variable input")
    from . import search  # deferred: search builds on this module

    _, value = search.minimize_single_user_rate(p_x1, f, cfg)
    pf = pc.append_function(p_x1, f)
    ixf = pc.cond_mutual_info(pf, (0,), (1,))
    return value, max(value - ixf, 0.0)
