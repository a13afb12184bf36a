"""Exact probability calculus over products of finite alphabets.

Joint distributions are dense tensors with one axis per variable.  All
information quantities are reported in bits (log base 2), with the usual
conventions 0*log(0) = 0 and H(.|empty event) contributing 0.

Everything here is a pure function of immutable inputs; tensors are frozen
(writeable=False) after validation so values can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError

# Dense-tensor guard: this is a desk-scale tool, not a sparse engine.
DEFAULT_MAX_ENTRIES = 1 << 24

# Input tensors must be normalized this tightly; computed quantities are
# compared at 1e-9 elsewhere to absorb float accumulation.
NORMALIZATION_TOL = 1e-12

VarSet = Sequence[int]


@dataclass(frozen=True)
class Alphabet:
    """A finite alphabet, optionally with human-readable symbol labels."""

    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ConfigError(f"alphabet size must be >= 1, got {self.size}")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size:
                raise ConfigError(
                    f"{len(labels)} labels for alphabet of size {self.size}"
                )
            if len(set(labels)) != len(labels):
                raise ConfigError(f"duplicate alphabet labels: {labels}")
            object.__setattr__(self, "labels", labels)


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class JointPMF:
    """Dense joint distribution over a product of finite alphabets."""

    alphabets: tuple[Alphabet, ...]
    probs: np.ndarray

    def __init__(self, alphabets, probs, max_entries: int = DEFAULT_MAX_ENTRIES):
        alphabets = tuple(alphabets)
        shape = tuple(a.size for a in alphabets)
        size = int(np.prod(shape, dtype=np.int64)) if shape else 1
        if size > max_entries:
            raise ConfigError(
                f"state space of {size} entries exceeds the dense-tensor "
                f"limit of {max_entries}"
            )
        arr = np.array(probs, dtype=np.float64).reshape(shape)
        if np.any(arr < 0):
            raise ConfigError("probability tensor has negative entries")
        total = float(arr.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ConfigError(
                f"probability tensor sums to {total!r}, expected 1 within "
                f"{NORMALIZATION_TOL}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "alphabets", alphabets)
        object.__setattr__(self, "probs", arr)

    @property
    def arity(self) -> int:
        return len(self.alphabets)

    def varset(self, indices: VarSet) -> tuple[int, ...]:
        """Validate and normalize a set of variable positions."""
        out = tuple(int(i) for i in indices)
        for i in out:
            if not 0 <= i < self.arity:
                raise IndexError(
                    f"variable index {i} out of range for arity {self.arity}"
                )
        if len(set(out)) != len(out):
            raise ValueError(f"duplicate variable indices: {out}")
        return tuple(sorted(out))


def uniform_pmf(sizes: Iterable[int]) -> JointPMF:
    """Uniform joint distribution over the given alphabet sizes."""
    sizes = tuple(int(s) for s in sizes)
    n = int(np.prod(sizes))
    return JointPMF(
        tuple(Alphabet(s) for s in sizes), np.full(sizes, 1.0 / n)
    )


def product_pmf(margins: Sequence[Sequence[float]]) -> JointPMF:
    """Joint distribution that is the product of per-variable marginals."""
    tensors = [np.asarray(m, dtype=np.float64) for m in margins]
    probs = tensors[0]
    for t in tensors[1:]:
        probs = np.multiply.outer(probs, t)
    return JointPMF(tuple(Alphabet(t.size) for t in tensors), probs)


@dataclass(frozen=True)
class Channel:
    """Row-stochastic conditional distribution p(output | input)."""

    input: Alphabet
    output: Alphabet
    matrix: np.ndarray

    def __init__(self, input, output, matrix):
        mat = np.array(matrix, dtype=np.float64)
        if mat.shape != (input.size, output.size):
            raise ConfigError(
                f"channel matrix shape {mat.shape} does not match alphabets "
                f"({input.size}, {output.size})"
            )
        if np.any(mat < 0):
            raise ConfigError("channel matrix has negative entries")
        rows = mat.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > NORMALIZATION_TOL):
            bad = int(np.argmax(np.abs(rows - 1.0)))
            raise ConfigError(
                f"channel row {bad} sums to {rows[bad]!r}, expected 1"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "input", input)
        object.__setattr__(self, "output", output)
        object.__setattr__(self, "matrix", mat)


def identity_channel(alphabet: Alphabet) -> Channel:
    return Channel(alphabet, alphabet, np.eye(alphabet.size))


def deterministic_channel(alphabet: Alphabet, mapping: Sequence[int],
                          output_size: int | None = None) -> Channel:
    """Channel realizing a deterministic symbol map."""
    mapping = np.asarray(mapping, dtype=np.intp)
    k = int(mapping.max()) + 1 if output_size is None else int(output_size)
    mat = np.zeros((alphabet.size, k))
    mat[np.arange(alphabet.size), mapping] = 1.0
    return Channel(alphabet, Alphabet(k), mat)


@dataclass(frozen=True)
class FunctionSpec:
    """Total lookup table for the target computation f over the inputs."""

    domain: tuple[Alphabet, ...]
    codomain: Alphabet
    table: np.ndarray

    def __init__(self, domain, codomain, table):
        domain = tuple(domain)
        shape = tuple(a.size for a in domain)
        tab = np.array(table, dtype=np.intp).reshape(shape)
        if tab.size and (tab.min() < 0 or tab.max() >= codomain.size):
            raise ConfigError(
                f"function values must lie in [0, {codomain.size}), got "
                f"range [{tab.min()}, {tab.max()}]"
            )
        tab.setflags(write=False)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "codomain", codomain)
        object.__setattr__(self, "table", tab)


# ---------------------------------------------------------------------------
# Information quantities
# ---------------------------------------------------------------------------

def _entropy_bits(q: np.ndarray) -> float:
    q = np.asarray(q, dtype=np.float64).ravel()
    q = q[q > 0.0]
    return max(float(-(q * np.log2(q)).sum()), 0.0)


def marginal(p: JointPMF, S: VarSet) -> np.ndarray:
    """Marginal tensor over the variables in S (ascending index order)."""
    S = p.varset(S)
    drop = tuple(i for i in range(p.arity) if i not in S)
    return p.probs.sum(axis=drop) if drop else p.probs


def entropy(p: JointPMF, S: VarSet) -> float:
    """Joint entropy H(X_S) in bits; H(empty set) = 0."""
    return _entropy_bits(marginal(p, S))


def _disjoint(*sets: tuple[int, ...]):
    seen: set[int] = set()
    for s in sets:
        overlap = seen.intersection(s)
        if overlap:
            raise ValueError(
                f"variable sets overlap on indices {sorted(overlap)}"
            )
        seen.update(s)


def cond_mutual_info(p: JointPMF, S: VarSet, T: VarSet, C: VarSet = ()) -> float:
    """Conditional mutual information I(X_S ; X_T | X_C) in bits.

    C may be empty (plain mutual information).  Tiny negative float residue
    is clamped to 0.
    """
    S, T, C = p.varset(S), p.varset(T), p.varset(C)
    _disjoint(S, T, C)
    v = (
        entropy(p, S + C)
        + entropy(p, T + C)
        - entropy(p, S + T + C)
        - entropy(p, C)
    )
    return max(v, 0.0)


def is_markov(p: JointPMF, A: VarSet, B: VarSet, C: VarSet,
              tol: float = 1e-9) -> bool:
    """True iff the chain X_A - X_B - X_C holds, i.e. I(A;C|B) <= tol."""
    return cond_mutual_info(p, A, C, B) <= tol


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------

def extend_with_channels(p: JointPMF,
                         channels: Sequence[Channel | None]) -> JointPMF:
    """Adjoin per-variable channel outputs to a joint distribution.

    channels has one entry per variable of p; entries may be None to skip a
    variable.  The result is laid out as (outputs of the non-None channels in
    ascending variable order, then the original variables), with

        q(u, x) = p(x) * prod_l channels[l].matrix[x_l, u_l].

    Marginalizing the result over the adjoined axes recovers p exactly.
    """
    if len(channels) != p.arity:
        raise ConfigError(
            f"{len(channels)} channels for a {p.arity}-variable distribution"
        )
    active = [l for l, ch in enumerate(channels) if ch is not None]
    for l in active:
        ch = channels[l]
        if ch.input.size != p.alphabets[l].size:
            raise ConfigError(
                f"channel for variable {l}: input alphabet size "
                f"{ch.input.size} != {p.alphabets[l].size}"
            )
    L = p.arity
    operands = [p.probs, list(range(L))]
    out_subs = []
    for j, l in enumerate(active):
        operands += [channels[l].matrix, [l, L + j]]
        out_subs.append(L + j)
    out_subs += list(range(L))
    probs = np.einsum(*operands, out_subs)
    alphabets = tuple(channels[l].output for l in active) + p.alphabets
    return JointPMF(alphabets, probs)


def append_function(p: JointPMF, f: FunctionSpec,
                    x_axes: VarSet | None = None) -> JointPMF:
    """Adjoin the deterministic value f(x) as a final coordinate.

    By default f is applied to the trailing len(f.domain) axes of p.
    """
    k = len(f.domain)
    axes = tuple(range(p.arity - k, p.arity)) if x_axes is None else \
        tuple(int(i) for i in x_axes)
    if len(axes) != k:
        raise ConfigError(f"{len(axes)} axes for a {k}-argument function")
    for a, d in zip(axes, f.domain):
        if p.alphabets[a].size != d.size:
            raise ConfigError(
                f"axis {a} has alphabet size {p.alphabets[a].size}, function "
                f"argument expects {d.size}"
            )
    onehot = np.eye(f.codomain.size)[f.table]
    A = p.arity
    probs = np.einsum(p.probs, list(range(A)), onehot, list(axes) + [A],
                      list(range(A)) + [A])
    return JointPMF(p.alphabets + (f.codomain,), probs)


def check_decodable(p: JointPMF, cond: VarSet, tol: float = 1e-9,
                    f_axis: int | None = None) -> bool:
    """True iff the final coordinate (or f_axis) is determined by cond,
    i.e. H(F | X_cond) <= tol."""
    fa = p.arity - 1 if f_axis is None else int(f_axis)
    cond = p.varset(cond)
    if fa in cond:
        raise ValueError("conditioning set contains the function axis")
    h = entropy(p, cond + (fa,)) - entropy(p, cond)
    return max(h, 0.0) <= tol
