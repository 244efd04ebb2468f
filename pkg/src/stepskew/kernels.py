"""Finite-state Markov kernels and their structure theory.

A kernel is a row-stochastic matrix; a model instance pairs it with an
invariant (stationary) probability vector. On top of that pair this module
decides reachability, irreducibility, and strict irreducibility, the latter
through four equivalent characterizations that are cross-checked against
each other on every call:

  * connectivity of the common-predecessor graph (two states are related
    when some row gives both of them positive mass),
  * connectivity of the common-successor graph,
  * irreducibility of the Gram pattern P^T P,
  * irreducibility of the dual Gram pattern P P^T.

All structural predicates operate on the exact sparsity pattern: entries
below EPS_ZERO are snapped to zero once at ingestion and rows renormalized,
after which positivity is a boolean question. States carrying zero
stationary mass are excluded from every analysis; they can never be reached
from the support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    InternalInconsistency,
    MultipleStationary,
    NotInvariant,
    RowNotStochastic,
    ValidationError,
)
from .graphs import (
    DisjointSets,
    Partition,
    is_strongly_connected,
    partition_from_blocks,
)

# Entries below EPS_ZERO are structural zeros; snapped at ingestion.
EPS_ZERO = 1e-12
# Tolerance for row sums, stationarity, and pushforward checks.
EPS_SUM = 1e-9
# Cap on explicit union enumeration in deterministic_sets (2**20 sets).
MAX_ENUM_BLOCKS = 20


def _ingest(values, name: str) -> np.ndarray:
    """Snap near-zeros to exact 0 and reject negative/invalid entries."""
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    if arr.min(initial=0.0) < -EPS_ZERO:
        raise ValidationError(f"{name} contains negative entries")
    out = arr.copy()
    out[np.abs(out) < EPS_ZERO] = 0.0
    return out


@dataclass(frozen=True)
class ProbVector:
    """A probability vector with a structurally exact support."""

    values: np.ndarray

    @classmethod
    def from_values(cls, values) -> "ProbVector":
        arr = _ingest(values, "probability vector")
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("probability vector must be 1-d and non-empty")
        s = float(arr.sum())
        if abs(s - 1.0) > EPS_SUM:
            raise ValidationError(f"probability vector sums to {s!r}, not 1")
        arr = arr / s
        arr.setflags(write=False)
        return cls(arr)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def support(self) -> np.ndarray:
        """Indices with strictly positive mass."""
        return np.flatnonzero(self.values)

    @property
    def support_set(self) -> frozenset[int]:
        return frozenset(int(i) for i in self.support)

    def mass(self, indices) -> float:
        idx = list(indices)
        return float(self.values[idx].sum()) if idx else 0.0


@dataclass(frozen=True)
class StochasticMatrix:
    """A row-stochastic matrix together with its boolean sparsity pattern."""

    values: np.ndarray

    @classmethod
    def from_rows(cls, rows) -> "StochasticMatrix":
        arr = _ingest(rows, "kernel")
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise DimensionMismatch(f"kernel must be square, got shape {arr.shape}")
        sums = arr.sum(axis=1)
        dev = np.abs(sums - 1.0)
        worst = int(np.argmax(dev))
        if dev[worst] > EPS_SUM:
            raise RowNotStochastic(worst, float(dev[worst]))
        arr = arr / sums[:, None]
        arr.setflags(write=False)
        return cls(arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def pattern(self) -> np.ndarray:
        return self.values > 0.0

    def row_support(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.values[i])


@dataclass(frozen=True)
class MarkovSpec:
    """A kernel paired with an invariant probability vector.

    Constructed through validate_spec, which enforces stationarity and
    support closure; everything downstream may assume both.
    """

    kernel: StochasticMatrix
    m: ProbVector

    @property
    def n(self) -> int:
        return self.kernel.n

    @property
    def support(self) -> np.ndarray:
        return self.m.support

    @property
    def support_set(self) -> frozenset[int]:
        return self.m.support_set

    def support_pattern(self) -> tuple[np.ndarray, np.ndarray]:
        """(active state indices, boolean pattern restricted to them)."""
        supp = self.support
        return supp, self.kernel.pattern[np.ix_(supp, supp)]


@dataclass(frozen=True)
class ReachReport:
    """Forward-reachability closure of a target set."""

    target: frozenset[int]
    u_set: frozenset[int]
    per_step: tuple[frozenset[int], ...] | None = None


@dataclass(frozen=True)
class DeterministicSetFamily:
    """Deterministic sets of a spec.

    When ``complete`` is true, ``sets`` is the full lattice (including the
    empty set); otherwise ``sets`` holds only the generating blocks and the
    lattice is their closure under unions.
    """

    sets: tuple[frozenset[int], ...]
    complete: bool


def validate_spec(kernel: StochasticMatrix, m: ProbVector) -> MarkovSpec:
    """Pair a kernel with a stationary vector, verifying all invariants."""
    if kernel.n != m.n:
        raise DimensionMismatch(
            f"kernel has {kernel.n} states but measure has {m.n}"
        )
    dev = np.abs(m.values @ kernel.values - m.values)
    worst = float(dev.max())
    if worst > EPS_SUM:
        raise NotInvariant(worst)
    # Support closure is forced by exact invariance; assert it independently
    # because the invariance test is run at tolerance.
    supp = m.support_set
    for y in sorted(supp):
        leak = set(int(z) for z in kernel.row_support(y)) - supp
        if leak:
            raise NotInvariant(
                worst, f"state {y} gives positive mass to zero-mass states {sorted(leak)}"
            )
    return MarkovSpec(kernel, m)


def stationary_distribution(kernel: StochasticMatrix) -> ProbVector:
    """Solve m = m K when the fixed space of K^T is one-dimensional.

    Refuses ambiguous kernels (fixed space of dimension > 1) with
    MultipleStationary; the caller must then supply the vector explicitly.
    """
    a = kernel.values.T - np.eye(kernel.n)
    # Null space dimension decided on singular values at the stationarity
    # tolerance; entries are O(1) so an absolute cutoff is appropriate.
    u, s, vt = scipy.linalg.svd(a)
    dim = int(np.sum(s <= EPS_SUM))
    if dim > 1:
        raise MultipleStationary(
            f"fixed space has dimension {dim}; supply the stationary vector"
        )
    if dim == 0:
        raise InternalInconsistency(
            "stochastic matrix reported an empty fixed space"
        )
    v = vt[-1]
    total = v.sum()
    if abs(total) < EPS_SUM:
        raise InternalInconsistency(
            "one-dimensional fixed space contains no probability vector"
        )
    v = v / total
    v = np.where(np.abs(v) < EPS_ZERO, 0.0, v)
    if v.min() < 0:
        raise InternalInconsistency(
            "unique fixed vector has a negative entry beyond noise level"
        )
    return ProbVector.from_values(v)


def kernel_product(a: StochasticMatrix, b: StochasticMatrix) -> StochasticMatrix:
    """Matrix product of two kernels (composition of the chains' steps)."""
    if a.n != b.n:
        raise DimensionMismatch(f"cannot multiply {a.n}-state by {b.n}-state kernel")
    return StochasticMatrix.from_rows(a.values @ b.values)


def reach_set(spec: MarkovSpec, b, record_steps: bool = True) -> ReachReport:
    """States from which the target set is hit with positive probability.

    Pattern-exact forward reachability restricted to the support of m. The
    n-step layers stabilize within |support| steps, so the union over that
    range is the full closure.
    """
    target = frozenset(int(i) for i in b)
    bad = [i for i in target if not (0 <= i < spec.n)]
    if bad:
        raise ValidationError(f"target contains out-of-range states {sorted(bad)}")
    supp = spec.support
    pat = spec.kernel.pattern[np.ix_(supp, supp)]
    local = {int(s): k for k, s in enumerate(supp)}
    hit = np.zeros(len(supp), dtype=bool)
    for i in target:
        if i in local:
            hit[local[i]] = True
    layers: list[frozenset[int]] = []
    cur = hit
    total = np.zeros(len(supp), dtype=bool)
    for _ in range(len(supp)):
        cur = pat @ cur  # y is in the next layer iff some successor is in cur
        layers.append(frozenset(int(supp[k]) for k in np.flatnonzero(cur)))
        total |= cur
    u_set = frozenset(int(supp[k]) for k in np.flatnonzero(total))
    return ReachReport(target, u_set, tuple(layers) if record_steps else None)


def is_irreducible(spec: MarkovSpec) -> bool:
    """Strong connectivity of the transition pattern on the support of m.

    Also decides ergodicity of the associated shift on path space.
    """
    _, pat = spec.support_pattern()
    return is_strongly_connected(pat)


def _reverse_rows(kernel_values: np.ndarray, mv: np.ndarray, supp) -> np.ndarray:
    """Condition the joint step measure m(j) k(j, i) on its second coordinate.

    Row i is the joint column i divided by its own sum. The sum equals m(i)
    exactly in real arithmetic, but dividing by the computed sum (rather
    than by m(i)) keeps rows stochastic to machine precision even where a
    tiny stationary mass amplifies the residual of the stationarity solve.
    """
    n = kernel_values.shape[0]
    joint = mv[:, None] * kernel_values
    out = np.zeros((n, n))
    on = np.zeros(n, dtype=bool)
    on[supp] = True
    for i in supp:
        col = joint[:, i]
        total = col.sum()
        if total > 0.0:
            out[i, :] = col / total
        else:
            out[i, i] = 1.0  # mass below validation resolution
    for i in np.flatnonzero(~on):
        out[i, i] = 1.0
    return out


def reverse_kernel(spec: MarkovSpec) -> StochasticMatrix:
    """Time reversal: rev(i, j) = m(j) k(j, i) / m(i) on the support.

    Off-support rows are set to the point mass at the state itself. The
    stationarity of m for the output and the involution property (checked
    in the mass-weighted form, the statement's m-almost-everywhere sense)
    are verified before returning.
    """
    mv = spec.m.values
    supp = spec.support
    rev = StochasticMatrix.from_rows(_reverse_rows(spec.kernel.values, mv, supp))
    dev = float(np.abs(mv @ rev.values - mv).max())
    if dev > EPS_SUM:
        raise InternalInconsistency(f"m is not invariant for the reverse kernel ({dev:.3e})")
    back = _reverse_rows(rev.values, mv, supp)
    dev2 = float(
        np.abs(mv[:, None] * (back - spec.kernel.values))[np.ix_(supp, supp)].max()
    )
    if dev2 > EPS_SUM:
        raise InternalInconsistency(f"double reversal does not restore the kernel ({dev2:.3e})")
    return rev


def sim_classes(spec: MarkovSpec) -> Partition:
    """Common-predecessor classes on the support.

    Two states are related when some active row gives both positive mass;
    the blocks are the connected components of that undirected graph.
    """
    supp = spec.support
    local = {int(s): k for k, s in enumerate(supp)}
    dsu = DisjointSets(len(supp))
    for y in supp:
        row = [local[int(z)] for z in spec.kernel.row_support(int(y))]
        for a, b in zip(row, row[1:]):
            dsu.union(a, b)
    blocks = [frozenset(int(supp[k]) for k in g) for g in dsu.groups()]
    return partition_from_blocks(spec.support_set, blocks)


def dual_sim_classes(spec: MarkovSpec) -> Partition:
    """Common-successor classes on the support (the dual relation)."""
    supp = spec.support
    local = {int(s): k for k, s in enumerate(supp)}
    pat = spec.kernel.pattern
    dsu = DisjointSets(len(supp))
    for z in supp:
        col = [local[int(y)] for y in supp if pat[int(y), int(z)]]
        for a, b in zip(col, col[1:]):
            dsu.union(a, b)
    blocks = [frozenset(int(supp[k]) for k in g) for g in dsu.groups()]
    return partition_from_blocks(spec.support_set, blocks)


def is_strictly_irreducible(spec: MarkovSpec) -> bool:
    """Whether every deterministic set has trivial mass.

    Computes all four equivalent characterizations and insists they agree;
    a disagreement is an implementation bug, never valid input.
    """
    via_sim = sim_classes(spec).trivial
    via_dual = dual_sim_classes(spec).trivial
    _, pat = spec.support_pattern()
    p = pat.astype(np.int64)
    via_gram = is_strongly_connected((p.T @ p) > 0)
    via_dual_gram = is_strongly_connected((p @ p.T) > 0)
    verdicts = {
        "sim": via_sim,
        "dual_sim": via_dual,
        "gram": via_gram,
        "dual_gram": via_dual_gram,
    }
    if len(set(verdicts.values())) != 1:
        raise InternalInconsistency(
            f"strict-irreducibility characterizations disagree: {verdicts}"
        )
    return via_sim


def strict_irreducibility_routes(spec: MarkovSpec) -> dict[str, bool]:
    """The four characterization verdicts, for reporting."""
    _, pat = spec.support_pattern()
    p = pat.astype(np.int64)
    return {
        "sim": sim_classes(spec).trivial,
        "dual_sim": dual_sim_classes(spec).trivial,
        "gram": is_strongly_connected((p.T @ p) > 0),
        "dual_gram": is_strongly_connected((p @ p.T) > 0),
    }


def deterministic_check(spec: MarkovSpec, b) -> bool:
    """Whether each active row's support lies inside b or inside its complement."""
    bset = frozenset(int(i) for i in b)
    for y in spec.support:
        row = set(int(z) for z in spec.kernel.row_support(int(y)))
        inter = row & bset
        if inter and inter != row:
            return False
    return True


def deterministic_sets(spec: MarkovSpec) -> DeterministicSetFamily:
    """All deterministic sets, as the union lattice of the sim classes.

    With more than MAX_ENUM_BLOCKS generating blocks only the blocks are
    returned and the lattice is left implicit.
    """
    blocks = sim_classes(spec).blocks
    if len(blocks) > MAX_ENUM_BLOCKS:
        return DeterministicSetFamily(blocks, complete=False)
    sets: list[frozenset[int]] = []
    for mask in range(1 << len(blocks)):
        u: frozenset[int] = frozenset()
        for k in range(len(blocks)):
            if mask >> k & 1:
                u |= blocks[k]
        sets.append(u)
    sets.sort(key=lambda s: (len(s), sorted(s)))
    return DeterministicSetFamily(tuple(sets), complete=True)


def trivial_kernel(m: ProbVector) -> MarkovSpec:
    """The kernel whose every row equals m (an i.i.d. selection)."""
    rows = np.tile(m.values, (m.n, 1))
    return validate_spec(StochasticMatrix.from_rows(rows), m)
