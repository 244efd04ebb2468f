"""Finite probability spaces, measure-preserving maps, and family invariants.

A transformation family assigns one measure-preserving map of a common
finite space to each driving state. The sets fixed by every active map form
a partition of the support (the finite stand-in for the invariant
sigma-algebra); conditional expectation projects onto functions constant on
its blocks.

Points with zero mass are outside every statement here: maps may do
anything off-support, and off-support entries of a conditional expectation
are reported as 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotMeasurePreserving, ValidationError
from .graphs import DisjointSets, Partition, partition_from_blocks
from .kernels import EPS_SUM, ProbVector


@dataclass(frozen=True)
class FiniteMeasureSpace:
    """Labelled points with a probability vector."""

    points: tuple[str, ...]
    mu: ProbVector

    @classmethod
    def create(cls, points, mu_values) -> "FiniteMeasureSpace":
        labels = tuple(str(p) for p in points)
        if len(set(labels)) != len(labels):
            raise ValidationError("point labels must be unique")
        mu = ProbVector.from_values(mu_values)
        if mu.n != len(labels):
            raise DimensionMismatch(
                f"{len(labels)} points but {mu.n} measure entries"
            )
        return cls(labels, mu)

    @property
    def k(self) -> int:
        return len(self.points)

    @property
    def support(self) -> np.ndarray:
        return self.mu.support

    @property
    def support_set(self) -> frozenset[int]:
        return self.mu.support_set

    def index_of(self, label: str) -> int:
        try:
            return self.points.index(label)
        except ValueError:
            raise KeyError(f"unknown point label {label!r}") from None


def uniform_space(points) -> FiniteMeasureSpace:
    labels = tuple(str(p) for p in points)
    return FiniteMeasureSpace.create(labels, np.full(len(labels), 1.0 / len(labels)))


@dataclass(frozen=True)
class MeasurePreservingMap:
    """A total map of point indices whose pushforward fixes the measure."""

    table: np.ndarray

    def __call__(self, x: int) -> int:
        return int(self.table[x])


def validate_map(space: FiniteMeasureSpace, table) -> MeasurePreservingMap:
    """Check the pushforward identity and the forced support bijection.

    Mass conservation on a finite space forces the map to permute the
    support; that is asserted structurally on top of the tolerance-based
    pushforward test, so maps that shuffle mass below tolerance are still
    rejected.
    """
    t = np.asarray(table, dtype=np.int64)
    if t.shape != (space.k,):
        raise DimensionMismatch(
            f"map table has shape {t.shape}, expected ({space.k},)"
        )
    if t.min() < 0 or t.max() >= space.k:
        raise ValidationError("map table contains out-of-range point indices")
    mu = space.mu.values
    push = np.zeros(space.k)
    np.add.at(push, t, mu)
    dev = np.abs(push - mu)
    worst = int(np.argmax(dev))
    if dev[worst] > EPS_SUM:
        raise NotMeasurePreserving(worst, float(dev[worst]))
    supp = space.support_set
    image = {int(t[x]) for x in supp}
    if not image <= supp:
        raise NotMeasurePreserving(
            worst, float(dev[worst]), "map sends support points off-support"
        )
    if len(image) != len(supp):
        raise NotMeasurePreserving(
            worst, float(dev[worst]), "map is not injective on the support"
        )
    t.setflags(write=False)
    return MeasurePreservingMap(t)


@dataclass(frozen=True)
class TransformationFamily:
    """One measure-preserving map per driving state, over a shared space."""

    space: FiniteMeasureSpace
    maps: tuple[MeasurePreservingMap, ...]

    @classmethod
    def create(cls, space: FiniteMeasureSpace, tables) -> "TransformationFamily":
        maps = tuple(validate_map(space, t) for t in tables)
        return cls(space, maps)

    @property
    def n_states(self) -> int:
        return len(self.maps)

    def table_matrix(self) -> np.ndarray:
        """Stacked map tables, shape (n_states, k); row y is the table of map y."""
        return np.stack([m.table for m in self.maps])


def family_invariant_partition(family: TransformationFamily, active) -> Partition:
    """Finest partition of the support into sets fixed by every active map.

    Computed as connected components of the undirected graph with an edge
    between x and its image under each active map; invariant sets are
    exactly the unions of the resulting blocks.
    """
    act = sorted(int(y) for y in active)
    for y in act:
        if not 0 <= y < family.n_states:
            raise ValidationError(f"active state {y} out of range")
    supp = family.space.support
    local = {int(x): k for k, x in enumerate(supp)}
    dsu = DisjointSets(len(supp))
    for y in act:
        t = family.maps[y].table
        for x in supp:
            dsu.union(local[int(x)], local[int(t[x])])
    blocks = [frozenset(int(supp[k]) for k in g) for g in dsu.groups()]
    return partition_from_blocks(family.space.support_set, blocks)


def is_family_ergodic(family: TransformationFamily, active) -> bool:
    """True when the only invariant sets have trivial mass (one block)."""
    return family_invariant_partition(family, active).trivial


def conditional_expectation(
    family: TransformationFamily, active, f
) -> np.ndarray:
    """Project f onto functions constant on the invariant partition.

    Each block receives its mu-weighted average of f; zero-mass points get 0.
    """
    fv = np.asarray(f, dtype=float)
    if fv.shape != (family.space.k,):
        raise DimensionMismatch(
            f"function has shape {fv.shape}, expected ({family.space.k},)"
        )
    mu = family.space.mu.values
    out = np.zeros(family.space.k)
    for block in family_invariant_partition(family, active).blocks:
        idx = sorted(block)
        w = mu[idx]
        out[idx] = float(w @ fv[idx]) / float(w.sum())
    return out
