"""Connectivity machinery on exact zero/nonzero patterns.

Every structural verdict in the package reduces to connectivity of some
boolean adjacency matrix, so everything here is pattern-exact: no float
comparisons. Strong connectivity delegates to scipy's csgraph; the
union-find is hand-rolled so that paired characterizations do not share a
code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ValidationError


def canonical_blocks(blocks) -> tuple[frozenset[int], ...]:
    """Freeze blocks and order them by smallest member."""
    return tuple(sorted((frozenset(b) for b in blocks if b), key=min))


@dataclass(frozen=True)
class Partition:
    """Disjoint blocks covering a ground set of integer indices.

    Stands in for a finite sigma-algebra: the measurable sets are exactly
    the unions of blocks. Blocks are stored in canonical order (by
    smallest member).
    """

    ground: frozenset[int]
    blocks: tuple[frozenset[int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for b in self.blocks:
            if seen & b:
                raise ValidationError("partition blocks are not disjoint")
            seen |= b
        if seen != self.ground:
            raise ValidationError("partition blocks do not cover the ground set")

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def trivial(self) -> bool:
        return len(self.blocks) <= 1

    def block_of(self, i: int) -> frozenset[int]:
        for b in self.blocks:
            if i in b:
                return b
        raise KeyError(i)

    def block_index(self) -> dict[int, int]:
        """Map each ground element to the index of its block."""
        out: dict[int, int] = {}
        for k, b in enumerate(self.blocks):
            for i in b:
                out[i] = k
        return out


def partition_from_blocks(ground, blocks) -> Partition:
    return Partition(frozenset(ground), canonical_blocks(blocks))


class DisjointSets:
    """Union-find over range(n) with path halving."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        p = self.parent
        while p[i] != i:
            p[i] = p[p[i]]
            i = p[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[rj] = ri

    def groups(self) -> tuple[frozenset[int], ...]:
        by_root: dict[int, set[int]] = {}
        for i in range(len(self.parent)):
            by_root.setdefault(self.find(i), set()).add(i)
        return canonical_blocks(by_root.values())


def strongly_connected_components(adj: np.ndarray) -> tuple[frozenset[int], ...]:
    """SCCs of the digraph of a boolean adjacency matrix, canonically ordered."""
    n = adj.shape[0]
    if n == 0:
        return ()
    ncomp, labels = connected_components(
        csr_matrix(adj), directed=True, connection="strong"
    )
    groups: list[set[int]] = [set() for _ in range(ncomp)]
    for v, lab in enumerate(labels):
        groups[lab].add(v)
    return canonical_blocks(groups)


def is_strongly_connected(adj: np.ndarray) -> bool:
    return len(strongly_connected_components(adj)) == 1
