"""Step skew products over finite Markov shifts, via the pair chain.

The skew product iterates a randomly selected map on the fiber while the
driving chain advances. All of its invariant structure is captured by the
pair chain on (state, point) pairs with steps

    (y, x)  ->  (z, T_y(x))   with weight k(y, z),

whose stationary vector is the product of the two measures. Because that
stationary vector is strictly positive on pair states, the chain has no
transient states and its strongly connected components are exactly the
closed classes; the skew product is ergodic precisely when there is a
single class. Both brute-force subset enumeration and a Monte Carlo
dispersion probe (see the oracles module) cross-check this reduction in the
test suite.

The two Id/swap constructions that witness the failure of the ergodicity
implication for non-strictly-irreducible (resp. reducible) driving kernels
are provided as constructors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dynamics import (
    TransformationFamily,
    family_invariant_partition,
    uniform_space,
)
from .errors import (
    DimensionMismatch,
    InternalInconsistency,
    NotApplicable,
    TheoremViolation,
)
from .graphs import Partition, partition_from_blocks, strongly_connected_components
from .kernels import (
    EPS_SUM,
    MarkovSpec,
    is_irreducible,
    is_strictly_irreducible,
    reach_set,
    sim_classes,
)


@dataclass(frozen=True)
class SkewSystem:
    """A driving kernel together with a transformation family on the fiber."""

    spec: MarkovSpec
    family: TransformationFamily

    @classmethod
    def create(cls, spec: MarkovSpec, family: TransformationFamily) -> "SkewSystem":
        if family.n_states != spec.n:
            raise DimensionMismatch(
                f"family has {family.n_states} maps but kernel has {spec.n} states"
            )
        return cls(spec, family)


@dataclass(frozen=True)
class PairChain:
    """The induced chain on active (state, point) pairs.

    states lists the pairs in lexicographic order; kernel is the dense
    transition matrix over that ordering; stationary is the product vector
    m(y) * mu(x), invariant for the kernel.
    """

    states: tuple[tuple[int, int], ...]
    kernel: np.ndarray
    stationary: np.ndarray

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self) -> dict[tuple[int, int], int]:
        return {p: i for i, p in enumerate(self.states)}

    def closed_classes(self) -> tuple[frozenset[int], ...]:
        """SCCs of the transition pattern, verified to be closed."""
        classes = strongly_connected_components(self.kernel > 0)
        pat = self.kernel > 0
        for block in classes:
            idx = sorted(block)
            outside = np.ones(self.size, dtype=bool)
            outside[idx] = False
            if pat[np.ix_(idx, np.flatnonzero(outside))].any():
                raise InternalInconsistency(
                    "pair chain has a transient class despite full-support stationarity"
                )
        return classes


def build_pair_chain(sys: SkewSystem) -> PairChain:
    """Construct the pair chain and verify product-measure invariance."""
    spec, family = sys.spec, sys.family
    states = [
        (int(y), int(x)) for y in spec.support for x in family.space.support
    ]
    pos = {p: i for i, p in enumerate(states)}
    size = len(states)
    kernel = np.zeros((size, size))
    kv = spec.kernel.values
    for i, (y, x) in enumerate(states):
        tx = int(family.maps[y].table[x])
        for z in spec.kernel.row_support(y):
            kernel[i, pos[(int(z), tx)]] += kv[y, int(z)]
    stationary = np.array(
        [spec.m.values[y] * family.space.mu.values[x] for (y, x) in states]
    )
    row_dev = float(np.abs(kernel.sum(axis=1) - 1.0).max())
    if row_dev > EPS_SUM:
        raise InternalInconsistency(f"pair kernel rows are not stochastic ({row_dev:.3e})")
    inv_dev = float(np.abs(stationary @ kernel - stationary).max())
    if inv_dev > EPS_SUM:
        raise InternalInconsistency(
            f"product measure is not invariant for the pair kernel ({inv_dev:.3e})"
        )
    kernel.setflags(write=False)
    stationary.setflags(write=False)
    return PairChain(tuple(states), kernel, stationary)


@dataclass(frozen=True)
class ErgodicityReport:
    """Closed-class decomposition of a skew product's pair chain."""

    ergodic: bool
    pair_states: tuple[tuple[int, int], ...]
    classes: Partition
    class_masses: np.ndarray
    product_structured: bool


def _classes_product_form(
    chain: PairChain, classes: tuple[frozenset[int], ...], active_states: frozenset[int]
) -> tuple[bool, list[frozenset[int]]]:
    """Check each class is (all active states) x (a point section)."""
    sections: list[frozenset[int]] = []
    for block in classes:
        by_state: dict[int, set[int]] = {}
        for i in block:
            y, x = chain.states[i]
            by_state.setdefault(y, set()).add(x)
        first = next(iter(by_state.values()))
        if set(by_state) != set(active_states) or any(
            s != first for s in by_state.values()
        ):
            return False, []
        sections.append(frozenset(first))
    return True, sections


def is_skew_ergodic(sys: SkewSystem) -> ErgodicityReport:
    """Decide ergodicity of the skew product from the pair chain's classes."""
    chain = build_pair_chain(sys)
    classes = chain.closed_classes()
    masses = np.array(
        [chain.stationary[sorted(block)].sum() for block in classes]
    )
    product, _ = _classes_product_form(chain, classes, sys.spec.support_set)
    partition = partition_from_blocks(range(chain.size), classes)
    return ErgodicityReport(
        ergodic=len(classes) == 1,
        pair_states=chain.states,
        classes=partition,
        class_masses=masses,
        product_structured=product,
    )


def invariant_function_basis(sys: SkewSystem) -> list[np.ndarray]:
    """Indicator vectors of the closed classes, verified to span the fixed space.

    Each returned vector g satisfies g(y, x) = sum_z k(y, z) g(z, T_y(x))
    entrywise; an SVD rank check confirms no further independent solutions
    exist.
    """
    chain = build_pair_chain(sys)
    classes = chain.closed_classes()
    kv = sys.spec.kernel.values
    vectors = []
    for block in classes:
        g = np.zeros(chain.size)
        g[sorted(block)] = 1.0
        # Verify the fixed-point identity directly from the kernel and maps,
        # not through the already-built pair matrix.
        pos = chain.index()
        for i, (y, x) in enumerate(chain.states):
            tx = int(sys.family.maps[y].table[x])
            acc = sum(
                kv[y, int(z)] * g[pos[(int(z), tx)]]
                for z in sys.spec.kernel.row_support(y)
            )
            if abs(g[i] - acc) > 1e-12:
                raise InternalInconsistency(
                    f"class indicator violates the fixed-point identity at {(y, x)}"
                )
        vectors.append(g)
    s = scipy.linalg.svd(chain.kernel - np.eye(chain.size), compute_uv=False)
    fixed_dim = int(np.sum(s <= 1e-10 * chain.size))
    if fixed_dim != len(vectors):
        raise InternalInconsistency(
            f"fixed space has dimension {fixed_dim}, expected {len(vectors)} class indicators"
        )
    return vectors


def check_product_structure(sys: SkewSystem) -> bool:
    """Whether the skew product's invariant structure splits as base x fiber.

    True iff every closed class is (all active states) x (point section) and
    those sections form exactly the family-invariant partition. For a
    strictly irreducible driving kernel a False answer is impossible and
    raises TheoremViolation.
    """
    chain = build_pair_chain(sys)
    classes = chain.closed_classes()
    product, sections = _classes_product_form(chain, classes, sys.spec.support_set)
    if product:
        sigma = family_invariant_partition(sys.family, sys.spec.support)
        product = set(sections) == set(sigma.blocks)
    if not product and is_strictly_irreducible(sys.spec):
        raise TheoremViolation(
            "strictly irreducible driving kernel produced a non-product invariant "
            "structure; this is an implementation bug"
        )
    return product


def _two_point_family(
    spec: MarkovSpec, swap_states: set[int]
) -> TransformationFamily:
    """Family on a uniform 2-point fiber: swap on the given states, Id elsewhere."""
    space = uniform_space(("1", "2"))
    ident = np.array([0, 1])
    swap = np.array([1, 0])
    tables = [swap if y in swap_states else ident for y in range(spec.n)]
    return TransformationFamily.create(space, tables)


def build_counterexample_family(spec: MarkovSpec) -> SkewSystem:
    """Ergodic two-point family whose skew product over spec is not ergodic.

    Applicable exactly when spec is irreducible but not strictly
    irreducible. The first sim-class block (canonical order) is a
    deterministic set with nontrivial mass; states are split by whether
    their row keeps or leaves that set, and leaving states get the swap.
    The resulting invariant set (set-states x point 1) u (rest x point 2)
    carries product mass exactly 1/2.
    """
    if not is_irreducible(spec):
        raise NotApplicable("driving kernel is not irreducible")
    if is_strictly_irreducible(spec):
        raise NotApplicable("driving kernel is strictly irreducible")
    b = sim_classes(spec).blocks[0]
    swap_states = set()
    for y in spec.support:
        row = set(int(z) for z in spec.kernel.row_support(int(y)))
        stays_in_b = row <= b
        if int(y) in b:
            if not stays_in_b:
                swap_states.add(int(y))  # leaves the deterministic set
        else:
            if stays_in_b:
                swap_states.add(int(y))  # enters the deterministic set
    return SkewSystem.create(spec, _two_point_family(spec, swap_states))


def counterexample_invariant_set(spec: MarkovSpec) -> frozenset[tuple[int, int]]:
    """The invariant pair set witnessing non-ergodicity for the family above."""
    b = sim_classes(spec).blocks[0]
    return frozenset(
        (int(y), 0) if int(y) in b else (int(y), 1) for y in spec.support
    )


def build_base_counterexample(spec: MarkovSpec) -> SkewSystem:
    """Two-point system whose invariant structure cannot split, for a
    reducible driving kernel.

    The absorbing set is the complement (within the support) of the
    reachability closure of the first state witnessing reducibility; its
    states keep the identity, all others swap.
    """
    if is_irreducible(spec):
        raise NotApplicable("driving kernel is irreducible")
    supp = spec.support_set
    absorbing: frozenset[int] | None = None
    for b in sorted(supp):
        u = reach_set(spec, {b}, record_steps=False).u_set
        if not supp <= u:
            absorbing = supp - u
            break
    if absorbing is None:
        raise InternalInconsistency(
            "reducible kernel has no reachability witness"
        )
    swap_states = {int(y) for y in supp if y not in absorbing}
    return SkewSystem.create(spec, _two_point_family(spec, swap_states))
