"""Random ergodic averages: sampled, exact, and their limits.

Time averages along sampled driving paths (Birkhoff averages) converge to a
limit determined by the closed class of the starting pair; the expectation
operator M_n averages the n-th iterate over all paths at once and its
Cesaro means converge to a mixture of class averages. Both limits are
computed here in closed form from the pair chain, with the sampled and the
dynamic-programming routes kept available for cross-checking.

Randomness runs through counter-based Philox streams keyed by
(seed, stream index), so every trial owns an independent, reproducible
substream: results are identical however trials are scheduled.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPairState, StartOffSupport, ValidationError
from .kernels import MarkovSpec
from .skew import SkewSystem, build_pair_chain

_U64 = (1 << 64) - 1


def substream(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for (seed, stream); counter-based, reproducible."""
    key = np.array([seed & _U64, stream & _U64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _row_cumulatives(matrix: np.ndarray) -> np.ndarray:
    cums = np.cumsum(matrix, axis=1)
    cums[:, -1] = 1.0  # guard float drift at the top end
    return cums


def _draw(cum: np.ndarray, u: float) -> int:
    return int((cum <= u).sum())


@dataclass(frozen=True)
class PathSampler:
    """Reproducible sampler of driving-state paths.

    start is None for a stationary initial state or a fixed state index;
    stream selects the trial substream (identical seed, start, and stream
    reproduce the identical path).
    """

    spec: MarkovSpec
    seed: int
    start: int | None = None
    stream: int = 0


def sample_path(sampler: PathSampler, length: int) -> np.ndarray:
    """Sample a driving path: initial state from m (or fixed), then row draws."""
    if length < 0:
        raise ValidationError("path length must be nonnegative")
    path = np.empty(length, dtype=np.int64)
    if length == 0:
        return path
    g = substream(sampler.seed, sampler.stream)
    spec = sampler.spec
    cums = _row_cumulatives(spec.kernel.values)
    if sampler.start is None:
        m_cum = np.cumsum(spec.m.values)
        m_cum[-1] = 1.0
        state = _draw(m_cum, g.random())
    else:
        if not 0 <= sampler.start < spec.n:
            raise ValidationError(f"start state {sampler.start} out of range")
        state = int(sampler.start)
    path[0] = state
    for i in range(1, length):
        state = _draw(cums[state], g.random())
        path[i] = state
    return path


def birkhoff_average(
    sys: SkewSystem, path: np.ndarray, f, x: int, n: int
) -> float:
    """Time average of f along the orbit of x driven by the first n path states."""
    fv = np.asarray(f, dtype=float)
    if x not in sys.family.space.support_set:
        raise StartOffSupport(f"point {x} has zero mass")
    if not 1 <= n <= len(path):
        raise ValidationError(f"need 1 <= n <= path length, got n={n}")
    tables = [list(m.table) for m in sys.family.maps]
    fl = list(fv)
    pl = [int(s) for s in path[:n]]
    pos = int(x)
    total = 0.0
    for state in pl:
        total += fl[pos]
        pos = tables[state][pos]
    return total / n


def _class_structure(sys: SkewSystem):
    chain = build_pair_chain(sys)
    classes = chain.closed_classes()
    averages = []
    for block in classes:
        idx = sorted(block)
        w = chain.stationary[idx]
        pts = np.array([chain.states[i][1] for i in idx])
        averages.append((idx, w / w.sum(), pts))
    member = {}
    for k, block in enumerate(classes):
        for i in block:
            member[i] = k
    return chain, classes, averages, member


def exact_birkhoff_limit(sys: SkewSystem, y: int, x: int, f) -> float:
    """Almost-sure limit of the Birkhoff averages started at pair (y, x).

    Equals the product-weighted average of f over the closed class of the
    pair; for a strictly irreducible driving kernel this is the conditional
    expectation of f on the invariant partition, independent of y.
    """
    fv = np.asarray(f, dtype=float)
    chain, _, averages, member = _class_structure(sys)
    pos = chain.index()
    key = (int(y), int(x))
    if key not in pos:
        raise InvalidPairState(f"{key} is not an active (state, point) pair")
    idx, w, pts = averages[member[pos[key]]]
    return float(w @ fv[pts])


def expectation_operator(sys: SkewSystem, f, x: int, n: int) -> float:
    """Average of f over the n-th random iterate of x, by exact dynamic
    programming on (state, point) mass."""
    fv = np.asarray(f, dtype=float)
    if x not in sys.family.space.support_set:
        raise StartOffSupport(f"point {x} has zero mass")
    if n < 0:
        raise ValidationError("n must be nonnegative")
    p = _start_mass(sys, x)
    tables = sys.family.table_matrix()
    kv = sys.spec.kernel.values
    for _ in range(n):
        p = _dp_step(p, kv, tables, sys.spec.support)
    return float(p.sum(axis=0) @ fv)


def _start_mass(sys: SkewSystem, x: int) -> np.ndarray:
    p = np.zeros((sys.spec.n, sys.family.space.k))
    p[:, int(x)] = sys.spec.m.values
    return p


def _dp_step(
    p: np.ndarray, kv: np.ndarray, tables: np.ndarray, supp: np.ndarray
) -> np.ndarray:
    moved = np.zeros_like(p)
    for y in supp:
        np.add.at(moved[int(y)], tables[int(y)], p[int(y)])
    return kv.T @ moved


def exact_cesaro_limit(sys: SkewSystem, f, x: int) -> float:
    """Limit of the Cesaro means of M_j f at x, in closed form.

    The initial pair mass m(y) at (y, x) stays inside the closed class of
    (y, x) and equidistributes to the normalized product measure there, so
    the limit is the m-mixture of class averages over the classes met by x.
    """
    fv = np.asarray(f, dtype=float)
    if x not in sys.family.space.support_set:
        raise StartOffSupport(f"point {x} has zero mass")
    chain, _, averages, member = _class_structure(sys)
    pos = chain.index()
    mv = sys.spec.m.values
    total = 0.0
    for y in sys.spec.support:
        idx, w, pts = averages[member[pos[(int(y), int(x))]]]
        total += float(mv[int(y)]) * float(w @ fv[pts])
    return total


def cesaro_partial_averages(
    sys: SkewSystem, f, x: int, horizons
) -> dict[int, float]:
    """Iterative partial Cesaro means (1/n) sum_{j<n} M_j f(x) at each horizon."""
    hs = _checked_horizons(horizons)
    fv = np.asarray(f, dtype=float)
    if x not in sys.family.space.support_set:
        raise StartOffSupport(f"point {x} has zero mass")
    tables = sys.family.table_matrix()
    kv = sys.spec.kernel.values
    p = _start_mass(sys, x)
    acc = 0.0
    out: dict[int, float] = {}
    want = set(hs)
    for j in range(hs[-1]):
        acc += float(p.sum(axis=0) @ fv)
        if j + 1 in want:
            out[j + 1] = acc / (j + 1)
        p = _dp_step(p, kv, tables, sys.spec.support)
    return out


def _checked_horizons(horizons) -> list[int]:
    hs = [int(h) for h in horizons]
    if not hs or any(b <= a for a, b in zip(hs, hs[1:])) or hs[0] < 1:
        raise ValidationError("horizons must be a strictly increasing list of counts >= 1")
    return hs


def orbit_occupancy(
    sys: SkewSystem,
    seed: int,
    trials: int,
    checkpoints,
    x0,
    start: int | None = None,
) -> tuple[np.ndarray, dict[int, np.ndarray]]:
    """Visit counts of fiber points along sampled orbits, per trial.

    Runs `trials` independent substreams (keyed by trial index) in
    lockstep; x0 is a single start point or one per trial. Returns the
    initial driving states and, at each checkpoint n, the (trials, points)
    matrix of visit counts over the first n steps: Birkhoff averages for
    any f follow as counts @ f / n.
    """
    hs = _checked_horizons(checkpoints)
    spec, family = sys.spec, sys.family
    supp_set = family.space.support_set
    x_arr = np.broadcast_to(np.asarray(x0, dtype=np.int64), (trials,)).copy()
    if any(int(x) not in supp_set for x in x_arr):
        raise StartOffSupport("a trial starts at a zero-mass point")
    gens = [substream(seed, t) for t in range(trials)]
    cums = _row_cumulatives(spec.kernel.values)
    tables = family.table_matrix()
    if start is None:
        m_cum = np.cumsum(spec.m.values)
        m_cum[-1] = 1.0
        states = np.array([_draw(m_cum, g.random()) for g in gens], dtype=np.int64)
    else:
        if not 0 <= start < spec.n:
            raise ValidationError(f"start state {start} out of range")
        states = np.full(trials, start, dtype=np.int64)
    first_states = states.copy()
    counts = np.zeros((trials, family.space.k), dtype=np.int64)
    results: dict[int, np.ndarray] = {}
    want = set(hs)
    rows = np.arange(trials)
    chunk = 4096
    step = 0
    while step < hs[-1]:
        width = min(chunk, hs[-1] - step)
        # one uniform per trial per step, drawn from the trial's own stream
        # in the same order sample_path consumes it
        u = np.stack([g.random(width) for g in gens])
        for c in range(width):
            np.add.at(counts, (rows, x_arr), 1)
            x_arr = tables[states, x_arr]
            states = (cums[states] <= u[:, c, None]).sum(axis=1)
            step += 1
            if step in want:
                results[step] = counts.copy()
    return first_states, results


def system_digest(sys: SkewSystem) -> str:
    """Short content hash of a skew system, for trace metadata."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(sys.spec.kernel.values).tobytes())
    h.update(np.ascontiguousarray(sys.spec.m.values).tobytes())
    h.update(np.ascontiguousarray(sys.family.space.mu.values).tobytes())
    h.update("|".join(sys.family.space.points).encode())
    for m in sys.family.maps:
        h.update(np.ascontiguousarray(m.table).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class TraceRow:
    n: int
    empirical_birkhoff: float
    mc_mean: float
    cesaro_partial: float
    reference: float
    abs_err_birkhoff: float
    abs_err_cesaro: float


CSV_HEADER = "n,empirical_birkhoff,mc_mean,cesaro_partial,reference,abs_err_birkhoff,abs_err_cesaro"


@dataclass(frozen=True)
class ConvergenceTrace:
    """Rows of a convergence experiment plus its identifying metadata."""

    rows: tuple[TraceRow, ...]
    metadata: tuple[tuple[str, str], ...]

    def __post_init__(self):
        ns = [r.n for r in self.rows]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValidationError("trace horizons must be strictly increasing")

    def to_csv(self) -> str:
        lines = [f"# {k}: {v}" for k, v in self.metadata]
        lines.append(CSV_HEADER)
        for r in self.rows:
            lines.append(
                f"{r.n},{r.empirical_birkhoff!r},{r.mc_mean!r},{r.cesaro_partial!r},"
                f"{r.reference!r},{r.abs_err_birkhoff!r},{r.abs_err_cesaro!r}"
            )
        return "\n".join(lines) + "\n"


def convergence_report(
    sys: SkewSystem,
    f,
    x: int,
    seed: int,
    horizons,
    trials: int = 200,
    start: int | None = None,
    f_label: str = "f",
    x_label: str | None = None,
) -> ConvergenceTrace:
    """Empirical and exact convergence data at the given horizons.

    Per horizon: the Birkhoff average of one sampled path (trial 0), the
    mean over all trials, the iterative Cesaro partial mean, and the exact
    limit for trial 0's initial pair; error columns measure both empirical
    routes against their exact references.
    """
    hs = _checked_horizons(horizons)
    fv = np.asarray(f, dtype=float)
    first_states, occupancy = orbit_occupancy(sys, seed, trials, hs, x, start)
    cesaro = cesaro_partial_averages(sys, fv, x, hs)
    y0 = int(first_states[0])
    reference = exact_birkhoff_limit(sys, y0, x, fv)
    cesaro_ref = exact_cesaro_limit(sys, fv, x)
    rows = []
    for n in hs:
        averages = occupancy[n] @ fv / n
        emp = float(averages[0])
        rows.append(
            TraceRow(
                n=n,
                empirical_birkhoff=emp,
                mc_mean=float(averages.mean()),
                cesaro_partial=cesaro[n],
                reference=reference,
                abs_err_birkhoff=abs(emp - reference),
                abs_err_cesaro=abs(cesaro[n] - cesaro_ref),
            )
        )
    metadata = (
        ("seed", str(seed)),
        ("start", "stationary" if start is None else str(start)),
        ("f", f_label),
        ("x", str(x) if x_label is None else x_label),
        ("system", system_digest(sys)),
        ("trials", str(trials)),
        ("cesaro_reference", repr(cesaro_ref)),
    )
    return ConvergenceTrace(tuple(rows), metadata)
