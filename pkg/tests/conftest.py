"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

import stepskew as sk


def spec_of(rows, m) -> sk.MarkovSpec:
    return sk.validate_spec(
        sk.StochasticMatrix.from_rows(rows), sk.ProbVector.from_values(m)
    )


def system_of(spec, tables, mu=None, points=None) -> sk.SkewSystem:
    k = len(tables[0])
    if points is None:
        points = tuple(str(i) for i in range(k))
    if mu is None:
        mu = np.full(k, 1.0 / k)
    space = sk.FiniteMeasureSpace.create(points, mu)
    family = sk.TransformationFamily.create(space, tables)
    return sk.SkewSystem.create(spec, family)


def union_closure(blocks) -> set[frozenset]:
    """All unions of the given blocks, including the empty union."""
    sets = {frozenset()}
    for b in blocks:
        sets |= {s | b for s in sets}
    return sets


def ergodic_family(cfg, space, n_states, index, active=None, tries=60):
    """First generated family (by salted index) ergodic over the active states."""
    if active is None:
        active = range(n_states)
    for t in range(tries):
        fam = sk.generate_family(cfg, space, n_states, index=index * tries + t)
        if sk.is_family_ergodic(fam, active):
            return fam
    return None


@pytest.fixture(scope="session")
def period2_spec():
    return spec_of([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5])


@pytest.fixture(scope="session")
def bufetov_system():
    from stepskew.cli import config_system
    from stepskew.gallery import gallery_config

    return config_system(gallery_config("bufetov_period2"))


@pytest.fixture(scope="session")
def rotation_system():
    from stepskew.cli import config_system
    from stepskew.gallery import gallery_config

    return config_system(gallery_config("bernoulli_rotation"))
