from __future__ import annotations

import pytest

from atilde.pgeom import VectorGeometry
from atilde.tripres import find_presentation
from atilde.wordcore import build_ball, group


def _presentation(q: int):
    found = find_presentation(VectorGeometry(2, q))
    assert found, f"no presentation found for q={q}"
    return found[0]


@pytest.fixture(scope="session")
def P2():
    return _presentation(2)


@pytest.fixture(scope="session")
def G2(P2):
    return group(P2)


@pytest.fixture(scope="session")
def ball2(G2):
    return build_ball(G2, 4)


@pytest.fixture(scope="session")
def P3():
    return _presentation(3)


@pytest.fixture(scope="session")
def G3(P3):
    return group(P3)


@pytest.fixture(scope="session")
def ball3(G3):
    return build_ball(G3, 4)
