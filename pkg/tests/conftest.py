""" Shared polling instances

Copyright (c) 2021 IdmFoundInHim, under MIT License
"""
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from statepoll import polling_model

MODELS = Path(__file__).parent.parent / "docs" / "models"

SWAP = [[0, 1], [1, 0]]
UNIFORM2 = [[0.5, 0.5], [0.5, 0.5]]


def cyclic(n: int) -> np.ndarray:
    return np.roll(np.eye(n), 1, axis=1)


def symmetric_pair(lam: float, tau: float = 1.0, tau_tilde: float = 1.0):
    return polling_model(
        2, SWAP, SWAP, [lam] * 2, [tau] * 2, [tau_tilde] * 2
    )


@pytest.fixture
def taxicab():
    """Alternate after a fare, pick at random after an empty visit"""
    return polling_model(
        2,
        SWAP,
        UNIFORM2,
        [0.1, 0.2],
        [1, 1],
        [0.5, 0.5],
        [1, 1],
        [0.25, 0.25],
    )


@pytest.fixture
def stable_pair():
    return symmetric_pair(0.3)


@pytest.fixture
def overloaded_pair():
    return symmetric_pair(0.6)


@pytest.fixture
def cyclic_service():
    """Deterministic switchover 0.5 and service 1 on two stations"""
    return polling_model(
        2,
        SWAP,
        SWAP,
        [0.1, 0.1],
        [1.5, 1.5],
        [0.5, 0.5],
        [2.25, 2.25],
        [0.25, 0.25],
    )


@pytest.fixture
def lopsided():
    """State-free routing that visits station 1 nine times in ten"""
    rows = [[0.9, 0.1], [0.9, 0.1]]
    return polling_model(2, rows, rows, [0.1, 0.05], [1, 1], [0.5, 0.5])


@pytest.fixture
def coinciding():
    """P = P-tilde with distinct tau and tau-tilde"""
    rows = [[0.3, 0.7], [0.6, 0.4]]
    return polling_model(
        2, rows, rows, [0.1, 0.2], [1.0, 1.2], [0.5, 0.4]
    )


@pytest.fixture
def model_path():
    def path(name: str) -> str:
        return str(MODELS / f"{name}.json")

    return path


@pytest.fixture
def write_model(tmp_path):
    def write(doc: dict, name: str = "model.json") -> str:
        target = tmp_path / name
        target.write_text(json.dumps(doc))
        return str(target)

    return write


@st.composite
def polling_models(draw, max_n: int = 4, coinciding: bool = False):
    """Valid instances with positive routing and rho_hat far from 1"""
    n = draw(st.integers(min_value=2, max_value=max_n))
    weight = st.floats(min_value=0.05, max_value=1.0)
    positive = st.floats(min_value=0.1, max_value=2.0)
    row = st.lists(weight, min_size=n, max_size=n)

    def stochastic():
        rows = np.array(draw(st.lists(row, min_size=n, max_size=n)))
        return rows / rows.sum(axis=1, keepdims=True)

    p = stochastic()
    return polling_model(
        n,
        p,
        p if coinciding else stochastic(),
        draw(st.lists(st.floats(0.01, 0.1), min_size=n, max_size=n)),
        draw(st.lists(positive, min_size=n, max_size=n)),
        draw(st.lists(positive, min_size=n, max_size=n)),
    )
