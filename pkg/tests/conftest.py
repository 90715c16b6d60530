"""Shared fixtures, hypothesis strategies and sampling helpers."""

from __future__ import annotations

import pathlib

import pytest
from hypothesis import strategies as st

from pddb.confidence import ConfidenceLevel, Order
from pddb.modes import Mode
from pddb.parser import parse_program

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
EXAMPLES_DIR = REPO_ROOT / "examples"

_unit = st.floats(min_value=0.0, max_value=1.0,
                  allow_nan=False, allow_infinity=False)


def c(a, b, g, d) -> ConfidenceLevel:
    return ConfidenceLevel(a, b, g, d)


def conf_close(c1: ConfidenceLevel, c2: ConfidenceLevel, tol=1e-12) -> bool:
    return c1.close_to(c2, tol)


def leq_t_eps(c1: ConfidenceLevel, c2: ConfidenceLevel, tol=1e-12) -> bool:
    """Truth-order comparison with test tolerance for rounding noise."""
    return (c1.belief_lo <= c2.belief_lo + tol
            and c1.belief_hi <= c2.belief_hi + tol
            and c1.doubt_lo >= c2.doubt_lo - tol
            and c1.doubt_hi >= c2.doubt_hi - tol)


@st.composite
def raw_levels(draw) -> ConfidenceLevel:
    """Arbitrary points of [0,1]^4; intervals may be empty."""
    return ConfidenceLevel(draw(_unit), draw(_unit), draw(_unit), draw(_unit))


@st.composite
def consistent_levels(draw) -> ConfidenceLevel:
    a, b = sorted((draw(_unit), draw(_unit)))
    g = draw(_unit) * (1.0 - a)
    d = draw(_unit)
    g, d = min(g, d), max(g, d)
    return ConfidenceLevel(a, b, g, d)


@st.composite
def reduced_levels(draw) -> ConfidenceLevel:
    a, b = sorted((draw(_unit), draw(_unit)))
    g = draw(_unit) * (1.0 - b)
    d = draw(_unit) * (1.0 - a)
    g, d = min(g, d), max(g, d)
    return ConfidenceLevel(a, b, g, d)


orders = st.sampled_from(list(Order))
modes = st.sampled_from(list(Mode))
safe_modes = st.sampled_from([Mode.IGNORANCE, Mode.INDEPENDENCE,
                              Mode.POSITIVE_CORRELATION,
                              Mode.NEGATIVE_CORRELATION])


def sample_reduced(rng) -> ConfidenceLevel:
    """Seeded numpy variant of reduced_levels for bulk sampling."""
    a, b = sorted(rng.uniform(0.0, 1.0, 2))
    g = rng.uniform() * (1.0 - b)
    d = rng.uniform() * (1.0 - a)
    g, d = min(g, d), max(g, d)
    return ConfidenceLevel(a, b, g, d)


def sample_consistent(rng) -> ConfidenceLevel:
    a, b = sorted(rng.uniform(0.0, 1.0, 2))
    g = rng.uniform() * (1.0 - a)
    d = rng.uniform()
    g, d = min(g, d), max(g, d)
    return ConfidenceLevel(a, b, g, d)


def sample_raw(rng) -> ConfidenceLevel:
    return ConfidenceLevel(*rng.uniform(0.0, 1.0, 4))


@pytest.fixture(scope="session")
def examples_dir() -> pathlib.Path:
    return EXAMPLES_DIR


def load_example(name: str):
    return parse_program((EXAMPLES_DIR / name).read_text())


@pytest.fixture(scope="session")
def ex52():
    return load_example("ex52.pddb")


@pytest.fixture(scope="session")
def tc1():
    return load_example("tc1.pddb")


@pytest.fixture(scope="session")
def tc2():
    return load_example("tc2.pddb")


@pytest.fixture(scope="session")
def tc2_ign():
    return load_example("tc2_ign.pddb")


def chain_program_text(n: int, back_edge: bool = False) -> str:
    """Transitive closure over a directed chain of n nodes (pc mode)."""
    lines = [
        "p(X,Y) <[1,1],[0,0]> <- e(X,Z), p(Z,Y) ; conj=ind, disj=pc.",
        "p(X,Y) <[1,1],[0,0]> <- e(X,Y) ; conj=ind, disj=pc.",
    ]
    for i in range(1, n):
        lines.append(f"e({i},{i + 1}) <[1,1],[0,0]>.")
    if back_edge:
        lines.append(f"e({n},1) <[1,1],[0,0]>.")
    return "\n".join(lines) + "\n"
