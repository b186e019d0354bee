import numpy as np
import pytest

from aggbounds.core import (AggregateDataset, CovariateSupport, FinerMoment, GroupRecord,
                            OutcomeRange, indicator_matrix)

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_group(support, rng, group_id="g", y_range=OutcomeRange(0.0, 1.0), finer=(),
                 concentration=1.0, count=1000, share=1.0):
    """Group aggregates implied by a random joint and random cell means."""
    p = rng.dirichlet(np.full(support.K, concentration))
    c = y_range.y_lo + y_range.width * rng.random(support.K)
    A = indicator_matrix(support)
    keys = support.marginal_keys
    marg = {k: float(A[r] @ p) for r, k in enumerate(keys)}
    fm = {}
    for (l, v) in finer:
        r = keys.index((l, v))
        mass = A[r] @ p
        if mass > 0:
            fm[(l, v)] = FinerMoment(float(A[r] @ (p * c) / mass), None,
                                     max(int(round(mass * count)), 1))
    return GroupRecord(group_id, share, float(p @ c), marg, count, None, fm), p, c


def random_dataset(support, rng, G=3, y_range=OutcomeRange(0.0, 1.0), binary=False,
                   finer=(), count=1000):
    shares = rng.dirichlet(np.ones(G))
    groups = [random_group(support, rng, f"g{i}", y_range, finer, count=count,
                           share=float(s))[0] for i, s in enumerate(shares)]
    return AggregateDataset(support, y_range, tuple(groups), binary)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def one_cov_group():
    """L=1 binary, P[X=1]=0.7, group mean 0.6."""
    support = CovariateSupport.binary(1)
    g = GroupRecord("A", 1.0, 0.6, {(0, 0.0): 0.3, (0, 1.0): 0.7}, 100)
    return support, g
