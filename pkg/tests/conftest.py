import numpy as np
import pytest

from chainrate.chain import ChainSpec, is_primitive
from chainrate.fileio import load_corpus

ACCEPTANCE_LINES = []


def random_stochastic(rng, n, sparsity=0.0):
    """Dirichlet rows with optional random zeros; rows always keep one positive entry."""
    P = rng.dirichlet(np.ones(n), size=n)
    if sparsity:
        mask = rng.random((n, n)) < sparsity
        mask[np.arange(n), rng.integers(0, n, size=n)] = False
        P = np.where(mask, 0.0, P)
        P /= P.sum(axis=1, keepdims=True)
    # exact row sums after renormalization
    P[:, -1] = np.clip(1.0 - P[:, :-1].sum(axis=1), 0.0, None)
    return P / P.sum(axis=1, keepdims=True)


def random_primitive_chains(count, seed, max_states=8, min_states=2):
    rng = np.random.default_rng(seed)
    chains = []
    while len(chains) < count:
        n = int(rng.integers(min_states, max_states + 1))
        P = random_stochastic(rng, n, sparsity=float(rng.choice([0.0, 0.3, 0.5])))
        if is_primitive(P):
            chains.append(ChainSpec.homogeneous(P, f"rand{len(chains)}"))
    return chains


def random_cyclic_pairs(count, seed, max_states=6):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(2, max_states + 1))
        mats = [random_stochastic(rng, n, sparsity=0.4) for _ in range(2)]
        out.append(ChainSpec.time_varying(mats, "cyclic", f"cyc{k}"))
    return out


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture(scope="session")
def p2(corpus):
    return corpus["p2"]


@pytest.fixture(scope="session")
def c3(corpus):
    return corpus["c3"]


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def record(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f" -- {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
