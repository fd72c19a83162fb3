from __future__ import annotations

import time

import numpy as np
import pytest

from maxrgm import measures as ms
from maxrgm.cli import reproduce_olympics
from maxrgm.core import Technology
from maxrgm.oracle import random_positive_instance
from maxrgm.olympic import OlympicConfig, load_dataset, load_expected, olympic_tradeoffs

# "1".."7", "8a".."8g" -> (title, passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[str, bool, str]] = {}


def record(key: str, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[key] = (title, bool(ok), detail)


def tiny_instances(seed: int, count: int):
    """Deterministic stream of small technologies with positive facet normals."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        m = int(rng.integers(1, 3))
        s = int(rng.integers(1, 5 - m))
        n = int(rng.integers(1, 8 - (m + s) + 1))
        yield random_positive_instance(rng, m, s, n)


@pytest.fixture(scope="session")
def olympic_dataset():
    return load_dataset()


@pytest.fixture(scope="session")
def olympic_config():
    return OlympicConfig.load()


@pytest.fixture(scope="session")
def olympic_expected():
    return {e.dmu: e for e in load_expected()}


@pytest.fixture(scope="session")
def olympic_tech(olympic_dataset):
    return Technology(olympic_dataset, olympic_tradeoffs())


@pytest.fixture(scope="session")
def olympic_plain(olympic_dataset):
    return Technology(olympic_dataset)


@pytest.fixture(scope="session")
def olympic_rgm(olympic_tech, olympic_dataset):
    """max_rgm result for every DMU, keyed by id."""
    return {d.id: ms.max_rgm(olympic_tech, d) for d in olympic_dataset}


@pytest.fixture(scope="session")
def olympic_fgl(olympic_tech, olympic_dataset):
    return {d.id: ms.fgl(olympic_tech, d) for d in olympic_dataset}


@pytest.fixture(scope="session")
def reproduction():
    """(rows by id, mismatches, seconds) of one full case-study rerun."""
    t0 = time.perf_counter()
    rows, mismatches = reproduce_olympics()
    return {r.dmu: r for r in rows}, mismatches, time.perf_counter() - t0


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    groups: dict[int, list[str]] = {}
    for key in ACCEPTANCE:
        groups.setdefault(int(key[0]), []).append(key)
    for num in sorted(groups):
        keys = sorted(groups[num])
        ok = all(ACCEPTANCE[k][1] for k in keys)
        if keys == [str(num)]:
            title, _, detail = ACCEPTANCE[keys[0]]
        else:
            title = "property suites"
            detail = "; ".join(f"({k[1:]}) {ACCEPTANCE[k][0]} {'pass' if ACCEPTANCE[k][1] else 'FAIL'}: {ACCEPTANCE[k][2]}" for k in keys)
        terminalreporter.write_line(f"criterion {num} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
