"""Shared fixtures: small hand-built instances plus one synthetic benchmark."""

from __future__ import annotations

import numpy as np
import pytest

from tagselect import (
    GroundTruth,
    ScoreTable,
    SyntheticSpec,
    Vocabulary,
    generate_synthetic,
    learn_all_thresholds,
)

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line("  " + line)


@pytest.fixture
def tiny_vocab():
    return Vocabulary.from_partition(["apple", "boat", "cat"], ["dune", "echo"])


@pytest.fixture
def tiny_table(tiny_vocab):
    scores = np.array(
        [
            [0.9, 0.2, 0.7, 0.4, 0.1],
            [0.1, 0.8, 0.3, 0.6, 0.5],
            [0.5, 0.5, 0.5, 0.5, 0.5],
        ]
    )
    return ScoreTable(("im0", "im1", "im2"), tiny_vocab.tags, scores)


@pytest.fixture
def tiny_truth(tiny_vocab):
    pairs = [
        ("im0", "apple", 1),
        ("im0", "boat", 0),
        ("im0", "cat", 1),
        ("im1", "apple", 0),
        ("im1", "boat", 1),
        ("im1", "cat", 0),
        ("im2", "apple", 1),
        ("im2", "boat", 0),
        ("im2", "cat", 0),
    ]
    return GroundTruth.from_pairs(pairs)


@pytest.fixture(scope="session")
def small_spec():
    return SyntheticSpec(
        n_seen=12,
        n_novel=8,
        n_train=60,
        n_images=40,
        count_min=2,
        count_max=6,
        noise_std=0.25,
    )


@pytest.fixture(scope="session")
def small_bench(small_spec):
    return generate_synthetic(small_spec, seed=7)


@pytest.fixture(scope="session")
def small_model(small_bench):
    return learn_all_thresholds(
        small_bench.train_table, small_bench.train_truth, small_bench.vocab
    )
