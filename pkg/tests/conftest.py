import os
import sys

import numpy as np
import pytest
import scipy.sparse as sp

sys.path.insert(0, os.path.dirname(__file__))  # makes oracles importable

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "..", "fixtures")


@pytest.fixture
def fixture_dir():
    return os.path.abspath(FIXTURE_DIR)


def random_counts(rng, n_docs, vocab, density=0.4, max_count=5):
    """Random sparse nonnegative integer count matrix with no empty corpus."""
    dense = rng.integers(1, max_count + 1, size=(n_docs, vocab))
    mask = rng.random((n_docs, vocab)) < density
    dense = dense * mask
    if dense.sum() == 0:
        dense[0, 0] = 1
    return sp.csr_matrix(dense.astype(np.int64))
