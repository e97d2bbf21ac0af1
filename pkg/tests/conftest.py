"""
Shared fixtures.
"""
import os

# Keep test output free of progress bars
os.environ.setdefault('VBLC_PROGRESS', '0')

import numpy as np
import pytest

from src.data.synth import SceneSpec, gen_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def tiny_spec():
    return SceneSpec(height=16, width=16)


@pytest.fixture
def tiny_dataset(tmp_path, tiny_spec):
    """Four source and four target scenes at 16x16."""
    root = tmp_path / 'data'
    gen_dataset(tiny_spec, 4, 4, root, seed=3)
    return root


def random_image(rng, h=8, w=8):
    return rng.uniform(0.0, 1.0, size=(h, w, 3))
