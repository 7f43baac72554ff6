import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from stratcv.boosting import TrainConfig, train


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    """Trigger the numba kernels once so no timed test pays the compile."""
    rng = np.random.default_rng(0)
    x = rng.standard_normal((32, 3))
    y = (x[:, 0] > 0).astype(np.int8)
    train(x, y, TrainConfig(rounds=2, max_depth=2))
