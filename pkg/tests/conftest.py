import pytest

from sonarsim.config import RunConfig
from sonarsim.dataset import build_corpus

# Scaled-down run configuration: 96x96 grid, same physics constants,
# 11 receivers, 1400-sample window. One sample simulates in ~0.2 s.
SMALL_CFG = {
    "grid": {"n_steps": 1800},
    "source": {"row": 8, "col": 48},
    "receivers": {"row": 8,
                  "cols": [6, 14, 23, 31, 40, 48, 56, 65, 73, 82, 90],
                  "record_start": 400},
    "scene": {"n_rows": 96, "n_cols": 96, "row_range": [48, 95],
              "col_range": [8, 95]},
    "shard_size": 4,
}


@pytest.fixture(scope="session")
def small_cfg_dict() -> dict:
    return SMALL_CFG


@pytest.fixture(scope="session")
def small_config() -> RunConfig:
    return RunConfig.from_dict(SMALL_CFG).validate()


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory, small_config):
    """A 10-sample corpus shared by read-only tests."""
    out = tmp_path_factory.mktemp("corpus") / "c10"
    manifest = build_corpus(10, 0, out, workers=1, config=small_config)
    return out, manifest
