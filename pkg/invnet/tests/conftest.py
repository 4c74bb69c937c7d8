"""Shared fixtures: corpora generated through the simulator's CLI.

The network package reads corpus files directly, so tests exercise that
boundary the same way a user would: build corpora with the ``sonarsim``
command, never through this package's internals.
"""

import json
import subprocess

import pytest


def _run_cli(args, **kwargs):
    return subprocess.run(list(map(str, args)), capture_output=True,
                          text=True, **kwargs)


def _gen_corpus(out_dir, n, base_seed=0, config=None):
    args = ["sonarsim", "gen-dataset", "--n", n, "--base-seed", base_seed,
            "--out", out_dir]
    if config is not None:
        args += ["--config", config]
    proc = _run_cli(args)
    assert proc.returncode == 0, proc.stderr
    return out_dir


@pytest.fixture(scope="session")
def cli_run():
    """Callable running an external command and capturing its output."""
    return _run_cli


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """Six production-geometry samples; splits 4/1/1."""
    return _gen_corpus(tmp_path_factory.mktemp("tiny") / "corpus", 6)


@pytest.fixture(scope="session")
def overfit_corpus(tmp_path_factory):
    """Fourteen samples: the rounding rule makes the train split exactly 10."""
    return _gen_corpus(tmp_path_factory.mktemp("overfit") / "corpus", 14)


@pytest.fixture(scope="session")
def desk_corpus(tmp_path_factory):
    """Two hundred samples; splits 140/30/30."""
    return _gen_corpus(tmp_path_factory.mktemp("desk") / "corpus", 200)


@pytest.fixture(scope="session")
def small_scene_corpus(tmp_path_factory):
    """Four samples on a 96x96 scene: same gather shape, smaller masks."""
    cfg = {
        "grid": {"n_steps": 1800},
        "source": {"row": 8, "col": 48},
        "receivers": {"row": 8, "cols": [6, 14, 23, 31, 40, 48, 56, 65, 73, 82, 90],
                      "record_start": 400},
        "scene": {"n_rows": 96, "n_cols": 96, "row_range": [48, 95],
                  "col_range": [8, 95]},
        "shard_size": 4,
    }
    root = tmp_path_factory.mktemp("small")
    cfg_path = root / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    return _gen_corpus(root / "corpus", 4, config=cfg_path)
