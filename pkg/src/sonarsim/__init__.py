"""sonarsim: 2D acoustic pulse-echo simulation and synthetic corpus factory.

Forward-models wave propagation through random obstacle scenes, records
shot gathers at a receiver line, and packages rescaled gather/mask pairs
into reproducible sharded corpora, plus pixel metrics for scoring mask
predictions against ground truth.
"""

from .kernels import BACKEND
from .metrics import (
    ConfusionCounts,
    MetricsReport,
    aggregate,
    binarize,
    confusion,
    iou,
    score,
)
from .scenegen import SceneConfig, SceneSpec, Shape, generate_scene, rasterize
from .wavesim import (
    ConfigError,
    GridSpec,
    NumericalInstabilityError,
    ReceiverArray,
    SourceSpec,
    VelocityModel,
    WaveState,
    simulate,
    snapshot,
    source_amplitude,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "ConfusionCounts",
    "GridSpec",
    "MetricsReport",
    "NumericalInstabilityError",
    "ReceiverArray",
    "SceneConfig",
    "SceneSpec",
    "Shape",
    "SourceSpec",
    "VelocityModel",
    "WaveState",
    "aggregate",
    "binarize",
    "confusion",
    "generate_scene",
    "iou",
    "rasterize",
    "score",
    "simulate",
    "snapshot",
    "source_amplitude",
    "step",
    "__version__",
]
