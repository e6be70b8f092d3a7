"""Unitary synthesis by sweeping gradient descent over CNOT skeletons."""
from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("gdsynth")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

from .circuit import Dressing, Skeleton, evaluate, export_qasm, normalize, slot_count
from .kernels import BACKEND
from .linalg import closest_unitary, euler_to_su2, haar_random_unitary, su2_to_euler
from .optimizer import OptimizerConfig, Status, SynthesisResult, cost, synthesize
from .params import (
    ParamReport,
    count_adequate_sequences,
    effective_parameters_combinatorial,
    effective_parameters_numeric,
)
from .skeletons import full_skeleton, line_skeleton, required_layers, star_skeleton

__all__ = [
    "BACKEND",
    "Dressing",
    "OptimizerConfig",
    "ParamReport",
    "Skeleton",
    "Status",
    "SynthesisResult",
    "closest_unitary",
    "cost",
    "count_adequate_sequences",
    "effective_parameters_combinatorial",
    "effective_parameters_numeric",
    "euler_to_su2",
    "evaluate",
    "export_qasm",
    "full_skeleton",
    "haar_random_unitary",
    "line_skeleton",
    "normalize",
    "required_layers",
    "slot_count",
    "star_skeleton",
    "su2_to_euler",
    "synthesize",
]
