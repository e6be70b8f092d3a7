"""Backend selection for the sweep kernel.

The compiled Cython kernel is used when it was built; otherwise the numpy
implementation is used. Set ``GDSYNTH_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

PySweepKernel = _pykernels.SweepKernel

try:
    from ._ckernels import SweepKernel as CSweepKernel
except ImportError:  # extension not built
    CSweepKernel = None

if CSweepKernel is not None and not os.environ.get("GDSYNTH_PURE_PYTHON"):
    SweepKernel = CSweepKernel
    BACKEND = "cython"
else:
    SweepKernel = PySweepKernel
    BACKEND = "python"


def available_backends() -> dict:
    out = {"python": PySweepKernel}
    if CSweepKernel is not None:
        out["cython"] = CSweepKernel
    return out
