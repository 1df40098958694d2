"""Backend selection for the stepping kernels.

The numba backend is the default.  Set ``TORUSTWIST_NUMBA=0`` to force the
pure NumPy/Python fallback (same results to floating tolerance, no
compilation); the resolved choice is exposed as ``BACKEND``.
``benchmarks/bench_backends.py`` compares the two.
"""

from __future__ import annotations

import os

from ._kernels_numpy import (  # noqa: F401  (canonical home of the constants)
    FAMILY_CIRCLE_DIFFEO,
    FAMILY_SADDLE_CENTER,
    FAMILY_STANDARD,
    FAMILY_STANDARD_SHIFTED,
    TWO_PI,
)

_flag = os.environ.get("TORUSTWIST_NUMBA", "").strip().lower()
if _flag in ("0", "false", "off", "no"):
    from . import _kernels_numpy as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
        from . import _kernels_numpy as _impl

        BACKEND = "numpy"

advance = _impl.advance
trajectory = _impl.trajectory
hit_times = _impl.hit_times
