"""Kernel backend selection.

The compiled extension is used when it was built and ``ALLCONCUR_PURE_PYTHON``
is not set; otherwise the pure-Python module with the identical contract.
"""

import os

BACKEND = "python"

if not os.environ.get("ALLCONCUR_PURE_PYTHON"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = None
else:
    _impl = None

if _impl is None:
    from . import _kernels_py as _impl

from . import _kernels_py as python_backend

I1 = _impl.I1
I2 = _impl.I2
I3 = _impl.I3
I4 = _impl.I4
TD_EQUIV = _impl.TD_EQUIV
RTD_SUPERSET = _impl.RTD_SUPERSET
RTD_INVARIANT = _impl.RTD_INVARIANT
RTD_MONOTONIC = _impl.RTD_MONOTONIC
REMOVAL = _impl.REMOVAL

failed_mask = _impl.failed_mask
reach = _impl.reach
td_reach = _impl.td_reach
td_build = _impl.td_build
td_update = _impl.td_update
rtd_build = _impl.rtd_build
td_violations = _impl.td_violations
server_violations = _impl.server_violations
step_violations = _impl.step_violations
fingerprint = _impl.fingerprint

MAX_SERVERS = 64 if BACKEND == "cython" else None
