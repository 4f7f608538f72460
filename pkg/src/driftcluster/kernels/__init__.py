"""Inner-loop kernels with a compiled core and a pure-Python fallback.

Backend selection happens once at import time:

* ``DRIFTCLUSTER_KERNELS=python``   force the numpy/scipy fallback,
* ``DRIFTCLUSTER_KERNELS=compiled`` require the Cython extension and fail
  loudly if it is not built,
* unset or ``auto``                 use the extension when importable.

``BACKEND`` records the choice ("compiled" or "python") and is reported by
``driftcluster --version`` and the benchmark script.
"""

import os

from . import _fallback

try:
    from . import _core
except ImportError:
    _core = None

_requested = os.environ.get("DRIFTCLUSTER_KERNELS", "auto").lower()
if _requested == "python":
    _impl = _fallback
elif _requested == "compiled":
    if _core is None:
        raise ImportError(
            "DRIFTCLUSTER_KERNELS=compiled but the extension "
            "driftcluster.kernels._core is not built"
        )
    _impl = _core
elif _requested == "auto":
    _impl = _core if _core is not None else _fallback
else:
    raise ValueError(
        f"unrecognized DRIFTCLUSTER_KERNELS value {_requested!r}; "
        "expected 'auto', 'python' or 'compiled'"
    )

BACKEND = "compiled" if _impl is _core else "python"

thomas = _impl.thomas
upwind_fluxes = _impl.upwind_fluxes
explicit_update = _impl.explicit_update


def available_backends():
    """Map of backend name to kernel module, for benchmarks and parity tests."""
    out = {"python": _fallback}
    if _core is not None:
        out["compiled"] = _core
    return out
