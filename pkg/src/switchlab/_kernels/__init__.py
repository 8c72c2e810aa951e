"""Hot kernels, compiled when available.

The Cython core (``_core``) is used if it imports; otherwise the numpy fallback in
``_pure`` is selected. Set ``SWITCHLAB_PURE=1`` to force the fallback.
"""

import os

from . import _pure

BACKEND = "python"
_impl = _pure
if not os.environ.get("SWITCHLAB_PURE"):
    try:
        from . import _core as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pure

window_extrema = _impl.window_extrema
reduce_alternating = _impl.reduce_alternating
stack_windows = _impl.stack_windows

__all__ = ["BACKEND", "window_extrema", "reduce_alternating", "stack_windows"]
