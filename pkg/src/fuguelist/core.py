"""Kernel selection.

The compiled kernel is used when it imports; set ``FUGUELIST_PURE=1`` to force
the pure-Python one. Both expose the same ``TreeCore`` API.
"""

import os

from . import _pycore

NONE = _pycore.NONE
END = _pycore.END

if os.environ.get("FUGUELIST_PURE", "") not in ("", "0"):
    TreeCore = _pycore.TreeCore
    KERNEL = "python"
else:
    try:
        from ._ccore import TreeCore
    except ImportError:
        TreeCore = _pycore.TreeCore
        KERNEL = "python"
    else:
        KERNEL = "cython"

KERNELS = {"python": _pycore.TreeCore}
try:
    from ._ccore import TreeCore as _compiled
except ImportError:
    pass
else:
    KERNELS["cython"] = _compiled
