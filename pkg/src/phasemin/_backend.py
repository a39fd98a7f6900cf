"""Select the solve-kernel backend at import time.

The compiled extension is preferred when present; the pure-numpy module is
a drop-in twin. Set ``PHASEMIN_BACKEND=py`` or ``=c`` to force a choice
(forcing ``c`` raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("PHASEMIN_BACKEND", "").strip().lower()

if _forced == "py":
    kernels = _kernels_py
    _name = "py"
elif _forced == "c":
    from . import _ext as kernels  # noqa: F401  (ImportError is the message)

    _name = "c"
else:
    try:
        from . import _ext as kernels  # type: ignore[no-redef]

        _name = "c"
    except ImportError:
        kernels = _kernels_py
        _name = "py"


def backend_name() -> str:
    """Which kernel implementation is active: ``"c"`` or ``"py"``."""
    return _name
