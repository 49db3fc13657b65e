"""Kernel backend selection.

The hot stepping kernels exist twice: a Cython extension
(``funnelsim._kernels``) and a pure-Python twin
(``funnelsim._kernels_py``).  The compiled one is preferred when it
imports; set ``FUNNELSIM_PURE_PYTHON=1`` to force the fallback (used by
the backend-equality tests and the benchmark).

Both are bit-identical by construction, so the choice affects speed
only.
"""

import os

if os.environ.get("FUNNELSIM_PURE_PYTHON"):
    from funnelsim import _kernels_py as kernels

    COMPILED = False
else:
    try:
        from funnelsim import _kernels as kernels  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        from funnelsim import _kernels_py as kernels  # type: ignore[no-redef]

        COMPILED = False


def backend_name() -> str:
    """'compiled' when the Cython kernels are active, else 'pure-python'."""
    return "compiled" if COMPILED else "pure-python"
