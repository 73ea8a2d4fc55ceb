"""Rasterization kernels: compiled core with a pure-numpy fallback.

The Cython module ``tomo._kernels.native`` implements the pixel
point-location loops that dominate dataset generation. Importing this
package selects the compiled version when it was built and silently
falls back to ``tomo._kernels.fallback`` otherwise. Set TOMO_NO_NATIVE=1
to force the fallback (used by the equivalence tests and the benchmark).

Both implementations evaluate identical IEEE expressions in the same
order, so their outputs are required to match bit for bit.
"""

import os

if os.environ.get("TOMO_NO_NATIVE", "") not in ("", "0"):
    from . import fallback as _impl

    HAVE_NATIVE = False
else:
    try:
        from . import native as _impl  # type: ignore[attr-defined]

        HAVE_NATIVE = True
    except ImportError:
        from . import fallback as _impl

        HAVE_NATIVE = False

locate_cells = _impl.locate_cells
locate_points = _impl.locate_points
BACKEND = "native" if HAVE_NATIVE else "fallback"
