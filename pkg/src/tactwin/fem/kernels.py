"""Kernel backend selection.

The compiled extension is optional; the NumPy implementation is always
available and is the reference. Set TACTWIN_PURE_PYTHON=1 to force the
fallback even when the extension is built.
"""

import os

from . import _corotational_np as _np_impl

precompute = _np_impl.precompute
polar_rotations = _np_impl.polar_rotations

# Always the SVD-based implementation. Its polar factor stays a proper
# rotation even for det(F) <= 0 (reflection fix), so forces remain finite
# and restoring through transient inversions; the compiled kernel only
# guarantees this for det(F) > 0.
reference_forces_and_blocks = _np_impl.forces_and_blocks

if os.environ.get("TACTWIN_PURE_PYTHON") == "1":
    forces_and_blocks = _np_impl.forces_and_blocks
    backend_name = "numpy"
else:
    try:
        from ._corotational_cy import forces_and_blocks  # type: ignore[attr-defined]

        backend_name = "cython"
    except ImportError:
        forces_and_blocks = _np_impl.forces_and_blocks
        backend_name = "numpy"
