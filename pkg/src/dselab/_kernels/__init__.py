"""Hot-kernel backend selection.

Imports the compiled extension when it was built, otherwise the NumPy
fallback. Set the environment variable DSELAB_FORCE_PY_KERNELS=1 to force
the fallback (used by the benchmark and the equivalence tests).
"""

import os

if os.environ.get("DSELAB_FORCE_PY_KERNELS"):
    from . import _core_py as _impl
else:
    try:
        from . import _core as _impl      # type: ignore[attr-defined]
    except ImportError:
        from . import _core_py as _impl

BACKEND = _impl.BACKEND
affine_trap_run = _impl.affine_trap_run
kf_affine_run = _impl.kf_affine_run

from . import _core_py as python_impl    # always importable, for comparisons

__all__ = ["BACKEND", "affine_trap_run", "kf_affine_run", "python_impl"]
