"""Backend selection for the hot kernels.

The compiled extension is preferred; the NumPy fallback is used when it is not
importable or when ``RINGCAVITY_PURE_PYTHON`` is set to a non-empty value
other than ``0``.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("RINGCAVITY_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

fock_hamiltonian = _impl.fock_hamiltonian
propagate = _impl.propagate


def implementations():
    """All importable backends keyed by name (used by tests and benchmarks)."""
    impls = {"python": _kernels_py}
    try:
        from . import _kernels

        impls["cython"] = _kernels
    except ImportError:
        pass
    return impls
