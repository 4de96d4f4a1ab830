"""Backend selection for the numerical inner loops.

The Cython extension ``ionforge._ckernels`` is used when it was built;
otherwise the numpy implementations in ``ionforge._pykernels`` are loaded.
Setting ``IONFORGE_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

if os.environ.get("IONFORGE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
MAX_POISSON_MEAN = _impl.MAX_POISSON_MEAN

rotate_pairs = _impl.rotate_pairs
coulomb_system = _impl.coulomb_system
poisson_inverse_cdf = _impl.poisson_inverse_cdf


def available_backends():
    """Map backend name to kernel module for every importable backend."""
    backends = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        backends["cython"] = _ckernels
    return backends
