"""Kernel selection: compiled Cython core if built, numpy fallback otherwise.

Set ``THETA_DOUBLER_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("THETA_DOUBLER_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels

rref_modp = _impl.rref_modp
divisor_accumulate = _impl.divisor_accumulate


def use_backend(name: str) -> None:
    """Switch kernels at runtime (benchmarks and cross-checking tests)."""
    global rref_modp, divisor_accumulate, BACKEND
    if name == "cython":
        from . import _ckernels as impl
    elif name == "python":
        impl = _pykernels
    else:
        raise ValueError(name)
    rref_modp = impl.rref_modp
    divisor_accumulate = impl.divisor_accumulate
    BACKEND = name
