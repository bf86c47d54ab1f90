"""Backend selection for the simulation path loop.

The compiled extension is preferred; set ``MMPERT_BACKEND=python`` to force
the numpy implementation.
"""

from __future__ import annotations

import os

from . import _pykernel

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

BACKENDS = {"python": _pykernel.simulate}
if _ckernel is not None:
    BACKENDS["cython"] = _ckernel.simulate


def default_backend() -> str:
    forced = os.environ.get("MMPERT_BACKEND", "").strip().lower()
    if forced:
        if forced not in BACKENDS:
            raise RuntimeError(f"backend {forced!r} unavailable; have {sorted(BACKENDS)}")
        return forced
    return "cython" if "cython" in BACKENDS else "python"


def get_kernel(backend: str | None = None):
    name = backend or default_backend()
    try:
        return BACKENDS[name]
    except KeyError:
        raise RuntimeError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
