"""Kernel backend selection.

The compiled Cython extension is used when importable; the pure-numpy
fallback otherwise.  Set DROPLETLAB_BACKEND=python or =compiled to force a
choice (forcing "compiled" when the extension is absent raises at import of
the consumer, which is preferable to silently benchmarking the wrong code).
"""
from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled  # type: ignore[attr-defined]
except ImportError:
    _compiled = None

_CHOICES = {"python": _kernels_py, "compiled": _compiled, "auto": None}


def get_backend(name: str | None = None):
    """Resolve a kernel module by name, honoring the environment override."""
    if name is None:
        name = os.environ.get("DROPLETLAB_BACKEND", "auto")
    if name not in _CHOICES:
        raise ValueError(f"unknown backend {name!r}; expected python, compiled, or auto")
    if name == "auto":
        return _compiled if _compiled is not None else _kernels_py
    mod = _CHOICES[name]
    if mod is None:
        raise RuntimeError("compiled backend requested but dropletlab._kernels is not built")
    return mod


def backend_name() -> str:
    return get_backend().BACKEND_NAME


def available_backends() -> list[str]:
    names = ["python"]
    if _compiled is not None:
        names.append("compiled")
    return names
