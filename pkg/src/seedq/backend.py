"""Simulation kernel backend selection.

The hot loops (cascade simulation, exact live-edge enumeration) exist twice:
numba-compiled scalar kernels in `_sim_numba` and vectorised numpy kernels in
`_sim_numpy`.  Both consume the same counter-based random draws, so their
outputs agree bit for bit.

Selection order:

* ``SEEDQ_BACKEND=numpy``  always use the numpy fallback,
* ``SEEDQ_BACKEND=numba``  require numba, raise if it is not importable,
* unset                    use numba when importable, else numpy.
"""

from __future__ import annotations

import os

_ENV_VAR = "SEEDQ_BACKEND"
_forced: str | None = None
_numba_mod = None
_numba_checked = False


def _numba_backend():
    global _numba_mod, _numba_checked
    if not _numba_checked:
        _numba_checked = True
        try:
            from . import _sim_numba

            _numba_mod = _sim_numba
        except ImportError:
            _numba_mod = None
    return _numba_mod


def set_backend(name: str | None) -> None:
    """Override the environment selection (None restores it); test hook."""
    global _forced
    if name is not None and name not in ("numba", "numpy"):
        raise ValueError("unknown backend %r" % (name,))
    _forced = name


def active_backend() -> str:
    choice = _forced or os.environ.get(_ENV_VAR, "").strip().lower() or "auto"
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if _numba_backend() is None:
            raise RuntimeError("%s=numba but numba is not importable" % _ENV_VAR)
        return "numba"
    if choice != "auto":
        raise RuntimeError("unknown %s value %r" % (_ENV_VAR, choice))
    return "numba" if _numba_backend() is not None else "numpy"


def kernels():
    """The active kernel module."""
    if active_backend() == "numba":
        return _numba_backend()
    from . import _sim_numpy

    return _sim_numpy
