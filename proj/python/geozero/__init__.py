"""Zero-field three-level spin control.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports it and adds a few numpy conveniences.
"""

from __future__ import annotations

import numpy as np

from ._core import *  # noqa: F401,F403
from ._core import __version__, compile_analytic, filter_functions, modulation_function

ZERO = 1  # index of |0> in the (|+1>, |0>, |-1>) basis


def populations(unitary, initial=None):
    """Level populations after applying ``unitary`` to ``initial`` (default |0>)."""
    psi = np.zeros(3, dtype=complex)
    if initial is None:
        psi[ZERO] = 1.0
    else:
        psi = np.asarray(initial, dtype=complex)
    out = np.asarray(unitary) @ psi
    return np.abs(out) ** 2


def filter_function(sequence, omegas, convention=None):
    """Vectorised F(omega) of a dynamical-decoupling sequence."""
    y = modulation_function(sequence) if convention is None else modulation_function(sequence, convention)
    return np.asarray(filter_functions(y, np.atleast_1d(np.asarray(omegas, dtype=float)).tolist()))
