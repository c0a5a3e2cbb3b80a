"""Hot mod-p row-reduction kernels with a numba fast path.

The F_p lane is the only one where fixed-width arithmetic is exact
(entries live in [0, p), products fit in int64 for p < 2**31), so it is the
only lane that gets a compiled kernel.  Q and Z stay on arbitrary-precision
Python scalars in :mod:`sheafcheck.exactalg.matrix`.

Backend selection:

* default: ``numba.njit``-compiled loops, falling back to numpy if numba is
  unavailable;
* ``SHEAFCHECK_NO_NUMBA=1`` forces the pure-numpy path.

Both paths are exact and produce identical reduced forms; the benchmark in
``benchmarks/bench_kernels.py`` compares them.
"""

from __future__ import annotations

import os

import numpy as np


def _rref_mod_p_numpy(a: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-reduce ``a`` mod ``p`` in place (vectorized rows); return (a, pivot cols)."""
    rows, cols = a.shape
    piv_cols = np.empty(min(rows, cols), dtype=np.int64)
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        mask = col != 0
        if mask.any():
            a[mask] = (a[mask] - np.outer(col[mask], a[r])) % p
        piv_cols[r] = c
        r += 1
    return a, piv_cols[:r]


_rref_mod_p_numba = None
if os.environ.get("SHEAFCHECK_NO_NUMBA", "") != "1":
    try:
        from numba import njit

        @njit(cache=True)
        def _rref_mod_p_numba_impl(a, p):  # pragma: no cover - compiled
            rows, cols = a.shape
            piv_cols = np.empty(min(rows, cols) if rows < cols else cols, dtype=np.int64)
            r = 0
            for c in range(cols):
                if r >= rows:
                    break
                pivot = -1
                for i in range(r, rows):
                    if a[i, c] != 0:
                        pivot = i
                        break
                if pivot < 0:
                    continue
                if pivot != r:
                    for j in range(cols):
                        tmp = a[r, j]
                        a[r, j] = a[pivot, j]
                        a[pivot, j] = tmp
                # modular inverse by Fermat; p is prime
                inv = 1
                base = a[r, c] % p
                exp = p - 2
                while exp > 0:
                    if exp & 1:
                        inv = (inv * base) % p
                    base = (base * base) % p
                    exp >>= 1
                for j in range(cols):
                    a[r, j] = (a[r, j] * inv) % p
                for i in range(rows):
                    if i != r and a[i, c] != 0:
                        f = a[i, c]
                        for j in range(cols):
                            a[i, j] = (a[i, j] - f * a[r, j]) % p
                piv_cols[r] = c
                r += 1
            return a, piv_cols[:r]

        _rref_mod_p_numba = _rref_mod_p_numba_impl
    except ImportError:  # numba genuinely absent
        _rref_mod_p_numba = None


def backend_name() -> str:
    return "numpy" if _rref_mod_p_numba is None else "numba"


def rref_mod_p(a: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Reduced row echelon form of an int64 matrix mod prime ``p``.

    Returns the reduced matrix (same array, mutated) and the pivot columns.
    """
    if a.size == 0:
        return a, np.empty(0, dtype=np.int64)
    if _rref_mod_p_numba is not None:
        return _rref_mod_p_numba(a, p)
    return _rref_mod_p_numpy(a, p)


def rank_mod_p(a: np.ndarray, p: int) -> int:
    _, piv = rref_mod_p(a.copy(), p)
    return int(piv.size)
