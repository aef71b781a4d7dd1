"""Optional numba acceleration.

The merge kernel is written as plain Python over numpy arrays so it runs
unchanged without numba; the jitted build is used when numba imports cleanly.
Both builds execute the same statements, so results are bit-identical.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - exercised only on broken installs
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


def _merge_pairs_impl(order, kind, ref, edge_alpha, tri_alpha, ef0, ef1, nt):
    """Reverse-filtration merge process on the dual face graph.

    Faces (triangles plus the outer face, node id nt) appear in decreasing
    filtration order; each primal edge joins the two faces it borders. A merge
    of two distinct components emits one degree-one pair: birth at the edge
    value, death at the creation value of the component that loses (the one
    whose creating face is younger in the forward filtration). The outer face
    is eldest and never loses.
    """
    m = order.shape[0]
    parent = np.empty(nt + 1, np.int64)
    cpos = np.empty(nt + 1, np.int64)
    calpha = np.empty(nt + 1, np.float64)
    parent[nt] = nt
    cpos[nt] = np.int64(2**62)
    calpha[nt] = np.inf
    births = np.empty(nt, np.float64)
    deaths = np.empty(nt, np.float64)
    k = 0
    for s in range(m - 1, -1, -1):
        ev = order[s]
        r = ref[ev]
        if kind[ev] == 2:
            parent[r] = r
            cpos[r] = s
            calpha[r] = tri_alpha[r]
        else:
            f1 = ef0[r]
            f2 = ef1[r]
            while parent[f1] != f1:
                parent[f1] = parent[parent[f1]]
                f1 = parent[f1]
            while parent[f2] != f2:
                parent[f2] = parent[parent[f2]]
                f2 = parent[f2]
            if f1 == f2:
                continue
            if cpos[f1] < cpos[f2]:
                young, old = f1, f2
            else:
                young, old = f2, f1
            births[k] = edge_alpha[r]
            deaths[k] = calpha[young]
            parent[young] = old
            k += 1
    return births, deaths, k


merge_pairs = njit(cache=True)(_merge_pairs_impl) if HAVE_NUMBA else _merge_pairs_impl
merge_pairs_python = _merge_pairs_impl
