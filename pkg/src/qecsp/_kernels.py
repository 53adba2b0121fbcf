"""Hot evaluation kernels for the brute-force oracle.

Two interchangeable lanes over the same flattened formula arrays:

* ``truth_numba`` — short-circuiting game-tree DFS compiled with ``@njit``;
  prunes a branch as soon as a fully-bound constraint fails.
* ``truth_numpy``  — vectorized: builds the satisfaction vector over all
  ``D**V`` assignments, then alternates any/all reductions over the prefix.

``QECSP_BACKEND=numpy`` (or an unavailable numba) selects the numpy lane.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly on import
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(f):
            return f

        return wrap(args[0]) if args and callable(args[0]) else wrap


def backend_name() -> str:
    env = os.environ.get("QECSP_BACKEND", "").strip().lower()
    if env in ("numba", "numpy"):
        if env == "numba" and not HAVE_NUMBA:
            raise RuntimeError("QECSP_BACKEND=numba but numba is not importable")
        return env
    return "numba" if HAVE_NUMBA else "numpy"


@njit(cache=True)
def _consistent_at(v, asg, dom, by_off, by_ids, g_off, g_var, g_val, h_off, h_var, l_off, lut):
    for ii in range(by_off[v], by_off[v + 1]):
        c = by_ids[ii]
        ok = True
        for j in range(g_off[c], g_off[c + 1]):
            if asg[g_var[j]] != g_val[j]:
                ok = False
                break
        if not ok:
            continue
        idx = 0
        for j in range(h_off[c], h_off[c + 1]):
            idx = idx * dom + asg[h_var[j]]
        if not lut[l_off[c] + idx]:
            return False
    return True


@njit(cache=True)
def _dfs(pos, nvars, dom, kinds, asg, by_off, by_ids, g_off, g_var, g_val, h_off, h_var, l_off, lut):
    if pos == nvars:
        return True
    if kinds[pos] == 0:  # existential: some value must work
        for d in range(dom):
            asg[pos] = d
            if _consistent_at(pos, asg, dom, by_off, by_ids, g_off, g_var, g_val, h_off, h_var, l_off, lut) and _dfs(
                pos + 1, nvars, dom, kinds, asg, by_off, by_ids, g_off, g_var, g_val, h_off, h_var, l_off, lut
            ):
                return True
        return False
    for d in range(dom):  # universal: every value must work
        asg[pos] = d
        if not _consistent_at(pos, asg, dom, by_off, by_ids, g_off, g_var, g_val, h_off, h_var, l_off, lut):
            return False
        if not _dfs(pos + 1, nvars, dom, kinds, asg, by_off, by_ids, g_off, g_var, g_val, h_off, h_var, l_off, lut):
            return False
    return True


def truth_numba(flat) -> bool:
    asg = np.zeros(max(flat.n_vars, 1), dtype=np.int64)
    return bool(
        _dfs(
            0,
            flat.n_vars,
            flat.domain_size,
            flat.kinds,
            asg,
            flat.by_off,
            flat.by_ids,
            flat.g_off,
            flat.g_var,
            flat.g_val,
            flat.h_off,
            flat.h_var,
            flat.l_off,
            flat.lut,
        )
    )


def truth_numpy(flat) -> bool:
    v, d = flat.n_vars, flat.domain_size
    if v == 0:
        return True
    total = d**v
    idx = np.arange(total, dtype=np.int64)

    def value_of(var):
        return ((idx // d ** (v - 1 - var)) % d).astype(np.int64)

    sat = np.ones(total, dtype=bool)
    for c in range(flat.n_constraints):
        guard = np.ones(total, dtype=bool)
        for j in range(flat.g_off[c], flat.g_off[c + 1]):
            guard &= value_of(flat.g_var[j]) == flat.g_val[j]
        hidx = np.zeros(total, dtype=np.int64)
        for j in range(flat.h_off[c], flat.h_off[c + 1]):
            hidx = hidx * d + value_of(flat.h_var[j])
        head_ok = flat.lut[flat.l_off[c] + hidx]
        sat &= ~(guard & ~head_ok)

    t = sat.reshape((d,) * v)
    for kind in flat.kinds[::-1]:
        t = t.any(axis=-1) if kind == 0 else t.all(axis=-1)
    return bool(t)
