"""Brute-force game-semantics oracle.

``brute_force_truth`` evaluates a quantified formula exactly by exhausting the
game tree; it anchors every other component's tests.  It is exponential in the
variable count (practical up to ~14-15 variables at |D| <= 3) and offers two
backends, see ``qecsp._kernels``.

``find_winning_strategy`` additionally extracts explicit response maps, which
``check_winning_strategy`` then validates independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import FormulaError
from .model import EXISTS, QuantifiedFormula


@dataclass
class FlatFormula:
    """Array form of a formula: prefix-ordered variables, CSR constraint data."""

    n_vars: int
    domain_size: int
    kinds: np.ndarray  # 0 = exists, 1 = forall, prefix order
    n_constraints: int
    by_off: np.ndarray  # constraints grouped by their last-bound variable
    by_ids: np.ndarray
    g_off: np.ndarray
    g_var: np.ndarray
    g_val: np.ndarray
    h_off: np.ndarray
    h_var: np.ndarray
    l_off: np.ndarray
    lut: np.ndarray  # concatenated head-relation lookup tables
    false_constant: bool  # a variable-free constraint is already false


def flatten(phi: QuantifiedFormula) -> FlatFormula:
    order = phi.all_vars
    pos = {v: i for i, v in enumerate(order)}
    kinds = np.array(
        [0 if phi.kind_of(v) == EXISTS else 1 for v in order] or [0], dtype=np.int8
    )[: len(order)]

    g_off, g_var, g_val = [0], [], []
    h_off, h_var = [0], []
    l_off, lut = [0], []
    last = []
    false_constant = False
    d = phi.domain_size
    for ec in phi.constraints:
        mentioned = [pos[v] for v in ec.variables()]
        if not mentioned:
            # arity-0 head, empty guard: truth is fixed now
            if ec.relation.is_empty:
                false_constant = True
            continue
        for y, val in ec.guard:
            g_var.append(pos[y])
            g_val.append(val)
        g_off.append(len(g_var))
        for x in ec.head_vars:
            h_var.append(pos[x])
        h_off.append(len(h_var))
        table = np.zeros(d**ec.relation.arity, dtype=bool)
        for t in ec.relation.tuples:
            idx = 0
            for v in t:
                idx = idx * d + v
            table[idx] = True
        lut.extend(table.tolist())
        l_off.append(len(lut))
        last.append(max(mentioned))

    n = len(last)
    by_lists: list[list[int]] = [[] for _ in range(len(order))]
    for c, lv in enumerate(last):
        by_lists[lv].append(c)
    by_off, by_ids = [0], []
    for lst in by_lists:
        by_ids.extend(lst)
        by_off.append(len(by_ids))

    as_arr = lambda xs, dt: np.array(xs, dtype=dt)
    return FlatFormula(
        n_vars=len(order),
        domain_size=d,
        kinds=kinds,
        n_constraints=n,
        by_off=as_arr(by_off, np.int64),
        by_ids=as_arr(by_ids, np.int64),
        g_off=as_arr(g_off, np.int64),
        g_var=as_arr(g_var, np.int64),
        g_val=as_arr(g_val, np.int64),
        h_off=as_arr(h_off, np.int64),
        h_var=as_arr(h_var, np.int64),
        l_off=as_arr(l_off, np.int64),
        lut=np.array(lut, dtype=bool),
        false_constant=false_constant,
    )


def brute_force_truth(phi: QuantifiedFormula, backend: Optional[str] = None) -> bool:
    """Exact first-order truth value of ``phi`` by exhaustive game search."""
    flat = flatten(phi)
    if flat.false_constant:
        return False
    backend = backend or _kernels.backend_name()
    if backend == "numba":
        return _kernels.truth_numba(flat)
    if backend == "numpy":
        return _kernels.truth_numpy(flat)
    raise ValueError(f"unknown oracle backend {backend!r}")


def find_winning_strategy(phi: QuantifiedFormula):
    """Return explicit response maps for a winning strategy, or None.

    Pure-Python game search with strategy extraction; exists iff the formula
    is true.  Only intended for small instances (tests, true-side audits).
    """
    flat = flatten(phi)
    if flat.false_constant:
        return None
    order = phi.all_vars
    if not order:
        return {}
    kinds = flat.kinds
    preceding_len = {}
    upto = 0
    upositions = []
    for i, v in enumerate(order):
        if kinds[i] == 0:
            preceding_len[i] = upto
        else:
            upositions.append(i)
            upto += 1
    asg = [0] * len(order)
    uvals: list[int] = []

    def consistent(i: int) -> bool:
        for ii in range(flat.by_off[i], flat.by_off[i + 1]):
            c = flat.by_ids[ii]
            if any(asg[flat.g_var[j]] != flat.g_val[j] for j in range(flat.g_off[c], flat.g_off[c + 1])):
                continue
            idx = 0
            for j in range(flat.h_off[c], flat.h_off[c + 1]):
                idx = idx * flat.domain_size + asg[flat.h_var[j]]
            if not flat.lut[flat.l_off[c] + idx]:
                return False
        return True

    def rec(i: int):
        if i == len(order):
            return {}
        var = order[i]
        if kinds[i] == 0:
            key = tuple(uvals)
            for d in range(flat.domain_size):
                asg[i] = d
                if not consistent(i):
                    continue
                sub = rec(i + 1)
                if sub is not None:
                    sub.setdefault(var, {})[key] = d
                    return sub
            return None
        merged: dict = {}
        for d in range(flat.domain_size):
            asg[i] = d
            uvals.append(d)
            ok = consistent(i)
            sub = rec(i + 1) if ok else None
            uvals.pop()
            if sub is None:
                return None
            for x, table in sub.items():
                merged.setdefault(x, {}).update(table)
        return merged

    frag = rec(0)
    if frag is None:
        return None
    return {x: frag.get(x, {}) for x in phi.existential_vars}


def pin_first_block(phi: QuantifiedFormula, assignment) -> QuantifiedFormula:
    """Add unary constant constraints fixing X1 (test helper for true-side audits)."""
    from .model import ExtendedConstraint, Relation

    extra = []
    for x in phi.first_existential_block:
        if x not in assignment:
            raise FormulaError(f"missing pinned value for {x!r}")
        rel = Relation.of(f"_pin_{x}_{assignment[x]}", 1, [(assignment[x],)])
        extra.append(ExtendedConstraint((), rel, (x,)))
    return QuantifiedFormula(phi.domain_size, phi.blocks, phi.constraints + tuple(extra))
