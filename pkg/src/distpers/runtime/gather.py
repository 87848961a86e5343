"""Merge node reports into one persistence diagram, checking disjointness."""
from __future__ import annotations

import numpy as np

from ..block import ConsistencyError
from ..oracle import PersistenceDiagram, PersistencePair
from .wire import NodeReport


def gather_results(reports: list[NodeReport], dims) -> PersistenceDiagram:
    dims = np.asarray(dims)
    n = len(dims)
    birth_of = np.zeros(n + 1, dtype=np.int64)  # pivot -> column
    is_death = np.zeros(n + 1, dtype=bool)
    pairs = []
    for rep in sorted(reports, key=lambda r: r.node):
        for piv, col, cdim in rep.pairs:
            if birth_of[piv]:
                raise ConsistencyError(
                    f"pivot {piv} claimed by columns {int(birth_of[piv])} and {col}"
                )
            if is_death[col]:
                raise ConsistencyError(f"column {col} stored twice")
            if dims[piv - 1] != cdim - 1:
                raise ConsistencyError(f"pair ({piv},{col}) crosses dimensions")
            birth_of[piv] = col
            is_death[col] = True
            pairs.append(PersistencePair(piv, col, cdim - 1))
    for rep in reports:
        for idx, _ in rep.zeros:
            if is_death[idx]:
                raise ConsistencyError(f"column {idx} reported both zero and reduced")
            if birth_of[idx] and rep.clearing:
                raise ConsistencyError(
                    f"index {idx} reduced to zero on node {rep.node} although it is a pivot"
                )
        for idx in rep.cleared:
            if not birth_of[idx]:
                raise ConsistencyError(f"node {rep.node} cleared {idx}, which is not a pivot")
    unpaired = np.nonzero(~is_death[1:] & (birth_of[1:] == 0))[0] + 1
    essentials = frozenset((int(j), int(dims[j - 1])) for j in unpaired)
    return PersistenceDiagram(frozenset(pairs), essentials)
