"""
Continuation ordering of eigenvalue-curve points.

Roots found column by column in λ are linked to their nearest neighbour in
the next column; connected components of that graph are the curves.
"""
import logging
from typing import List, Sequence, Tuple

import networkx as nx
import numpy as np

from ..models.report import CurvePoint, CurveTable

logger = logging.getLogger(__name__)


def build_curve_graph(columns: Sequence[Tuple[float, Sequence[float]]], max_jump: float = 1.0) -> nx.Graph:
    """Graph on (column, root) nodes; edges join mutual nearest neighbours of adjacent columns."""
    g = nx.Graph()
    for i, (lam, xs) in enumerate(columns):
        for j, x in enumerate(xs):
            g.add_node((i, j), lam=float(lam), x=float(x))
    for i in range(len(columns) - 1):
        left = np.asarray(columns[i][1], dtype=float)
        right = np.asarray(columns[i + 1][1], dtype=float)
        if left.size == 0 or right.size == 0:
            continue
        distance = np.abs(left[:, None] - right[None, :])
        forward = np.argmin(distance, axis=1)
        backward = np.argmin(distance, axis=0)
        for j, k in enumerate(forward):
            if backward[k] == j and distance[j, k] <= max_jump:
                g.add_edge((i, j), (i + 1, int(k)), weight=float(distance[j, k]))
    return g


def order_curves(columns: Sequence[Tuple[float, Sequence[float]]], operator: str,
                 max_jump: float = 1.0) -> CurveTable:
    """CurveTable with points grouped by curve and sorted by λ within each curve."""
    g = build_curve_graph(columns, max_jump)
    components = [sorted(c) for c in nx.connected_components(g)]
    # curves are numbered by where they start: lowest λ, then lowest x
    components.sort(key=lambda nodes: (nodes[0][0], g.nodes[nodes[0]]['x']))
    points: List[CurvePoint] = []
    for curve, nodes in enumerate(components):
        for node in nodes:
            data = g.nodes[node]
            points.append(CurvePoint(data['lam'], data['x'], operator, curve))
    logger.debug(f"{operator}: {len(points)} curve points in {len(components)} curve(s)")
    return CurveTable(operator, points)
