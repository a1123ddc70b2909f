"""
PNG rendering of eigenvalue curves.
"""
import logging
from typing import Sequence

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

from ..models.report import CurveTable

logger = logging.getLogger(__name__)

STYLES = {'LPlus': 'b.', 'LMinus': 'r.'}


def render_curves(tables: Sequence[CurveTable], path: str, ell: float = None) -> str:
    """Scatter the (x, λ) curve points of each table, one panel per operator."""
    fig, axes = plt.subplots(1, len(tables), figsize=(5 * len(tables), 4), squeeze=False)
    for ax, table in zip(axes[0], tables):
        xs = [p.x for p in table.points]
        lams = [p.lam for p in table.points]
        ax.plot(xs, lams, STYLES.get(table.operator, 'k.'), markersize=2)
        ax.axhline(0.0, color='gray', linewidth=0.8, linestyle=':')
        if ell is not None:
            ax.axvline(ell, color='gray', linewidth=0.8, linestyle='--')
        ax.set_xlabel('$x$')
        ax.set_ylabel(r'$\lambda$')
        ax.set_title(table.operator)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    logger.info(f"Wrote {path}")
    return path
