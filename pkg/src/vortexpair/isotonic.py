"""Pool-adjacent-violators isotonic regression."""
from __future__ import annotations

import numpy as np


def pava(y, w=None) -> np.ndarray:
    """Weighted least-squares nondecreasing fit to ``y`` (already in x order)."""
    y = np.asarray(y, dtype=float).reshape(-1)
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=float).reshape(-1)
    if y.size == 0:
        return y.copy()
    means: list[float] = []
    weights: list[float] = []
    counts: list[int] = []
    for yi, wi in zip(y, w):
        means.append(yi)
        weights.append(wi)
        counts.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            m2, w2, c2 = means.pop(), weights.pop(), counts.pop()
            m1, w1, c1 = means.pop(), weights.pop(), counts.pop()
            ww = w1 + w2
            means.append((w1 * m1 + w2 * m2) / ww)
            weights.append(ww)
            counts.append(c1 + c2)
    return np.repeat(means, counts)


def isotonic_fit(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Sort by ``x`` and return ``(x_sorted, fitted)`` with ``fitted`` nondecreasing.

    Equal ``x`` values are pooled first so the fit is a function of ``x``.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    ux, inv, cnt = np.unique(xs, return_inverse=True, return_counts=True)
    ymean = np.bincount(inv, weights=ys) / cnt
    fit = pava(ymean, cnt.astype(float))
    return ux, fit
