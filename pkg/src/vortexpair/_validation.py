"""Input checks shared by the estimator wrappers."""
from __future__ import annotations

import numpy as np

from .grid import Domain, Field


def check_field(X, domain: Domain | None = None, *, name: str = "X") -> np.ndarray:
    """Return ``X`` as a finite, nonnegative float array of shape ``(ny, nx)``.

    Accepts a :class:`Field` or anything ``np.asarray`` understands.
    """
    if isinstance(X, Field):
        if domain is not None and X.domain != domain:
            raise ValueError(f"{name} lives on {X.domain}, expected {domain}")
        return np.array(X.values)
    a = np.asarray(X, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D (ny, nx), got shape {a.shape}")
    if domain is not None and a.shape != domain.shape:
        raise ValueError(f"{name} has shape {a.shape}, grid expects {domain.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    if np.any(a < 0):
        raise ValueError(f"{name} must be nonnegative")
    return a


def check_sequence(X, domain: Domain | None = None) -> np.ndarray:
    """Stack a sequence of fields into an ``(n, ny, nx)`` array."""
    if isinstance(X, np.ndarray) and X.ndim == 3:
        items = list(X)
    else:
        items = list(X)
    if not items:
        raise ValueError("empty sequence")
    arrs = [check_field(x, domain, name=f"X[{k}]") for k, x in enumerate(items)]
    shapes = {a.shape for a in arrs}
    if len(shapes) != 1:
        raise ValueError(f"sequence elements have different shapes: {sorted(shapes)}")
    return np.stack(arrs)
