"""Discrete rearrangement algebra on equal-area cells.

Because every cell has the same area, a rearrangement of a field is just a
permutation of its values, and the decreasing rearrangement is a sort.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .grid import Domain, Field


@dataclass(frozen=True, eq=False)
class Profile:
    """Step-function representation of a decreasing rearrangement.

    ``values[k]`` is the value of ``f^Delta`` on ``(k * cell_area, (k + 1) *
    cell_area)``.  The increasing rearrangement is ``f^Nabla(s) =
    f^Delta(-s)`` and is not stored separately.
    """

    values: np.ndarray
    cell_area: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite and nonnegative")
        if np.any(np.diff(v) > 0):
            raise ValueError("profile values must be sorted descending")
        if not self.cell_area > 0:
            raise ValueError("cell_area must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def support_cells(self) -> int:
        return int(np.count_nonzero(self.values))

    @property
    def support_measure(self) -> float:
        return self.support_cells * self.cell_area

    def mass(self) -> float:
        return self.cell_area * float(np.sum(self.values))

    def __call__(self, s) -> np.ndarray:
        """Evaluate the step function ``f^Delta(s)``; zero for ``s <= 0``."""
        s = np.asarray(s, dtype=float)
        k = np.floor(s / self.cell_area).astype(int)
        inside = (s > 0) & (k < self.values.size)
        out = np.zeros(s.shape)
        out[inside] = self.values[k[inside]]
        return out

    def increasing(self, s) -> np.ndarray:
        return self(-np.asarray(s, dtype=float))


@dataclass(frozen=True)
class SteinerSpec:
    """Column about which rows are symmetrized, and the placement rule.

    The only rule is ``"right-first"``: sorted row values go to column
    offsets ``0, +1, -1, +2, -2, ...``.
    """

    center: int
    rule: str = "right-first"

    def __post_init__(self):
        if self.rule != "right-first":
            raise ValueError(f"unknown placement rule {self.rule!r}")

    def column_order(self, nx: int) -> np.ndarray:
        if not 0 <= self.center < nx:
            raise ValueError(f"center column {self.center} outside 0..{nx - 1}")
        cols = [self.center]
        for k in range(1, nx):
            for c in (self.center + k, self.center - k):
                if 0 <= c < nx:
                    cols.append(c)
        return np.array(cols[:nx])


Distribution = Union[Field, Profile]


def _values_area(f: Distribution) -> tuple[np.ndarray, float]:
    if isinstance(f, Profile):
        return f.values, f.cell_area
    if isinstance(f, Field):
        return f.values.reshape(-1), f.domain.cell_area
    raise TypeError(f"expected Field or Profile, got {type(f).__name__}")


def decreasing_rearrangement(f: Field) -> Profile:
    v = np.sort(f.values.reshape(-1))[::-1]
    return Profile(v, f.domain.cell_area)


def _excess(desc: np.ndarray, area: float, alphas: np.ndarray) -> np.ndarray:
    """``area * sum((v - alpha)_+)`` for each alpha, ``desc`` sorted descending."""
    prefix = np.concatenate([[0.0], np.cumsum(desc)])
    # number of values strictly above alpha
    k = desc.size - np.searchsorted(desc[::-1], alphas, side="right")
    return area * (prefix[k] - alphas * k)


def precedes(f: Distribution, g: Distribution, tol: float = 0.0) -> bool:
    """Return ``True`` iff ``f`` is dominated by ``g`` in the rearrangement order.

    That is, ``integral (f - a)_+ <= integral (g - a)_+ + tol`` for every
    ``a > 0``.  Both sides are convex and piecewise linear in ``a`` with kinks
    at the values of ``f`` and ``g``, so checking the kinks and the limit
    ``a -> 0+`` is exact.
    """
    fv, fa = _values_area(f)
    gv, ga = _values_area(g)
    if np.any(fv < 0) or np.any(gv < 0):
        raise ValueError("precedes is defined for nonnegative functions")
    fd = np.sort(fv)[::-1]
    gd = np.sort(gv)[::-1]
    alphas = np.unique(np.concatenate([[0.0], fd[fd > 0], gd[gd > 0]]))
    return bool(np.all(_excess(fd, fa, alphas) <= _excess(gd, ga, alphas) + tol))


def is_rearrangement(f: Distribution, g: Distribution, tol: float | None = None) -> bool:
    """Equimeasurability test.

    With ``tol=None`` the check is exact: on equal-area cells it compares the
    sorted multisets of positive values.  A float ``tol`` compares them
    entrywise with that absolute tolerance instead.
    """
    fv, fa = _values_area(f)
    gv, ga = _values_area(g)
    if fa != ga:
        t = 0.0 if tol is None else tol
        return precedes(f, g, t) and precedes(g, f, t)
    fp = np.sort(fv[fv > 0])
    gp = np.sort(gv[gv > 0])
    if tol is None:
        return fp.size == gp.size and bool(np.all(fp == gp))
    n = max(fp.size, gp.size)
    fp = np.concatenate([np.zeros(n - fp.size), fp])
    gp = np.concatenate([np.zeros(n - gp.size), gp])
    return bool(np.all(np.abs(fp - gp) <= tol))


def steiner_symmetrize(f: Field, spec: SteinerSpec | None = None) -> Field:
    """Rearrange each row symmetric-decreasing about ``spec.center``."""
    nx = f.domain.nx
    if spec is None:
        spec = SteinerSpec(nx // 2)
    cols = spec.column_order(nx)
    rows = -np.sort(-f.values, axis=1)
    out = np.empty_like(rows)
    out[:, cols] = rows
    return Field(f.domain, out, f.nonneg)


def curtail(p: Profile, ell: float) -> Profile:
    """Discretized ``p^Delta * 1_(0, ell)``.

    The cell straddling ``ell`` keeps its value scaled by the covered
    fraction, so the result stays dominated by ``p``.
    """
    if ell < 0:
        raise ValueError(f"ell must be >= 0, got {ell}")
    v = p.values.copy()
    n = v.size
    x = ell / p.cell_area
    k = int(np.floor(x))
    if k >= n:
        return Profile(v, p.cell_area)
    frac = x - k
    v[k] *= frac
    v[k + 1:] = 0.0
    return Profile(v, p.cell_area)


def placement_order(order: Field, active: np.ndarray | None = None) -> np.ndarray:
    """Flat indices of active cells sorted by order value (descending).

    Ties go to the lower row, then to the left column.
    """
    d = order.domain
    o = order.values.reshape(-1)
    jj, ii = np.divmod(np.arange(d.size), d.nx)
    idx = np.arange(d.size)
    if active is not None:
        idx = idx[np.asarray(active, dtype=bool).reshape(-1)]
    keys = np.lexsort((ii[idx], jj[idx], -o[idx]))
    return idx[keys]


def rearrange_onto(p: Profile, order: Field, active: np.ndarray | None = None) -> Field:
    """Place the profile on ``active`` cells, largest values where ``order`` is largest.

    Entries that do not fit on the active cells are dropped (a curtailment).
    """
    d = order.domain
    if not np.isclose(p.cell_area, d.cell_area, rtol=1e-12, atol=0):
        raise ValueError("profile cell area does not match the grid")
    cells = placement_order(order, active)
    m = min(cells.size, p.values.size)
    out = np.zeros(d.size)
    out[cells[:m]] = p.values[:m]
    return Field(d, out)
