"""Uniform-cell discretization of the truncated half-plane strip.

The strip is ``[-L, L] x (0, Z)`` split into ``nx * ny`` cells of equal
area.  Field values are stored as ``(ny, nx)`` arrays: row ``j`` is the
``j``-th row from the axis, column ``i`` runs left to right.  Flattening
in C order therefore gives the bottom-row-first, left-to-right ordering
used by the VPF file format.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np


@dataclass(frozen=True)
class Domain:
    """Truncated strip ``[-half_width, half_width] x (0, strip_height)``."""

    half_width: float = 4.0
    strip_height: float = 2.0
    nx: int = 64
    ny: int = 32

    def __post_init__(self):
        if not (self.half_width > 0 and np.isfinite(self.half_width)):
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if not (self.strip_height > 0 and np.isfinite(self.strip_height)):
            raise ValueError(f"strip_height must be positive, got {self.strip_height}")
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise ValueError("nx and ny must be integers")
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"need at least 2x2 cells, got {self.nx}x{self.ny}")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))

    @property
    def h1(self) -> float:
        return 2.0 * self.half_width / self.nx

    @property
    def h2(self) -> float:
        return self.strip_height / self.ny

    @property
    def cell_area(self) -> float:
        return self.h1 * self.h2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def x1(self) -> np.ndarray:
        """Cell-center abscissae, length ``nx``."""
        return -self.half_width + (np.arange(self.nx) + 0.5) * self.h1

    @property
    def x2(self) -> np.ndarray:
        """Cell-center heights, length ``ny``; all strictly positive."""
        return (np.arange(self.ny) + 0.5) * self.h2

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X1, X2)`` arrays of shape ``(ny, nx)``."""
        return np.meshgrid(self.x1, self.x2)

    def heights(self) -> np.ndarray:
        """Second coordinate of every cell center, shape ``(ny, nx)``."""
        return np.broadcast_to(self.x2[:, None], self.shape)

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.shape))


@dataclass(frozen=True, eq=False)
class Field:
    """Immutable snapshot of cell values on a :class:`Domain`.

    Parameters
    ----------
    domain : Domain
    values : array-like
        Either shape ``(ny, nx)`` or a flat sequence of ``nx * ny`` values in
        row-major order starting from the bottom row.
    nonneg : bool, default=True
        Require every value to be ``>= 0``.
    """

    domain: Domain
    values: np.ndarray
    nonneg: bool = field(default=True)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.size != self.domain.size:
            raise ValueError(
                f"expected {self.domain.size} values for a "
                f"{self.domain.nx}x{self.domain.ny} grid, got {v.size}"
            )
        v = v.reshape(self.domain.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if self.nonneg and np.any(v < 0):
            raise ValueError("field has negative values but nonneg=True")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values, nonneg: bool | None = None) -> "Field":
        return Field(self.domain, values, self.nonneg if nonneg is None else nonneg)

    def __add__(self, other: "Field") -> "Field":
        _check_same_domain(self, other)
        return Field(self.domain, self.values + other.values, self.nonneg and other.nonneg)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_domain(self, other)
        return Field(self.domain, self.values - other.values, nonneg=False)

    def __mul__(self, c: float) -> "Field":
        return Field(self.domain, self.values * c, self.nonneg and c >= 0)

    __rmul__ = __mul__

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def support(self) -> np.ndarray:
        return self.values > 0

    def is_zero(self) -> bool:
        return not np.any(self.values)


FieldLike = Union[Field, np.ndarray]


def _check_same_domain(a: Field, b: Field) -> None:
    if a.domain != b.domain:
        raise ValueError("fields live on different domains")


def _row_sum(v: np.ndarray) -> np.ndarray:
    # Sorting first makes each row sum independent of the order of values in
    # the row, so whole-cell x1 translations and reflections give
    # bit-identical results.
    return np.sum(np.sort(v, axis=1), axis=1)


def integrate(f: Field) -> float:
    """Midpoint-rule integral of ``f`` over the strip."""
    return f.domain.cell_area * float(np.sum(_row_sum(f.values)))


def impulse(f: Field) -> float:
    """``I(f) = integral of f(y) * y2``, linear in ``f``."""
    d = f.domain
    return d.cell_area * float(np.sum(_row_sum(f.values) * d.x2))


def lp_norm(f: Field, p: float) -> float:
    if p < 1:
        raise ValueError(f"lp_norm needs p >= 1, got {p}")
    a = f.domain.cell_area
    v = np.abs(f.values)
    if p == 1:
        return a * float(np.sum(_row_sum(v)))
    vmax = float(v.max(initial=0.0))
    if vmax == 0.0:
        return 0.0
    # scale to avoid overflow for large p
    return vmax * (a * float(np.sum(_row_sum((v / vmax) ** p)))) ** (1.0 / p)


def xp_norm(f: Field, p: float = 3.0) -> float:
    """Perturbation norm ``|I(f)| + ||f||_1 + ||f||_p`` for ``p > 2``."""
    if p <= 2:
        raise ValueError(f"xp_norm needs p > 2, got {p}")
    return abs(impulse(f)) + lp_norm(f, 1) + lp_norm(f, p)


def shift_x1(f: Field, k: int) -> Field:
    """Translate ``f`` by ``k`` whole columns; vacated columns are zero."""
    v = np.zeros_like(f.values)
    nx = f.domain.nx
    if k >= 0:
        v[:, k:] = f.values[:, : nx - k] if k < nx else 0.0
    else:
        v[:, :k] = f.values[:, -k:]
    return Field(f.domain, v, f.nonneg)


def shift_x2(f: Field, k: int) -> Field:
    """Translate ``f`` by ``k`` whole rows; vacated rows are zero."""
    v = np.zeros_like(f.values)
    ny = f.domain.ny
    if k >= 0:
        if k < ny:
            v[k:, :] = f.values[: ny - k, :]
    else:
        v[:k, :] = f.values[-k:, :]
    return Field(f.domain, v, f.nonneg)


def reflect_x1(f: Field) -> Field:
    return Field(f.domain, f.values[:, ::-1], f.nonneg)
