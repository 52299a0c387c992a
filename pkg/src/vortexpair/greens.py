"""Half-plane Green's function, stream function, velocity and energy.

The discrete stream operator is translation invariant in ``x1``, so its
weights only depend on the column offset ``|i - i'|`` and on the two rows.
They are stored as a ``(nx, ny, ny)`` table and applied either by direct
shifted summation (the reference path) or by zero-padded FFT convolution
along ``x1``.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .grid import Domain, Field

FOUR_PI = 4.0 * np.pi

NEAR_RADIUS = 2
SUBCELLS = 16


def green_point(x, y) -> float:
    """Green's function of ``-Laplacian`` in the upper half-plane.

    ``G(x, y) = log(1 + 4 x2 y2 / |x - y|^2) / (4 pi)``, the ``log1p`` form
    of ``log(|x - conj(y)| / |x - y|) / (2 pi)``.
    """
    x1, x2 = map(float, x)
    y1, y2 = map(float, y)
    if x2 <= 0 or y2 <= 0:
        raise ValueError("both points must lie in the open upper half-plane")
    r2 = (x1 - y1) ** 2 + (x2 - y2) ** 2
    if r2 == 0.0:
        raise ValueError("G is singular at coincident points")
    return float(np.log1p(4.0 * x2 * y2 / r2) / FOUR_PI)


def green_array(dx1, x2, y2):
    """Vectorized kernel on separations ``dx1`` and heights ``x2``, ``y2``."""
    dx1 = np.asarray(dx1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    r2 = dx1 * dx1 + (x2 - y2) ** 2
    with np.errstate(divide="ignore"):
        return np.log1p(4.0 * x2 * y2 / r2) / FOUR_PI


def green_gradient_x(x, y) -> np.ndarray:
    """Gradient of ``G(x, y)`` with respect to ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    yb = y * np.array([1.0, -1.0])
    d = x - y
    db = x - yb
    return (-d / np.dot(d, d) + db / np.dot(db, db)) / (2.0 * np.pi)


class KernelTable:
    """Precomputed weights of the discrete stream operator on a domain.

    ``weights[d, a, b]`` is the contribution of unit vorticity in row ``b``
    to the stream function at a cell of row ``a`` displaced by ``d`` columns.
    Far pairs use the center-point rule ``cell_area * G``; pairs within
    ``near_radius`` cells (Chebyshev distance), including the self cell, use
    a ``subcells x subcells`` midpoint rule over the source cell.  The table
    is symmetrized in ``(a, b)`` so the induced bilinear form is symmetric.
    """

    def __init__(self, domain: Domain, near_radius: int = NEAR_RADIUS, subcells: int = SUBCELLS):
        if subcells % 2:
            raise ValueError("subcells must be even so no node hits a cell center")
        self.domain = domain
        self.near_radius = int(near_radius)
        self.subcells = int(subcells)
        self.weights = _build_weights(domain, self.near_radius, self.subcells)
        self.weights.setflags(write=False)
        self._fft_len = sfft.next_fast_len(2 * domain.nx - 1, real=True)
        self._khat = None

    @property
    def self_coefficients(self) -> np.ndarray:
        """Self-cell weight for each row."""
        return np.diagonal(self.weights[0]).copy()

    def _kernel_hat(self):
        if self._khat is None:
            nx = self.domain.nx
            m = self._fft_len
            full = np.zeros((m,) + self.weights.shape[1:])
            full[:nx] = self.weights
            full[m - nx + 1:] = self.weights[1:][::-1]
            self._khat = sfft.rfft(full, axis=0)
        return self._khat

    def apply(self, values: np.ndarray, method: str = "fft") -> np.ndarray:
        """Return ``psi`` with ``psi[a, i] = sum_b,j w[|i-j|, a, b] f[b, j]``."""
        v = np.asarray(values, dtype=float).reshape(self.domain.shape)
        if method == "fft":
            return self._apply_fft(v)
        if method == "direct":
            return self._apply_direct(v)
        raise ValueError(f"unknown method {method!r}")

    def _apply_direct(self, v: np.ndarray) -> np.ndarray:
        nx = self.domain.nx
        w = self.weights
        out = np.zeros_like(v)
        for d in range(-(nx - 1), nx):
            k = w[abs(d)]
            if d >= 0:
                out[:, d:] += k @ v[:, : nx - d]
            else:
                out[:, :d] += k @ v[:, -d:]
        return out

    def _apply_fft(self, v: np.ndarray) -> np.ndarray:
        nx = self.domain.nx
        fh = sfft.rfft(v.T, n=self._fft_len, axis=0)
        ph = np.matmul(self._kernel_hat(), fh[:, :, None])[:, :, 0]
        return sfft.irfft(ph, n=self._fft_len, axis=0)[:nx].T.copy()

    def matrix(self) -> np.ndarray:
        """Dense ``(N, N)`` operator in flat cell ordering (small grids only)."""
        ny, nx = self.domain.shape
        di = np.abs(np.arange(nx)[:, None] - np.arange(nx)[None, :])
        m = self.weights[di]  # (nx, nx, ny, ny) indexed [i, j, a, b]
        return m.transpose(2, 0, 3, 1).reshape(ny * nx, ny * nx)


def _build_weights(domain: Domain, near_radius: int, subcells: int) -> np.ndarray:
    nx, ny = domain.nx, domain.ny
    h1, h2, area = domain.h1, domain.h2, domain.cell_area
    x2 = domain.x2
    d = np.arange(nx) * h1
    w = area * green_array(d[:, None, None], x2[None, :, None], x2[None, None, :])

    # subcell offsets relative to the source cell center
    s = (np.arange(subcells) + 0.5) / subcells - 0.5
    o1, o2 = np.meshgrid(s * h1, s * h2)
    o1 = o1.ravel()
    o2 = o2.ravel()
    sub_area = area / subcells**2
    for di in range(min(near_radius, nx - 1) + 1):
        for a in range(ny):
            lo, hi = max(0, a - near_radius), min(ny, a + near_radius + 1)
            for b in range(lo, hi):
                y2 = x2[b] + o2
                g = green_array(di * h1 + o1, x2[a], y2)
                w[di, a, b] = sub_area * float(np.sum(g))
    return 0.5 * (w + w.transpose(0, 2, 1))


@lru_cache(maxsize=8)
def kernel_table(domain: Domain) -> KernelTable:
    """Cached :class:`KernelTable` for ``domain``."""
    return KernelTable(domain)


def stream(f: Field, method: str = "fft", table: KernelTable | None = None) -> Field:
    """Stream function ``psi = G f`` sampled at cell centers."""
    t = table if table is not None else kernel_table(f.domain)
    psi = t.apply(f.values, method=method)
    # FFT round-off can leave tiny negative values far from the support
    return Field(f.domain, np.maximum(psi, 0.0))


def bilinear(f: Field, g: Field, method: str = "fft") -> float:
    """``<f, G g>`` with the cell-area weight."""
    return f.domain.cell_area * float(np.sum(f.values * stream(g, method).values))


def energy(f: Field, psi: Field | None = None, method: str = "fft") -> float:
    """Kinetic energy ``E(f) = 1/2 <f, G f>``."""
    if psi is None:
        psi = stream(f, method)
    return 0.5 * f.domain.cell_area * float(np.sum(f.values * psi.values))


def velocity_from_stream(psi: np.ndarray, domain: Domain) -> tuple[np.ndarray, np.ndarray]:
    """``u = (d psi/d x2, -d psi/d x1)`` at cell centers.

    Centered differences in the interior, one-sided at the lateral and top
    edges.  Below the bottom row the odd extension ``psi(x1, -x2) =
    -psi(x1, x2)`` supplies the ghost values.
    """
    psi = np.asarray(psi, dtype=float)
    h1, h2 = domain.h1, domain.h2
    d2 = np.empty_like(psi)
    d2[1:-1] = (psi[2:] - psi[:-2]) / (2 * h2)
    d2[0] = (psi[1] + psi[0]) / (2 * h2)
    d2[-1] = (psi[-1] - psi[-2]) / h2
    d1 = np.empty_like(psi)
    d1[:, 1:-1] = (psi[:, 2:] - psi[:, :-2]) / (2 * h1)
    d1[:, 0] = (psi[:, 1] - psi[:, 0]) / h1
    d1[:, -1] = (psi[:, -1] - psi[:, -2]) / h1
    return d2, -d1


def velocity(f: Field, method: str = "fft") -> tuple[np.ndarray, np.ndarray]:
    """Velocity ``(u1, u2)`` induced by ``f``, each of shape ``(ny, nx)``."""
    return velocity_from_stream(stream(f, method).values, f.domain)


def axis_velocity(f: Field, method: str = "fft") -> tuple[np.ndarray, np.ndarray]:
    """Velocity on the axis ``x2 = 0`` from the image-symmetric extension.

    The axis lies halfway between the bottom row and its mirror ghost row,
    so ``u2`` there is the average of two opposite values.
    """
    psi = stream(f, method).values
    u1, u2 = velocity_from_stream(psi, f.domain)
    u1_axis = 2.0 * psi[0] / f.domain.h2
    u2_axis = 0.5 * (u2[0] + (-u2[0]))
    return u1_axis, u2_axis
