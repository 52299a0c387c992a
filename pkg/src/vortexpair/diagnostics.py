"""Concentration-compactness classification and empirical stream-function bounds.

The classifier looks at the concentration function

    Q(R) = max over centers y of the mass of f in D(y, R) intersected with the half-plane

along a sequence of fields and decides which of the three behaviours
(compactness, vanishing, dichotomy) the tail of the sequence shows.  It is
a heuristic on finite data, so ``undetermined`` is a legitimate answer.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .grid import Field, impulse, integrate, lp_norm
from .greens import stream, velocity_from_stream
from .rearrange import steiner_symmetrize

DEFAULT_RADII = (0.25, 0.5, 1.0, 2.0)


# -- concentration function ---------------------------------------------------

# cells whose centers sit on the circle up to rounding count as inside
_EDGE = 1.0 + 1e-12


def _disc_offsets(domain, R: float) -> tuple[int, int]:
    return int(np.floor(R * _EDGE / domain.h1)), int(np.floor(R * _EDGE / domain.h2))


def _cell_center_masses(v: np.ndarray, domain, R: float) -> np.ndarray:
    """Mass in D(y, R) for every cell center y (cells counted by their centers)."""
    bi, bj = _disc_offsets(domain, R)
    b = np.arange(-bi, bi + 1) * domain.h1
    a = np.arange(-bj, bj + 1) * domain.h2
    mask = (a[:, None] ** 2 + b[None, :] ** 2 <= R * R * _EDGE).astype(float)
    return ndimage.correlate(v, mask, mode="constant", cval=0.0)


def _axis_masses(v: np.ndarray, domain, R: float) -> np.ndarray:
    """Mass in D(y, R) for centers ``y = (x1_i, 0)`` on the axis."""
    bi, _ = _disc_offsets(domain, R)
    b = np.arange(-bi, bi + 1) * domain.h1
    out = np.zeros(domain.nx)
    for j, x2 in enumerate(domain.x2):
        if x2 > R:
            break
        row = (x2 * x2 + b**2 <= R * R * _EDGE).astype(float)
        out += ndimage.correlate1d(v[j], row, mode="constant", cval=0.0)
    return out


def concentration_profile(f: Field, radii=DEFAULT_RADII) -> dict[float, float]:
    """Return ``{R: Q(R)}``.

    Candidate centers are every cell center and every axis point below one.
    A cell belongs to a disc when its center does.  For fixed centers the
    discs are nested in ``R``, so ``Q`` is nondecreasing; the running max
    only guards against rounding.
    """
    if np.any(f.values < 0):
        raise ValueError("concentration_profile needs a nonnegative field")
    d = f.domain
    rs = sorted(float(r) for r in radii)
    if rs and rs[0] < 0:
        raise ValueError("radii must be nonnegative")
    q = []
    for R in rs:
        m = max(_cell_center_masses(f.values, d, R).max(), _axis_masses(f.values, d, R).max())
        q.append(d.cell_area * float(m))
    q = np.maximum.accumulate(q) if q else np.array([])
    return dict(zip(rs, (float(x) for x in q)))


def best_center(f: Field, R: float) -> tuple[float, float]:
    """Physical coordinates of a center attaining ``Q(R)``."""
    d = f.domain
    cm = _cell_center_masses(f.values, d, R)
    am = _axis_masses(f.values, d, R)
    j, i = np.unravel_index(np.argmax(cm), cm.shape)
    if am.max() > cm[j, i]:
        return float(d.x1[int(np.argmax(am))]), 0.0
    return float(d.x1[i]), float(d.x2[j])


# -- classification -----------------------------------------------------------

@dataclass(frozen=True)
class CCThresholds:
    vanishing: float = 0.05
    compactness: float = 0.95
    theta: float = 0.1

    def __post_init__(self):
        if not 0 < self.vanishing < self.compactness < 1:
            raise ValueError("need 0 < vanishing < compactness < 1")
        if not 0 < self.theta < 0.5:
            raise ValueError("theta must lie in (0, 1/2)")


@dataclass
class CCReport:
    label: str
    masses: list
    radii: list
    Q: list  # Q[n][k] = Q_n(radii[k])
    alpha: float = float("nan")
    residual: float = float("nan")
    separations: list = field(default_factory=list)
    plateau_radius: float = float("nan")

    def ratios(self) -> np.ndarray:
        m = np.asarray(self.masses, dtype=float)[:, None]
        q = np.asarray(self.Q, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(m > 0, q / m, 0.0)

    def as_dict(self) -> dict:
        out = {"cc_label": self.label, "cc_length": len(self.masses)}
        if self.masses:
            out["cc_mass_last"] = self.masses[-1]
            r = self.ratios()[-1]
            for R, x in zip(self.radii, r):
                out[f"cc_q_ratio_r{R:g}"] = float(x)
        if self.label == "dichotomy":
            out["cc_alpha"] = self.alpha
            out["cc_residual"] = self.residual
            out["cc_separation_last"] = self.separations[-1]
        return out


def _separation(f: Field, R: float) -> tuple[float, float, float]:
    """(mass inside the best disc, mass outside it, distance of the outside centroid)."""
    d = f.domain
    y1, y2 = best_center(f, R)
    X1, X2 = d.mesh()
    inside = (X1 - y1) ** 2 + (X2 - y2) ** 2 <= R * R * _EDGE
    v = f.values
    a = d.cell_area * float(np.sum(v[inside]))
    w = np.where(inside, 0.0, v)
    rest = d.cell_area * float(np.sum(w))
    if rest <= 0:
        return a, 0.0, 0.0
    c1 = float(np.sum(w * X1) / np.sum(w))
    c2 = float(np.sum(w * X2) / np.sum(w))
    return a, rest, float(np.hypot(c1 - y1, c2 - y2))


def cc_classify(seq, radii=DEFAULT_RADII, thresholds: CCThresholds | None = None) -> CCReport:
    """Classify the tail of a sequence of nonnegative fields.

    Only the last third of the sequence (at least one element) is examined.
    Compactness wins if one radius holds a ``compactness`` fraction of the
    mass throughout the tail; vanishing if even the largest radius holds less
    than ``vanishing``; dichotomy if some radius captures a stable fraction
    in ``[theta, 1 - theta]`` while the remaining mass moves away.
    """
    th = thresholds or CCThresholds()
    seq = list(seq)
    rs = sorted(float(r) for r in radii)
    masses = [integrate(f) for f in seq]
    Q = [list(concentration_profile(f, rs).values()) for f in seq]
    rep = CCReport("undetermined", masses, rs, Q)
    if len(seq) < 3 or not rs:
        return rep
    if any(m <= 0 for m in masses):
        return rep
    tail = slice(len(seq) - max(1, len(seq) // 3), None)
    r = rep.ratios()[tail]

    if np.any(np.all(r >= th.compactness, axis=0)):
        rep.label = "compactness"
        return rep
    if np.all(r[:, -1] < th.vanishing):
        rep.label = "vanishing"
        return rep

    # dichotomy: the largest radius whose captured fraction is stable and split
    lo, hi = th.theta, 1.0 - th.theta
    for k in reversed(range(len(rs))):
        R = rs[k]
        col = r[:, k]
        if not (np.all(col >= lo) and np.all(col <= hi)):
            continue
        if col.max() - col.min() > th.theta / 2:
            continue
        parts = [_separation(f, R) for f in seq[tail]]
        seps = [s for _, _, s in parts]
        if len(seps) >= 2 and not all(b >= a for a, b in zip(seps, seps[1:])):
            continue
        if seps[-1] <= seps[0] and len(seps) > 1:
            continue
        if seps[-1] <= 2 * R:
            continue
        rep.label = "dichotomy"
        rep.plateau_radius = R
        rep.alpha = float(np.mean([a for a, _, _ in parts]))
        rep.residual = float(np.mean([b for _, b, _ in parts]))
        rep.separations = seps
        return rep
    return rep


# -- stream-function bounds -------------------------------------------------------

@dataclass
class BoundReport:
    """Fitted constants for the stream-function bounds.

    ``*_ratio`` entries are raw suprema (degree-1 homogeneous in the
    vorticity); ``*_constant`` entries divide by the norm combination that
    appears on the right-hand side of each bound.
    """

    high_altitude_constant: float
    growth_constant: float
    linear_ratio: float
    gradient_sup: float
    linear_constant: float
    tail_constant: float
    tail_slope: float
    tail_applicable: bool
    tail_points: int = 0

    def as_dict(self) -> dict:
        return {
            "bound_high_altitude": self.high_altitude_constant,
            "bound_growth": self.growth_constant,
            "bound_psi_over_x2": self.linear_ratio,
            "bound_grad_psi": self.gradient_sup,
            "bound_linear": self.linear_constant,
            "bound_tail": self.tail_constant,
            "tail_slope": self.tail_slope,
            "tail_applicable": self.tail_applicable,
        }


def _safe_div(a: float, b: float) -> float:
    return a / b if b > 0 else 0.0


def tail_profile(psi: Field, center_col: int) -> tuple[np.ndarray, np.ndarray]:
    """``(|x1 - c|, max over x2 of psi / x2)`` for columns right of the center ``c``."""
    d = psi.domain
    s = np.max(psi.values / d.heights(), axis=0)
    xc = d.x1[center_col]
    cols = np.arange(center_col + 1, d.nx)
    return d.x1[cols] - xc, s[cols]


def bound_report(zeta: Field, p: float = 3.0, tail: bool = True) -> BoundReport:
    """Fit the constants of the four stream-function bounds for ``zeta``.

    The tail fit needs a field that is Steiner symmetric about column
    ``nx // 2``; otherwise ``tail_applicable`` is ``False`` and the tail
    fields are ``nan``.
    """
    if p <= 2:
        raise ValueError("p must exceed 2")
    if np.any(zeta.values < 0):
        raise ValueError("bound_report needs a nonnegative field")
    d = zeta.domain
    q = p / (p - 1)
    X1, X2 = d.mesh()
    psi = stream(zeta)
    pv = psi.values
    I, m1, mp = impulse(zeta), integrate(zeta), lp_norm(zeta, p)

    high = X2 >= 1.0
    if np.any(high):
        lm1 = float(np.max(pv[high] * X2[high] / (np.log(X2[high]) + 1.0)))
    else:
        lm1 = 0.0
    lm3 = float(np.max(pv / (X2 ** (1 / q) + X2**2)))
    ratio = float(np.max(pv / X2))
    u1, u2 = velocity_from_stream(pv, d)
    grad = float(np.max(np.hypot(u1, u2)))

    center = d.nx // 2
    xc = d.x1[center]
    dist = np.maximum(np.abs(X1 - xc), 1.0)
    weight = dist ** (-1.0 / (2 * p))
    lmx2 = float(np.max(pv / (X2 * weight)))

    slope = float("nan")
    applicable = bool(tail) and bool(
        np.array_equal(steiner_symmetrize(zeta).values, zeta.values)
    )
    npts = 0
    if applicable and not zeta.is_zero():
        cols = np.flatnonzero(np.any(zeta.values > 0, axis=0))
        radius = float(np.max(np.abs(d.x1[cols] - xc))) + 0.5 * d.h1
        r, s = tail_profile(psi, center)
        keep = (r > 2 * radius) & (s > 0)
        npts = int(np.count_nonzero(keep))
        if npts >= 3:
            slope = float(np.polyfit(np.log(r[keep]), np.log(s[keep]), 1)[0])
    elif not applicable:
        lmx2 = float("nan")

    return BoundReport(
        high_altitude_constant=_safe_div(lm1, I),
        growth_constant=_safe_div(lm3, m1 + mp),
        linear_ratio=ratio,
        gradient_sup=grad,
        linear_constant=_safe_div(max(ratio, grad), m1 + mp),
        tail_constant=_safe_div(lmx2, I + m1 + mp) if applicable else float("nan"),
        tail_slope=slope,
        tail_applicable=applicable,
        tail_points=npts,
    )
