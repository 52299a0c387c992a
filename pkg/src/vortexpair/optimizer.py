"""Rearrangement ascent for the relaxed energy maximization problem.

Maximize ``E`` over fields dominated by ``zeta0`` with impulse at most
``i0``.  Each step linearizes ``E`` at the current iterate and solves the
linear problem exactly: a Lagrange multiplier ``lam`` for the impulse is
found by bisection, the profile is placed on the cells where ``psi - lam *
x2`` is largest, and two neighbouring placements are blended to hit the
impulse target.  Convexity of ``E`` makes the energy nondecreasing.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import Domain, Field, impulse, integrate, shift_x2
from .greens import energy, stream
from .isotonic import isotonic_fit
from .rearrange import (
    Profile,
    SteinerSpec,
    decreasing_rearrangement,
    is_rearrangement,
    precedes,
    rearrange_onto,
    steiner_symmetrize,
)

logger = logging.getLogger(__name__)


class BisectionError(RuntimeError):
    """The impulse-vs-multiplier bracket could not be established."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class SolverConfig:
    impulse: float
    p: float = 3.0
    tol_energy: float = 1e-8
    tol_impulse: float = 1e-10
    tol_lambda: float = 1e-13
    max_iter: int = 500
    max_bisect: int = 200
    steiner: bool = True
    blend: bool = True
    method: str = "fft"

    def __post_init__(self):
        if not self.p > 2:
            raise ValueError(f"p must exceed 2, got {self.p}")
        if not self.impulse > 0:
            raise ValueError(f"target impulse must be positive, got {self.impulse}")
        for name in ("tol_energy", "tol_impulse", "tol_lambda"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iter < 1 or self.max_bisect < 1:
            raise ValueError("iteration limits must be >= 1")


@dataclass(frozen=True, eq=False)
class LambdaSolution:
    """Result of the multiplier search.

    ``lower``/``upper`` are the placements at the two ends of the final
    bracket (impulse above / at-or-below the target); ``field`` is their
    blend, or ``lower`` alone when the constraint is inactive.
    """

    lam: float
    field: Field
    lower: Field
    upper: Field | None
    theta: float
    bisections: int

    @property
    def blended_cells(self) -> int:
        if self.upper is None or self.theta in (0.0, 1.0):
            return 0
        return int(np.count_nonzero(self.lower.values != self.upper.values))


@dataclass(frozen=True, eq=False)
class SolverState:
    zeta: Field
    psi: Field
    lam: float
    energy: float
    impulse: float
    profile: Profile
    iteration: int = 0
    rel_change: float = float("inf")
    best_energy: float = 0.0
    step: LambdaSolution | None = None

    def Psi(self) -> Field:
        """``psi - lam * x2`` as an unsigned field."""
        d = self.zeta.domain
        return Field(d, self.psi.values - self.lam * d.heights(), nonneg=False)


@dataclass(frozen=True, eq=False)
class FirstVariationFit:
    """Isotonic estimate of ``zeta = phi(Psi)`` and its quality.

    Attributes
    ----------
    breakpoints, phi : ndarray
        Nondecreasing fit ``phi(breakpoints)``, anchored at ``(0, 0)``.
    Phi : ndarray
        Antiderivative of the piecewise-linear ``phi`` at the breakpoints.
    residual : float
        Fraction of discordant pairs on the support, in ``[0, 1]``.
    vanishes_outside : bool
        ``zeta == 0`` wherever ``Psi <= 0``.
    """

    breakpoints: np.ndarray
    phi: np.ndarray
    Phi: np.ndarray
    residual: float
    vanishes_outside: bool
    support_cells: int
    Phi_integral: float
    virial_gap: float = float("nan")

    def Phi_at(self, s) -> np.ndarray:
        """Evaluate the antiderivative at arbitrary ``s`` (zero for ``s <= 0``)."""
        s = np.asarray(s, dtype=float)
        bp, ph, Ph = self.breakpoints, self.phi, self.Phi
        out = np.zeros(s.shape)
        pos = s > 0
        sp = np.minimum(s[pos], bp[-1])
        k = np.clip(np.searchsorted(bp, sp, side="right") - 1, 0, bp.size - 2)
        t = sp - bp[k]
        slope = (ph[k + 1] - ph[k]) / np.where(bp[k + 1] > bp[k], bp[k + 1] - bp[k], 1.0)
        out[pos] = Ph[k] + ph[k] * t + 0.5 * slope * t * t
        beyond = s[pos] - sp
        out[pos] += ph[-1] * beyond
        return out


def linearized_max(p0: Profile, psi: Field, lam: float) -> Field:
    """Maximize ``sum (psi - lam x2) xi`` over curtailed rearrangements of ``p0``."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    d = psi.domain
    Psi = Field(d, psi.values - lam * d.heights(), nonneg=False)
    return rearrange_onto(p0, Psi, Psi.values > 0)


def _blend(a: Field, b: Field, theta: float) -> Field:
    v = theta * a.values + (1.0 - theta) * b.values
    return Field(a.domain, np.maximum(v, 0.0))


def solve_lambda_detail(
    p0: Profile,
    psi: Field,
    i0: float,
    tol_impulse: float = 1e-10,
    tol_lambda: float = 1e-13,
    blend: bool = True,
    max_bisect: int = 200,
) -> LambdaSolution:
    """Multiplier search with the full bracket; see :func:`solve_lambda`."""
    if not i0 > 0:
        raise ValueError("target impulse must be positive")
    d = psi.domain
    xi0 = linearized_max(p0, psi, 0.0)
    imp0 = impulse(xi0)
    if imp0 <= i0:
        return LambdaSolution(0.0, xi0, xi0, None, 1.0, 0)

    lo, hi = 0.0, float(np.max(psi.values / d.heights()))
    xi_lo, imp_lo = xi0, imp0
    xi_hi = linearized_max(p0, psi, hi)
    imp_hi = impulse(xi_hi)
    trace = [(lo, imp_lo), (hi, imp_hi)]
    if imp_hi > i0:
        raise BisectionError("impulse above target at the top of the bracket", trace)
    n = 0
    while n < max_bisect and hi - lo > tol_lambda * hi:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        xi = linearized_max(p0, psi, mid)
        imp = impulse(xi)
        trace.append((mid, imp))
        n += 1
        if imp > i0:
            if imp > imp_lo * (1 + 1e-12) + 1e-300:
                raise BisectionError("impulse increased with the multiplier", trace)
            lo, xi_lo, imp_lo = mid, xi, imp
        else:
            hi, xi_hi, imp_hi = mid, xi, imp
    if hi - lo > tol_lambda * hi and n >= max_bisect:
        raise BisectionError(f"bracket not resolved in {max_bisect} bisections", trace)

    if not blend:
        return LambdaSolution(hi, xi_hi, xi_lo, xi_hi, 0.0, n)
    theta = (i0 - imp_hi) / (imp_lo - imp_hi)
    xi = _blend(xi_lo, xi_hi, theta)
    if abs(impulse(xi) - i0) > tol_impulse * i0:
        logger.debug("blend impulse off target by %g", impulse(xi) - i0)
    return LambdaSolution(lo, xi, xi_lo, xi_hi, theta, n)


def solve_lambda(p0: Profile, psi: Field, i0: float, **kwargs) -> tuple[float, Field]:
    """Solve the linearized problem with the impulse constraint ``I <= i0``.

    If the unconstrained placement already satisfies the constraint the
    multiplier is zero.  Otherwise ``lam`` is bisected on ``[0, max psi/x2]``
    and, with ``blend=True``, the two bracketing placements are mixed so the
    impulse equals ``i0``.  Mixtures stay feasible because the feasible set
    is convex.
    """
    sol = solve_lambda_detail(p0, psi, i0, **kwargs)
    return sol.lam, sol.field


def _steiner_center(domain: Domain) -> SteinerSpec:
    return SteinerSpec(domain.nx // 2)


def _make_state(zeta: Field, profile: Profile, lam: float, method: str, **kw) -> SolverState:
    psi = stream(zeta, method)
    e = energy(zeta, psi)
    return SolverState(zeta, psi, lam, e, impulse(zeta), profile, **kw)


def lowest_placement(profile: Profile, domain: Domain) -> Field:
    """Profile packed into a disc-like block on the axis, symmetric about ``x1 = 0``.

    Cells are filled in order of distance from the block center, so the
    largest values sit in the middle.
    """
    S = profile.support_cells
    if S == 0:
        return domain.zeros()
    radius = np.sqrt(S * domain.cell_area / np.pi)
    center = _steiner_center(domain).center
    X1, X2 = domain.mesh()
    x1c = domain.x1[center]
    # lowest admissible center height keeps the disc inside the strip
    y0 = max(radius, 0.5 * domain.h2)
    dist = np.hypot(X1 - x1c, X2 - y0).reshape(-1)
    jj, ii = np.divmod(np.arange(domain.size), domain.nx)
    order = np.lexsort((ii, jj, dist))
    out = np.zeros(domain.size)
    out[order[:S]] = profile.values[:S]
    f = Field(domain, out)
    f = steiner_symmetrize(f, _steiner_center(domain))
    # drop to the axis: remove empty rows underneath
    rows = np.nonzero(f.values.any(axis=1))[0]
    return shift_x2(f, -int(rows[0])) if rows.size else f


def initial_guess(profile: Profile, domain: Domain, i0: float) -> Field:
    """Steiner-symmetric block raised by whole rows to the largest impulse ``<= i0``."""
    base = lowest_placement(profile, domain)
    rows = np.nonzero(base.values.any(axis=1))[0]
    if rows.size == 0:
        return base
    headroom = domain.ny - 1 - int(rows[-1])
    per_row = integrate(base) * domain.h2
    k = int(np.floor((i0 - impulse(base)) / per_row)) if per_row > 0 else 0
    k = max(0, min(k, headroom))
    f = shift_x2(base, k)
    while k > 0 and impulse(f) > i0:
        k -= 1
        f = shift_x2(base, k)
    return f


def ascent_iterate(s: SolverState, cfg: SolverConfig) -> SolverState:
    """One linearize-and-maximize step from state ``s``."""
    sol = solve_lambda_detail(
        s.profile,
        s.psi,
        cfg.impulse,
        tol_impulse=cfg.tol_impulse,
        tol_lambda=cfg.tol_lambda,
        blend=cfg.blend,
        max_bisect=cfg.max_bisect,
    )
    zeta = sol.field
    if cfg.steiner:
        zeta = steiner_symmetrize(zeta, _steiner_center(zeta.domain))
    new = _make_state(zeta, s.profile, sol.lam, cfg.method, iteration=s.iteration + 1, step=sol)
    rel = (new.energy - s.energy) / abs(s.energy) if s.energy else float("inf")
    return replace(new, rel_change=rel, best_energy=max(s.best_energy, new.energy))


@dataclass(eq=False)
class SolveResult:
    state: SolverState
    fit: FirstVariationFit
    converged: bool
    trace: list = field(default_factory=list)
    is_full_rearrangement: bool = False
    unrelaxed: bool = False
    initial_impulse: float = 0.0
    runtime: float = 0.0


def _trace_record(s: SolverState, delta: float, residual: float) -> dict:
    return {
        "iteration": s.iteration,
        "energy": s.energy,
        "impulse": s.impulse,
        "lambda": s.lam,
        "energy_delta": delta,
        "residual": residual,
    }


def solve(zeta0: Field, cfg: SolverConfig, initial: Field | None = None) -> SolveResult:
    """Run rearrangement ascent from a Steiner-symmetric initial block.

    Stops when the relative energy increase drops below ``cfg.tol_energy``
    or after ``cfg.max_iter`` steps; a run that hits the iteration limit is
    returned with ``converged=False``.
    """
    if zeta0.is_zero():
        raise ValueError("zeta0 must be nontrivial")
    t0 = time.perf_counter()
    domain = zeta0.domain
    profile = decreasing_rearrangement(zeta0)
    start = initial if initial is not None else initial_guess(profile, domain, cfg.impulse)
    if impulse(start) > cfg.impulse * (1 + cfg.tol_impulse):
        # the lowest block already overshoots; one constrained step makes it feasible
        psi0 = stream(start, cfg.method)
        lam, start = solve_lambda(profile, psi0, cfg.impulse)
    state = _make_state(start, profile, 0.0, cfg.method)
    state = replace(state, best_energy=state.energy)
    trace = [_trace_record(state, 0.0, float("nan"))]
    converged = False
    for _ in range(cfg.max_iter):
        new = ascent_iterate(state, cfg)
        delta = new.energy - state.energy
        if delta < -1e-10 * abs(state.energy):
            logger.warning("energy decreased by %g at iteration %d", delta, new.iteration)
        res = first_variation_residual(new.zeta, new.Psi()).residual
        trace.append(_trace_record(new, delta, res))
        state = new
        if abs(new.rel_change) < cfg.tol_energy:
            converged = True
            break
    fit = first_variation_residual(state.zeta, state.Psi())
    gap = virial_gap(fit, state) if state.lam > 0 else float("nan")
    fit = replace(fit, virial_gap=gap)
    full = is_rearrangement(state.zeta, profile)
    step = state.step
    if step is not None and step.upper is not None and 0.0 < step.theta < 1.0:
        unrelaxed = is_rearrangement(step.lower, profile) and is_rearrangement(step.upper, profile)
    else:
        unrelaxed = full
    return SolveResult(
        state=state,
        fit=fit,
        converged=converged,
        trace=trace,
        is_full_rearrangement=full,
        unrelaxed=unrelaxed,
        initial_impulse=impulse(start),
        runtime=time.perf_counter() - t0,
    )


def _discordant_fraction(psi: np.ndarray, zeta: np.ndarray, tie: float, chunk: int = 2048) -> float:
    n = psi.size
    if n < 2:
        return 0.0
    bad = 0
    for a in range(0, n, chunk):
        pa = psi[a:a + chunk, None]
        za = zeta[a:a + chunk, None]
        bad += int(np.count_nonzero((pa < psi[None, :] - tie) & (za > zeta[None, :])))
    return bad / (n * (n - 1) / 2)


def first_variation_residual(zeta: Field, Psi: Field) -> FirstVariationFit:
    """Measure how far ``zeta`` is from an increasing function of ``Psi``."""
    if zeta.domain != Psi.domain:
        raise ValueError("fields live on different grids")
    z = zeta.values.reshape(-1)
    s = Psi.values.reshape(-1)
    supp = z > 0
    scale = float(np.max(np.abs(s))) if s.size else 0.0
    tie = 1e-12 * scale
    residual = _discordant_fraction(s[supp], z[supp], tie)
    vanishes = not bool(np.any(supp & (s <= 0)))

    pos = s > 0
    if np.any(pos):
        ux, fit = isotonic_fit(s[pos], z[pos])
        bp = np.concatenate([[0.0], ux])
        ph = np.concatenate([[0.0], fit])
    else:
        bp = np.array([0.0, 1.0])
        ph = np.zeros(2)
    Ph = np.concatenate([[0.0], np.cumsum(0.5 * (ph[1:] + ph[:-1]) * np.diff(bp))])
    out = FirstVariationFit(bp, ph, Ph, residual, vanishes, int(supp.sum()), 0.0)
    total = zeta.domain.cell_area * float(np.sum(out.Phi_at(s)))
    return replace(out, Phi_integral=total)


def virial_gap(fit: FirstVariationFit, state: SolverState) -> float:
    """Relative mismatch ``|2 int Phi(Psi) - lam I| / (lam I)``.

    Returns ``0`` for a zero field and ``nan`` when ``lam == 0`` (undefined).
    """
    if state.zeta.is_zero():
        return 0.0
    if state.lam <= 0:
        return float("nan")
    rhs = state.lam * state.impulse
    return abs(2.0 * fit.Phi_integral - rhs) / rhs
