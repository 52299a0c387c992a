"""scikit-learn style wrappers around the solver and the classifier.

The grid geometry is a hyperparameter; inputs are plain ``(ny, nx)``
arrays (or :class:`~vortexpair.grid.Field`).
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_field, check_sequence
from .diagnostics import DEFAULT_RADII, CCThresholds, cc_classify
from .grid import Domain, Field
from .optimizer import SolverConfig, solve


class EnergyMaximizer(TransformerMixin, BaseEstimator):
    """Maximize energy over rearrangements of the input with an impulse bound.

    Parameters
    ----------
    impulse : float
        Target impulse ``i0``.
    p : float, default=3.0
        Exponent of the perturbation norm, must exceed 2.
    half_width, strip_height : float
        Truncated strip ``[-half_width, half_width] x (0, strip_height)``.
    tol_energy : float, default=1e-8
    max_iter : int, default=500
    steiner : bool, default=True
        Steiner-symmetrize every iterate.

    Attributes
    ----------
    vorticity_ : ndarray of shape (ny, nx)
    stream_ : ndarray of shape (ny, nx)
    lambda_, energy_, impulse_ : float
    n_iter_ : int
    converged_ : bool
    fv_residual_, virial_gap_ : float
    """

    def __init__(self, impulse=2.0, p=3.0, half_width=4.0, strip_height=2.0,
                 tol_energy=1e-8, max_iter=500, steiner=True):
        self.impulse = impulse
        self.p = p
        self.half_width = half_width
        self.strip_height = strip_height
        self.tol_energy = tol_energy
        self.max_iter = max_iter
        self.steiner = steiner

    def _domain(self, shape) -> Domain:
        ny, nx = shape
        return Domain(self.half_width, self.strip_height, nx, ny)

    def _config(self) -> SolverConfig:
        return SolverConfig(impulse=self.impulse, p=self.p, tol_energy=self.tol_energy,
                            max_iter=self.max_iter, steiner=self.steiner)

    def _solve(self, X):
        a = check_field(X)
        d = self._domain(a.shape)
        return solve(Field(d, a), self._config())

    def fit(self, X, y=None):
        res = self._solve(X)
        s = res.state
        self.domain_ = s.zeta.domain
        self.vorticity_ = np.array(s.zeta.values)
        self.stream_ = np.array(s.psi.values)
        self.lambda_ = s.lam
        self.energy_ = s.energy
        self.impulse_ = s.impulse
        self.n_iter_ = s.iteration
        self.converged_ = res.converged
        self.fv_residual_ = res.fit.residual
        self.virial_gap_ = res.fit.virial_gap
        self.trace_ = res.trace
        return self

    def transform(self, X):
        """Maximizer for each input profile; ``X`` may be one field or a stack."""
        check_is_fitted(self, "vorticity_")
        a = np.asarray(X.values if isinstance(X, Field) else X, dtype=float)
        if a.ndim == 2:
            return self._transform_one(a)
        return np.stack([self._transform_one(x) for x in check_sequence(a)])

    def _transform_one(self, a):
        a = check_field(a, self.domain_)
        return np.array(solve(Field(self.domain_, a), self._config()).state.zeta.values)

    def score(self, X=None, y=None):
        """Energy of the fitted maximizer."""
        check_is_fitted(self, "energy_")
        return self.energy_


class ConcentrationCompactness(BaseEstimator):
    """Label a sequence of fields as compactness, vanishing or dichotomy.

    ``fit`` takes an ``(n, ny, nx)`` array; the label is stored in
    ``label_`` and the full report in ``report_``.
    """

    def __init__(self, radii=DEFAULT_RADII, vanishing=0.05, compactness=0.95,
                 theta=0.1, half_width=4.0, strip_height=2.0):
        self.radii = radii
        self.vanishing = vanishing
        self.compactness = compactness
        self.theta = theta
        self.half_width = half_width
        self.strip_height = strip_height

    def fit(self, X, y=None):
        if isinstance(X, (list, tuple)) and X and isinstance(X[0], Field):
            seq = list(X)
        else:
            a = check_sequence(X)
            d = Domain(self.half_width, self.strip_height, a.shape[2], a.shape[1])
            seq = [Field(d, x) for x in a]
        th = CCThresholds(self.vanishing, self.compactness, self.theta)
        self.report_ = cc_classify(seq, self.radii, th)
        self.label_ = self.report_.label
        return self

    def predict(self, X):
        """Label for the sequence ``X`` (refits)."""
        return self.fit(X).label_
