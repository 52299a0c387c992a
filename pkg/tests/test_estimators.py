import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from vortexpair import ConcentrationCompactness, EnergyMaximizer
from vortexpair._validation import check_field, check_sequence
from vortexpair.grid import Domain
from vortexpair.profiles import bump, patch


def test_check_field():
    d = Domain(1, 1, 4, 2)
    assert check_field(np.ones((2, 4)), d).shape == (2, 4)
    assert check_field(patch(d)).shape == (2, 4)
    for bad in (np.ones(8), -np.ones((2, 4)), np.full((2, 4), np.inf)):
        with pytest.raises(ValueError):
            check_field(bad)
    with pytest.raises(ValueError):
        check_field(np.ones((3, 4)), d)
    with pytest.raises(ValueError):
        check_field(patch(Domain(1, 1, 4, 4)), d)
    with pytest.raises(ValueError):
        check_sequence([])
    with pytest.raises(ValueError):
        check_sequence([np.ones((2, 2)), np.ones((2, 3))])


def test_params_round_trip():
    est = EnergyMaximizer(impulse=1.0, p=4.0)
    assert est.get_params()["p"] == 4.0
    c = clone(est.set_params(max_iter=50))
    assert c.max_iter == 50 and c is not est


def test_energy_maximizer_fit_transform():
    d = Domain(4.0, 4.0, 32, 16)
    X = patch(d).values
    est = EnergyMaximizer(impulse=1.0, half_width=4.0, strip_height=4.0)
    with pytest.raises(NotFittedError):
        est.transform(X)
    est.fit(X)
    assert est.vorticity_.shape == X.shape
    assert est.lambda_ > 0 and est.converged_
    assert est.impulse_ == pytest.approx(1.0, rel=1e-9)
    assert est.score() == est.energy_
    out = est.transform(X)
    assert np.array_equal(out, est.vorticity_)
    assert est.transform(np.stack([X, X])).shape == (2,) + X.shape
    with pytest.raises(ValueError):
        est.transform(np.ones((4, 4)))
    assert np.array_equal(EnergyMaximizer(impulse=1.0, strip_height=4.0).fit_transform(X), out)


def test_concentration_compactness_estimator():
    d = Domain(4.0, 2.0, 64, 32)
    X = np.stack([bump(d).values] * 3)
    cc = ConcentrationCompactness(half_width=4.0, strip_height=2.0).fit(X)
    assert cc.label_ == "compactness"
    assert cc.predict([bump(d)] * 3) == "compactness"
    assert clone(cc).get_params()["theta"] == 0.1
