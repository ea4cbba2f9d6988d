import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from vspectra.dispersion import solve_cubic, char_coeffs
from vspectra.estimators import SpectrumTransformer
from vspectra.model import Stability
from vspectra.verify import SUITES, run_suite


def test_get_params_round_trip():
    st = SpectrumTransformer(alpha=2, beta=3)
    params = st.get_params()
    assert params["alpha"] == 2 and params["pressure"] == "power:1,1"
    assert clone(st).get_params() == params


def test_fit_unstable_sets_growth():
    st = SpectrumTransformer(alpha=2, beta=3).fit()
    assert st.stability_ is Stability.UNSTABLE
    assert st.theta_ == pytest.approx(0.18831839659152594, rel=1e-12)


def test_fit_stable_has_no_growth():
    st = SpectrumTransformer(beta=0.5, nu=2).fit()
    assert st.stability_ is Stability.STABLE and st.theta_ is None


def test_transform_matches_cubic():
    st = SpectrumTransformer(alpha=2, beta=3).fit()
    r = np.linspace(0.1, 3.0, 30)
    out = st.transform(r[:, None])
    assert out.shape == (30, 6)
    lam = out[:, 0::2] + 1j * out[:, 1::2]
    ref = solve_cubic(*char_coeffs(st.coeffs_, st.params_, r))
    for a, b in zip(lam, ref):
        assert np.allclose(np.sort_complex(a), np.sort_complex(b), atol=1e-12)
    assert list(st.get_feature_names_out())[:2] == ["re_lambda1", "im_lambda1"]


def test_transform_validates_input():
    st = SpectrumTransformer()
    with pytest.raises(NotFittedError):
        st.transform([[1.0]])
    st.fit()
    with pytest.raises(ValueError):
        st.transform([[1.0, 2.0]])
    with pytest.raises(ValueError):
        st.transform([[-1.0]])


def test_bad_parameter_surfaces_at_fit():
    with pytest.raises(ValueError):
        SpectrumTransformer(alpha=-1).fit()


def test_unknown_suite():
    assert set(SUITES) == {"asymptotics", "sandwich", "decay", "escape"}
    from vspectra.model import DEFAULT_STABLE

    with pytest.raises(KeyError):
        run_suite("bogus", DEFAULT_STABLE)


def test_decay_suite_on_stable(stable):
    report = run_suite("decay", stable[0])
    assert report["pass"], [c for c in report["checks"] if not c["pass"]]
