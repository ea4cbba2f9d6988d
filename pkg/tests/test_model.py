import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vspectra.model import (
    DEFAULT_STABLE,
    ConfigError,
    ModelError,
    ModelParams,
    PressureLaw,
    Stability,
    classify_stability,
    derive_coeffs,
    load_params,
    parse_config_text,
    parse_pressure,
    params_from_config,
    stability_of,
)

pos = st.floats(min_value=0.05, max_value=20.0, allow_nan=False)


def test_all_ones_is_borderline():
    c = derive_coeffs(ModelParams(alpha=1, beta=1, mu=1, nu=1, gamma=1, rho_bar=1))
    assert (c.a, c.b, c.discriminant) == (1.0, 1.0, 0.0)
    assert classify_stability(c, nu=1.0) is Stability.BORDERLINE


def test_default_unstable_coefficients():
    c = derive_coeffs(ModelParams(alpha=2, beta=3, mu=1, nu=1, gamma=1, rho_bar=1))
    assert c.a == 1.0 and c.b == 3.0 and c.discriminant == -2.0
    assert classify_stability(c, nu=1.0) is Stability.UNSTABLE


def test_quadratic_pressure():
    # P = rho^2 / 2, so P' = rho and a = sqrt(4) = 2, b = 4 * 1 / 2 = 2
    p = ModelParams(alpha=1, beta=1, mu=1, nu=1, gamma=1, rho_bar=4,
                    pressure=PressureLaw("power", c=0.5, g=2.0))
    c = derive_coeffs(p)
    assert c.a == pytest.approx(2.0, rel=1e-15)
    assert c.b == pytest.approx(2.0, rel=1e-15)


@pytest.mark.parametrize("disc, expected", [
    (1.0, Stability.STABLE), (-2.0, Stability.UNSTABLE), (0.0, Stability.BORDERLINE)])
def test_classify_by_sign(disc, expected):
    from vspectra.model import DerivedCoeffs

    assert classify_stability(DerivedCoeffs(a=1.0, b=1.0, discriminant=disc)) is expected


def test_stability_of_defaults():
    assert stability_of(DEFAULT_STABLE) is Stability.STABLE


@given(beta=pos, gamma=pos, nu=pos, s=pos)
def test_discriminant_is_bilinear(beta, gamma, nu, s):
    p = ModelParams(alpha=1, beta=beta, mu=1, nu=nu, gamma=gamma, rho_bar=1)
    q = ModelParams(alpha=1, beta=beta * s, mu=1, nu=nu, gamma=gamma, rho_bar=1)
    c, cs = derive_coeffs(p), derive_coeffs(q)
    assert cs.discriminant == pytest.approx(c.a * nu - s * c.b * gamma, rel=1e-12, abs=1e-12)


@given(beta=pos, gamma=pos, nu=pos, rho_bar=pos, c=pos, g=st.floats(1.0, 3.0))
def test_derive_coeffs_matches_definition(beta, gamma, nu, rho_bar, c, g):
    p = ModelParams(alpha=1, beta=beta, mu=1, nu=nu, gamma=gamma, rho_bar=rho_bar,
                    pressure=PressureLaw("power", c=c, g=g))
    out = derive_coeffs(p)
    a = math.sqrt(c * g * rho_bar ** (g - 1))
    assert out.a == pytest.approx(a, rel=1e-13)
    assert out.b == pytest.approx(rho_bar * beta / a, rel=1e-13)
    assert derive_coeffs(p) == out


def test_nonpositive_parameter_rejected():
    with pytest.raises(ModelError):
        ModelParams(alpha=0, beta=1, mu=1, nu=1, gamma=1, rho_bar=1)
    with pytest.raises(ModelError):
        ModelParams(alpha=1, beta=1, mu=1, nu=float("nan"), gamma=1, rho_bar=1)


def test_pressure_parsing():
    assert parse_pressure("power:2,1.4").describe() == "power:2.0,1.4"
    assert parse_pressure("affine:3").derivative(5.0) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        parse_pressure("cubic:1")


def test_table_pressure_is_monotone_interpolant():
    rho = np.linspace(0.2, 3.0, 15)
    law = PressureLaw.from_table(rho, rho ** 2)
    mid = np.linspace(0.3, 2.9, 50)
    assert np.all(np.diff(law(mid)) > 0)
    assert law.derivative(1.0) == pytest.approx(2.0, rel=2e-2)


def test_decreasing_table_rejected():
    law = PressureLaw.from_table([0.5, 1.0, 2.0, 3.0], [4.0, 3.0, 2.0, 1.0])
    with pytest.raises(ModelError):
        law.check_monotone(0.5, 3.0)
    with pytest.raises(ModelError):
        derive_coeffs(ModelParams(alpha=1, beta=1, mu=1, nu=1, gamma=1, rho_bar=1,
                                  pressure=law))


def test_power_exponent_below_one_rejected():
    with pytest.raises(ModelError):
        PressureLaw("power", c=1.0, g=0.5)


GOOD = """
[model]
alpha = 2
beta = 3
mu = 1
nu = 1
gamma = 1
rho_bar = 1
pressure = power:1,1
"""


def test_config_round_trip(tmp_path):
    path = tmp_path / "m.ini"
    path.write_text(GOOD)
    p = load_params(path)
    assert (p.alpha, p.beta, p.nu) == (2.0, 3.0, 1.0)
    assert classify_stability(derive_coeffs(p), p.nu) is Stability.UNSTABLE


def test_bad_value_reports_line():
    text = GOOD.replace("beta = 3", "beta = three")
    with pytest.raises(ConfigError) as err:
        params_from_config(parse_config_text(text, path="m.ini"))
    assert err.value.lineno == 4
    assert "m.ini:4:" in str(err.value)


def test_missing_header_reports_line():
    with pytest.raises(ConfigError) as err:
        parse_config_text("alpha = 1\n")
    assert err.value.lineno == 1


def test_missing_key():
    with pytest.raises(ConfigError, match="gamma"):
        params_from_config(parse_config_text(GOOD.replace("gamma = 1\n", "")))
