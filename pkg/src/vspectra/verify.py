"""Named verification batteries used by ``vspectra verify``.

Each suite takes a parameter set and returns a report dict with a top-level
``pass`` flag and a list of individual ``checks``.  A suite that does not
apply to the regime of the given parameters raises ``RegimeError``.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .dispersion import (
    build_branches,
    default_eta,
    eigen_solve_many,
    find_growth_max,
    verify_high_freq_expansion,
    verify_low_freq_expansion,
    vieta_residuals,
)
from .instability import RegimeError, build_bump, sandwich_check
from .model import ModelParams, Stability, classify_stability, derive_coeffs
from .ratefit import fit_exponential
from .semigroup import decay_envelope_check, high_frequency_check, omega_decay

SUITES = ("asymptotics", "sandwich", "decay", "escape")


def _check(name, passed, **detail):
    return {"name": name, "pass": bool(passed), **detail}


def asymptotics_suite(params: ModelParams):
    coeffs = derive_coeffs(params)
    checks = []
    eta1, _ = default_eta(coeffs, params)
    low = verify_low_freq_expansion(
        build_branches(coeffs, params, np.geomspace(eta1 / 100, eta1, 200)), coeffs, params)
    for e in low.entries:
        # a vanishing prediction is compared in absolute terms
        err = e.abs_error if e.expected == 0 else e.rel_error
        checks.append(_check(f"low_freq_branch{e.branch}_{e.kind}", err <= 0.01,
                             fitted=e.fitted, expected=e.expected, error=err))
    high = verify_high_freq_expansion(
        build_branches(coeffs, params, np.geomspace(1e2, 1e4, 200)), coeffs, params)
    checks.append(_check("high_freq_pair_slope", abs(high.slope_pair + 1) <= 0.2,
                         fitted=high.slope_pair, expected=-1.0))
    checks.append(_check("high_freq_real_slope", abs(high.slope_real + 2) <= 0.2,
                         fitted=high.slope_real, expected=-2.0))

    r = np.geomspace(1e-4, 1e4, 1000)
    lam, _, _, _ = eigen_solve_many(coeffs, params, r, with_projectors=False)
    worst = max(float(np.max(res)) for res in vieta_residuals(coeffs, params, r, lam))
    checks.append(_check("vieta", worst <= 1e-9, worst_relative=worst))

    growth = find_growth_max(coeffs, params)
    regime = classify_stability(coeffs, params.nu)
    if regime is not Stability.BORDERLINE:
        agree = (growth.Theta > 0) == (regime is Stability.UNSTABLE)
        checks.append(_check("dichotomy", agree, Theta=growth.Theta, stability=regime.value))
    return checks


def sandwich_suite(params: ModelParams):
    coeffs = derive_coeffs(params)
    if classify_stability(coeffs, params.nu) is not Stability.UNSTABLE:
        raise RegimeError("the sandwich suite needs unstable parameters")
    growth = find_growth_max(coeffs, params)
    theta = growth.Theta
    times = np.linspace(0.0, 20.0 / theta, 20)
    checks = []
    for frac in (0.1, 0.25, 0.4):
        bump = build_bump(coeffs, params, frac * theta, growth=growth)
        rep = sandwich_check(bump, coeffs, params, times)
        checks.append(_check(f"sandwich_theta_bar_{frac:g}Theta", rep.passed,
                             theta_bar=frac * theta, zeta_bar=bump.zeta_bar,
                             worst_ratio=rep.worst_ratio,
                             mode_exp_mismatch=rep.mode_exp_mismatch))
    return checks


def decay_suite(params: ModelParams):
    coeffs = derive_coeffs(params)
    if classify_stability(coeffs, params.nu) is not Stability.STABLE:
        raise RegimeError("the decay suite needs stable parameters")
    checks = []
    for c in decay_envelope_check(coeffs, params):
        d = c.as_dict()
        checks.append(_check(f"decay_{c.component}_k{c.k}", c.passes(0.05),
                             exponent_fitted=d["exponent_fitted"],
                             exponent_expected=d["exponent_expected"],
                             abs_error=d["abs_error"], r2=d["r2"]))
    t = np.linspace(0.0, 20.0, 201)
    omega = fit_exponential(t, omega_decay(1.0, t, params.alpha))
    checks.append(_check("omega_rate", abs(omega.rate - params.alpha) <= 1e-6,
                         fitted=omega.rate, expected=params.alpha))
    hf = high_frequency_check(coeffs, params)
    checks.append(_check("high_frequency_band", hf.passes(), **hf.as_dict()))
    return checks


def escape_suite(params: ModelParams, deltas=(1e-4, 1e-5, 1e-6, 1e-7), n=1024):
    from .nonlinear import run_escape_experiment

    coeffs = derive_coeffs(params)
    if classify_stability(coeffs, params.nu) is not Stability.UNSTABLE:
        raise RegimeError("the escape suite needs unstable parameters")
    exp = run_escape_experiment(params, coeffs, deltas, n=n)
    expected = 1.0 / exp.Theta
    ok = exp.slope is not None and abs(exp.slope - expected) <= 0.1 * expected
    return [_check("escape_slope", ok, slope=exp.slope, expected=expected,
                   runs=[{"delta": r.delta, "T_delta": r.T_delta, "crossed": r.crossed}
                         for r in exp.results])]


_RUNNERS = {
    "asymptotics": asymptotics_suite,
    "sandwich": sandwich_suite,
    "decay": decay_suite,
    "escape": escape_suite,
}


def run_suite(name, params: ModelParams):
    if name not in _RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    start = time.perf_counter()
    checks = _RUNNERS[name](params)
    elapsed = time.perf_counter() - start
    finite = all(
        not isinstance(v, float) or math.isfinite(v) for c in checks for v in c.values())
    return {"suite": name, "pass": all(c["pass"] for c in checks) and finite,
            "elapsed_s": elapsed, "checks": checks}
