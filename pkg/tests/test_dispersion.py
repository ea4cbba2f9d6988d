import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from vspectra.dispersion import (
    DomainError,
    WindowError,
    build_branches,
    char_coeffs,
    companion_roots,
    eigen_solve,
    eigen_solve_many,
    find_growth_max,
    golden_section_max,
    high_freq_prediction,
    match_branches,
    middle_band_bound,
    neutral_wavenumber,
    scan_table,
    solve_cubic,
    symbol,
    verify_high_freq_expansion,
    verify_low_freq_expansion,
    vieta_residuals,
)
from vspectra.model import ModelParams, Stability, derive_coeffs

# brute-force reference: dense eigvals on a 700001-point grid over [0.5, 1.2]
THETA_ORACLE = 0.18831839659150884
XI0_ORACLE = 0.836535

pos = st.floats(min_value=0.1, max_value=5.0)
params_st = st.builds(ModelParams, alpha=pos, beta=pos, mu=pos, nu=pos, gamma=pos, rho_bar=pos)


def _match_error(a, b):
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return cost[rows, cols].max()


def test_symbol_at_zero_is_lower_triangular(stable):
    p, c = stable
    m = symbol(c, p, 0.0)
    assert np.allclose(np.triu(m, 1), 0)
    assert np.allclose(np.diag(m), [0, -p.alpha, -p.nu])


def test_symbol_entries(stable):
    p, c = stable
    m = symbol(c, p, 1.0)
    assert np.array_equal(m[1], [1.0, -1.0, -1.0])
    assert m[2, 2] == -3.0
    for r in (0.0, 0.3, 40.0):
        assert symbol(c, p, r)[2, 0] == p.gamma


def test_negative_wavenumber_rejected(stable):
    p, c = stable
    with pytest.raises(DomainError):
        symbol(c, p, -1.0)


def test_char_polynomial_is_determinant(unstable, rng):
    p, c = unstable
    for r in rng.uniform(0.01, 10, 20):
        m = symbol(c, p, r)
        c2, c1, c0 = char_coeffs(c, p, r)
        for lam in rng.normal(size=3):
            det = np.linalg.det(lam * np.eye(3) - m)
            assert lam ** 3 + c2 * lam ** 2 + c1 * lam + c0 == pytest.approx(det, rel=1e-10,
                                                                                abs=1e-10)


def test_eigenvalues_at_zero_exact(stable):
    p, c = stable
    sp = eigen_solve(0.0, c, p)
    assert sorted(sp.lambdas.real) == [-p.nu, -p.alpha, 0.0]
    assert np.all(sp.lambdas.imag == 0)


def test_slow_root_leading_order(stable):
    p, c = stable
    sp = eigen_solve(0.01, c, p)
    slow = sp.lambdas[np.argmin(np.abs(sp.lambdas))]
    assert slow.real == pytest.approx(-5e-5, rel=1e-3)


def test_solve_cubic_known_roots():
    # (x - 1)(x - 2)(x - 3) and (x + 1)(x^2 + 1)
    r1 = solve_cubic(-6.0, 11.0, -6.0)[0]
    assert np.allclose(sorted(r1.real), [1, 2, 3], atol=1e-14)
    r2 = solve_cubic(1.0, 1.0, 1.0)[0]
    assert _match_error(r2, np.array([-1, 1j, -1j])) < 1e-14


def test_solve_cubic_triple_root_falls_back():
    # (x + 2)^3
    r = solve_cubic(6.0, 12.0, 8.0)[0]
    assert np.allclose(r, -2.0, atol=1e-4)


@given(params_st, st.floats(min_value=-4, max_value=4))
def test_vieta_sum_identity(p, logr):
    c = derive_coeffs(p)
    r = 10.0 ** logr
    sp = eigen_solve(r, c, p)
    assert sp.lambdas.sum().real == pytest.approx(-(p.mu * r * r + p.alpha + p.nu), rel=1e-10)


@given(params_st, st.floats(min_value=-3, max_value=3))
def test_conjugate_pairs(p, logr):
    c = derive_coeffs(p)
    lam = eigen_solve(10.0 ** logr, c, p).lambdas
    nonreal = lam[lam.imag != 0]
    assert nonreal.size in (0, 2)
    if nonreal.size:
        assert nonreal[0] == np.conj(nonreal[1])


@given(params_st, st.floats(min_value=-3, max_value=3))
def test_matches_companion_oracle(p, logr):
    c = derive_coeffs(p)
    r = 10.0 ** logr
    mine = eigen_solve(symbol(c, p, r)).lambdas
    oracle = companion_roots(*char_coeffs(c, p, r))[0]
    assert _match_error(mine, oracle) <= 1e-8 * max(1.0, np.abs(oracle).max())


def test_vieta_on_log_grid(unstable):
    p, c = unstable
    r = np.geomspace(1e-4, 1e4, 1000)
    lam, _, _, _ = eigen_solve_many(c, p, r, with_projectors=False)
    for res in vieta_residuals(c, p, r, lam):
        assert res.max() < 1e-9


def test_projector_algebra(unstable):
    p, c = unstable
    r = np.geomspace(1e-3, 1e3, 400)
    lam, proj, deg, _ = eigen_solve_many(c, p, r)
    a = symbol(c, p, r)[~deg]
    proj, lam = proj[~deg], lam[~deg]
    assert np.abs(proj.sum(axis=1) - np.eye(3)).max() < 1e-8
    assert np.abs(np.einsum("nijk,nikl->nijl", proj, proj) - proj).max() < 1e-8
    recon = np.einsum("ni,nijk->njk", lam, proj)
    assert np.abs(recon - a).max() / np.abs(a).max() < 1e-8


def test_degenerate_point_has_no_projectors():
    # alpha = nu and r -> 0 makes the pair collide
    p = ModelParams(alpha=1, beta=1, mu=1, nu=1, gamma=1e-30, rho_bar=1)
    c = derive_coeffs(p)
    sp = eigen_solve(1e-12, c, p)
    assert sp.degenerate and sp.projectors is None


def test_branches_small_grid_label_slow_branch(stable):
    p, c = stable
    br = build_branches(c, p, [1e-4, 2e-4])
    lam3 = br.branch(3)
    assert np.all(lam3.imag == 0)
    assert np.all(np.abs(lam3) < 1e-6)


def test_branch_matching_ignores_input_order(unstable, rng):
    p, c = unstable
    grid = np.linspace(0.1, 3.0, 50)
    lam, _, _, _ = eigen_solve_many(c, p, grid, with_projectors=False)
    shuffled = lam.copy()
    for i in range(1, grid.size):
        shuffled[i] = shuffled[i][rng.permutation(3)]
    assert np.array_equal(match_branches(lam), match_branches(shuffled))


def test_high_frequency_branch3(stable):
    p, c = stable
    r = np.geomspace(1e2, 1e4, 100)
    br = build_branches(c, p, r)
    rep = verify_high_freq_expansion(br, c, p)
    assert rep.passes()
    assert rep.lam3_over_r2 == pytest.approx(-p.mu, rel=1e-6)
    assert rep.re_pair_limit == pytest.approx(-p.alpha / 2, rel=1e-6)
    pred = high_freq_prediction(c, p, r)
    assert np.all(np.abs(pred[:, 2] - np.sort(br.values.real, axis=1)[:, 0]) < 1.0)


@pytest.mark.parametrize("nu", [2.0, 1.0])
def test_low_frequency_expansion(nu):
    p = ModelParams(alpha=1.0, beta=1.0, mu=1.0, nu=nu, gamma=1.0 if nu == 2 else 0.5,
                    rho_bar=1.0)
    c = derive_coeffs(p)
    eta1 = 0.01 * min(1, p.alpha, p.nu) / max(1, c.a, c.b)
    rep = verify_low_freq_expansion(build_branches(c, p, np.geomspace(eta1 / 100, eta1, 200)),
                                    c, p)
    for e in rep.entries:
        if e.expected == 0:
            assert abs(e.fitted) < 1e-3
        else:
            assert e.rel_error < 0.01


def test_low_frequency_expected_values(stable):
    p, c = stable
    rep = verify_low_freq_expansion(build_branches(c, p, np.geomspace(5e-5, 5e-3, 50)), c, p)
    by_branch = {e.branch: e.expected for e in rep.entries}
    assert by_branch[3] == pytest.approx(-0.5)
    assert by_branch[1] == 0.0


def test_growth_max_oracle(unstable):
    p, c = unstable
    g = find_growth_max(c, p)
    assert g.stability is Stability.UNSTABLE and g.attained
    assert g.Theta == pytest.approx(THETA_ORACLE, rel=1e-12)
    assert g.xi0 == pytest.approx(XI0_ORACLE, abs=2e-6)
    assert g.branch_index == 3
    # frozen output of this implementation
    assert g.Theta == pytest.approx(0.18831839659152594, rel=1e-13)
    assert g.xi0 == pytest.approx(0.8365348126399618, rel=1e-8)


def test_growth_max_dominates_neighbourhood(unstable):
    p, c = unstable
    g = find_growth_max(c, p)
    r = np.linspace(g.xi0 - 0.2, g.xi0 + 0.2, 2001)
    lam = solve_cubic(*char_coeffs(c, p, r))
    assert lam.real.max() <= g.Theta + 1e-12


def test_growth_max_stable_is_negative(stable):
    p, c = stable
    g = find_growth_max(c, p, r_min=1e-3, r_max=1e3)
    assert g.Theta < 0 and not g.attained


def test_growth_max_refinement_invariant(unstable):
    p, c = unstable
    a = find_growth_max(c, p, coarse_n=4096)
    b = find_growth_max(c, p, coarse_n=8192)
    assert abs(a.Theta - b.Theta) < 1e-10
    assert abs(a.xi0 - b.xi0) < 1e-6


def test_growth_window_edge_raises(unstable):
    p, c = unstable
    with pytest.raises(WindowError):
        find_growth_max(c, p, r_min=1e-3, r_max=0.5)


def test_neutral_wavenumber(unstable):
    p, c = unstable
    k = neutral_wavenumber(c, p)
    assert k == pytest.approx(math.sqrt(2.0))
    assert abs(solve_cubic(*char_coeffs(c, p, k))[0].real.max()) < 1e-12


def test_band_bounds(stable, unstable):
    p, c = stable
    band = middle_band_bound(c, p, eta1=0.1, eta2=100.0)
    assert band.stable and band.vartheta > 0
    assert np.isfinite(band.projector_bound)
    p, c = unstable
    band = middle_band_bound(c, p)
    assert band.max_real <= band.Theta + 1e-10


def test_slow_branch_sign_follows_discriminant(stable, unstable):
    for p, c in (stable, unstable):
        br = build_branches(c, p, [1e-4, 2e-4])
        assert np.sign(br.branch(3)[0].real) == -np.sign(c.discriminant)


def test_golden_section():
    x, f = golden_section_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, tol=1e-12)
    assert x == pytest.approx(0.3, abs=1e-7)


def test_scan_table_columns(unstable):
    p, c = unstable
    table = scan_table(c, p, np.geomspace(0.01, 10, 32))
    assert table.shape == (32, 9)
    assert set(np.unique(table[:, 8])) <= {0.0, 1.0}
