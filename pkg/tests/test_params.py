from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from src.errors import ConfigError, DomainError
from src.params import (
    ModeCoefficients,
    StringLawParams,
    assumptions,
    band_hz,
    classify_coefficients,
    damping_class,
    damping_crossover,
    derive,
    ell_of_x,
    frequency_band,
    load_params_file,
    mode_coefficients,
    mu_of_xi,
    nu_n_of_xi,
    resolve_params,
    rho_of_xi,
    save_params_file,
    string_frequencies,
    T_of_xi,
    x_of_xi,
    xi_of_x,
)

TWO_PI = 2.0 * math.pi


def test_modified_band_is_20_to_20k_hz(modified):
    lo, hi = band_hz(modified)
    assert lo == pytest.approx(20.0, rel=0.05)
    assert hi == pytest.approx(20_000.0, rel=0.05)


def test_nobili_band_is_120_to_35k_hz(nobili):
    lo, hi = band_hz(nobili)
    assert lo == pytest.approx(120.0, rel=0.10)
    assert hi == pytest.approx(35_000.0, rel=0.10)


def test_xi_at_base_is_a_tilde(any_params):
    assert xi_of_x(any_params, 0.0) == derive(any_params).A_tilde


def test_scale_constants(modified, nobili):
    dm, dn = derive(modified), derive(nobili)
    assert dm.A_tilde == pytest.approx(1.3e5, rel=0.05)
    assert dm.k_tilde == pytest.approx(6.9, rel=1e-12)
    assert dn.A_tilde == pytest.approx(2.2e5, rel=0.05)
    assert dn.k_tilde == pytest.approx(5.7, rel=1e-12)


def test_modified_derived_constants(modified):
    d = derive(modified)
    assert d.alpha == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert d.B_mu == pytest.approx(24.0, rel=0.05)
    assert d.B_T == pytest.approx(2.9e-9, rel=0.05)
    assert d.B_nu == pytest.approx(44e-3, rel=0.05)


def test_nobili_derived_constants(nobili):
    d = derive(nobili)
    assert d.alpha == pytest.approx(0.78, abs=0.01)
    assert d.B_T == pytest.approx(1.5e-8, rel=0.05)
    assert d.B_nu == pytest.approx(8.7e-3, rel=0.05)
    # Exact exponents give 0.14; the published 0.16 uses alpha rounded to 0.78.
    assert d.B_mu == pytest.approx(0.16, rel=0.15)
    rounded = (nobili.A_gamma / nobili.A_rho) * d.A_tilde ** (-0.78)
    assert rounded == pytest.approx(0.16, rel=0.02)


def test_x_round_trip(any_params):
    rng = np.random.default_rng(7)
    x = rng.uniform(0.0, any_params.L, 100)
    back = x_of_xi(any_params, xi_of_x(any_params, x))
    np.testing.assert_allclose(back, x, rtol=1e-12, atol=1e-12)
    for x0 in (0.0, 0.25, 0.5, 1.0):
        assert x_of_xi(any_params, xi_of_x(any_params, x0)) == pytest.approx(x0, abs=1e-12)


def test_x_of_xi_matches_bisection(nobili):
    xi = TWO_PI * 262.0
    x = x_of_xi(nobili, xi)
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if xi_of_x(nobili, mid) > xi:
            lo = mid
        else:
            hi = mid
    assert x == pytest.approx(0.5 * (lo + hi), abs=1e-12)


def test_position_and_band_domain_errors(modified):
    with pytest.raises(DomainError):
        xi_of_x(modified, 1.5)
    with pytest.raises(DomainError):
        xi_of_x(modified, -0.1)
    lo, hi = frequency_band(modified)
    with pytest.raises(DomainError):
        x_of_xi(modified, 0.5 * lo)
    with pytest.raises(DomainError):
        x_of_xi(modified, 2.0 * hi)


def test_coefficient_laws_are_power_laws(modified):
    d = derive(modified)
    xi = np.geomspace(200.0, 1e5, 7)
    np.testing.assert_allclose(mu_of_xi(modified, xi), d.B_mu * xi ** d.alpha, rtol=1e-12)
    np.testing.assert_allclose(T_of_xi(modified, xi), d.B_T * xi ** (2 * 11.5 / 13.8), rtol=1e-12)
    np.testing.assert_allclose(nu_n_of_xi(modified, xi, 3), d.B_nu * xi ** (2 * 2.3 / 13.8) / 3, rtol=1e-12)


def test_profiles_agree_with_position_laws(any_params):
    x = np.linspace(0.0, 1.0, 11)
    xi = xi_of_x(any_params, x)
    np.testing.assert_allclose(rho_of_xi(any_params, xi), any_params.A_rho * np.exp(any_params.k_rho * x), rtol=1e-10)
    np.testing.assert_allclose(T_of_xi(any_params, xi), any_params.A_T * np.exp(-any_params.k_T * x), rtol=1e-10)
    gamma = any_params.A_gamma * np.exp(any_params.k_gamma * x)
    np.testing.assert_allclose(mu_of_xi(any_params, xi), gamma / rho_of_xi(any_params, xi), rtol=1e-10)
    # xi = sqrt(T/rho) pi / ell
    np.testing.assert_allclose(
        np.sqrt(T_of_xi(any_params, xi) / rho_of_xi(any_params, xi)) * math.pi / any_params.ell, xi, rtol=1e-10
    )


def test_even_modes_have_zero_gain(any_params):
    rng = np.random.default_rng(3)
    lo, hi = frequency_band(any_params)
    xi = np.exp(rng.uniform(math.log(lo), math.log(hi), 50))
    for n in (2, 4, 6, 10):
        assert np.all(nu_n_of_xi(any_params, xi, n) == 0.0)
        assert nu_n_of_xi(any_params, float(xi[0]), n) == 0.0


def test_invalid_inputs(modified):
    with pytest.raises(DomainError):
        mu_of_xi(modified, -1.0)
    with pytest.raises(DomainError):
        nu_n_of_xi(modified, 100.0, 0)
    with pytest.raises(DomainError):
        StringLawParams(A_rho=-1, k_rho=1, A_T=1, k_T=1, A_gamma=1, k_gamma=0, ell=1)
    with pytest.raises(DomainError):
        ell_of_x(modified, 2.0)


def test_string_length_is_constant(modified):
    assert np.all(ell_of_x(modified, np.linspace(0, 1, 5)) == modified.ell)


def test_zero_damping_is_underdamped():
    regime = classify_coefficients(ModeCoefficients(xi=100.0, n=3, mu=0.0, nu=1.0))
    assert regime.underdamped
    assert regime.omega == 300.0


def test_high_modes_are_underdamped(modified):
    xi = TWO_PI * 3.0
    assert not damping_class(modified, xi, 1).underdamped
    assert damping_class(modified, xi, 41).underdamped


def test_damping_crossover(modified):
    boundary = damping_crossover(modified, n=1, factor=0.5)
    assert mu_of_xi(modified, boundary) / 2.0 == pytest.approx(boundary, rel=1e-10)
    assert not damping_class(modified, boundary * 0.99, 1).underdamped
    assert damping_class(modified, boundary * 1.01, 1).underdamped
    # xi = mu(xi) lands near 18 Hz for the modified set
    assert damping_crossover(modified, n=1, factor=1.0) / TWO_PI == pytest.approx(18.0, rel=0.1)


def test_string_frequencies(modified):
    xi = TWO_PI * 262.0
    sf = string_frequencies(modified, xi)
    mu = mu_of_xi(modified, xi)
    assert sf.omega_1 == pytest.approx(math.sqrt(xi**2 - mu**2 / 4))
    assert sf.k1_max == pytest.approx(math.sqrt(xi**2 - mu**2 / 2))
    assert sf.k1_max < sf.omega_1 < sf.xi


def test_mode_coefficients(modified):
    c = mode_coefficients(modified, 1000.0, 3)
    assert c.natural == 3000.0
    assert c.mu == pytest.approx(mu_of_xi(modified, 1000.0))
    assert c.nu == pytest.approx(nu_n_of_xi(modified, 1000.0, 3))


def test_assumptions(modified, nobili):
    assert "A03" in assumptions(modified)
    assert assumptions(nobili) == set()
    a01 = StringLawParams(A_rho=1e-3, k_rho=3, A_T=1, k_T=3, A_gamma=1, k_gamma=3, ell=1e-3)
    assert assumptions(a01) == {"A01", "A02"}
    a02 = StringLawParams(A_rho=1e-3, k_rho=2, A_T=1, k_T=8, A_gamma=1, k_gamma=5, ell=1e-3)
    assert "A02" in assumptions(a02)


def test_params_file_round_trip(tmp_path: Path, modified):
    path = save_params_file(modified, tmp_path / "modified.params")
    loaded = load_params_file(path)
    assert loaded == modified
    assert resolve_params(str(path)) == modified


def test_params_file_comments_and_default_name(tmp_path: Path):
    p = tmp_path / "mine.params"
    p.write_text(
        "# my cochlea\n"
        "A_rho = 6.9e-3   # kg/m^2\n"
        "k_rho = 2.3\nA_T = 0.94\nk_T = 11.5\n\n"
        "A_gamma = 8.3\nk_gamma = 0\nell = 2.9e-4\n",
        encoding="utf-8",
    )
    params = load_params_file(p)
    assert params.name == "mine"
    assert params.A_rho == 6.9e-3


@pytest.mark.parametrize(
    "body",
    [
        "A_rho = 1\n",  # missing keys
        "A_rho 1\n",  # no '='
        "bogus = 1\nA_rho = 1\n",
        "A_rho = abc\n",
    ],
)
def test_params_file_errors(tmp_path: Path, body: str):
    p = tmp_path / "bad.params"
    p.write_text(body, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_params_file(p)


def test_unknown_parameter_set():
    with pytest.raises(ConfigError, match="unknown parameter set"):
        resolve_params("does_not_exist")
