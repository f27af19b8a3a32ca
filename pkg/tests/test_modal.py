from __future__ import annotations

import json
import math

import numpy as np
import pytest

from src.errors import DomainError, UndefinedMaximumError
from src.modal import (
    ModalResponse,
    ModalTerm,
    amplitude_profile,
    amplitude_Rn,
    max_drive_for_coefficients,
    max_drive_frequency,
    max_string_for_drive,
    mode_phasors,
    phase_phin,
    rational_form,
    reconstruct_displacement,
    response,
    response_periodic,
    response_sine,
    steady_amplitude,
    steady_phase,
)
from src.params import ModeCoefficients, StringLawParams, derive, mode_coefficients, mu_of_xi, nu_n_of_xi
from src.signals import Component, PeriodicSignal, sawtooth, sine

TWO_PI = 2.0 * math.pi
C4 = TWO_PI * 262.0


def test_even_modes_do_not_respond(modified):
    xi = np.geomspace(200.0, 1e5, 20)
    assert np.all(amplitude_Rn(modified, xi, C4, 2) == 0.0)
    assert np.all(amplitude_Rn(modified, xi, C4, 8) == 0.0)


def test_resonance_amplitude_and_phase(modified):
    xi, n = 1000.0, 3
    k = 3000.0
    R = amplitude_Rn(modified, xi, k, n)
    assert R == pytest.approx(nu_n_of_xi(modified, xi, n) / (k * mu_of_xi(modified, xi)), rel=1e-12)
    assert phase_phin(modified, xi, k, n) == math.pi / 2


def test_phase_limits():
    coeffs = ModeCoefficients(xi=100.0, n=1, mu=1e-3, nu=1.0)
    assert 0.0 < steady_phase(coeffs, 1e5) < 1e-6
    assert math.pi - 1e-6 < steady_phase(coeffs, 1e-1) < math.pi


def test_undamped_resonance_diverges():
    assert steady_amplitude(ModeCoefficients(xi=100.0, n=1, mu=0.0, nu=1.0), 100.0) == math.inf


def test_amplitude_phase_form_equals_rational_form(modified):
    rng = np.random.default_rng(1234)
    worst = 0.0
    for _ in range(1000):
        xi = math.exp(rng.uniform(math.log(TWO_PI * 20), math.log(TWO_PI * 200)))
        n = int(rng.choice([1, 3, 5]))
        k = math.exp(rng.uniform(math.log(xi / 4), math.log(4 * n * xi)))
        phi = rng.uniform(-math.pi, math.pi)
        t = rng.uniform(0.0, 10.0 / k)
        coeffs = mode_coefficients(modified, xi, n)
        R = steady_amplitude(coeffs, k)
        polar = R * math.sin(k * t + phi + steady_phase(coeffs, k))
        worst = max(worst, abs(polar - rational_form(coeffs, k, t, phi)) / R)
    assert worst < 1e-12


def test_steady_state_solves_the_ode(modified):
    # p'' + mu p' + (n xi)^2 p = nu sin(k t), checked with the analytic derivatives
    xi, n, k = 2000.0, 1, 2500.0
    resp = response_sine(modified, xi, PeriodicSignal(k, (Component(1, 1.0, 0.0),)), 1)
    (term,) = resp.terms
    t = np.linspace(0.0, 0.01, 50)
    p = term.amplitude * np.sin(k * t + term.phase)
    v = term.amplitude * k * np.cos(k * t + term.phase)
    a = -term.amplitude * k * k * np.sin(k * t + term.phase)
    c = mode_coefficients(modified, xi, n)
    residual = a + c.mu * v + c.natural**2 * p - c.nu * np.sin(k * t)
    assert np.max(np.abs(residual)) < 1e-9 * c.nu


def test_response_sine_rejects_multi_component(modified):
    with pytest.raises(DomainError):
        response_sine(modified, 1000.0, sawtooth(262.0, 2), 3)


def test_single_component_periodic_equals_sine(modified):
    s = sine(262.0, 0.7, 0.2)
    assert response_periodic(modified, 1500.0, s, 7) == response_sine(modified, 1500.0, s, 7)


def test_response_is_linear_in_components(modified):
    k = C4
    both = PeriodicSignal(k, (Component(1, 1.0, 0.3), Component(3, 0.5, -1.0)))
    first = PeriodicSignal(k, (Component(1, 1.0, 0.3),))
    third = PeriodicSignal(k, (Component(3, 0.5, -1.0),))
    xi = 1800.0
    t = np.linspace(0.0, 0.02, 200)
    r_both, r1, r3 = (response(modified, xi, s, 9) for s in (both, first, third))
    for n in r_both.modes:
        lhs = r_both.displacement(n, t)
        rhs = r1.displacement(n, t) + r3.displacement(n, t)
        np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-15 * np.max(np.abs(lhs)) + 1e-300)


def test_zero_amplitude_gives_zero_response(modified):
    resp = response(modified, 1000.0, sine(262.0, 0.0), 15)
    assert all(term.amplitude == 0.0 for term in resp.terms)


def test_phasors_match_amplitude_phase_form(modified):
    s = sawtooth(262.0, 4)
    xi = np.array([500.0, 1646.0, 4000.0])
    t = np.linspace(0.0, 0.01, 33)
    for n in (1, 3):
        A, ks = mode_phasors(modified, xi, s, n)
        for i, x in enumerate(xi):
            from_phasor = np.imag(np.sum(A[i][:, None] * np.exp(1j * ks[:, None] * t[None, :]), axis=0))
            direct = response(modified, x, s, n).displacement(n, t)
            np.testing.assert_allclose(from_phasor, direct, rtol=0, atol=1e-12 * np.max(np.abs(direct)))


def test_modal_response_validation():
    with pytest.raises(DomainError):
        ModalResponse(100.0, (ModalTerm(1.0, 2, 1.0, 0.0),))
    with pytest.raises(DomainError):
        ModalResponse(100.0, (ModalTerm(1.0, 1, -1.0, 0.0),))


def test_scaled_response_flips_sign(modified):
    resp = response(modified, 1000.0, sine(262.0), 3)
    t = np.linspace(0, 0.01, 20)
    np.testing.assert_allclose(resp.scaled(-2.0).displacement(1, t), -2.0 * resp.displacement(1, t), atol=1e-18)


def test_response_to_json(modified):
    resp = response(modified, 1000.0, sawtooth(262.0, 2), 3)
    payload = json.loads(json.dumps(resp.to_json()))
    assert payload["xi"] == 1000.0
    assert [t["n"] for t in payload["terms"]] == [t.n for t in resp.terms]
    assert payload["terms"][0]["amplitude"] == resp.terms[0].amplitude


def test_max_string_for_drive_a03(modified):
    assert max_string_for_drive(modified, C4, 3) == pytest.approx(C4 / 3, rel=1e-15)
    xi = np.geomspace(C4 / 4, C4 * 4, 100_001)
    R = amplitude_Rn(modified, xi, C4, 1)
    assert xi[np.argmax(R)] == pytest.approx(C4, rel=1e-4)


def test_max_string_for_drive_a01_closed_form():
    a01 = StringLawParams(A_rho=1e-3, k_rho=3.0, A_T=1.0, k_T=3.0, A_gamma=1.0, k_gamma=3.0, ell=1e-3)
    k = TWO_PI * 500.0
    closed = max_string_for_drive(a01, k, 1, "A01")
    assert closed == pytest.approx(math.sqrt(k) * (derive(a01).B_mu**2 + k**2) ** 0.25)
    assert max_string_for_drive(a01, k, 1, None) == pytest.approx(closed, rel=1e-6)


def test_max_string_for_drive_numeric_matches_grid(nobili):
    numeric = max_string_for_drive(nobili, C4, 1)
    xi = np.geomspace(C4 / 4, C4 * 4, 100_000)
    grid_best = xi[np.argmax(amplitude_Rn(nobili, xi, C4, 1))]
    step = math.log(16) / (xi.size - 1)
    assert abs(math.log(numeric / grid_best)) <= 2 * step


def test_max_string_for_drive_errors(modified, nobili):
    with pytest.raises(UndefinedMaximumError):
        max_string_for_drive(modified, C4, 2)
    with pytest.raises(DomainError):
        max_string_for_drive(nobili, C4, 1, "A03")


def test_max_drive_frequency(modified):
    assert max_drive_for_coefficients(ModeCoefficients(xi=300.0, n=3, mu=0.0, nu=1.0)) == 900.0
    xi = 3000.0
    k_max = max_drive_frequency(modified, xi, 1)
    c = mode_coefficients(modified, xi, 1)
    ks = np.linspace(0.5 * k_max, 1.5 * k_max, 20_001)
    R = [steady_amplitude(c, k) for k in ks]
    assert ks[int(np.argmax(R))] == pytest.approx(k_max, rel=1e-4)
    with pytest.raises(UndefinedMaximumError):
        max_drive_frequency(modified, TWO_PI * 3.0, 1)


def test_amplitude_profile_shapes(modified):
    xi = np.geomspace(500, 5000, 64)
    R, phi = amplitude_profile(modified, C4, 1, xi)
    assert R.shape == phi.shape == (64,)
    assert np.all((phi > 0) & (phi < math.pi))


def test_reconstruct_displacement(modified):
    resp = response(modified, 1646.0, sine(262.0), 1)
    t = np.linspace(0.0, 0.01, 25)
    ell = modified.ell
    assert np.all(reconstruct_displacement(modified, resp, 0.0, t) == 0.0)
    assert np.all(reconstruct_displacement(modified, resp, ell, t) == 0.0)
    mid = reconstruct_displacement(modified, resp, ell / 2, t)
    np.testing.assert_allclose(mid, resp.displacement(1, t) * math.sqrt(2 / ell), rtol=1e-14)
    with pytest.raises(DomainError):
        reconstruct_displacement(modified, resp, 2 * ell, t)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_velocity_matches_central_difference(modified, n):
    k = TWO_PI * 262.0
    resp = response(modified, TWO_PI * 400.0, sawtooth(262.0, 4), 5)
    h = 1e-7 * (TWO_PI / k)
    t = np.linspace(0.0, TWO_PI / k, 50)
    numeric = (resp.displacement(n, t + h) - resp.displacement(n, t - h)) / (2.0 * h)
    exact = resp.velocity(n, t)
    assert np.max(np.abs(numeric - exact)) / np.max(np.abs(exact)) < 1e-6
