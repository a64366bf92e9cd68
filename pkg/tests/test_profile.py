import numpy as np
import pytest
import scipy.integrate as si

from neckmodes.profile import NeckProfile, ProfileError, smoothstep, smoothstep_integral


@pytest.fixture(scope="module")
def prof():
    return NeckProfile()


def test_identity_zone(prof):
    val, d1, d2 = prof.eval(0.5)
    assert val == pytest.approx(0.5, abs=0)
    assert d1 == pytest.approx(1.0, abs=0)
    assert d2 == 0.0


def test_flat_zone(prof):
    # anywhere past the transition, in particular R0 + 3
    val, d1, d2 = prof.eval(prof.R0 + 3.0)
    assert val == 2.0
    assert d1 == 0.0
    assert d2 == 0.0


def test_midpoint_between_zones(prof):
    r = (prof.r_a + prof.R0) / 2.0
    val, d1, _ = prof.eval(r)
    assert 1.0 < val < 2.0
    assert 0.0 < d1 <= 1.0
    # cross-check monotonicity around the midpoint by dense sampling
    rr = np.linspace(prof.r_a, prof.flat_start, 2001)
    assert np.all(np.diff(prof.value(rr)) >= 0)


def test_invariants_dense(prof):
    rr = np.linspace(1e-9, prof.R0 + 8.0, 20001)
    vals = prof.value(rr)
    assert np.all(vals > 0)
    assert np.all(vals <= 2.0)
    assert np.all(np.diff(vals) >= 0)
    assert np.all(vals[rr >= prof.R0] == 2.0)


def test_smoothness_c4_proxy(prof):
    # second derivative continuous: finite differences of deriv match
    # second_deriv through both joints
    rr = np.linspace(0.5, 3.5, 6001)
    d1 = prof.deriv(rr)
    fd2 = np.gradient(d1, rr)
    assert np.max(np.abs(fd2 - prof.second_deriv(rr))[5:-5]) < 5e-6
    # the step itself has four vanishing derivatives at the ends
    for t in (0.0, 1.0):
        eps = 1e-3
        inner = smoothstep(np.array([t + (eps if t == 0 else -eps)]))[0]
        ref = 0.0 if t == 0.0 else 1.0
        assert abs(inner - ref) < eps**5 * 200


def test_negative_radius_rejected(prof):
    with pytest.raises(ProfileError):
        prof.value(-0.1)
    with pytest.raises(ProfileError):
        prof.eval(np.array([0.5, -1.0]))


def test_construction_errors():
    with pytest.raises(ProfileError):
        NeckProfile(r_a=2.5)
    with pytest.raises(ProfileError):
        NeckProfile(r_a=1.0, R0=3.0, margin=0.5)  # transition does not fit
    with pytest.raises(ProfileError):
        NeckProfile(margin=-1.0)


def test_inverse_integral_matches_quadrature(prof):
    for a, b in [(1.3, 2.7), (0.2, 0.9), (1.0, 4.0), (2.0, 9.0)]:
        ref, _ = si.quad(lambda r: 1.0 / prof.value(r), a, b, limit=200)
        assert prof.inv_integral(a, b) == pytest.approx(ref, rel=1e-8, abs=1e-9)


def test_step_integral_consistency():
    t = np.linspace(-0.5, 1.5, 401)
    dt = t[1] - t[0]
    num = np.cumsum(smoothstep(t)) * dt
    ref = smoothstep_integral(t) - smoothstep_integral(t[0])
    assert np.max(np.abs(num - ref)) < 5e-3


def test_log_growth_identity_zone(prof):
    rr = np.array([0.1, 0.25, 0.5, 1.0])
    for n in (1, 3):
        assert np.allclose(prof.log_growth(n, rr), 0.5 * n * np.log(rr), rtol=1e-14)
