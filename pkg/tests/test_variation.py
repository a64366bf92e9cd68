from types import SimpleNamespace

import numpy as np
import pytest

from neckmodes.geometry import build_geometry
from neckmodes.green import build_Gn
from neckmodes.grids import GridSpec
from neckmodes.modes import coefficient, random_source, solve_mode_finite
from neckmodes.variation import (EtaBump, VariationError, VariationTensor,
                                 coefficient_perturbed, default_eta,
                                 dun0_identity_residual,
                                 fd_coefficient_derivative, stretch_tensor,
                                 stretched_length, trace_variation,
                                 vanishing_probe)


@pytest.fixture(scope="module")
def geom():
    return build_geometry({"s": 12.0})


@pytest.fixture(scope="module")
def src(geom):
    return random_source("scan", 7, geom, n_list=(1, 3), m_list=(0,))


def test_eta_unit_mass(geom):
    eta = default_eta(geom)
    assert eta.mass_residual() < 1e-10
    T = stretch_tensor(eta, geom)
    rr = np.linspace(*eta.support, 2001)
    mass = np.trapezoid(T.comp("rr", rr) / 2.0, rr)
    assert mass == pytest.approx(1.0, abs=1e-6)


def test_eta_preconditions(geom):
    with pytest.raises(VariationError):
        stretch_tensor(EtaBump(2.0, 1.0), geom)  # sits in the boundary region
    broken = SimpleNamespace(support=(geom.R0 + 1.0, geom.R0 + 3.0),
                             mass_residual=lambda: 1e-6)
    with pytest.raises(VariationError):
        stretch_tensor(broken, geom)


def test_tensor_support_validation(geom, src):
    b = EtaBump(geom.interior_start + 4.0, 1.0)  # overlaps the source zone
    T = VariationTensor(T_rr=lambda r: b(r), support=b.support)
    with pytest.raises(VariationError):
        T.validate(geom, src)
    T2 = VariationTensor(T_rr=lambda r: b(r), support=(2.0, 3.0))
    with pytest.raises(VariationError):
        T2.validate(geom)


def test_zero_tensor_prediction(geom, src):
    G = build_Gn(geom, 1, spec=GridSpec(level=1))
    sol = solve_mode_finite(geom, 1, 0, src, GridSpec(level=1))
    T = VariationTensor(support=(geom.R0 + 1.0, geom.R0 + 2.0))
    assert trace_variation(G, sol, T) == 0


def test_two_bumps_same_first_order(geom, src):
    """Any unit-mass stretch bump produces the same first-order response."""
    t = 1e-3
    resps = []
    for eta in (EtaBump(geom.R0 + 1.5, 1.0), EtaBump(geom.R0 + 4.0, 1.8)):
        T = stretch_tensor(eta, geom)
        up = coefficient_perturbed(geom, 1, 0, src, T, +t, GridSpec(level=1))
        um = coefficient_perturbed(geom, 1, 0, src, T, -t, GridSpec(level=1))
        resps.append((up - um) / (2 * t))
    assert abs(resps[0] - resps[1]) / abs(resps[0]) < 1e-5


def test_stretch_equivalence(geom, src):
    """Solving under the stretched metric equals solving at the new length."""
    eta = default_eta(geom)
    T = stretch_tensor(eta, geom)
    t = 1e-2
    u_T = coefficient_perturbed(geom, 1, 0, src, T, t, GridSpec(level=1))
    s_t = stretched_length(geom, eta, t)
    u_s, _ = coefficient(geom.with_neck_length(s_t), 1, 0, src, GridSpec(level=1))
    assert abs(u_T - u_s) / abs(u_s) < 1e-6


def test_trace_formula_against_fd(geom, src):
    eta = default_eta(geom)
    b = EtaBump(geom.R0 + 2.2, 1.1)
    tensors = [
        stretch_tensor(eta, geom),
        VariationTensor(T_phiphi=lambda r: 3.0 * b(r), support=b.support),
        VariationTensor(T_rr=lambda r: 1.5 * b(r),
                        T_phiphi=lambda r: -2.0 * b(r),
                        T_thetatheta=lambda r: 1.0 * b(r),
                        support=b.support),
    ]
    G = build_Gn(geom, 1, spec=GridSpec(level=2))
    sol = solve_mode_finite(geom, 1, 0, src, GridSpec(level=2))
    for T in tensors:
        pred = trace_variation(G, sol, T)
        fd = fd_coefficient_derivative(geom, 1, 0, src, T, 1e-4, GridSpec(level=1))
        assert abs(pred - fd) / abs(fd) < 1e-3


def test_trace_formula_two_routes(geom, src):
    """Stretch prediction equals -(n/4) u_n0 plus the correction pairing."""
    eta = default_eta(geom)
    for n in (1, 3):
        G = build_Gn(geom, n, spec=GridSpec(level=2))
        sol = solve_mode_finite(geom, n, 0, src, GridSpec(level=2))
        pred = trace_variation(G, sol, stretch_tensor(eta, geom))
        rep = dun0_identity_residual(geom, n, src, eta, G, GridSpec(level=1))
        other = -0.25 * n * rep.u_n0 + rep.rhs
        assert abs(pred - other) / abs(other) < 1e-3


def test_drift_identity_residual(geom, src):
    eta = default_eta(geom)
    G = build_Gn(geom, 1, spec=GridSpec(level=2))
    rep = dun0_identity_residual(geom, 1, src, eta, G, GridSpec(level=1))
    assert rep.residual < 1e-4
    # raw ratio is the 0/0 regime: both sides vanish identically here
    assert abs(rep.rhs) < 1e-10 * abs(rep.u_n0)


def test_drift_identity_zero_source(geom):
    from neckmodes.modes import SourceSpec
    eta = default_eta(geom)
    G = build_Gn(geom, 1, spec=GridSpec(level=1))
    rep = dun0_identity_residual(geom, 1, SourceSpec("z", ()), eta, G,
                                 GridSpec(level=0))
    assert rep.lhs == 0 and rep.rhs == 0 and rep.residual == 0


def test_vanishing_probe(geom, src):
    G = build_Gn(geom, 1, spec=GridSpec(level=1))
    sol = solve_mode_finite(geom, 1, 0, src, GridSpec(level=1))
    window = (geom.R0 + 1.0, geom.R0 + 3.0)
    mass = vanishing_probe((1, G.hat_G), [(1, 0, sol.interp)], geom, window)
    assert mass > 0
    zero_mass = vanishing_probe((1, G.hat_G), [(1, 0, lambda r: np.zeros_like(r))],
                                geom, window)
    assert zero_mass == 0
    # a genuinely constant field is the n = 0 channel with constant profile
    const_mass = vanishing_probe((0, lambda r: np.ones_like(np.asarray(r))),
                                 [(1, 0, sol.interp)], geom, window)
    assert const_mass < 1e-25 * max(mass, 1.0)
    with pytest.raises(VariationError):
        vanishing_probe((1, G.hat_G), [(1, 0, sol.interp)], geom, (1.0, 3.0))
