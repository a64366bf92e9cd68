import numpy as np
import pytest

from neckmodes.basis import (BasisError, ResponseMatrix, assemble_V,
                             assemble_V_tilde, construct_omega_s,
                             normalize_basis, seeded_source_family,
                             solve_unit_v30)
from neckmodes.geometry import build_geometry
from neckmodes.green import Cn_constant
from neckmodes.grids import GridSpec
from neckmodes.modes import (Bump, SourceSpec, coefficient,
                             cylinder_coefficient, random_source)

SPEC = GridSpec(level=1)


@pytest.fixture(scope="module")
def geom():
    return build_geometry({"s": 10.0})


@pytest.fixture(scope="module")
def sources(geom):
    return seeded_source_family(geom, seed=42)


def test_assemble_V_shape_and_det(geom, sources):
    V = assemble_V(sources, geom, SPEC)
    assert V.matrix.shape == (2, 2)
    assert abs(V.scaled_det()) > 1e-8


def test_wrong_source_count(geom, sources):
    with pytest.raises(BasisError):
        assemble_V(sources[:1], geom, SPEC)


def test_duplicated_source_singular(geom, sources):
    V = assemble_V([sources[0], sources[0]], geom, SPEC)
    assert abs(V.scaled_det()) < 1e-12
    with pytest.raises(BasisError):
        normalize_basis(V)


def test_normalize_identity_passthrough(sources):
    V = ResponseMatrix(np.eye(2), sources, 1)
    nb = normalize_basis(V)
    assert np.array_equal(nb.coeff_matrix, np.eye(2))


def test_normalize_diagonal(sources):
    V = ResponseMatrix(np.diag([2.0, 1.0]), sources, 1)
    nb = normalize_basis(V)
    assert np.allclose(nb.coeff_matrix, np.diag([0.5, 1.0]))


def test_normalize_roundtrip(geom, sources):
    nb = normalize_basis(assemble_V(sources, geom, SPEC))
    V2 = assemble_V(nb.sources, geom, SPEC)
    assert np.max(np.abs(V2.matrix - np.eye(2))) < 1e-10


def test_response_linearity(geom, sources):
    a, b = 1.7 - 0.4j, -0.6 + 2.1j
    combo = sources[0].scaled(a).plus(sources[1].scaled(b))
    lhs = cylinder_coefficient(geom, 1, 0, combo, SPEC, richardson=False)
    rhs = (a * cylinder_coefficient(geom, 1, 0, sources[0], SPEC, richardson=False)
           + b * cylinder_coefficient(geom, 1, 0, sources[1], SPEC, richardson=False))
    assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


def test_v_tilde_pipeline(geom, sources):
    extra = random_source("extra", 999, geom, n_list=(1, 3), m_list=(0,))
    Vt = assemble_V_tilde(sources, extra, geom, k_end=0, spec=SPEC)
    assert Vt.matrix.shape == (3, 3)
    w = solve_unit_v30(Vt)
    assert abs(cylinder_coefficient(geom, 1, 0, w, SPEC)) < 1e-8
    v30 = cylinder_coefficient(geom, 3, 0, w, SPEC)
    assert v30.real == pytest.approx(1.0, abs=1e-8)


def test_v_tilde_dependent_extra_singular(geom, sources):
    # extra source in the span of the family: augmented matrix singular
    Vt = assemble_V_tilde(sources, sources[1].scaled(2.0), geom, k_end=0, spec=SPEC)
    with pytest.raises(BasisError):
        solve_unit_v30(Vt)


def test_construct_omega_s(geom, sources):
    sigma = random_source("sigma", 12, geom, n_list=(1, 3), m_list=(0,))
    omega, rep = construct_omega_s(sigma, sources, geom, SPEC)
    u1_sigma, _ = coefficient(geom, 1, 0, sigma, SPEC)
    assert max(rep.a2_residuals) / abs(u1_sigma) < 1e-10
    assert min(abs(v) for v in rep.v30) > 1e-6
    assert not rep.degenerate


def test_construct_omega_degenerate(geom, sources):
    sigma = sources[0].scaled(2.0)
    omega, rep = construct_omega_s(sigma, sources, geom, SPEC)
    assert rep.degenerate


def test_finite_to_cylinder_consistency(geom, sources):
    """Finite-neck responses equal the cylinder ones after the exact rescaling.

    The separable geometry transports the dominant channel without
    reflection, so agreement holds at the solver floor uniformly in s,
    strictly stronger than the e^{-s/4} convergence envelope.
    """
    c1 = Cn_constant(geom, 1)
    for s in (8.0, 16.0):
        g = geom.with_neck_length(s)
        u, _ = coefficient(g, 1, 0, sources[0], SPEC)
        v = cylinder_coefficient(geom, 1, 0, sources[0], SPEC)
        assert abs(u * np.exp(0.25 * s) - c1 * v) / abs(c1 * v) < 1e-6


def test_p2_matrix(geom):
    g2 = build_geometry({"p": 2, "s": 8.0})
    sources = seeded_source_family(g2, seed=21)
    assert len(sources) == 4
    V = assemble_V(sources, g2, SPEC)
    assert V.matrix.shape == (4, 4)
    assert abs(V.scaled_det()) > 1e-8
    nb = normalize_basis(V)
    V2 = assemble_V(nb.sources, g2, SPEC)
    assert np.max(np.abs(V2.matrix - np.eye(4))) < 1e-10
