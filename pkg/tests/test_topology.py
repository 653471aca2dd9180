import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bloch_topo.errors import GapClosed
from bloch_topo.topology import (
    TwoBandModel,
    chern_link_variable,
    curvature_trace,
    numeric_twoband_curvature,
    projector_frame,
    twoband_curvature,
    twoband_curvature_closed_form,
    twoband_disk_closed_form,
    twoband_disk_integral,
    twoband_tail,
    unit_model_curvature,
)

from conftest import DELTA_SHARP


@pytest.fixture(scope="module")
def model(dirac):
    return TwoBandModel.from_dirac(dirac, 0.01)


def test_unit_model_total_flux():
    # (1/2pi) * int 2 pi rho B(rho) drho over the plane = -1/2
    rho = np.linspace(0, 400, 400001)
    B = np.array([unit_model_curvature(np.array([r, 0.0])) for r in rho[::1000]])
    assert B[0] == pytest.approx(-0.5)
    total = np.trapezoid(rho * (-0.5 / (1 + rho**2) ** 1.5), rho)
    assert total == pytest.approx(-0.5, abs=2e-3)


@given(st.floats(-0.05, 0.05), st.floats(-0.05, 0.05),
       st.floats(0.3, 3), st.floats(-3, 3), st.floats(0.005, 0.2), st.sampled_from([1, -1]))
@settings(max_examples=60)
def test_twoband_curvature_oracles(dx, dy, theta, phase, delta, s):
    m = TwoBandModel(9.0, s * theta, 3.8 * np.exp(1j * phase), delta, (0.1, 0.2))
    xi = np.array([0.1 + dx, 0.2 + dy])
    a = twoband_curvature(m, xi)
    assert a == pytest.approx(twoband_curvature_closed_form(m, xi), rel=1e-10)
    h = 1e-4 * m.delta * m.theta_F / m.nu_F
    assert a == pytest.approx(numeric_twoband_curvature(m, xi, h=h), rel=1e-5)
    assert np.sign(a) == -s


def test_model_matrix_spectrum(model, dirac):
    xi = dirac.xi_star + np.array([0.01, -0.02])
    w = np.linalg.eigvalsh(model.matrix(xi))
    assert np.allclose(w, model.eigenvalues(xi))


def test_pullback_normalises_the_cone(model):
    eta = np.array([0.3, -1.2])
    xi = model.pullback(eta)
    assert model.r(xi) == pytest.approx(model.delta * model.theta_F * np.sqrt(1 + eta @ eta))


@pytest.mark.parametrize("eps1", [0.001, 0.02, 0.3])
def test_disk_integral_matches_closed_form(model, eps1):
    val = twoband_disk_integral(model, eps1)
    assert val == pytest.approx(twoband_disk_closed_form(model, eps1), abs=1e-9)
    assert abs(val + 0.5 * np.sign(model.theta_star)) <= twoband_tail(model, eps1) + 1e-9


def test_twoband_curvature_matches_full_operator_near_k(V, A, dirac):
    delta = 0.02
    m = TwoBandModel.from_dirac(dirac, delta)
    xi = dirac.xi_star + np.array([0.004, 0.003])
    full = curvature_trace(V, A, delta, 1, 1, xi, h=1e-5)
    assert full == pytest.approx(twoband_curvature(m, xi), rel=0.05)


def test_projector_frame_refuses_closed_gap(V, A, dirac):
    with pytest.raises(GapClosed):
        projector_frame(V, A, 0.0, 1, 1, dirac.xi_star)


def test_chern_signs_and_negated_field(V, A):
    from bloch_topo.fields import canonical_vector_potential

    d = 0.5 * DELTA_SHARP
    assert chern_link_variable(V, A, d, "+", 1, 12).chern == -1
    assert chern_link_variable(V, A, d, "-", 1, 12).chern == 1
    assert chern_link_variable(V, canonical_vector_potential(-1.0), d, "+", 1, 12).chern == 1


def test_link_curvature_sums_to_chern(V, A):
    g = chern_link_variable(V, A, 0.5 * DELTA_SHARP, 1, 1, 12)
    from bloch_topo.lattice import TWO_PI, build_honeycomb_lattice

    cell = (TWO_PI / 12) ** 2 * abs(np.linalg.det(build_honeycomb_lattice().dual_matrix))
    assert np.sum(g.values) * cell / TWO_PI == pytest.approx(g.chern, abs=1e-9)


@given(st.floats(-0.05, 0.05), st.floats(-0.05, 0.05))
@settings(max_examples=30)
def test_two_bundles_sum_to_zero(dx, dy):
    m = TwoBandModel(9.0, 2.2, -3.3 - 1.9j, 0.02)
    xi = np.array([dx, dy])
    assert twoband_curvature(m, xi, "lower") == pytest.approx(-twoband_curvature(m, xi, "upper"))
    h = 1e-4 * m.delta * m.theta_F / m.nu_F
    lo = numeric_twoband_curvature(m, xi, h=h)
    up = numeric_twoband_curvature(m, xi, h=h, band="upper")
    assert abs(lo + up) < 1e-6 * abs(lo)
