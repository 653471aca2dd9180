import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bloch_topo.bloch import PlaneWaveBasis, bloch_eigen
from bloch_topo.dirac_point import (
    OMEGA,
    DiracPointData,
    cone_fit,
    dirac_gap,
    extract,
    find_degenerate_pair,
    rotation_eigen_residuals,
    velocity_element,
    w_matrix_elements,
)
from bloch_topo.errors import MultiplicityError, NotDegenerate
from bloch_topo.fields import canonical_potential, canonical_vector_potential, zero_field

# Frozen at cutoff_box 6; the cutoff-9 run below is the independent check.
E_STAR = 9.25708753
THETA_STAR = 2.22568145833
NU_F = 3.82404347554


def test_frozen_values(dirac):
    assert dirac.n == 1
    assert dirac.E_star == pytest.approx(E_STAR, abs=1e-8)
    assert dirac.theta_star == pytest.approx(THETA_STAR, abs=1e-9)
    assert dirac.nu_F == pytest.approx(NU_F, abs=1e-9)


def test_values_stable_under_larger_cutoff(V, A, dirac):
    big = extract(V, A, cutoff_box=9)
    assert big.E_star == pytest.approx(dirac.E_star, abs=1e-7)
    assert big.theta_star == pytest.approx(dirac.theta_star, abs=1e-7)
    assert big.nu_F == pytest.approx(dirac.nu_F, abs=1e-7)


def test_e_star_is_a_double_eigenvalue(V, A, dirac):
    w = bloch_eigen(V, A, dirac.xi_star, 0.0, 1, 4)
    assert abs(w[1] - w[0]) < 1e-9 and w[2] - w[1] > 1.0
    assert w[0] == pytest.approx(dirac.E_star, abs=1e-9)


def test_frame_is_rotation_eigenbasis(dirac):
    F = dirac.frame()
    assert np.allclose(F.conj().T @ F, np.eye(2), atol=1e-12)
    r1, r2 = rotation_eigen_residuals(dirac)
    assert r1 < 1e-10 and r2 < 1e-10
    assert abs(OMEGA**3 - 1) < 1e-15


def test_w_matrix_is_diag_theta_minus_theta(dirac, A):
    W = w_matrix_elements(dirac, A)
    assert np.allclose(W, np.diag([dirac.theta_star, -dirac.theta_star]), atol=1e-9)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_velocity_element_is_linear_in_eta(e1, e2):
    d = _cached()
    got = velocity_element(d, (e1, e2))
    assert abs(got - d.nu_star * complex(e1, e2)) < 1e-9 * (1 + abs(got))


_CACHE = {}


def _cached():
    # hypothesis tests cannot take function-scoped fixtures
    if "d" not in _CACHE:
        _CACHE["d"] = extract(canonical_potential(10.0), canonical_vector_potential(1.0))
    return _CACHE["d"]


def test_b_point_has_same_constants(V, A, dirac):
    b = extract(V, A, which="B-point")
    assert b.E_star == pytest.approx(dirac.E_star, abs=1e-8)
    assert b.theta_star == pytest.approx(dirac.theta_star, abs=1e-8)
    assert b.nu_F == pytest.approx(dirac.nu_F, abs=1e-8)


def test_negated_vector_potential_negates_theta(V, dirac):
    d = extract(V, canonical_vector_potential(-1.0))
    assert d.theta_star == pytest.approx(-dirac.theta_star, abs=1e-9)
    assert d.nu_F == pytest.approx(dirac.nu_F, abs=1e-9)


def test_zero_potential_has_triple_degeneracy(A):
    with pytest.raises(MultiplicityError):
        extract(zero_field(), A)


def test_find_degenerate_pair_errors():
    with pytest.raises(NotDegenerate):
        find_degenerate_pair(np.array([0.0, 1.0, 2.0]))
    assert find_degenerate_pair(np.array([0.0, 1.0, 1.0, 3.0])) == 2


def test_gap_opens_linearly(V, A, dirac):
    d = 1e-3
    assert dirac_gap(V, A, dirac, d) == pytest.approx(2 * d * dirac.theta_F, rel=1e-5)


def test_cone_slope_matches_nu_f(V, A, dirac):
    s, c = cone_fit(V, A, dirac, [0.005, 0.01], n_angles=6)
    assert s == pytest.approx(dirac.nu_F, rel=1e-3)
    assert np.isfinite(c)


def test_json_round_trip(tmp_path, dirac):
    p = tmp_path / "d.json"
    dirac.save(p)
    e = DiracPointData.load(p)
    assert e.E_star == dirac.E_star and e.nu_star == dirac.nu_star
    assert np.array_equal(e.phi1, dirac.phi1)
    assert np.array_equal(e.basis.indices, dirac.basis.indices)


def test_explicit_basis(V, A, geometry, dirac):
    b = PlaneWaveBasis.default(center=geometry.xiA, cutoff_box=6)
    assert extract(V, A, basis=b).theta_star == pytest.approx(dirac.theta_star)
