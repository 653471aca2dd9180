import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bloch_topo.dirac1d import (
    DiracFamilyConfig,
    assemble_dirac,
    derivative_matrix,
    dirac_branches,
    dirac_flow,
    dirac_node,
)
from bloch_topo.errors import ConfigInvalid


@pytest.fixture(scope="module")
def family(dirac, zigzag):
    return DiracFamilyConfig.from_dirac(dirac, zigzag)


def test_derivative_symbol_on_fourier_modes():
    cfg = DiracFamilyConfig(1.0, 1.0, 0.0, Td=10.0, Nd=32)
    D = derivative_matrix(cfg)
    t = cfg.grid()
    for p in (1, 5, -7):
        k = np.pi * p / cfg.Td
        e = np.exp(1j * k * t)
        assert np.allclose(D @ e, k * e, atol=1e-10)
    assert np.allclose(D, D.conj().T)


@given(st.floats(-3, 3), st.floats(0.2, 3), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
@settings(max_examples=25, deadline=None)
def test_constant_mass_spectrum_is_exact(mu, theta, pa, pb):
    """kappa = 1: eigenvalues +-sqrt(theta^2 + |a p + b mu|^2) over the grid momenta p."""
    cfg = DiracFamilyConfig(theta, 3.0 * np.exp(1j * pa), 2.0 * np.exp(1j * pb), Td=10.0, Nd=32)
    w = np.linalg.eigvalsh(assemble_dirac(cfg, mu, kappa=1.0))
    p = np.pi / cfg.Td * np.fft.fftfreq(cfg.Nd, 1.0 / cfg.Nd)
    r = np.sqrt(theta**2 + np.abs(cfg.nu_kprime * p + cfg.nu_ell * mu) ** 2)
    assert np.allclose(w, np.sort(np.concatenate([-r, r])), atol=1e-9)
    # sqrt(theta^2 + mu^2 |b_perp|^2) is the minimum over all real momenta
    assert np.min(r) >= cfg.gap_window(mu) - 1e-9


def test_gap_window_bounds(family):
    assert family.gap_window(0.0) == pytest.approx(family.theta_F)
    assert family.gap_window(2.0) <= family.gap_window_literal(2.0)
    assert family.ell_perp() > 0


def test_zero_modes_at_mu_zero(family):
    nd = dirac_node(family, 0.0, window=0.1)
    assert sorted(nd.tags) == ["antikink", "kink"]
    assert np.allclose(nd.values, 0.0, atol=1e-6)


def test_kink_branch_slope(family):
    # the kink branch is the chiral line -nu_F |l_perp| mu (sign set by theta)
    v = []
    for mu in (-0.5, 0.5):
        nd = dirac_node(family, mu)
        v.append(nd.values[nd.tags.index("kink")])
    assert (v[1] - v[0]) == pytest.approx(-family.ell_perp(), rel=1e-3)


def test_flow_per_kink_and_total(family):
    assert dirac_flow(family, 32, "kink") == -1
    assert dirac_flow(family, 32, "antikink") == 1
    assert dirac_branches(family, 32, tag=None).flow == 0


def test_flow_negates_with_theta(dirac, zigzag):
    neg = DiracFamilyConfig.from_dirac(dirac, zigzag, sign=-1)
    assert dirac_flow(neg, 32) == 1


def test_validation():
    with pytest.raises(ConfigInvalid):
        DiracFamilyConfig(1.0, 1.0, 1.0, Td=5.0)
    with pytest.raises(ConfigInvalid):
        DiracFamilyConfig(1.0, 1.0, 1.0, Nd=33)
    with pytest.raises(ConfigInvalid):
        DiracFamilyConfig(0.0, 1.0, 1.0)
    with pytest.raises(ConfigInvalid):
        dirac_flow(DiracFamilyConfig(1.0, 1.0, 1.0), 31)


def test_spectrum_symmetric_at_mu_zero(family):
    w = np.linalg.eigvalsh(assemble_dirac(family, 0.0))
    assert np.allclose(w, -w[::-1], atol=1e-8)


def test_nd_doubling_leaves_in_gap_values(family):
    from dataclasses import replace

    a = dirac_node(family, 0.7)
    b = dirac_node(replace(family, Nd=2 * family.Nd), 0.7)
    assert len(a.values) == len(b.values)
    assert np.allclose(a.values, b.values, atol=1e-6)


@pytest.mark.parametrize("mu", [0.0, 1.5, -3.0])
def test_constant_mass_gap_matches_window(family, mu):
    for kappa in (1.0, -1.0):
        w = np.linalg.eigvalsh(assemble_dirac(family, mu, kappa=kappa))
        edge = np.min(np.abs(w))
        assert edge == pytest.approx(family.gap_window(mu), rel=1e-2)


def test_short_mu_range_is_flagged(family):
    from dataclasses import replace

    from bloch_topo.errors import BranchAmbiguity

    with pytest.raises(BranchAmbiguity):
        dirac_branches(replace(family, mu_max=0.2), 16)
