import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bloch_topo.fields import (
    FourierField,
    canonical_potential,
    canonical_vector_potential,
    evaluate,
    symmetrize,
    symmetry_residuals,
    zero_field,
)
from bloch_topo.lattice import ROTATION

xs = st.floats(-5, 5, allow_nan=False)


def test_potential_peak_value(V):
    assert evaluate(V, np.zeros(2)) == pytest.approx(30.0)


@given(xs, xs)
def test_potential_even_and_rotation_invariant(x, y):
    V = canonical_potential(10.0)
    p = np.array([x, y])
    v = evaluate(V, p)
    assert evaluate(V, -p) == pytest.approx(v, abs=1e-12)
    assert evaluate(V, ROTATION @ p) == pytest.approx(v, abs=1e-11)


@given(xs, xs)
def test_vector_potential_odd_and_rotation_covariant(x, y):
    A = canonical_vector_potential(1.0)
    p = np.array([x, y])
    a = evaluate(A, p)
    assert np.allclose(evaluate(A, -p), -a, atol=1e-12)
    assert np.allclose(evaluate(A, ROTATION @ p), ROTATION @ a, atol=1e-11)


def test_vector_potential_divergence_free(A, geometry):
    for m, c in A.coeffs.items():
        assert abs(np.dot(geometry.wavevector(m), c)) < 1e-12


def test_amplitude_scales_linearly():
    a = canonical_vector_potential(2.5)
    b = canonical_vector_potential(1.0).scaled(2.5)
    for m in a.coeffs:
        assert np.allclose(a.coeff(m), b.coeff(m))


def test_zero_amplitude_rejected():
    with pytest.raises(ValueError):
        canonical_potential(0.0)
    with pytest.raises(ValueError):
        canonical_vector_potential(0.0)


def test_json_round_trip(tmp_path, V, A):
    for f in (V, A):
        p = tmp_path / "f.json"
        f.save(p)
        g = FourierField.load(p)
        assert g.kind == f.kind and g.symmetry == f.symmetry
        assert set(g.coeffs) == set(f.coeffs)
        for m in f.coeffs:
            assert np.allclose(g.coeff(m), f.coeff(m))
        json.loads(p.read_text())


def test_lookup_is_zero_off_support(V):
    dm = np.array([[1, 0], [5, 5], [-1, -1], [0, 0]])
    out = V.lookup(dm)
    assert out[0] == pytest.approx(5.0) and out[2] == pytest.approx(5.0)
    assert out[1] == 0 and out[3] == 0


def test_complex_field_is_not_real():
    f = FourierField("scalar", {(1, 0): 1.0})
    with pytest.raises(ValueError):
        evaluate(f, np.array([0.1, 0.2]))


@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3),
                          st.floats(-2, 2), st.floats(-2, 2)), min_size=1, max_size=6))
def test_symmetrize_is_idempotent_projection(entries):
    f = FourierField("scalar", {(a, b): complex(re, im) for a, b, re, im in entries})
    g = symmetrize(f, "honeycomb-even")
    r = symmetry_residuals(g)
    assert r["reality"] < 1e-12 and r["even"] < 1e-12 and r["rotation"] < 1e-12
    h = symmetrize(g, "honeycomb-even")
    for m in set(g.coeffs) | set(h.coeffs):
        assert abs(g.coeff(m) - h.coeff(m)) < 1e-12


def test_symmetrize_odd_vector(A):
    g = symmetrize(A, "odd-periodic")
    for m in A.coeffs:
        assert np.allclose(g.coeff(m), A.coeff(m))
    assert symmetry_residuals(g)["odd"] < 1e-14


def test_zero_field():
    assert zero_field("vector2").is_zero()
