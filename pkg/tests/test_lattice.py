import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdmlab.lattice import ChainSpec, ProfileSignError, SymTridiag, build_chain, check_sign_definite
from pdmlab.spectral import dense_eig_oracle, lowest_eigenvalues
from pdmlab.symexpr import parse_expr


def uniform_levels(J, N):
    n = np.arange(1, N + 1)
    return np.sort(2 * J * np.cos(n * np.pi / (N + 1)))


def test_three_site_uniform_chain():
    T = build_chain(ChainSpec(3, 1.0, parse_expr("-1")))
    np.testing.assert_array_equal(T.diag, [0, 0, 0])
    np.testing.assert_array_equal(T.off, [-1, -1])
    expected = np.array([-np.sqrt(2), 0.0, np.sqrt(2)])
    np.testing.assert_allclose(uniform_levels(-1, 3), expected, atol=1e-15)
    np.testing.assert_allclose(dense_eig_oracle(T).eigenvalues, expected, atol=1e-14)
    # bracket width tol * w, midpoint returned
    np.testing.assert_allclose(lowest_eigenvalues(T, 3).eigenvalues, expected, atol=0.5e-12 * T.spectral_width())


def test_single_site():
    spec = ChainSpec(1, 0.5, parse_expr("-1"), parse_expr("x^2"))
    T = build_chain(spec)
    assert T.off.size == 0
    np.testing.assert_array_equal(T.diag, [0.25])


def test_linear_profile_sampling():
    spec = ChainSpec(4, 0.1, parse_expr("-(1+x)"))
    T = build_chain(spec)
    xs = 0.1 * np.arange(1, 4)
    np.testing.assert_allclose(T.off, -(1 + xs), rtol=0, atol=1e-15)
    np.testing.assert_allclose(spec.positions(), 0.1 * np.arange(1, 5))
    assert spec.length == pytest.approx(0.5)


@pytest.mark.parametrize("convention,shift", [("left", 0.0), ("right", 1.0), ("midpoint", 0.5)])
def test_conventions(convention, shift):
    a = 0.1
    T = build_chain(ChainSpec(4, a, parse_expr("-(1+x)"), convention=convention))
    xs = a * np.arange(1, 4) + shift * a
    np.testing.assert_allclose(T.off, -(1 + xs), atol=1e-15)


def test_custom_first_site_and_parameters():
    spec = ChainSpec(3, 0.25, parse_expr("-J0*(1+x)"), x1=1.0, params={"J0": 2.0})
    T = build_chain(spec)
    np.testing.assert_allclose(T.off, [-4.0, -4.5])


def test_sign_change_rejected():
    with pytest.raises(ProfileSignError):
        build_chain(ChainSpec(5, 0.2, parse_expr("x - 0.5")))
    with pytest.raises(ProfileSignError):
        check_sign_definite(np.array([1.0, 0.0]))
    assert check_sign_definite(np.array([-1.0, -2.0])) == -1


def test_invalid_specs():
    with pytest.raises(ValueError):
        ChainSpec(0, 1.0, parse_expr("-1"))
    with pytest.raises(ValueError):
        ChainSpec(3, 0.0, parse_expr("-1"))
    with pytest.raises(ValueError):
        ChainSpec(3, 1.0, parse_expr("-1"), convention="centre")
    with pytest.raises(ValueError):
        SymTridiag([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        SymTridiag([1.0, np.inf], [1.0])


def test_symtridiag_is_immutable():
    T = SymTridiag([1.0, 2.0], [3.0])
    with pytest.raises(ValueError):
        T.diag[0] = 5.0
    np.testing.assert_array_equal(T.to_dense(), [[1, 3], [3, 2]])
    np.testing.assert_array_equal(T.matvec(np.array([1.0, 1.0])), [4, 5])
    assert T.gershgorin() == (-2.0, 5.0)


@pytest.mark.parametrize("N", [1, 2, 7, 100, 501])
def test_uniform_chain_closed_form(N):
    J = -0.75
    T = build_chain(ChainSpec(N, 1.0 / (N + 1), parse_expr("-0.75")))
    vals = lowest_eigenvalues(T, N, tol=1e-14).eigenvalues
    np.testing.assert_allclose(vals, uniform_levels(J, N), rtol=0, atol=1e-12)


profiles = st.sampled_from(["-(1+0.2*cos(2*pi*x))", "-(1+x)", "-exp(x)", "-(2+sin(5*x))", "3+x^2"])


@given(profiles, st.integers(1, 40), st.floats(0.01, 0.05))
def test_sign_flip_negates_spectrum(profile, N, a):
    J = parse_expr(profile)
    T = build_chain(ChainSpec(N, a, J))
    F = build_chain(ChainSpec(N, a, -J))
    np.testing.assert_array_equal(F.off, -T.off)
    ev = dense_eig_oracle(T).eigenvalues
    ef = dense_eig_oracle(F).eigenvalues
    np.testing.assert_allclose(np.sort(-ef), ev, rtol=0, atol=1e-12 * max(1.0, T.spectral_width()))


@given(profiles, st.integers(1, 60), st.floats(-5, 5))
def test_constant_onsite_shift(profile, N, c):
    J = parse_expr(profile)
    eps = parse_expr("x^2")
    base = build_chain(ChainSpec(N, 0.02, J, eps))
    moved = build_chain(ChainSpec(N, 0.02, J, eps + c))
    tol = 1e-12
    e0 = lowest_eigenvalues(base, N, tol).eigenvalues
    e1 = lowest_eigenvalues(moved, N, tol).eigenvalues
    width = max(base.spectral_width(), moved.spectral_width())
    np.testing.assert_allclose(e1 - e0, c, rtol=0, atol=2 * tol * width + 4e-16 * abs(c))
