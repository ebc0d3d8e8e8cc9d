from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from platelab import EigenModel, SpectrumFileError, eigenvalue, frac_power_coeff, resonant_mode
from platelab.errors import PlateLabError


def test_power_law_values():
    assert eigenvalue(EigenModel.power_law(1, 2), 3) == 9
    assert eigenvalue(EigenModel.power_law(2, 1), 1) == 2


def test_explicit_list_lookup_and_bounds():
    m = EigenModel.from_list([1.5, 2.5, 10.0])
    assert eigenvalue(m, 2) == 2.5
    with pytest.raises(IndexError):
        eigenvalue(m, 4)
    with pytest.raises(IndexError):
        m.eigenvalues([1, 4])


@pytest.mark.parametrize("n", [0, -1, 1.5])
def test_bad_index(n):
    with pytest.raises(ValueError):
        eigenvalue(EigenModel.power_law(), n)


def test_model_validation():
    with pytest.raises(ValueError):
        EigenModel.power_law(0, 2)
    with pytest.raises(ValueError):
        EigenModel.from_list([])
    with pytest.raises(ValueError):
        EigenModel.from_list([2.0, 1.0])
    with pytest.raises(ValueError):
        EigenModel.from_list([1.0, -1.0])


def test_file_backed(tmp_path):
    p = tmp_path / "eig.txt"
    p.write_text("# spectrum\n1.0\n\n4.0  # second\n9.5\n")
    m = EigenModel.from_file(p)
    assert m.size == 3
    assert m.eigenvalue(3) == 9.5
    assert m.describe() == f"file:{p}"


@pytest.mark.parametrize(
    "text, line",
    [("1.0\nabc\n", 2), ("1.0\n2.0\n2.0\n", 3), ("1\n-3\n", 2), ("# nothing\n", 0)],
)
def test_file_errors_carry_line_numbers(tmp_path, text, line):
    p = tmp_path / "bad.txt"
    p.write_text(text)
    with pytest.raises(SpectrumFileError) as info:
        EigenModel.from_file(p)
    assert info.value.lineno == line
    assert f":{line}:" in str(info.value)


def test_frac_power_examples():
    assert frac_power_coeff(16, 0.5) == pytest.approx(4, rel=1e-15)
    assert frac_power_coeff(9, 0) == 1
    # oracle: fourth root of 100^3
    assert frac_power_coeff(100, 0.75) == pytest.approx(31.622776601683793, rel=1e-14)
    with pytest.raises(ValueError):
        frac_power_coeff(0.0, 1)
    with pytest.raises(ValueError):
        frac_power_coeff(np.array([1.0, -2.0]), 1)


@settings(max_examples=300, deadline=None)
@given(
    st.floats(1e-6, 1e8),
    st.floats(-3, 3),
    st.floats(-3, 3),
)
def test_frac_power_exponent_law(eta, r1, r2):
    lhs = frac_power_coeff(eta, r1 + r2)
    rhs = frac_power_coeff(eta, r1) * frac_power_coeff(eta, r2)
    assert abs(lhs - rhs) <= 1e-12 * rhs * max(1.0, abs(math.log(eta)))


def test_resonant_mode_examples():
    m = EigenModel.power_law()
    assert resonant_mode(m, 100, 0) == 10
    # oracle: exhaustive scan of |lam^2 (1 + eta) - eta^2| over n <= 50 gives 10
    assert resonant_mode(m, 10, 1) == 10
    assert resonant_mode(m, 0.5, 0) == 1


def test_resonant_mode_errors():
    m = EigenModel.power_law()
    with pytest.raises(ValueError):
        resonant_mode(m, 0.0, 0)
    with pytest.raises(PlateLabError):
        resonant_mode(m, 3.0, 0, n_max=0)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(0.3, 3),
    st.floats(0.5, 3),
    st.floats(0.01, 300),
    st.sampled_from([0.0, 0.3, 1.0, 4.0]),
    st.integers(1, 10_000),
)
def test_resonant_mode_is_global_minimiser(c, p, lam, omega, n_max):
    m = EigenModel.power_law(c, p)
    ns = np.arange(1, n_max + 1)
    eta = m.eigenvalues(ns)
    mismatch = np.abs(lam * lam * (1 + omega * eta) - eta * eta)
    best = int(ns[np.argmin(mismatch)])
    got = resonant_mode(m, lam, omega, n_max=n_max)
    assert mismatch[got - 1] == mismatch[best - 1]
    assert got == best


def test_resonant_mode_on_list_with_repeats():
    m = EigenModel.from_list([1.0, 2.0, 2.0, 5.0, 30.0])
    eta = np.array(m.values)
    for lam in [0.3, 1.4, 2.0, 3.3, 5.0, 11.0, 100.0]:
        mis = np.abs(lam**2 - eta**2)
        assert resonant_mode(m, lam, 0) == int(np.argmin(mis)) + 1


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.2, 4), st.lists(st.integers(1, 10**9), min_size=2, max_size=30))
def test_monotone(c, p, ns):
    m = EigenModel.power_law(c, p)
    ns = sorted(ns)
    vals = m.eigenvalues(ns)
    assert np.all(np.diff(vals) >= 0)


def test_first_index_at_least():
    m = EigenModel.power_law()
    assert m.first_index_at_least(100.0) == 10
    assert m.first_index_at_least(100.5) == 11
    assert m.first_index_at_least(0.5) == 1
    lst = EigenModel.from_list([1.0, 3.0, 7.0])
    assert lst.first_index_at_least(3.0) == 2
    assert lst.first_index_at_least(100.0) == 3
