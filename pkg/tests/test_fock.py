import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from micromaser.errors import InvalidParameterError
from micromaser.fock import (
    DensityMatrix,
    dephased_coherent_state,
    diagnostics,
    ensure_headroom,
    fock_state,
    photon_distribution,
    thermal_state,
    truncate,
)


def assert_valid(rho):
    m = rho.elements
    assert np.max(np.abs(m - m.conj().T)) <= 1e-12
    assert abs(np.trace(m).real - 1) <= 1e-10
    assert rho.min_eigenvalue() >= -1e-8
    assert rho.tail_mass() <= rho.tail_tol


class TestThermal:
    def test_vacuum_limit(self):
        rho = thermal_state(0.0)
        assert rho.elements[0, 0] == 1.0
        assert diagnostics(rho).purity_deficit == 0.0

    def test_ground_population(self):
        assert thermal_state(10.0).elements[0, 0].real == pytest.approx(1 / 11, abs=1e-10)

    def test_purity_deficit_closed_form(self):
        assert diagnostics(thermal_state(10.0)).purity_deficit == pytest.approx(1 - 1 / 21, abs=1e-10)

    def test_off_diagonals_zero_and_trace_exact(self):
        rho = thermal_state(5.0)
        m = rho.elements
        assert np.all(m[~np.eye(rho.dim, dtype=bool)] == 0)
        assert abs(np.trace(m).real - 1) < 1e-14

    def test_mandel_q(self):
        assert diagnostics(thermal_state(10.0)).mandel_q == pytest.approx(10.0, abs=1e-5)

    def test_distribution_monotone(self):
        p = [v for _, v in photon_distribution(thermal_state(10.0))]
        assert all(a > b for a, b in zip(p, p[1:]))

    @pytest.mark.parametrize("bad", [-1.0, float("nan"), float("inf")])
    def test_rejects_bad_mean(self, bad):
        with pytest.raises(InvalidParameterError):
            thermal_state(bad)


class TestDephasedCoherent:
    def test_vacuum(self):
        assert dephased_coherent_state(0.0).elements[0, 0] == 1.0

    def test_poissonian(self):
        d = diagnostics(dephased_coherent_state(10.0))
        assert abs(d.mandel_q) < 1e-9
        assert d.mean_n == pytest.approx(10.0, abs=1e-7)

    def test_purity_deficit(self):
        # 1 - exp(-2 mu) I_0(2 mu) at mu = 10, from scipy.special.i0e and mpmath
        assert diagnostics(dephased_coherent_state(10.0)).purity_deficit == pytest.approx(0.910219688115174, abs=1e-10)

    def test_rejects_negative(self):
        with pytest.raises(InvalidParameterError):
            dephased_coherent_state(-0.5)


class TestFockState:
    def test_vacuum_pure(self):
        assert diagnostics(fock_state(0, 4)).purity_deficit == 0.0

    def test_one_photon(self):
        d = diagnostics(fock_state(1, 4))
        assert d.mean_n == 1.0 and d.mandel_q == -1.0

    def test_outside_basis(self):
        with pytest.raises(InvalidParameterError):
            fock_state(3, 2)

    def test_five(self):
        d = diagnostics(fock_state(5, 10))
        assert d.purity_deficit == 0.0 and d.mean_n == 5.0


def test_vacuum_mandel_q_undefined():
    assert diagnostics(fock_state(0, 3)).mandel_q is None


def test_vacuum_distribution():
    p = photon_distribution(fock_state(0, 5))
    assert p[0] == (0, 1.0)
    assert all(v == 0 for _, v in p[1:])


@pytest.mark.parametrize("nbar", [0.5, 1.0, 5.0, 10.0])
def test_closed_form_purity(nbar):
    assert diagnostics(thermal_state(nbar)).purity_deficit == pytest.approx(1 - 1 / (2 * nbar + 1), abs=1e-10)


@pytest.mark.parametrize("make", [thermal_state, dephased_coherent_state])
@pytest.mark.parametrize("nbar", [0.0, 0.3, 2.0, 10.0, 32.0])
def test_constructors_emit_valid_states(make, nbar):
    rho = make(nbar)
    assert_valid(rho)
    p = np.array([v for _, v in photon_distribution(rho)])
    assert p.min() >= -1e-12
    assert p.sum() == pytest.approx(1.0, abs=1e-10)


class TestHeadroom:
    def test_extend(self):
        rho = fock_state(2, 10)
        big = ensure_headroom(rho, 5)
        assert big.dim == 15
        assert np.trace(big.elements) == np.trace(rho.elements)

    def test_zero_extra_identity(self):
        rho = thermal_state(1.0)
        assert ensure_headroom(rho, 0) is rho

    def test_round_trip(self):
        rho = thermal_state(10.0)
        back = truncate(ensure_headroom(rho, 7), rho.dim)
        assert np.array_equal(back.elements, rho.elements)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.0, 20.0), st.integers(1, 40))
    def test_diagnostics_basis_independent(self, nbar, extra):
        rho = thermal_state(nbar)
        a, b = diagnostics(rho), diagnostics(ensure_headroom(rho, extra))
        assert abs(a.purity_deficit - b.purity_deficit) <= 1e-12
        assert abs(a.mean_n - b.mean_n) <= 1e-12
        assert abs(a.variance_n - b.variance_n) <= 1e-12


def test_truncate_refuses_to_drop_mass():
    with pytest.raises(InvalidParameterError):
        truncate(thermal_state(10.0), 20)


class TestInvariantChecks:
    def test_non_hermitian(self):
        m = np.diag([1.0, 0, 0, 0]).astype(complex)
        m[0, 1] = 0.1
        with pytest.raises(InvalidParameterError):
            DensityMatrix(m)

    def test_trace(self):
        with pytest.raises(InvalidParameterError):
            DensityMatrix(np.diag([0.5, 0, 0, 0]))

    def test_tail(self):
        with pytest.raises(InvalidParameterError):
            DensityMatrix(np.diag([0.5, 0, 0, 0.5]))

    def test_negative_eigenvalue_caught_by_validate(self):
        m = np.diag([1.2, -0.2, 0, 0, 0]).astype(complex)
        with pytest.raises(InvalidParameterError):
            DensityMatrix(m).validate()

    def test_immutable(self):
        rho = thermal_state(1.0)
        with pytest.raises(ValueError):
            rho.elements[0, 0] = 0


def test_mandel_q_matches_definition():
    rho = dephased_coherent_state(3.0)
    d = diagnostics(rho)
    assert d.mandel_q == pytest.approx(d.variance_n / d.mean_n - 1, abs=1e-15)
    assert math.isclose(d.purity_deficit, 1 - np.sum(np.abs(rho.elements) ** 2))
