import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from bellqi.fock import (
    BasisLabel,
    ModeOccupation,
    SparseKet,
    beamsplitter_column,
    beamsplitter_pair,
    inner,
    make_bell_state,
)


def two_mode(s, e, amp=1.0):
    return SparseKet({BasisLabel((0,), (s,), (e,)): amp})


class TestModeOccupation:
    def test_total_is_component_sum(self):
        assert ModeOccupation((2, 0, 3)).total() == 5

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            ModeOccupation((1, -1))

    def test_componentwise_order(self):
        assert ModeOccupation((1, 2)) <= ModeOccupation((1, 3))
        assert not ModeOccupation((2, 0)) <= ModeOccupation((1, 3))

    def test_unit(self):
        assert ModeOccupation.unit(3, 1) == (0, 1, 0)


class TestBellState:
    def test_single_mode(self):
        ket = make_bell_state(1)
        assert dict(ket.items()) == {BasisLabel((1,), (1,)): 1.0}

    def test_two_modes(self):
        ket = make_bell_state(2)
        assert ket[((1, 0), (1, 0))] == pytest.approx(1 / math.sqrt(2))
        assert ket[((0, 1), (0, 1))] == pytest.approx(1 / math.sqrt(2))
        assert len(ket) == 2

    @pytest.mark.parametrize("m", [1, 4, 7, 50])
    def test_m_equal_amplitudes(self, m):
        ket = make_bell_state(m)
        assert len(ket) == m
        assert np.allclose([a for _, a in ket.items()], 1 / math.sqrt(m))
        assert ket.norm2() == pytest.approx(1.0, abs=1e-15)

    def test_rejects_zero_modes(self):
        with pytest.raises(ValueError):
            make_bell_state(0)


class TestInner:
    def test_normalized(self):
        for m in (1, 3, 10):
            ket = make_bell_state(m)
            assert inner(ket, ket) == pytest.approx(1.0)

    def test_disjoint_support(self):
        a = SparseKet({BasisLabel((1, 0), (1, 0)): 1.0})
        b = SparseKet({BasisLabel((1, 0), (0, 1)): 1.0})
        assert inner(a, b) == 0

    def test_conjugate_linear_in_first_argument(self):
        a = SparseKet({BasisLabel((1,), (0,)): 1j})
        b = SparseKet({BasisLabel((1,), (0,)): 2.0})
        assert inner(a, b) == pytest.approx(-2j)

    def test_mismatched_layout_rejected(self):
        with pytest.raises(ValueError):
            inner(make_bell_state(2), make_bell_state(3))
        with pytest.raises(ValueError):
            inner(make_bell_state(1), two_mode(1, 0))


class TestSparseKet:
    def test_prunes_tiny_amplitudes(self):
        ket = SparseKet({BasisLabel((1,), (0,)): 1e-15, BasisLabel((1,), (1,)): 0.5})
        assert len(ket) == 1

    def test_mixed_mode_counts_rejected(self):
        with pytest.raises(ValueError):
            SparseKet({BasisLabel((1,), (0, 1)): 1.0})

    def test_empty_needs_mode_count(self):
        with pytest.raises(ValueError):
            SparseKet({})
        assert SparseKet(num_modes=3).is_zero()

    def test_labels_iterate_in_order(self):
        ket = SparseKet({BasisLabel((0, 1), (0, 1)): 1.0, BasisLabel((1, 0), (1, 0)): 1.0})
        assert list(ket) == sorted(ket)


def dense_beamsplitter(eta, dim):
    """Independent construction: exp of the mode-mixing generator, then parity on the environment input."""
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    eye = np.eye(dim)
    a_s, a_e = np.kron(a, eye), np.kron(eye, a)
    theta = math.acos(math.sqrt(eta))
    parity = np.kron(eye, np.diag((-1.0) ** np.arange(dim)))
    return expm(-theta * (a_s.T @ a_e - a_s @ a_e.T)) @ parity


class TestBeamSplitter:
    def test_hong_ou_mandel(self):
        # |1,1> -> (t a+ + r b+)(r a+ - t b+)|0>: the a+b+ coefficient is r^2 - t^2 = 0 at eta = 1/2
        out = beamsplitter_pair(two_mode(1, 1), 0, 0, 0.5)
        assert abs(out[((0,), (1,), (1,))]) < 1e-15
        assert abs(out[((0,), (2,), (0,))]) == pytest.approx(1 / math.sqrt(2))
        assert abs(out[((0,), (0,), (2,))]) == pytest.approx(1 / math.sqrt(2))

    def test_single_photon_split(self):
        out = beamsplitter_pair(two_mode(1, 0), 0, 0, 0.25)
        assert abs(out[((0,), (1,), (0,))]) == pytest.approx(0.5)
        assert abs(out[((0,), (0,), (1,))]) == pytest.approx(math.sqrt(0.75))

    @pytest.mark.parametrize("s,e", [(0, 0), (1, 0), (0, 3), (2, 2), (3, 1)])
    def test_unit_reflectivity_only_phases(self, s, e):
        out = beamsplitter_pair(two_mode(s, e), 0, 0, 1.0)
        assert len(out) == 1
        assert abs(out[((0,), (s,), (e,))]) == pytest.approx(1.0)

    @pytest.mark.parametrize("eta", [0.1, 0.3, 0.5, 0.77, 1.0])
    def test_matches_dense_matrix_exponential(self, eta):
        dim = 9
        u = dense_beamsplitter(eta, dim)
        for s in range(5):
            for e in range(5 - s):
                col = beamsplitter_column(s, e, eta)
                for s_out, amp in enumerate(col):
                    assert amp == pytest.approx(u[s_out * dim + (s + e - s_out), s * dim + e], abs=1e-12)

    @pytest.mark.parametrize("bad", [0.0, -0.1, 1.5, float("nan")])
    def test_rejects_eta_outside_unit_interval(self, bad):
        with pytest.raises(ValueError):
            beamsplitter_pair(two_mode(1, 0), 0, 0, bad)

    def test_needs_environment(self):
        with pytest.raises(ValueError):
            beamsplitter_pair(make_bell_state(2), 0, 0, 0.5)


@st.composite
def random_kets(draw):
    m = draw(st.integers(1, 3))
    occ = st.lists(st.integers(0, 2), min_size=m, max_size=m)
    entries = draw(st.dictionaries(
        st.tuples(occ.map(tuple), occ.map(tuple), occ.map(tuple)).filter(lambda t: sum(t[1]) + sum(t[2]) <= 8),
        st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False),
        min_size=1, max_size=8,
    ))
    entries = {BasisLabel(*k): v for k, v in entries.items() if abs(v) > 1e-6}
    if not entries:
        entries = {BasisLabel((0,) * m, (1,) + (0,) * (m - 1), (0,) * m): 1.0}
    modes = draw(st.tuples(st.integers(0, m - 1), st.integers(0, m - 1)))
    eta = draw(st.floats(0.01, 1.0))
    return SparseKet(entries), modes, eta


@settings(max_examples=150, deadline=None)
@given(random_kets())
def test_norm_preserved(case):
    ket, (i, j), eta = case
    out = beamsplitter_pair(ket, i, j, eta)
    assert out.norm2() == pytest.approx(ket.norm2(), abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(random_kets())
def test_pair_photon_number_conserved(case):
    ket, (i, j), eta = case

    def key(lab):
        # everything outside the mixed pair, plus the pair's photon sum
        sig = lab.signal[:i] + lab.signal[i + 1:]
        env = lab.environment[:j] + lab.environment[j + 1:]
        return lab.idler, sig, env, lab.signal[i] + lab.environment[j]

    allowed = {key(lab) for lab in ket}
    out = beamsplitter_pair(ket, i, j, eta)
    assert {key(lab) for lab in out} <= allowed


@settings(max_examples=150, deadline=None)
@given(random_kets())
def test_adjoint_inverts(case):
    ket, (i, j), eta = case
    back = beamsplitter_pair(beamsplitter_pair(ket, i, j, eta), i, j, eta, adjoint=True)
    labels = set(ket) | set(back)
    assert max(abs(back[k] - ket[k]) for k in labels) < 1e-10
