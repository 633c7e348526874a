import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coulomb2d.assembly import build_problem
from coulomb2d.basis import SINGLET, TRIPLET, enumerate_basis
from coulomb2d.eigensolver import SolveRequest, SpectrumResult, dense_reference_solve
from coulomb2d.hamiltonian import SystemParams
from coulomb2d.spectra import (
    HELIUM_THRESHOLD, LevelLabel, b_norm, defect_energy, epsilon_scan_slope, hydrogen2d_energy,
    independent_electron_levels, quantum_defect, resonance_filter, rotated_alpha, series_start,
    spectrum, thresholds,
)
from coulomb2d.assembly import combine_problem


def test_hydrogen_levels():
    assert hydrogen2d_energy(1, 2.0) == -8.0
    assert hydrogen2d_energy(2, 2.0) == pytest.approx(-8 / 9)
    assert hydrogen2d_energy(1, 1.0) == -2.0
    assert thresholds(2) == pytest.approx([-8.0, -8 / 9])
    with pytest.raises(ValueError):
        hydrogen2d_energy(0, 2.0)


def test_independent_levels_examples():
    singlet = independent_electron_levels(0, SINGLET, -8.0)
    assert singlet[0] == (-16.0, 1)
    assert singlet[1][0] == pytest.approx(-8 - 8 / 9)
    triplet = independent_electron_levels(0, TRIPLET, -8.0)
    assert triplet[0][0] == pytest.approx(-8 - 8 / 9)


def test_doubly_excited_degeneracy():
    # N1 = N2 = 2 at M_L = 0: two singlets and one triplet
    E22 = 2 * hydrogen2d_energy(2, 2.0)
    s = dict(independent_electron_levels(0, SINGLET, -1.0, N_max=3))
    t = dict(independent_electron_levels(0, TRIPLET, -1.0, N_max=3))
    assert s[round(E22, 12)] == 2
    assert t[round(E22, 12)] == 1


@settings(max_examples=30)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(-3, 3))
def test_configuration_degeneracy(N1, N2, M_L):
    """Singlet + triplet counts at a configuration equal the ordered-pair count, folded."""
    E = hydrogen2d_energy(N1, 2.0) + hydrogen2d_energy(N2, 2.0)
    key = round(E, 12)
    cut = E + 1e-9
    s = dict(independent_electron_levels(M_L, SINGLET, cut, N_max=4)).get(key, 0)
    t = dict(independent_electron_levels(M_L, TRIPLET, cut, N_max=4)).get(key, 0)
    ordered = dict(independent_electron_levels(M_L, "none", cut, N_max=4)).get(key, 0)
    assert s + t == ordered
    assert s >= t


def test_quantum_defect_examples():
    assert quantum_defect(-8.5, 2) == pytest.approx(0.5)
    assert quantum_defect(-8 - 2 / 9, 2) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        quantum_defect(-7.0, 2)


@settings(max_examples=100)
@given(st.floats(-0.4, 0.4), st.integers(2, 30))
def test_defect_roundtrip(delta, n):
    E = defect_energy(delta, n)
    assert E < HELIUM_THRESHOLD
    assert quantum_defect(E, n) == pytest.approx(delta, abs=1e-9)


def test_level_label_validation():
    assert str(LevelLabel(1, 0, 2, 1, 1, SINGLET)) == "1,0,2,1"
    with pytest.raises(ValueError):
        LevelLabel(1, 1, 2, 0, 1, SINGLET)
    assert series_start(0, SINGLET) == 1
    assert series_start(0, TRIPLET) == 2
    assert series_start(2, SINGLET) == 3


def test_rotated_alpha():
    assert rotated_alpha(0.4) == 0.4
    a = rotated_alpha(0.35, 0.4)
    assert abs(a) == pytest.approx(0.35)
    assert cmath.phase(a) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        rotated_alpha(-1.0)


def test_b_norm_is_bilinear():
    P = build_problem(SystemParams.helium(), enumerate_basis(0, SINGLET, 8))
    c = np.linspace(1, 2, len(P.basis))
    assert b_norm(c, P.B) == pytest.approx(c @ (P.B @ c) / 16)
    cz = c * (1 + 1j)
    assert b_norm(cz, P.B) == pytest.approx(2j * b_norm(c, P.B))
    with pytest.raises(ValueError):
        b_norm(c[:-1], P.B)


def _fake(values, theta, tol=1e-10):
    v = np.asarray(values, dtype=complex)
    return SpectrumResult(v, np.zeros(len(v)), 1, SolveRequest(tol=tol), metadata={"theta": theta})


def test_resonance_filter():
    s1 = _fake([-1.4115 - 0.0012j, -1.0 - 0.2j, -0.9 - 0.1j], 0.35)
    s2 = _fake([-1.4115 - 0.0012j + 1e-8, -1.0 - 0.25j, -0.7 - 0.1j], 0.45)
    out = resonance_filter(s1, s2, tol=1e-6)
    assert len(out) == 1
    assert out[0].energy == pytest.approx(-1.4115 - 0.0012j, abs=1e-7)
    assert out[0].drift < 1e-6
    assert out[0].width == pytest.approx(0.0024, abs=1e-7)
    with pytest.raises(ValueError):
        resonance_filter(s1, _fake([0], 0.35))
    assert resonance_filter(_fake([], 0.1), s2) == []


def test_resonance_filter_matches_one_to_one():
    s1 = _fake([-1.0, -1.0 + 1e-9], 0.3)
    s2 = _fake([-1.0], 0.4)
    assert len(resonance_filter(s1, s2)) == 1


def test_independent_electron_spectrum_small_basis():
    """ε = 0, N_base = 40: the ground level and the doubly excited (2,2) level are exact."""
    for symmetry, mult in ((SINGLET, 2), (TRIPLET, 1)):
        P = build_problem(SystemParams.helium(), enumerate_basis(0, symmetry, 40))
        w = dense_reference_solve(*combine_problem(P, 0.4, 0.0))
        if symmetry == SINGLET:
            assert w[0] == pytest.approx(-16.0, abs=1e-6)
        E22 = 2 * hydrogen2d_energy(2, 2.0)
        assert np.sum(np.abs(w - E22) < 1e-6) == mult


def test_spectrum_metadata():
    P = build_problem(SystemParams.helium(), enumerate_basis(0, SINGLET, 20))
    r = spectrum(P, 0.4, SolveRequest(shift=-12.5, k=2), epsilon=0.5)
    assert r.metadata["alpha"] == 0.4 and r.metadata["epsilon"] == 0.5
    assert r.metadata["N_base"] == 20


def test_slope_small_basis():
    P = build_problem(SystemParams.helium(), enumerate_basis(0, SINGLET, 24))
    slope, intercept = epsilon_scan_slope(P, 0.4, [0.0, 0.001, 0.002])
    assert slope == pytest.approx(1.5 * math.pi, rel=0.01)
    assert intercept == pytest.approx(-16.0, abs=1e-5)
    with pytest.raises(ValueError):
        epsilon_scan_slope(P, 0.4, [0.0])
