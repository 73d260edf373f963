import numpy as np
import pytest
from modelgen import random_model

from coxjost.errors import JostSingular, ThresholdProximity
from coxjost.model import ChannelModel
from coxjost.scattering import (
    observable_sweep,
    physical_momenta,
    s_matrix,
    symmetry_defect,
    unitarity_defect,
)

RESONANCE = ChannelModel((0, 1), (0.76938, -0.766853), ((1, 2, 0.1),), -0.25)


def single_channel_s(alpha, kappa, k):
    return (alpha + 1j * k) * (kappa - 1j * k) / ((kappa + 1j * k) * (alpha - 1j * k))


def test_single_channel_closed_form():
    s = s_matrix(4.0, ChannelModel((0,), (3,), (), -1)).s
    assert s.shape == (1, 1)
    assert s[0, 0] == pytest.approx(single_channel_s(3, 1, 2), abs=1e-14)
    assert abs(s[0, 0]) == pytest.approx(1)


def test_cross_section_single_channel():
    smp = s_matrix(4.0, ChannelModel((0,), (3,), (), -1))
    assert smp.sigma11 == pytest.approx(4 * np.pi / 4 * np.sin(smp.delta1) ** 2, rel=1e-12)


def test_decoupled_is_diagonal():
    m = ChannelModel((0, 1), (0.7, 1.3), (), -2)
    smp = s_matrix(3.0, m)
    assert smp.open_count == 2
    k = physical_momenta(3.0, m).real
    np.testing.assert_allclose(np.diag(smp.s), [single_channel_s(a, c, x)
                                                for a, c, x in zip(m.alpha, m.kappa, k)], atol=1e-14)
    assert abs(smp.s[0, 1]) < 1e-15


def test_physical_momenta_branches():
    k = physical_momenta(0.5, RESONANCE)
    assert k[0] == pytest.approx(np.sqrt(0.5)) and k[1] == pytest.approx(1j * np.sqrt(0.5))


def test_threshold_proximity():
    with pytest.raises(ThresholdProximity):
        s_matrix(1.0 + 1e-10, RESONANCE)


def test_nonpositive_energy():
    with pytest.raises(ValueError):
        s_matrix(0.0, RESONANCE)


def test_embedded_zero_makes_jost_singular():
    # decoupled closed channel with alpha_2 = -sqrt(1 - 0.75): zero of det F at E = 0.75
    m = ChannelModel((0, 1), (1.0, -0.5), (), -1)
    with pytest.raises(JostSingular):
        s_matrix(0.75, m)


def test_sweep_collects_errors():
    samples, errors = observable_sweep([0.5, 1.0, 1.5], RESONANCE)
    assert len(samples) == 2 and errors[0][0] == 1.0


def test_sweep_needs_increasing_grid():
    with pytest.raises(ValueError):
        observable_sweep([0.5, 0.4], RESONANCE)


def test_unitarity_and_symmetry(rng):
    for n in (2, 3, 4):
        for _ in range(10):
            m = random_model(rng, n)
            top = m.delta.max()
            for e in (0.3 * top + 0.01, top + rng.uniform(0.1, 20)):
                smp = s_matrix(e, m)
                assert unitarity_defect(smp) < 1e-8
                assert symmetry_defect(smp) < 1e-8


def test_breit_wigner_jump():
    e_r, e_i = 0.4, 0.01
    samples, _ = observable_sweep(np.linspace(e_r - 5 * e_i, e_r + 5 * e_i, 401), RESONANCE)
    rise = samples[-1].delta1 - samples[0].delta1
    assert abs(abs(rise) - np.pi) <= 0.15 * np.pi


def test_cross_section_peak():
    samples, _ = observable_sweep(np.linspace(0.3, 0.5, 2001), RESONANCE)
    peak = samples[int(np.argmax([s.sigma11 for s in samples]))].energy
    assert abs(peak - 0.4) < 0.02


def test_kappa_family_shares_jump_but_not_low_energy_phase():
    grid = np.linspace(1e-4, 0.99, 3000)
    jumps, slopes = [], []
    for kappa1 in (0.5, 0.7, 1.0):
        samples, errors = observable_sweep(grid, RESONANCE.with_kappa1(kappa1))
        assert not errors
        d = np.array([s.delta1 for s in samples])
        e = np.array([s.energy for s in samples])
        window = (e > 0.35) & (e < 0.45)
        jumps.append(d[window][-1] - d[window][0])
        slopes.append((d[1] - d[0]) / (np.sqrt(e[1]) - np.sqrt(e[0])))
    np.testing.assert_allclose(np.abs(jumps), np.pi, rtol=0.15)
    assert np.all(np.abs(np.diff(slopes)) > 1e-3)
    # slope of delta1 against k1 at threshold changes monotonically along the family
    assert np.all(np.diff(slopes) > 0) or np.all(np.diff(slopes) < 0)


def test_low_energy_phase_limit():
    samples, _ = observable_sweep([1e-8, 1e-6], RESONANCE)
    d = samples[0].delta1
    assert min(abs(d), abs(abs(d) - np.pi)) < 1e-3
