import numpy as np
import pytest
from modelgen import random_model

from coxjost.errors import ThresholdCritical, UnpairedZero
from coxjost.model import ChannelModel, SheetSignature, all_sheets
from coxjost.spectrum import (
    BOUND,
    RESONANCE,
    VIRTUAL,
    Tolerances,
    classify,
    count_bound_states,
    eigenvalue_curves,
    find_zeros,
    imaginary_axis_zeros,
    solve_spectrum,
    spectrum_report,
    tally,
)

RESONANCE_MODEL = ChannelModel((0, 1), (0.76938, -0.766853), ((1, 2, 0.1),), -0.25)
TWO_BOUND_MODEL = ChannelModel((0, 1), (-0.112649, -1.79557), ((1, 2, 0.1),), -1.51**2)


def energies(points, kind):
    return np.array(sorted(p.energy.real for p in points if p.kind == kind))


def test_fig1_bound_states(fig1_model):
    pts = solve_spectrum(fig1_model)
    np.testing.assert_allclose(energies(pts, BOUND), [-51.8611, -8.8852], atol=1e-3)
    assert tally(pts, 3)["conserved"]


def test_fig2_all_virtual(fig2_model):
    pts = solve_spectrum(fig2_model)
    assert len(pts) == 12
    assert all(p.kind == VIRTUAL for p in pts)


def test_resonance_and_two_virtual():
    pts = solve_spectrum(RESONANCE_MODEL)
    kinds = [p.kind for p in pts]
    assert kinds.count(RESONANCE) == 2 and kinds.count(VIRTUAL) == 2
    np.testing.assert_allclose(energies(pts, VIRTUAL), [-0.599544, -0.560473], atol=1e-4)
    res = sorted((p.energy for p in pts if p.kind == RESONANCE), key=lambda e: e.imag)
    np.testing.assert_allclose(res, [0.4 - 0.01j, 0.4 + 0.01j], atol=1e-4)


def test_two_bound_no_resonance():
    t = tally(solve_spectrum(TWO_BOUND_MODEL), 2)
    assert t["n_b"] == 2 and t["n_r"] == 0


def test_single_channel_virtual():
    pts = solve_spectrum(ChannelModel((0,), (3,), (), -1))
    assert len(pts) == 1 and pts[0].kind == VIRTUAL
    assert pts[0].k[0] == pytest.approx(-3j)


def test_bound_state_invariants(fig1_model):
    for p in solve_spectrum(fig1_model):
        if p.kind == BOUND:
            assert p.energy.imag == 0 and p.energy.real < 0
            assert np.all(p.k.imag > 0) and np.all(p.k.real == 0)
        if p.kind == VIRTUAL:
            assert np.any(p.k.imag < 0)


def test_deterministic_order(fig1_model):
    a = [p.k for p in solve_spectrum(fig1_model)]
    b = [p.k for p in solve_spectrum(fig1_model)]
    np.testing.assert_array_equal(a, b)


def test_unpaired_complex_zero_detected():
    vectors, res, _ = find_zeros(RESONANCE_MODEL)
    keep = [i for i, k in enumerate(vectors) if not (abs(k[0].real) > 1e-3 and k[0].real > 0)]
    with pytest.raises(UnpairedZero):
        classify(vectors[keep], RESONANCE_MODEL, point_residuals=res[keep])


def test_cancelled_zero_flagged():
    # N=1: the only zero -i*alpha coincides with -i*kappa when alpha = kappa
    pts = solve_spectrum(ChannelModel((0,), (1,), (), -1))
    assert pts[0].kind == "cancelled"


def test_mirror_symmetry_of_zero_set(rng):
    m = random_model(rng, 3)
    ks = np.array([p.k for p in solve_spectrum(m)])
    for k in ks:
        assert np.min(np.max(np.abs(ks + np.conj(k)), axis=1)) < 1e-8


def test_tolerances_validation():
    with pytest.raises(ValueError):
        Tolerances().updated(bogus=1)
    with pytest.raises(ValueError):
        Tolerances().updated(polish=-1)
    assert Tolerances().updated(polish=1e-10).polish == 1e-10


def test_report_layout(fig1_model):
    rep = spectrum_report(solve_spectrum(fig1_model), fig1_model)
    assert set(rep["tally"]) >= {"n_b", "n_v", "n_r", "n_cancelled", "n_degenerate", "expected_total"}
    assert set(rep["points"][0]) == {"class", "energy", "momenta", "sheet", "residual"}


def test_count_bound_states_examples(fig1_model, fig2_model):
    assert count_bound_states(fig1_model) == 2
    assert count_bound_states(fig2_model) == 0
    assert count_bound_states(ChannelModel((0, 1), (1, 1), (), -1)) == 0


def test_threshold_critical():
    with pytest.raises(ThresholdCritical):
        count_bound_states(ChannelModel((0,), (0,), (), -1))


def test_fig1_crossings(fig1_model):
    curve = eigenvalue_curves(fig1_model, SheetSignature((1, 1, 1)), np.linspace(0, 10, 201))
    xs = sorted(x for _, x in curve.crossings)
    np.testing.assert_allclose(xs, np.sqrt([8.8852, 51.8611]), atol=1e-3)


def test_fig2_crossings_total(fig2_model):
    grid = np.linspace(-12, 12, 2401)
    total = sum(len(eigenvalue_curves(fig2_model, s, grid).crossings) for s in all_sheets(3))
    assert total == 12


def test_single_channel_crossing():
    m = ChannelModel((0,), (-3,), (), -16)
    curve = eigenvalue_curves(m, SheetSignature((1,)), np.linspace(0, 10, 11))
    assert curve.crossings == [(0, 3.0)]


def test_curves_need_increasing_grid(fig1_model):
    with pytest.raises(ValueError):
        eigenvalue_curves(fig1_model, SheetSignature((1, 1, 1)), [1, 0])


@pytest.mark.parametrize("n", [2, 3])
def test_imaginary_zeros_match_crossings(n, rng):
    for _ in range(10):
        m = random_model(rng, n)
        axis = [p.k[0].imag for p in solve_spectrum(m) if p.kind in (BOUND, VIRTUAL)]
        cross = [x for _, x in imaginary_axis_zeros(m)]
        assert len(axis) == len(cross)
        np.testing.assert_allclose(np.sort(axis), np.sort(cross), atol=1e-8)


def test_bound_count_matches_classification(rng):
    for n in (2, 3, 4):
        for _ in range(10):
            m = random_model(rng, n)
            assert count_bound_states(m) == tally(solve_spectrum(m), n)["n_b"]


def test_too_many_channels():
    n = 11
    m = ChannelModel(tuple(range(n)), (1.0,) * n, (), -1)
    with pytest.raises(ValueError):
        solve_spectrum(m)
