import itertools
import math
import time

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import oracles
from qotto.cycle import run_cycle
from qotto.errors import ValidationError
from qotto.linalg import thermal_populations
from qotto.protocol import (
    HamiltonianSchedule,
    QutritParams,
    SwapSpec,
    collective_energies,
    collective_hamiltonian,
    detect_crossings,
    diagonal_cycle,
    make_schedule,
    many_body_limit,
    perfect_swap,
    product_populations,
    reference_cycle,
    symmetric_cycle,
    word_index,
)

FIG2AB = QutritParams(1 / 3, 1 / 3)
FIG2D = QutritParams(0.57, 0.35)
FIG3 = QutritParams(0.595, 0.125)


@st.composite
def qutrit_setups(draw):
    e1 = draw(st.floats(0.05, 0.9))
    shift = draw(st.floats(-e1 + 0.02, 0.95 - e1))
    assume(abs(shift) > 1e-3)
    beta_h = draw(st.floats(0.2, 6.0))
    beta_c = beta_h * draw(st.floats(1.01, 4.0))
    return QutritParams(e1, shift), beta_c, beta_h


def brute_force_crossings(params, copies):
    """Word pairs whose additive energies strictly change order during the ramp."""
    words = list(itertools.product(range(3), repeat=copies))
    e_a = params.energies(params.E1_initial)
    e_b = params.energies(params.E1_final)
    pairs = set()
    for u, v in itertools.combinations(words, 2):
        da = sum(e_a[d] for d in u) - sum(e_a[d] for d in v)
        db = sum(e_b[d] for d in u) - sum(e_b[d] for d in v)
        if abs(da) > 1e-12 and abs(db) > 1e-12 and (da > 0) != (db > 0):
            pairs.add(frozenset((u, v)))
    return pairs


def test_word_index_first_copy_most_significant():
    assert word_index((0, 0)) == 0
    assert word_index((1, 0)) == 3
    assert word_index((0, 2)) == 2
    assert word_index((2, 2, 2)) == 26


def test_collective_vectors_match_oracle():
    e = FIG2AB.energies(0.4)
    np.testing.assert_allclose(collective_energies(FIG2AB, 0.4, 3), oracles.collective(e, 3))
    p = thermal_populations(e, 2.0)
    np.testing.assert_allclose(product_populations(p, 3), oracles.product(p, 3))


def test_parameter_validation():
    with pytest.raises(ValidationError):
        QutritParams(0.5, 0.6)
    with pytest.raises(ValidationError):
        QutritParams(0.0, 0.3)
    with pytest.raises(ValidationError):
        SwapSpec(((1, 1), (1, 1)), tau=1.0)
    with pytest.raises(ValidationError):
        SwapSpec(((1, 1), (0, 2)), tau=0.0)
    with pytest.raises(ValidationError):
        SwapSpec(((1, 1), (0, 2, 1)), tau=1.0)
    with pytest.raises(ValidationError):
        SwapSpec(((1, 1), (0, 2)), tau=1.0, mode="slow")


def test_schedule_validation():
    with pytest.raises(ValidationError):
        HamiltonianSchedule(FIG2AB, 4)
    with pytest.raises(ValidationError):
        HamiltonianSchedule(FIG2AB, 2, (SwapSpec(((1, 1), (0, 2)), 1.0), SwapSpec(((1, 1), (2, 0)), 1.0)))
    with pytest.raises(ValidationError):
        HamiltonianSchedule(FIG2AB, 2, ramp_time=-1.0)
    with pytest.raises(ValidationError):
        make_schedule(FIG2AB, 2, mode="fast")


@pytest.mark.parametrize("params", [FIG2AB, FIG2D, FIG3], ids=["fig2ab", "fig2d", "fig3"])
@pytest.mark.parametrize("copies", [1, 2, 3, 4])
def test_crossings_match_brute_force(params, copies):
    groups = detect_crossings((params, copies))
    found = set()
    for g in groups:
        assert params.E1_initial < g.e1_cross < params.E1_final
        for u in g.n_words:
            for v in g.m_words:
                found.add(frozenset((u, v)))
    assert found == brute_force_crossings(params, copies)


def test_fig2ab_pair_crossing():
    (group,) = detect_crossings((FIG2AB, 2))
    assert set(group.n_words) == {(1, 1)}
    assert set(group.m_words) == {(0, 2), (2, 0)}
    assert group.e1_cross == pytest.approx(0.5)


def test_fig2d_three_copy_crossing():
    assert detect_crossings((FIG2D, 2)) == []
    (group,) = detect_crossings((FIG2D, 3))
    assert group.n_counts == (0, 3, 0) and group.m_counts == (1, 0, 2)
    assert group.e1_cross == pytest.approx(2 / 3)


def test_crossing_time_on_ramp():
    sched = make_schedule(FIG2AB, 2, "perfect", ramp_time=2.0)
    (group,) = detect_crossings(sched)
    assert group.time == pytest.approx(1.0)
    assert sched.e1(group.time) == pytest.approx(group.e1_cross)


def test_pulse_area_is_quarter_turn():
    sched = make_schedule(FIG2AB, 2, "finite-tau", tau=0.37, ramp_time=0.5)
    t = np.linspace(sched.t_ab, sched.t_b, 20001)
    f = np.array([sched.f(x) for x in t])
    area = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(t)))
    assert area == pytest.approx(math.pi / 2, rel=1e-7)
    assert sched.f(sched.t_ab - 1e-3) == 0.0 and sched.f(sched.t_b + 1e-3) == 0.0
    assert sched.tau_total == pytest.approx(2 * (0.5 + 0.37))


def test_hamiltonian_has_coupling_only_during_pulse():
    sched = make_schedule(FIG2AB, 2, "finite-tau", tau=1.0)
    h = collective_hamiltonian(sched, 0.5)
    i, j = word_index((1, 1)), word_index((0, 2))
    assert h[i, j] == pytest.approx(math.pi**2 / 4)
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 2
    assert np.allclose(sched.mirrored_hamiltonian(0.5), h)


def test_impulse_swaps_targeted_pair():
    sched = make_schedule(FIG2AB, 2, "perfect")
    s = sched.impulse()
    i, j = word_index((1, 1)), word_index((0, 2))
    pops = np.abs(s) ** 2
    assert pops[i, j] == pytest.approx(1.0, abs=1e-15) and pops[j, i] == pytest.approx(1.0, abs=1e-15)
    others = [k for k in range(9) if k not in (i, j)]
    np.testing.assert_allclose(pops[np.ix_(others, others)], np.eye(7), atol=1e-15)


def test_short_pulse_approaches_perfect_swap_and_long_pulse_qa():
    perfect = diagonal_cycle(FIG2AB, 2, 6.66, 3.28, "perfect")
    qa = diagonal_cycle(FIG2AB, 2, 6.66, 3.28, "QA")
    short = run_cycle(make_schedule(FIG2AB, 2, "finite-tau", 1e-3), 6.66, 3.28)
    long = run_cycle(make_schedule(FIG2AB, 2, "finite-tau", 1e3), 6.66, 3.28)
    assert short.W == pytest.approx(perfect.W, abs=1e-9)
    assert long.W == pytest.approx(qa.W, abs=1e-8)


def test_perfect_swap_passivizes_crossed_levels():
    for params, copies, beta in ((FIG2AB, 2, 6.66), (FIG2D, 3, 2.22)):
        e_b = collective_energies(params, params.E1_final, copies)
        p = product_populations(thermal_populations(params.energies(params.E1_initial), beta), copies)
        groups = detect_crossings((params, copies))
        out = perfect_swap(p, groups, e_b)
        crossed = sorted({word_index(w) for g in groups for w in g.n_words + g.m_words})
        assert float(e_b[crossed] @ out[crossed]) == pytest.approx(
            oracles.brute_force_passive_energy(p[crossed], e_b[crossed]), abs=1e-15)
        untouched = np.setdiff1d(np.arange(p.size), crossed)
        np.testing.assert_array_equal(out[untouched], p[untouched])
        np.testing.assert_allclose(np.diag(perfect_swap(np.diag(p), groups, e_b)), out)


def test_perfect_swap_rejects_coherent_input():
    rho = np.full((9, 9), 1 / 9)
    with pytest.raises(ValidationError):
        perfect_swap(rho, detect_crossings((FIG2AB, 2)), collective_energies(FIG2AB, 2 / 3, 2))


def test_qa_keeps_populations():
    res = diagonal_cycle(FIG2D, 3, 2.22, 1.09, "QA")
    np.testing.assert_array_equal(res.points[0].state, res.points[1].state)


def test_copy_guards():
    with pytest.raises(ValidationError):
        diagonal_cycle(FIG3, 14, 1.85, 1.71)
    with pytest.raises(ValidationError):
        diagonal_cycle(FIG3, 0, 1.85, 1.71)


@pytest.mark.parametrize("params,bc,bh", [(FIG2AB, 6.66, 3.28), (FIG2D, 2.22, 1.09), (FIG3, 1.85, 1.71)])
@pytest.mark.parametrize("mode", ["QA", "perfect"])
def test_class_path_matches_full_vector(params, bc, bh, mode):
    for n in range(1, 9):
        full = diagonal_cycle(params, n, bc, bh, mode)
        cls = symmetric_cycle(params, n, bc, bh, mode)
        assert cls.W == pytest.approx(full.W, abs=1e-12)
        assert cls.Q_h == pytest.approx(full.Q_h, abs=1e-12)
        assert cls.Q_c == pytest.approx(full.Q_c, abs=1e-12)
        ratio = full.D_B / (full.beta_B_ref * full.Q_h_ref)
        assert cls.distance_ratio == pytest.approx(ratio, rel=1e-8, abs=1e-12)


def test_class_path_handles_hundreds_of_copies():
    start = time.perf_counter()
    point = symmetric_cycle(FIG3, 300, 1.85, 1.71)
    assert time.perf_counter() - start < 10
    assert point.is_engine
    assert point.eta < many_body_limit(FIG3, 1.85, 1.71)


def test_reference_heats_are_extensive():
    ref = reference_cycle(FIG3, 1.85, 1.71)
    for n in (1, 3, 5):
        res = diagonal_cycle(FIG3, n, 1.85, 1.71)
        assert res.Q_h_ref == pytest.approx(n * ref.Q_h_ref, rel=1e-9)
        assert res.Q_c_ref == pytest.approx(n * ref.Q_c_ref, rel=1e-9)
        assert res.eta_manybody == pytest.approx(ref.eta, rel=1e-9)


def test_many_body_limit_rejects_non_engine_reference():
    # equal bath temperatures cannot run an engine
    with pytest.raises(ValidationError):
        many_body_limit(FIG2AB, 2.0, 2.0)


@settings(max_examples=60, deadline=None)
@given(qutrit_setups(), st.integers(1, 5))
def test_perfect_swap_never_does_worse_than_qa(setup, copies):
    params, bc, bh = setup
    perfect = diagonal_cycle(params, copies, bc, bh, "perfect")
    qa = diagonal_cycle(params, copies, bc, bh, "QA")
    assert perfect.W <= qa.W + 1e-13
    assert perfect.first_law_residual < 1e-10
    if perfect.is_engine:
        assert perfect.eta <= perfect.eta_carnot + 1e-12


@settings(max_examples=60, deadline=None)
@given(qutrit_setups())
def test_single_copy_has_no_crossings_and_qa_is_extensive(setup):
    params, bc, bh = setup
    assert detect_crossings((params, 1)) == []
    one = diagonal_cycle(params, 1, bc, bh, "QA")
    three = diagonal_cycle(params, 3, bc, bh, "QA")
    assert three.W == pytest.approx(3 * one.W, abs=1e-13)
