import math

import numpy as np
import pytest

from symbound import catalog
from symbound.mat2 import Mat2
from symbound.systems import (
    EquilibriumKind,
    HamiltonianSystem,
    NotAnEquilibrium,
    NotApplicable,
    NotTraceFree,
    State,
    classify_equilibrium,
    find_equilibria,
    linearize,
)


def test_vector_field_separable():
    sys = HamiltonianSystem.separable("p^2/2", "q^2/2")
    assert sys.vector_field(State(1.0, 2.0)) == (-2.0, 1.0)


def test_vector_field_newtonian():
    sys = HamiltonianSystem.newtonian("-sin(q)")
    dp, dq = sys.vector_field(State(0.5, 0.0))
    assert dp == 0.0 and dq == 0.5


def test_vector_field_general():
    sys = HamiltonianSystem.general("p*q")
    assert sys.vector_field(State(3.0, 4.0)) == (-3.0, 4.0)


def test_variable_validation():
    with pytest.raises(ValueError):
        HamiltonianSystem.separable("p^2/2", "p*q")  # V may not use p
    with pytest.raises(ValueError):
        HamiltonianSystem.newtonian("p")


# ---------------------------------------------------------------------------
# equilibria

def test_pendulum_equilibria():
    eqs = find_equilibria(catalog.pendulum(), box=((-1, 1), (-4, 4)), grid=16)
    points = [(e.point.p, e.point.q) for e in eqs]
    assert len(points) == 3
    for (p, q), q_expected in zip(points, (-math.pi, 0.0, math.pi)):
        assert abs(p) <= 1e-9 and abs(q - q_expected) <= 1e-9
    kinds = [e.kind for e in eqs]
    assert kinds == [
        EquilibriumKind.SADDLE,
        EquilibriumKind.CENTER,
        EquilibriumKind.SADDLE,
    ]


def test_harmonic_single_equilibrium():
    eqs = find_equilibria(catalog.harmonic())
    assert len(eqs) == 1
    assert abs(eqs[0].point.p) <= 1e-12 and abs(eqs[0].point.q) <= 1e-12
    assert eqs[0].kind is EquilibriumKind.CENTER


def test_inverted_potential_is_saddle():
    eqs = find_equilibria(catalog.saddle())
    assert len(eqs) == 1
    assert eqs[0].kind is EquilibriumKind.SADDLE
    assert abs(eqs[0].a.det + 1.0) <= 1e-12


def test_continuum_flagged_for_zero_hamiltonian():
    eqs = find_equilibria(catalog.zero(), grid=8)
    assert len(eqs) == 64
    assert all(e.continuum_suspected for e in eqs)
    assert all(e.kind is EquilibriumKind.RANK0_ZERO for e in eqs)


def test_equilibria_sorted_and_residual_small():
    eqs = find_equilibria(catalog.pendulum())
    keys = [(e.point.q, e.point.p) for e in eqs]
    assert keys == sorted(keys)
    assert all(e.residual <= 1e-10 for e in eqs)


def test_empty_result_when_no_roots_in_box():
    eqs = find_equilibria(catalog.harmonic(), box=((1.0, 2.0), (1.0, 2.0)), grid=6)
    assert eqs == []


# ---------------------------------------------------------------------------
# linearization

def test_linearize_harmonic():
    a = linearize(catalog.harmonic(), State(0.0, 0.0))
    assert a == Mat2(0.0, -1.0, 1.0, 0.0)


def test_linearize_cross_term():
    a = linearize(catalog.shear(), State(0.0, 0.0))
    assert a == Mat2(-1.0, 0.0, 0.0, 1.0)


def test_linearize_zero_hamiltonian():
    a = linearize(catalog.zero(), State(0.3, -0.7))
    assert a == Mat2(0.0, 0.0, 0.0, 0.0)


def test_linearize_rejects_non_equilibrium():
    with pytest.raises(NotAnEquilibrium):
        linearize(catalog.harmonic(), State(1.0, 1.0))


def test_linearize_agrees_with_finite_difference_jacobian():
    h = 1e-6
    for name, factory in catalog.CATALOG.items():
        sys = factory()
        eqs = find_equilibria(sys)
        for eq in eqs[:3]:
            p0, q0 = eq.point
            fp_p = sys.vector_field(State(p0 + h, q0))
            fm_p = sys.vector_field(State(p0 - h, q0))
            fp_q = sys.vector_field(State(p0, q0 + h))
            fm_q = sys.vector_field(State(p0, q0 - h))
            fd = Mat2(
                (fp_p[0] - fm_p[0]) / (2 * h),
                (fp_q[0] - fm_q[0]) / (2 * h),
                (fp_p[1] - fm_p[1]) / (2 * h),
                (fp_q[1] - fm_q[1]) / (2 * h),
            )
            assert (eq.a - fd).max_norm <= 1e-6, name


def test_trace_free_invariant_across_catalog():
    for name, factory in catalog.CATALOG.items():
        sys = factory()
        for eq in find_equilibria(sys)[:5]:
            assert abs(eq.a.trace) <= 1e-10, name


# ---------------------------------------------------------------------------
# classification

def test_classify_examples():
    assert classify_equilibrium(Mat2(0, -1, 1, 0)) is EquilibriumKind.CENTER
    assert classify_equilibrium(Mat2(0, 0, 1, 0)) is EquilibriumKind.RANK1_DEGENERATE
    assert classify_equilibrium(Mat2.zero()) is EquilibriumKind.RANK0_ZERO
    assert classify_equilibrium(Mat2(0, 1, 1, 0)) is EquilibriumKind.SADDLE


def test_classify_rejects_trace():
    with pytest.raises(NotTraceFree):
        classify_equilibrium(Mat2(1.0, 0.0, 0.0, 0.5))


# ---------------------------------------------------------------------------
# reductions between classes

def test_separable_reduces_to_general():
    sep = catalog.pendulum()
    gen = sep.as_general()
    rng = np.random.default_rng(23)
    for _ in range(50):
        x = State(*map(float, rng.uniform(-3, 3, 2)))
        fs = sep.vector_field(x)
        fg = gen.vector_field(x)
        assert abs(fs[0] - fg[0]) <= 1e-12 and abs(fs[1] - fg[1]) <= 1e-12


@pytest.mark.parametrize(
    "g_text,v_text",
    [("-sin(q)", "-cos(q)"), ("-q", "q^2/2"), ("q", "-q^2/2"), ("0", "0")],
)
def test_newtonian_reduces_to_separable(g_text, v_text):
    # V chosen by hand so that V' = -g
    nh = HamiltonianSystem.newtonian(g_text)
    sep = HamiltonianSystem.separable("p^2/2", v_text)
    rng = np.random.default_rng(29)
    for _ in range(30):
        x = State(*map(float, rng.uniform(-3, 3, 2)))
        fn = nh.vector_field(x)
        fs = sep.vector_field(x)
        assert abs(fn[0] - fs[0]) <= 1e-12 and abs(fn[1] - fs[1]) <= 1e-12
    eq_n = find_equilibria(nh, box=((-1, 1), (-1, 1)), grid=8)
    eq_s = find_equilibria(sep, box=((-1, 1), (-1, 1)), grid=8)
    for en, es in zip(eq_n[:2], eq_s[:2]):
        assert en.kind == es.kind


def test_energy_not_applicable_for_newtonian():
    with pytest.raises(NotApplicable):
        catalog.pendulum_newtonian().energy(State(0.0, 0.0))
