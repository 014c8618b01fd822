import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symbound import catalog
from symbound.mat2 import Mat2
from symbound.schemes import (
    ImplicitSolveFailed,
    NotApplicable,
    Scheme,
    ShapeMismatch,
    SingularCayley,
    explicit_euler_defect,
    propagator,
    propagator_matches_linearization,
    scheme_from_name,
    step,
    symplecticity_defect,
)
from symbound.systems import State, find_equilibria

ALL_SCHEMES = tuple(Scheme)


def catalog_equilibria_with_schemes():
    from symbound.verify import _SCHEMES_BY_CLASS, catalog_equilibria

    for name, sys, eqs in catalog_equilibria():
        for eq in eqs:
            for scheme in _SCHEMES_BY_CLASS[sys.kind]:
                yield name, sys, eq, scheme


# ---------------------------------------------------------------------------
# stepping

def test_euler_b_harmonic_hand_value():
    got = step(Scheme.EULER_B, catalog.harmonic(), State(1.0, 0.0), 1.0)
    assert got == State(1.0, 1.0)


def test_stormer_verlet_hand_value():
    # stages: P_half = -0.5, q1 = 0.5, P1 = -0.75
    got = step(Scheme.STORMER_VERLET, catalog.harmonic_newtonian(), State(0.0, 1.0), 1.0)
    assert got == State(-0.75, 0.5)


def test_implicit_midpoint_fails_at_cayley_singularity():
    with pytest.raises(ImplicitSolveFailed):
        step(Scheme.IMPLICIT_MIDPOINT, catalog.shear(), State(1.0, 1.0), 2.0)


def test_implicit_midpoint_near_singular_tau_fails_both_sides():
    for tau in (2.0 - 1e-9, 2.0 + 1e-9):
        with pytest.raises(ImplicitSolveFailed):
            step(Scheme.IMPLICIT_MIDPOINT, catalog.shear(), State(1.0, 1.0), tau)
    # away from the singularity the solve succeeds
    step(Scheme.IMPLICIT_MIDPOINT, catalog.shear(), State(1.0, 1.0), 1.9)


def test_implicit_midpoint_is_exact_cayley_on_linear_systems():
    sys = catalog.harmonic()
    a = Mat2(0.0, -1.0, 1.0, 0.0)
    for tau in (0.1, 0.5, 2.0, 7.0):
        s = propagator(Scheme.IMPLICIT_MIDPOINT, a, tau).s
        x = State(0.8, -0.4)
        stepped = step(Scheme.IMPLICIT_MIDPOINT, sys, x, tau)
        lin = s.apply((x.p, x.q))
        assert abs(stepped.p - lin[0]) <= 1e-11
        assert abs(stepped.q - lin[1]) <= 1e-11


def test_applicability_is_enforced():
    with pytest.raises(NotApplicable):
        step(Scheme.STORMER_VERLET, catalog.harmonic(), State(0.0, 1.0), 0.1)
    with pytest.raises(NotApplicable):
        step(Scheme.EULER_B, catalog.shear(), State(0.0, 1.0), 0.1)
    step(Scheme.EULER_B, catalog.harmonic_newtonian(), State(0.0, 1.0), 0.1)


def test_scheme_names_round_trip():
    for scheme in ALL_SCHEMES:
        assert scheme_from_name(scheme.value) is scheme
    with pytest.raises(ValueError):
        scheme_from_name("leapfrog4")


# ---------------------------------------------------------------------------
# propagators

def test_euler_b_propagator_hand_value():
    s = propagator(Scheme.EULER_B, Mat2(0, -1, 1, 0), 1.0).s
    assert s == Mat2(1.0, -1.0, 1.0, 0.0)
    assert s.trace == 1.0 and s.det == 1.0


def test_implicit_midpoint_propagator_hand_value():
    s = propagator(Scheme.IMPLICIT_MIDPOINT, Mat2(0, -1, 1, 0), 2.0).s
    assert (s - Mat2(0.0, -1.0, 1.0, 0.0)).max_norm <= 1e-15
    assert abs(s.trace) <= 1e-15 and abs(s.det - 1.0) <= 1e-15


def test_zero_field_gives_identity_for_every_scheme():
    for scheme in ALL_SCHEMES:
        s = propagator(scheme, Mat2.zero(), 3.7).s
        assert s == Mat2.identity()


def test_stormer_verlet_propagator_matches_stage_algebra():
    # K(1/2) D(1) K(1/2) with gamma = g'(q0), derived by hand multiplication
    for gamma in (-1.0, -0.3, 0.7):
        for tau in (0.2, 1.0, 2.5):
            a = Mat2(0.0, gamma, 1.0, 0.0)
            s = propagator(Scheme.STORMER_VERLET, a, tau).s
            expected = Mat2(
                1.0 + tau * tau * gamma / 2.0,
                tau * gamma * (1.0 + tau * tau * gamma / 4.0),
                tau,
                1.0 + tau * tau * gamma / 2.0,
            )
            assert (s - expected).max_norm <= 1e-12 * (1 + expected.max_norm)


def test_propagator_shape_mismatch():
    general = Mat2(1.0, 0.5, 0.5, -1.0)
    for scheme in (Scheme.EULER_B, Scheme.YOSHIDA2, Scheme.STORMER_VERLET):
        with pytest.raises(ShapeMismatch):
            propagator(scheme, general, 0.5)
    propagator(Scheme.IMPLICIT_MIDPOINT, general, 0.5)
    with pytest.raises(ShapeMismatch):
        propagator(Scheme.EULER_B, Mat2(1.0, 0.0, 0.0, -1.0), 0.5)


def test_singular_cayley_raised_at_and_beyond_the_limit():
    a = Mat2(-1.0, 0.0, 0.0, 1.0)  # det = -1, limit at tau = 2
    with pytest.raises(SingularCayley):
        propagator(Scheme.IMPLICIT_MIDPOINT, a, 2.0)
    with pytest.raises(SingularCayley):
        propagator(Scheme.IMPLICIT_MIDPOINT, a, 2.0 + 1e-9)
    with pytest.raises(SingularCayley):
        propagator(Scheme.IMPLICIT_MIDPOINT, a, 5.0)
    propagator(Scheme.IMPLICIT_MIDPOINT, a, 1.999999)


def test_unimodularity_across_catalog_and_tau_grid():
    taus = [10.0 ** (-3 + 5 * k / 30) for k in range(31)]
    for name, sys, eq, scheme in catalog_equilibria_with_schemes():
        for tau in taus:
            try:
                s = propagator(scheme, eq.a, tau).s
            except SingularCayley:
                continue
            gap = abs(s.det - 1.0)
            if tau <= 10.0:
                assert gap <= 1e-12, (name, scheme.value, tau)
            # beyond that double precision can only hold det to ~eps |S|^2
            assert gap <= 1e-12 * (1.0 + s.frobenius_sq), (name, scheme.value, tau)


def test_explicit_trace_formula():
    # trace S = 2 - tau^2 T'' V'' for the three explicit schemes
    rng = np.random.default_rng(31)
    for _ in range(200):
        v, t = map(float, rng.uniform(-3, 3, 2))
        tau = float(rng.uniform(1e-3, 10.0))
        a = Mat2(0.0, -v, t, 0.0)
        for scheme in (Scheme.EULER_B, Scheme.YOSHIDA2, Scheme.STORMER_VERLET):
            if scheme is Scheme.STORMER_VERLET:
                a_sv = Mat2(0.0, -v, 1.0, 0.0)  # newtonian shape, t = 1
                tr = propagator(scheme, a_sv, tau).s.trace
                expected = 2.0 - tau * tau * v
            else:
                tr = propagator(scheme, a, tau).s.trace
                expected = 2.0 - tau * tau * t * v
            assert abs(tr - expected) <= 1e-12 * (1.0 + abs(expected))


def test_implicit_midpoint_trace_stays_elliptic_for_centers():
    rng = np.random.default_rng(37)
    for _ in range(100):
        b = float(rng.uniform(0.1, 4.0))
        c = float(rng.uniform(0.1, 4.0))
        a = Mat2(0.0, -b, c, 0.0)  # det = bc > 0
        for tau in (0.01, 0.5, 3.0, 50.0, 1000.0):
            s = propagator(Scheme.IMPLICIT_MIDPOINT, a, tau).s
            assert abs(s.trace) < 2.0


@settings(max_examples=150, deadline=None)
@given(
    st.floats(min_value=-4, max_value=4),
    st.floats(min_value=-4, max_value=4),
    st.floats(min_value=1e-3, max_value=10.0),
)
def test_unimodularity_property(v, t, tau):
    # arbitrary magnitudes: double precision holds det to ~eps * |S|^2
    a = Mat2(0.0, -float(v), float(t), 0.0)
    for scheme in (Scheme.EULER_B, Scheme.YOSHIDA2):
        s = propagator(scheme, a, float(tau)).s
        assert abs(s.det - 1.0) <= 1e-12 * (1.0 + s.frobenius_sq)


# ---------------------------------------------------------------------------
# order of accuracy against the exact harmonic flow

def _exact_rotation(x: State, tau: float) -> State:
    c, s = math.cos(tau), math.sin(tau)
    return State(x.p * c - x.q * s, x.q * c + x.p * s)


@pytest.mark.parametrize(
    "scheme,system_factory,expected_slope",
    [
        (Scheme.EULER_B, catalog.harmonic, 2.0),
        (Scheme.YOSHIDA2, catalog.harmonic, 3.0),
        (Scheme.STORMER_VERLET, catalog.harmonic_newtonian, 3.0),
        (Scheme.IMPLICIT_MIDPOINT, catalog.harmonic, 3.0),
    ],
)
def test_one_step_order(scheme, system_factory, expected_slope):
    sys = system_factory()
    x0 = State(0.7, 0.3)
    taus = [0.2 / 2**k for k in range(5)]
    errs = []
    for tau in taus:
        got = step(scheme, sys, x0, tau)
        ref = _exact_rotation(x0, tau)
        errs.append(math.hypot(got.p - ref.p, got.q - ref.q))
    slope = np.polyfit(np.log(taus), np.log(errs), 1)[0]
    assert abs(slope - expected_slope) <= 0.15, slope


# ---------------------------------------------------------------------------
# symplecticity

def test_symplectic_defect_small_on_pendulum():
    rng = np.random.default_rng(41)
    pend = catalog.pendulum()
    for _ in range(20):
        x = State(*map(float, rng.uniform(-2, 2, 2)))
        assert symplecticity_defect(Scheme.EULER_B, pend, x, 0.1) <= 1e-7


def test_defect_at_equilibrium_is_tiny():
    for name, sys, eq, scheme in catalog_equilibria_with_schemes():
        try:
            d = symplecticity_defect(scheme, sys, eq.point, 0.1)
        except ImplicitSolveFailed:
            continue
        assert d <= 1e-7, (name, scheme.value)


def test_explicit_euler_control_is_detectably_non_symplectic():
    # det(I + tau A) = 1 + tau^2 on the harmonic oscillator
    harm = catalog.harmonic()
    rng = np.random.default_rng(43)
    for _ in range(10):
        x = State(*map(float, rng.uniform(-2, 2, 2)))
        defect = explicit_euler_defect(harm, x, 0.1)
        assert defect > 1e-3
        assert abs(defect - 0.01) <= 1e-6


# ---------------------------------------------------------------------------
# propagator vs nonlinear step

def test_propagator_matches_step_jacobian_examples():
    harm_eq = find_equilibria(catalog.harmonic())[0]
    gap = propagator_matches_linearization(
        Scheme.EULER_B, catalog.harmonic(), harm_eq, 0.5
    )
    assert gap <= 1e-6

    nh_eq = find_equilibria(catalog.harmonic_newtonian())[0]
    gap = propagator_matches_linearization(
        Scheme.STORMER_VERLET, catalog.harmonic_newtonian(), nh_eq, 1.0
    )
    assert gap <= 1e-6

    pend_eqs = find_equilibria(catalog.pendulum())
    saddle = [e for e in pend_eqs if abs(e.point.q - math.pi) < 1e-6][0]
    gap = propagator_matches_linearization(
        Scheme.IMPLICIT_MIDPOINT, catalog.pendulum(), saddle, 0.3
    )
    assert gap <= 1e-6


def test_propagator_matches_step_jacobian_across_catalog():
    for name, sys, eq, scheme in catalog_equilibria_with_schemes():
        try:
            gap = propagator_matches_linearization(scheme, sys, eq, 0.4)
        except (SingularCayley, ImplicitSolveFailed):
            continue
        assert gap <= 1e-6, (name, scheme.value)
