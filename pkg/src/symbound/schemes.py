"""The four symplectic one-step methods and their linear propagators.

Nonlinear steppers:

  euler-b            P = p - tau*V'(q);  Q = q + tau*T'(P)
  yoshida2           half drift, full kick, half drift (order 2 leapfrog)
  stormer-verlet     half kick, full drift, half kick, newtonian systems only
  implicit-midpoint  P = p - tau*H_q(mid), Q = q + tau*H_p(mid), mid = (x+X)/2,
                     solved by damped Newton

At a trace-free linearization A the one-step map restricts to a 2x2 matrix
S(tau) with det S = 1.  For the three explicit schemes A must have the
separable shape [[0, a12], [a21, 0]]; S is then assembled by composing the
exact stage matrices

    kick(c)  = [[1, c*tau*a12], [0, 1]]
    drift(c) = [[1, 0], [c*tau*a21, 1]]

so the propagator entries carry no differencing error.  The implicit
midpoint propagator is the Cayley transform (I - (tau/2)A)^-1 (I + (tau/2)A);
it ceases to exist at the first tau where the denominator determinant
reaches zero, and is reported singular from that point on (the one-step
family is not continued past the singularity).

Schemes are stateless: step and propagator are pure functions, safe to
call concurrently.
"""

import enum
import math

from .mat2 import Mat2
from .systems import HamiltonianSystem, NotApplicable, State, SystemClass


class ImplicitSolveFailed(Exception):
    """The implicit midpoint solve hit a (near-)singular Newton matrix or
    failed to converge; the step size is at or beyond the solvability limit."""

    def __init__(self, message, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


class SingularCayley(Exception):
    pass


class ShapeMismatch(Exception):
    pass


class Scheme(enum.Enum):
    EULER_B = "euler-b"
    YOSHIDA2 = "yoshida2"
    STORMER_VERLET = "stormer-verlet"
    IMPLICIT_MIDPOINT = "implicit-midpoint"

    @property
    def applicable_classes(self) -> frozenset[SystemClass]:
        return _APPLICABLE[self]

    def applicable_to(self, sys: HamiltonianSystem) -> bool:
        return sys.kind in _APPLICABLE[self]


_APPLICABLE = {
    Scheme.EULER_B: frozenset({SystemClass.SEPARABLE, SystemClass.NEWTONIAN}),
    Scheme.YOSHIDA2: frozenset({SystemClass.SEPARABLE, SystemClass.NEWTONIAN}),
    Scheme.STORMER_VERLET: frozenset({SystemClass.NEWTONIAN}),
    Scheme.IMPLICIT_MIDPOINT: frozenset(
        {SystemClass.GENERAL, SystemClass.SEPARABLE, SystemClass.NEWTONIAN}
    ),
}

_SINGULAR_TOL = 1e-9


def scheme_from_name(name: str) -> Scheme:
    for scheme in Scheme:
        if scheme.value == name:
            return scheme
    raise ValueError(f"unknown scheme {name!r}; expected one of "
                     f"{[s.value for s in Scheme]}")


# ---------------------------------------------------------------------------
# Nonlinear stepping

def step(scheme: Scheme, sys: HamiltonianSystem, x: State, tau: float) -> State:
    """Advance one step of size tau > 0."""
    if tau <= 0.0:
        raise ValueError("step size must be positive")
    if not scheme.applicable_to(sys):
        raise NotApplicable(
            f"scheme {scheme.value} does not apply to a {sys.kind.value} system"
        )
    if scheme is Scheme.EULER_B:
        return _euler_b(sys, x, tau)
    if scheme is Scheme.YOSHIDA2:
        return _yoshida2(sys, x, tau)
    if scheme is Scheme.STORMER_VERLET:
        return _stormer_verlet(sys, x, tau)
    return _implicit_midpoint(sys, x, tau)


def _euler_b(sys, x, tau):
    if sys.kind is SystemClass.SEPARABLE:
        p_new = x.p - tau * sys.v1(x.q)
        return State(p_new, x.q + tau * sys.t1(p_new))
    p_new = x.p + tau * sys.g(x.q)
    return State(p_new, x.q + tau * p_new)


def _yoshida2(sys, x, tau):
    half = 0.5 * tau
    if sys.kind is SystemClass.SEPARABLE:
        q_mid = x.q + half * sys.t1(x.p)
        p_new = x.p - tau * sys.v1(q_mid)
        return State(p_new, q_mid + half * sys.t1(p_new))
    q_mid = x.q + half * x.p
    p_new = x.p + tau * sys.g(q_mid)
    return State(p_new, q_mid + half * p_new)


def _stormer_verlet(sys, x, tau):
    p_half = x.p + 0.5 * tau * sys.g(x.q)
    q_new = x.q + tau * p_half
    return State(p_half + 0.5 * tau * sys.g(q_new), q_new)


def _implicit_midpoint(sys, x, tau, tol=1e-12, max_iter=100):
    p_new, q_new = x.p, x.q

    def residual(pn, qn):
        mp, mq = 0.5 * (x.p + pn), 0.5 * (x.q + qn)
        return (
            pn - x.p + tau * sys.h_q(mp, mq),
            qn - x.q - tau * sys.h_p(mp, mq),
        )

    r = residual(p_new, q_new)
    rn = math.hypot(*r)
    # absolute 1e-12 is unreachable at large amplitudes; scale accordingly
    target = tol * (1.0 + math.hypot(x.p, x.q) + math.hypot(p_new, q_new))
    for _ in range(max_iter):
        if rn <= target:
            return State(p_new, q_new)
        mp, mq = 0.5 * (x.p + p_new), 0.5 * (x.q + q_new)
        jac = Mat2(
            1.0 + 0.5 * tau * sys.h_pq(mp, mq),
            0.5 * tau * sys.h_qq(mp, mq),
            -0.5 * tau * sys.h_pp(mp, mq),
            1.0 - 0.5 * tau * sys.h_pq(mp, mq),
        )
        if abs(jac.det) <= _SINGULAR_TOL * (1.0 + jac.frobenius_sq):
            raise ImplicitSolveFailed(
                f"singular Newton matrix at tau={tau!r}"
            )
        dp, dq = jac.solve((-r[0], -r[1]))
        lam = 1.0
        for _ in range(60):
            cand_p, cand_q = p_new + lam * dp, q_new + lam * dq
            rc = residual(cand_p, cand_q)
            rcn = math.hypot(*rc)
            if rcn < rn or rcn <= target:
                p_new, q_new, r, rn = cand_p, cand_q, rc, rcn
                break
            lam *= 0.5
        else:
            raise ImplicitSolveFailed(
                f"damped Newton stalled at residual {rn:.3e} (tau={tau!r})"
            )
        target = tol * (1.0 + math.hypot(x.p, x.q) + math.hypot(p_new, q_new))
    if rn <= target:
        return State(p_new, q_new)
    raise ImplicitSolveFailed(
        f"no convergence after {max_iter} iterations (tau={tau!r})"
    )


def explicit_euler_step(sys: HamiltonianSystem, x: State, tau: float) -> State:
    """Classical explicit Euler.  Non-symplectic; kept as a control so the
    symplecticity test has a known failure case."""
    dp, dq = sys.vector_field(x)
    return State(x.p + tau * dp, x.q + tau * dq)


# ---------------------------------------------------------------------------
# Closed-form propagators

class Propagator:
    """The 2x2 matrix of one scheme step applied to a linearization."""

    __slots__ = ("s", "tau", "scheme")

    def __init__(self, s: Mat2, tau: float, scheme: Scheme):
        if abs(s.det - 1.0) > 1e-10 * (1.0 + s.frobenius_sq):
            raise AssertionError(f"propagator lost unimodularity: det={s.det!r}")
        self.s = s
        self.tau = tau
        self.scheme = scheme


def _require_trace_free(a: Mat2) -> None:
    if abs(a.trace) > 1e-9 * (1.0 + math.sqrt(a.frobenius_sq)):
        raise ShapeMismatch(f"linearization is not trace-free: trace={a.trace!r}")


def _require_separable(a: Mat2) -> None:
    tol = 1e-12 * (1.0 + a.max_norm)
    if abs(a.a11) > tol or abs(a.a22) > tol:
        raise ShapeMismatch(
            "explicit schemes need a separable linearization [[0, *], [*, 0]]"
        )


def propagator(scheme: Scheme, a: Mat2, tau: float) -> Propagator:
    """Exact S(tau) for the scheme applied to the linear system y' = A y."""
    if tau <= 0.0:
        raise ValueError("step size must be positive")
    _require_trace_free(a)
    if scheme is Scheme.IMPLICIT_MIDPOINT:
        b = a.scale(0.5 * tau)
        denom = Mat2.identity() - b
        if denom.det <= _SINGULAR_TOL * (1.0 + denom.frobenius_sq):
            raise SingularCayley(
                f"Cayley denominator determinant {denom.det!r} at tau={tau!r}"
            )
        s = denom.inverse() @ (Mat2.identity() + b)
        return Propagator(s, tau, scheme)
    _require_separable(a)

    def kick(c: float) -> Mat2:
        return Mat2(1.0, c * tau * a.a12, 0.0, 1.0)

    def drift(c: float) -> Mat2:
        return Mat2(1.0, 0.0, c * tau * a.a21, 1.0)

    if scheme is Scheme.EULER_B:
        s = drift(1.0) @ kick(1.0)
    elif scheme is Scheme.YOSHIDA2:
        s = drift(0.5) @ kick(1.0) @ drift(0.5)
    else:  # Stoermer-Verlet
        s = kick(0.5) @ drift(1.0) @ kick(0.5)
    return Propagator(s, tau, scheme)


# ---------------------------------------------------------------------------
# Symplecticity diagnostics

_J = Mat2(0.0, 1.0, -1.0, 0.0)


def _fd_jacobian(step_fn, x: State, h: float) -> Mat2:
    pp = step_fn(State(x.p + h, x.q))
    pm = step_fn(State(x.p - h, x.q))
    qp = step_fn(State(x.p, x.q + h))
    qm = step_fn(State(x.p, x.q - h))
    return Mat2(
        (pp.p - pm.p) / (2.0 * h),
        (qp.p - qm.p) / (2.0 * h),
        (pp.q - pm.q) / (2.0 * h),
        (qp.q - qm.q) / (2.0 * h),
    )


def symplecticity_defect(
    scheme: Scheme, sys: HamiltonianSystem, x: State, tau: float, h: float = 1e-5
) -> float:
    """max-norm of M^T J M - J for the finite-difference one-step Jacobian M.

    For one degree of freedom this equals |det M - 1|; an exactly symplectic
    map leaves only the O(h^2) differencing residue.
    """
    m = _fd_jacobian(lambda y: step(scheme, sys, y, tau), x, h)
    return (m.transpose() @ _J @ m - _J).max_norm


def explicit_euler_defect(
    sys: HamiltonianSystem, x: State, tau: float, h: float = 1e-5
) -> float:
    """Same defect metric for the non-symplectic explicit Euler control."""
    m = _fd_jacobian(lambda y: explicit_euler_step(sys, y, tau), x, h)
    return (m.transpose() @ _J @ m - _J).max_norm


def propagator_matches_linearization(
    scheme: Scheme, sys: HamiltonianSystem, equilibrium, tau: float, h: float = 1e-5
) -> float:
    """max-norm gap between the closed-form propagator and the differenced
    Jacobian of the nonlinear step at the equilibrium point."""
    prop = propagator(scheme, equilibrium.a, tau)
    m = _fd_jacobian(lambda y: step(scheme, sys, y, tau), equilibrium.point, h)
    return (prop.s - m).max_norm
