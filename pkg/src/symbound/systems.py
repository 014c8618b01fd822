"""One-degree-of-freedom Hamiltonian systems and their equilibria.

Three system classes are supported:

  * general     dp/dt = -dH/dq,  dq/dt = dH/dp   for an energy H(p, q)
  * separable   H = T(p) + V(q), so dp/dt = -V'(q), dq/dt = T'(p)
  * newtonian   dp/dt = g(q),    dq/dt = p        (kinetic part fixed p^2/2)

All derivative trees are produced symbolically at construction time, so
linearizations carry no differencing error.  Systems are immutable after
construction and safe to share between threads.
"""

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import expr as ex
from .mat2 import Mat2


class NotAnEquilibrium(Exception):
    pass


class NotTraceFree(Exception):
    pass


class NotApplicable(Exception):
    """An operation was requested for a system class that does not support it."""


class SystemClass(enum.Enum):
    GENERAL = "general"
    SEPARABLE = "separable"
    NEWTONIAN = "newtonian"


class State(NamedTuple):
    p: float
    q: float


class EquilibriumKind(enum.Enum):
    CENTER = "center"
    SADDLE = "saddle"
    RANK1_DEGENERATE = "rank1-degenerate"
    RANK0_ZERO = "rank0-zero"


def _as_expr(e) -> ex.Expr:
    return ex.parse(e) if isinstance(e, str) else e


def _check_vars(e: ex.Expr, allowed: set[str], what: str) -> None:
    extra = ex.variables(e) - allowed
    if extra:
        raise ValueError(
            f"{what} may only use variables {sorted(allowed)}, got {sorted(extra)}"
        )


def _diff(e: ex.Expr, var: str) -> ex.Expr:
    return ex.simplify(ex.differentiate(e, var))


class HamiltonianSystem:
    """A system of one of the three classes, with cached compiled derivatives.

    The uniform accessors ``h_p``, ``h_q``, ``h_pp``, ``h_pq``, ``h_qq`` are
    callables of (p, q) valid for every class; class-specific pieces
    (``t1``, ``v1``, ``g`` ...) exist where the class defines them.
    """

    def __init__(self, kind: SystemClass, exprs: dict[str, ex.Expr]):
        self.kind = kind
        self.exprs = dict(exprs)
        both = ("p", "q")
        if kind is SystemClass.GENERAL:
            h = exprs["h"]
            _check_vars(h, {"p", "q"}, "H")
            hp, hq = _diff(h, "p"), _diff(h, "q")
            self._h = ex.compile_expr(h, both)
            self.h_p = ex.compile_expr(hp, both)
            self.h_q = ex.compile_expr(hq, both)
            self.h_pp = ex.compile_expr(_diff(hp, "p"), both)
            self.h_pq = ex.compile_expr(_diff(hp, "q"), both)
            self.h_qq = ex.compile_expr(_diff(hq, "q"), both)
        elif kind is SystemClass.SEPARABLE:
            t, v = exprs["t"], exprs["v"]
            _check_vars(t, {"p"}, "T")
            _check_vars(v, {"q"}, "V")
            self._t = ex.compile_expr(t, ("p",))
            self._v = ex.compile_expr(v, ("q",))
            self.t1 = ex.compile_expr(_diff(t, "p"), ("p",))
            self.t2 = ex.compile_expr(_diff(_diff(t, "p"), "p"), ("p",))
            self.v1 = ex.compile_expr(_diff(v, "q"), ("q",))
            self.v2 = ex.compile_expr(_diff(_diff(v, "q"), "q"), ("q",))
            self.h_p = lambda p, q: self.t1(p)
            self.h_q = lambda p, q: self.v1(q)
            self.h_pp = lambda p, q: self.t2(p)
            self.h_pq = lambda p, q: 0.0
            self.h_qq = lambda p, q: self.v2(q)
        elif kind is SystemClass.NEWTONIAN:
            g = exprs["g"]
            _check_vars(g, {"q"}, "g")
            self.g = ex.compile_expr(g, ("q",))
            self.g1 = ex.compile_expr(_diff(g, "q"), ("q",))
            self.h_p = lambda p, q: p
            self.h_q = lambda p, q: -self.g(q)
            self.h_pp = lambda p, q: 1.0
            self.h_pq = lambda p, q: 0.0
            self.h_qq = lambda p, q: -self.g1(q)
        else:  # pragma: no cover
            raise ValueError(kind)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def general(h) -> "HamiltonianSystem":
        return HamiltonianSystem(SystemClass.GENERAL, {"h": _as_expr(h)})

    @staticmethod
    def separable(t, v) -> "HamiltonianSystem":
        return HamiltonianSystem(
            SystemClass.SEPARABLE, {"t": _as_expr(t), "v": _as_expr(v)}
        )

    @staticmethod
    def newtonian(g) -> "HamiltonianSystem":
        return HamiltonianSystem(SystemClass.NEWTONIAN, {"g": _as_expr(g)})

    def as_general(self) -> "HamiltonianSystem":
        """Reduce a separable system to the general class via H = T + V."""
        if self.kind is SystemClass.GENERAL:
            return self
        if self.kind is SystemClass.SEPARABLE:
            return HamiltonianSystem.general(
                ex.Add(self.exprs["t"], self.exprs["v"])
            )
        raise ValueError(
            "a newtonian system has no explicit potential; construct the "
            "separable form with T = p^2/2 and a V satisfying V' = -g"
        )

    # -- evaluation --------------------------------------------------------

    def vector_field(self, x: State) -> tuple[float, float]:
        """(dp/dt, dq/dt) at x."""
        if self.kind is SystemClass.SEPARABLE:
            return (-self.v1(x.q), self.t1(x.p))
        if self.kind is SystemClass.NEWTONIAN:
            return (self.g(x.q), x.p)
        return (-self.h_q(x.p, x.q), self.h_p(x.p, x.q))

    def energy(self, x: State) -> float:
        """H(p, q); unavailable for the newtonian class (no explicit V)."""
        if self.kind is SystemClass.GENERAL:
            return self._h(x.p, x.q)
        if self.kind is SystemClass.SEPARABLE:
            return self._t(x.p) + self._v(x.q)
        raise NotApplicable(
            "energy is not evaluable for a newtonian system without its potential"
        )

    def residual(self, x: State) -> float:
        dp, dq = self.vector_field(x)
        return math.hypot(dp, dq)

    def jacobian(self, x: State) -> Mat2:
        """Jacobian of the vector field at any phase point (trace-free)."""
        hpp = self.h_pp(x.p, x.q)
        hpq = self.h_pq(x.p, x.q)
        hqq = self.h_qq(x.p, x.q)
        return Mat2(-hpq, -hqq, hpp, hpq)

    def describe(self) -> str:
        parts = [self.kind.value]
        for key in ("h", "t", "v", "g"):
            if key in self.exprs:
                parts.append(f"{key}={ex.to_string(self.exprs[key])}")
        return " ".join(parts)


@dataclass(frozen=True)
class Equilibrium:
    point: State
    a: Mat2
    kind: EquilibriumKind
    residual: float
    continuum_suspected: bool = False


def classify_equilibrium(a: Mat2, tol: float = 1e-9) -> EquilibriumKind:
    """Classify a trace-free linearization by its determinant and rank.

    Scale-aware thresholds: the determinant test uses tol * (1 + ||A||_F^2)
    so that degeneracy decisions survive rescaling of the system.
    """
    scale = 1.0 + a.frobenius_sq
    if abs(a.trace) > tol * math.sqrt(scale):
        raise NotTraceFree(f"trace {a.trace!r} is not zero within tolerance")
    d = a.det
    det_tol = tol * scale
    if d > det_tol:
        return EquilibriumKind.CENTER
    if d < -det_tol:
        return EquilibriumKind.SADDLE
    if a.max_norm <= tol:
        return EquilibriumKind.RANK0_ZERO
    return EquilibriumKind.RANK1_DEGENERATE


def linearize(
    sys: HamiltonianSystem, x0: State, residual_tol: float = 1e-8
) -> Mat2:
    """Exact linearization at an equilibrium point."""
    if sys.residual(x0) > residual_tol:
        raise NotAnEquilibrium(
            f"vector field at {tuple(x0)} has residual {sys.residual(x0):.3e}"
        )
    return sys.jacobian(x0)


def _newton_root(
    sys: HamiltonianSystem, seed: State, tol: float, max_iter: int = 50
) -> State | None:
    """Damped Newton iteration on the vector field from one grid seed.

    Iterates past ``tol`` down to the rounding floor so accepted roots are
    fixed points of the schemes to full precision, not merely within tol.
    """
    x = seed
    try:
        r = sys.residual(x)
    except ex.DomainError:
        return None
    for _ in range(max_iter):
        if r <= 1e-15 * (1.0 + math.hypot(*x)):
            break
        try:
            f = sys.vector_field(x)
            j = sys.jacobian(x)
        except ex.DomainError:
            return None
        scale = 1.0 + j.frobenius_sq
        if abs(j.det) > 1e-14 * scale:
            step = j.solve((-f[0], -f[1]))
        else:
            # singular Jacobian: minimum-norm least-squares direction
            jm = np.array([[j.a11, j.a12], [j.a21, j.a22]])
            sol = np.linalg.lstsq(jm, np.array([-f[0], -f[1]]), rcond=None)[0]
            step = (float(sol[0]), float(sol[1]))
        if math.hypot(*step) < 1e-15 * (1.0 + math.hypot(*x)):
            break
        # halve the step while the residual grows
        lam = 1.0
        for _ in range(25):
            cand = State(x.p + lam * step[0], x.q + lam * step[1])
            try:
                rc = sys.residual(cand)
            except ex.DomainError:
                rc = math.inf
            if rc < r:
                x, r = cand, rc
                break
            lam *= 0.5
        else:
            break  # no improving step left; the residual is at its floor
    return x if r < tol else None


def find_equilibria(
    sys: HamiltonianSystem,
    box: tuple[tuple[float, float], tuple[float, float]] = ((-5.0, 5.0), (-5.0, 5.0)),
    grid: int = 32,
    tol: float = 1e-10,
) -> list[Equilibrium]:
    """Locate equilibria by Newton iteration seeded on a grid over ``box``.

    Converged points are deduplicated within distance 1e-6 and sorted by
    (q, p).  When more than ``grid`` distinct points converge the set is
    likely a continuum and every result carries ``continuum_suspected``.
    """
    (p_lo, p_hi), (q_lo, q_hi) = box
    if grid < 4:
        raise ValueError("grid must be at least 4")
    if not (p_hi > p_lo and q_hi > q_lo):
        raise ValueError("degenerate search box")
    ps = [p_lo + (p_hi - p_lo) * i / (grid - 1) for i in range(grid)]
    qs = [q_lo + (q_hi - q_lo) * i / (grid - 1) for i in range(grid)]
    margin = 1e-9 * (1.0 + max(abs(p_lo), abs(p_hi), abs(q_lo), abs(q_hi)))
    found: list[State] = []
    for q0 in qs:
        for p0 in ps:
            root = _newton_root(sys, State(p0, q0), tol)
            if root is None:
                continue
            # Newton may wander out of the box; only report roots inside it
            if not (
                p_lo - margin <= root.p <= p_hi + margin
                and q_lo - margin <= root.q <= q_hi + margin
            ):
                continue
            for existing in found:
                if math.hypot(root.p - existing.p, root.q - existing.q) < 1e-6:
                    break
            else:
                found.append(root)
    found.sort(key=lambda s: (s.q, s.p))
    continuum = len(found) > grid
    out = []
    for x in found:
        a = sys.jacobian(x)
        out.append(
            Equilibrium(
                point=x,
                a=a,
                kind=classify_equilibrium(a),
                residual=sys.residual(x),
                continuum_suspected=continuum,
            )
        )
    return out
