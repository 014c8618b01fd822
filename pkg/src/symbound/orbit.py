"""Nonlinear orbit simulation with boundedness heuristics.

Finite simulation cannot decide boundedness; the verdicts here are labelled
heuristic and are controlled by a step horizon and an escape radius.  Near
an equilibrium a small escape radius keeps nonlinear terms subdominant, so
the linearized analysis governs what these runs should show.
"""

import math
from dataclasses import dataclass

from .schemes import ImplicitSolveFailed, Scheme, step
from .systems import HamiltonianSystem, State


@dataclass(frozen=True)
class Bounded:
    n_steps: int
    max_radius: float


@dataclass(frozen=True)
class Escaped:
    step: int
    radius: float


@dataclass(frozen=True)
class SolverFailed:
    step: int


OrbitVerdict = Bounded | Escaped | SolverFailed


@dataclass
class OrbitTrace:
    initial: State
    scheme: Scheme
    tau: float
    steps: list[int]
    states: list[State]
    verdict: OrbitVerdict


def default_stride(n_max: int) -> int:
    return max(1, n_max // 10_000)


def simulate(
    sys: HamiltonianSystem,
    scheme: Scheme,
    x0: State,
    tau: float,
    n_max: int = 100_000,
    escape_radius: float = 1e6,
    stride: int | None = None,
) -> OrbitTrace:
    """Iterate the scheme from x0; stop on escape, solver failure, or horizon.

    Every stride-th state is recorded plus the final one.  The run is pure
    and deterministic: identical inputs give bit-identical traces.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if stride is None:
        stride = default_stride(n_max)
    if stride < 1:
        raise ValueError("stride must be at least 1")
    r0 = math.hypot(x0.p, x0.q)
    if escape_radius <= r0:
        raise ValueError("escape radius must exceed the initial radius")
    steps = [0]
    states = [x0]
    x = x0
    max_radius = r0

    def record(n: int, y: State) -> None:
        if steps[-1] != n:
            steps.append(n)
            states.append(y)

    for n in range(1, n_max + 1):
        try:
            x = step(scheme, sys, x, tau)
        except ImplicitSolveFailed:
            return OrbitTrace(x0, scheme, tau, steps, states, SolverFailed(n - 1))
        r = math.hypot(x.p, x.q)
        if not math.isfinite(r):
            record(n, x)
            return OrbitTrace(x0, scheme, tau, steps, states, Escaped(n, math.inf))
        if r > max_radius:
            max_radius = r
        if r > escape_radius:
            record(n, x)
            return OrbitTrace(x0, scheme, tau, steps, states, Escaped(n, r))
        if n % stride == 0:
            record(n, x)
    record(n_max, x)
    return OrbitTrace(x0, scheme, tau, steps, states, Bounded(n_max, max_radius))


def hamiltonian_drift(sys: HamiltonianSystem, trace: OrbitTrace) -> float:
    """max |H(state) - H(initial)| over the recorded states.

    Raises NotApplicable for newtonian systems, whose potential is not
    reconstructed.
    """
    h0 = sys.energy(trace.initial)
    drift = 0.0
    for state in trace.states:
        drift = max(drift, abs(sys.energy(state) - h0))
    return drift


def orbit_to_csv(sys: HamiltonianSystem, trace: OrbitTrace) -> str:
    """CSV with columns step,p,q,H; H is left blank when not evaluable."""
    try:
        energies = [repr(sys.energy(s)) for s in trace.states]
    except Exception:  # newtonian systems
        energies = ["" for _ in trace.states]
    verdict = trace.verdict
    if isinstance(verdict, Bounded):
        summary = f"bounded n_steps={verdict.n_steps} max_radius={verdict.max_radius!r}"
    elif isinstance(verdict, Escaped):
        summary = f"escaped step={verdict.step} radius={verdict.radius!r}"
    else:
        summary = f"solver-failed step={verdict.step}"
    lines = [
        f"# verdict(heuristic) = {summary}",
        f"# scheme={trace.scheme.value} tau={trace.tau!r} "
        f"p0={trace.initial.p!r} q0={trace.initial.q!r}",
        "step,p,q,H",
    ]
    for n, state, h in zip(trace.steps, trace.states, energies):
        lines.append(f"{n},{state.p!r},{state.q!r},{h}")
    return "\n".join(lines) + "\n"
