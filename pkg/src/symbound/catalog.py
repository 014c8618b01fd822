"""Named example systems used by the verification suites and tests."""

from .systems import HamiltonianSystem


def harmonic() -> HamiltonianSystem:
    return HamiltonianSystem.separable("p^2/2", "q^2/2")


def harmonic_newtonian() -> HamiltonianSystem:
    return HamiltonianSystem.newtonian("-q")


def pendulum() -> HamiltonianSystem:
    return HamiltonianSystem.separable("p^2/2", "-cos(q)")


def pendulum_newtonian() -> HamiltonianSystem:
    return HamiltonianSystem.newtonian("-sin(q)")


def saddle() -> HamiltonianSystem:
    """Inverted quadratic potential: every equilibrium is a saddle."""
    return HamiltonianSystem.separable("p^2/2", "-q^2/2")


def free_particle() -> HamiltonianSystem:
    """g = 0: a continuum of rank-1 equilibria along p = 0."""
    return HamiltonianSystem.newtonian("0")


def shear() -> HamiltonianSystem:
    """H = p q: a saddle with H_pq coupling, implicit-midpoint territory."""
    return HamiltonianSystem.general("p*q")


def zero() -> HamiltonianSystem:
    """H identically zero: every phase point is an equilibrium (rank 0)."""
    return HamiltonianSystem.general("0")


def zero_separable() -> HamiltonianSystem:
    """T = V = 0, same rank-0 linearization but separable, so the explicit
    schemes apply."""
    return HamiltonianSystem.separable("0", "0")


CATALOG = {
    "harmonic": harmonic,
    "harmonic-newtonian": harmonic_newtonian,
    "pendulum": pendulum,
    "pendulum-newtonian": pendulum_newtonian,
    "saddle": saddle,
    "free-particle": free_particle,
    "shear": shear,
    "zero": zero,
    "zero-separable": zero_separable,
}
