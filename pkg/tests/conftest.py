"""Shared test helpers: random expression trees and finite differences."""

import math

import numpy as np

from symbound import expr as ex

SAFE_FUNCS = ("sin", "cos", "tanh", "exp", "sinh", "cosh", "sqrt", "log")


def random_tree(rng: np.random.Generator, depth: int, var_names=("x", "y")) -> ex.Expr:
    """Random expression tree of bounded depth over the given variables.

    Constants stay small and pow exponents are small integers so that most
    draws evaluate without domain errors; callers reject the rest.
    """
    if depth <= 0 or rng.uniform() < 0.25:
        if rng.uniform() < 0.5:
            return ex.Const(float(np.round(rng.uniform(-3.0, 3.0), 3)))
        return ex.Var(str(rng.choice(var_names)))
    kind = rng.integers(0, 8)
    if kind == 0:
        return ex.Add(random_tree(rng, depth - 1, var_names),
                      random_tree(rng, depth - 1, var_names))
    if kind == 1:
        return ex.Sub(random_tree(rng, depth - 1, var_names),
                      random_tree(rng, depth - 1, var_names))
    if kind == 2:
        return ex.Mul(random_tree(rng, depth - 1, var_names),
                      random_tree(rng, depth - 1, var_names))
    if kind == 3:
        return ex.Div(random_tree(rng, depth - 1, var_names),
                      random_tree(rng, depth - 1, var_names))
    if kind == 4:
        return ex.Neg(random_tree(rng, depth - 1, var_names))
    if kind == 5:
        return ex.Pow(random_tree(rng, depth - 1, var_names),
                      ex.Const(float(rng.integers(0, 4))))
    name = str(rng.choice(SAFE_FUNCS))
    return ex.Func(name, random_tree(rng, depth - 1, var_names))


def random_bindings(rng: np.random.Generator, var_names=("x", "y")) -> dict:
    return {name: float(rng.uniform(-2.0, 2.0)) for name in var_names}


def try_eval(tree: ex.Expr, bindings: dict) -> float | None:
    """Evaluate, returning None on domain errors or wild magnitudes."""
    try:
        value = ex.evaluate(tree, bindings)
    except ex.DomainError:
        return None
    if not math.isfinite(value) or abs(value) > 1e6:
        return None
    return value


def central_diff(tree: ex.Expr, bindings: dict, var: str, h: float = 1e-5):
    """Central finite difference of an expression, None when ill-posed."""
    up = dict(bindings)
    dn = dict(bindings)
    up[var] = bindings[var] + h
    dn[var] = bindings[var] - h
    fu = try_eval(tree, up)
    fd = try_eval(tree, dn)
    if fu is None or fd is None:
        return None
    return (fu - fd) / (2.0 * h)
