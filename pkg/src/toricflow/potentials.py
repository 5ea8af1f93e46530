"""Torus-invariant Kahler potentials on the dense orbit.

A potential is a smooth convex function of the log-radial coordinates x;
the chart layer derives the symplectic form, metric and moment map from
its Hessian.  The flat potential is hand-coded; arbitrary expressions go
through sympy differentiation, so both expose exact-formula derivatives
up to fourth order.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import ConfigError


class Potential:
    m: int

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def third(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def fourth(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class FlatPotential(Potential):
    """Potential of flat complex m-space in log coordinates.

    All derivative tensors are diagonal: the k-th pure derivative of
    exp(2 x_j)/4 is 2^(k-2) exp(2 x_j).
    """

    def __init__(self, m: int):
        self.m = m

    def value(self, x):
        return float(np.sum(np.exp(2.0 * np.asarray(x)) / 4.0))

    def grad(self, x):
        return np.exp(2.0 * np.asarray(x)) / 2.0

    def hess(self, x):
        return np.diag(np.exp(2.0 * np.asarray(x)))

    def third(self, x):
        m = self.m
        t = np.zeros((m, m, m))
        e = 2.0 * np.exp(2.0 * np.asarray(x))
        for j in range(m):
            t[j, j, j] = e[j]
        return t

    def fourth(self, x):
        m = self.m
        t = np.zeros((m, m, m, m))
        e = 4.0 * np.exp(2.0 * np.asarray(x))
        for j in range(m):
            t[j, j, j, j] = e[j]
        return t


class ExpressionPotential(Potential):
    """Potential given as an arithmetic expression in x1..xm.

    Allowed tokens: +, -, *, /, **, exp, log, sqrt, rational literals.
    Derivatives are produced symbolically and compiled once per
    multi-index, so repeated evaluation stays cheap.
    """

    def __init__(self, expr: str, m: int):
        import sympy as sp

        self.m = m
        self.text = expr
        xs = sp.symbols(f"x1:{m + 1}")
        loc = {f"x{i + 1}": xs[i] for i in range(m)}
        loc.update({"exp": sp.exp, "log": sp.log, "sqrt": sp.sqrt})
        try:
            parsed = sp.sympify(expr.replace("^", "**"), locals=loc, rational=True)
        except (sp.SympifyError, SyntaxError, TypeError) as e:
            raise ConfigError(f"cannot parse potential expression: {e}") from e
        extra = parsed.free_symbols - set(xs)
        if extra:
            raise ConfigError(f"unknown symbols in potential: {sorted(map(str, extra))}")
        self._sp = sp
        self._xs = xs
        self._expr = parsed
        self._fns: dict[tuple[int, ...], object] = {}

    def _fn(self, idx: tuple[int, ...]):
        key = tuple(sorted(idx))
        fn = self._fns.get(key)
        if fn is None:
            d = self._expr
            for i in key:
                d = self._sp.diff(d, self._xs[i])
            fn = self._sp.lambdify(self._xs, d, modules="numpy")
            self._fns[key] = fn
        return fn

    def _tensor(self, x, order: int) -> np.ndarray:
        x = [float(v) for v in np.asarray(x)]
        t = np.zeros((self.m,) * order)
        for key in itertools.combinations_with_replacement(range(self.m), order):
            val = float(self._fn(key)(*x))
            for perm in set(itertools.permutations(key)):
                t[perm] = val
        return t

    def value(self, x):
        x = [float(v) for v in np.asarray(x)]
        return float(self._fn(())(*x))

    def grad(self, x):
        return self._tensor(x, 1)

    def hess(self, x):
        return self._tensor(x, 2)

    def third(self, x):
        return self._tensor(x, 3)

    def fourth(self, x):
        return self._tensor(x, 4)


def make_potential(spec: str, m: int) -> Potential:
    """'flat' or an expression in x1..xm."""
    if spec == "flat":
        return FlatPotential(m)
    return ExpressionPotential(spec, m)
