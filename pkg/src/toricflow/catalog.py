"""Ready-made moment polytopes used across tests and docs."""

from __future__ import annotations

from .polytope import Polytope


def orthant(m: int) -> Polytope:
    """Moment polytope of flat complex m-space: the nonnegative orthant."""
    facets = []
    for i in range(m):
        lam = [0] * m
        lam[i] = 1
        facets.append((lam, 0))
    return Polytope.from_data(m, facets)


def kp2_canonical() -> Polytope:
    """Moment polytope of the canonical line bundle over the projective
    plane: four facets in R^3, unbounded in the fiber direction."""
    return Polytope.from_data(
        3,
        [
            ((0, 0, 1), 0),
            ((1, 0, 1), 0),
            ((0, 1, 1), 0),
            ((-1, -1, 1), -1),
        ],
    )
