"""Small walks and spectral systems used in the docs and the test suite."""

from __future__ import annotations

import math

from .spectral import SpectralSystem
from .walks import LabeledWalk, cayley_walk

_S2 = 1.0 / math.sqrt(2.0)


def five_vertex_walk() -> LabeledWalk:
    """Five vertices, three labels; two balanced self-pairs (0,0) and (4,4),
    so the commutant of its Cuntz dilation is two-dimensional."""
    edges = {
        (0, "l3"): (1, _S2),
        (0, "l2"): (4, _S2),
        (1, "l1"): (2, 1.0),
        (2, "l1"): (3, 1.0),
        (3, "l2"): (2, _S2),
        (3, "l1"): (1, _S2),
        (4, "l1"): (4, 1.0),
    }
    return LabeledWalk((0, 1, 2, 3, 4), ("l1", "l2", "l3"), edges)


def six_vertex_walk() -> LabeledWalk:
    """The five-vertex walk with the terminal loop at 4 split into a 2-cycle
    through a sixth vertex; commutant dimension three."""
    edges = {
        (0, "l3"): (1, _S2),
        (0, "l2"): (4, _S2),
        (1, "l1"): (2, 1.0),
        (2, "l1"): (3, 1.0),
        (3, "l2"): (2, _S2),
        (3, "l1"): (1, _S2),
        (4, "l1"): (5, 1.0),
        (5, "l1"): (4, 1.0),
    }
    return LabeledWalk((0, 1, 2, 3, 4, 5), ("l1", "l2", "l3"), edges)


def phased_triangle_walk() -> LabeledWalk:
    """Two-label walk on a 3-cycle whose phases break the loop-product
    balance: every minimal self-pair except the diagonal one is unbalanced,
    and the commutant is trivial (dimension one)."""
    edges = {
        (1, "l1"): (2, _S2),
        (2, "l1"): (3, 1j * _S2),
        (3, "l1"): (1, -_S2),
        (1, "l2"): (3, _S2),
        (2, "l2"): (1, _S2),
        (3, "l2"): (2, _S2),
    }
    return LabeledWalk((1, 2, 3), ("l1", "l2"), edges)


def cycle_walk(m: int) -> LabeledWalk:
    """Random walk on the cyclic group Z/m with equal-weight steps +1 and -1.

    For m = 2 the two steps coincide as group elements, which is allowed: the
    coisometry machinery never needs distinct targets per label.
    """
    table = [[(a + b) % m for b in range(m)] for a in range(m)]
    return cayley_walk(table, {"+1": 1 % m, "-1": (m - 1) % m})


def quarter_fourier_system() -> SpectralSystem:
    """Scale 4 with digits {0, 2}: the classical fractal measure whose
    spectrum is generated by the frequencies {0, 1}."""
    return SpectralSystem(4, (0, 2), (0, 1), (1.0 + 0.0j, 1.0 + 0.0j))


def lebesgue_system() -> SpectralSystem:
    """Scale 2 with digits {0, 1}: Lebesgue measure on the unit interval.
    Has two minimal invariant sets, {0} and {-1}."""
    return SpectralSystem(2, (0, 1), (0, 1), (1.0 + 0.0j, 1.0 + 0.0j))
