"""
Worked examples

Data of the two-variable example with a 3-dimensional state space and a
7-dimensional input space (a strictly contractive, observable output pair
(C, A_gamma) whose kernels all coincide with K_S for a single S), plus a
few small textbook colligations used as fixtures and CLI demos.
"""

from __future__ import annotations

import numpy as np

from .colligation import BallPoint, Colligation, OperatorTuple, OutputPair
from .kernels import SchurEvaluator
from .numerics import ComplexMatrix

# Pairs (C, A_gamma) are contractive exactly for |gamma| <= this value.
CONTRACTIVITY_THRESHOLD = 1.0 / (2.0 * np.sqrt(2.0))

EXAMPLE_DIM_X = 3
EXAMPLE_DIM_U = 7
EXAMPLE_DIM_Y = 1


def example_output() -> ComplexMatrix:
    """C = [1/2, 0, 0]."""
    return np.array([[0.5, 0.0, 0.0]], dtype=np.complex128)


def example_state(gamma: float = 0.0) -> OperatorTuple:
    """The tuple A_gamma = (A_gamma_1, A_gamma_2)."""
    a1 = np.array(
        [
            [0.0, 0.25, 0.0],
            [0.0, 0.0, 0.0],
            [0.5 + gamma, 0.0, 0.0],
        ]
    )
    a2 = np.array(
        [
            [0.0, 0.0, 0.25],
            [0.5 - gamma, 0.0, 0.0],
            [0.0, 0.0, 0.0],
        ]
    )
    return OperatorTuple((a1, a2))


def example_pair(gamma: float = 0.0) -> OutputPair:
    """The output pair (C, A_gamma)."""
    return OutputPair(example_output(), example_state(gamma))


def example_input_blocks() -> tuple[ComplexMatrix, ComplexMatrix]:
    """B_0 = (B_01, B_02), each 3 x 7."""
    s15 = np.sqrt(15.0) / 4.0
    r3 = 1.0 / (2.0 * np.sqrt(3.0))
    b1 = np.zeros((3, 7))
    b1[0, 1] = s15
    b1[1, 2] = 1.0
    b1[2, 0] = -r3
    b1[2, 3] = np.sqrt(2.0 / 3.0)

    b2 = np.zeros((3, 7))
    b2[0, 4] = s15
    b2[1, 0] = -r3
    b2[1, 3] = -1.0 / np.sqrt(6.0)
    b2[1, 5] = 1.0 / np.sqrt(2.0)
    b2[2, 6] = 1.0
    return b1.astype(np.complex128), b2.astype(np.complex128)


def example_feedthrough() -> ComplexMatrix:
    """D = [sqrt(3)/2, 0, 0, 0, 0, 0, 0]."""
    d = np.zeros((1, 7), dtype=np.complex128)
    d[0, 0] = np.sqrt(3.0) / 2.0
    return d


def example_colligation() -> Colligation:
    """The coisometric 7 x 10 colligation U_0 built on (C, A_0)."""
    return Colligation(example_state(0.0), example_input_blocks(), example_output(), example_feedthrough())


def example_closed_form(point: BallPoint) -> ComplexMatrix:
    """
    Closed form of the transfer function of U_0.

    S(l) = [(12 - 4 l1 l2)/sqrt(3), sqrt(15) l1, l1^2, l1 l2/sqrt(6),
            sqrt(15) l2, l1 l2/sqrt(2), l2^2] / (2 (4 - l1 l2))
    """
    l1, l2 = point.coords
    p = l1 * l2
    row = np.array(
        [
            (12.0 - 4.0 * p) / np.sqrt(3.0),
            np.sqrt(15.0) * l1,
            l1 * l1,
            p / np.sqrt(6.0),
            np.sqrt(15.0) * l2,
            p / np.sqrt(2.0),
            l2 * l2,
        ],
        dtype=np.complex128,
    )
    return (row / (2.0 * (4.0 - p)))[None, :]


def example_resolvent_row(point: BallPoint) -> ComplexMatrix:
    """C (I - l1 A_gamma_1 - l2 A_gamma_2)^-1 = [4, l1, l2] / (2 (4 - l1 l2)), for every gamma."""
    l1, l2 = point.coords
    return (np.array([4.0, l1, l2], dtype=np.complex128) / (2.0 * (4.0 - l1 * l2)))[None, :]


def example_schur() -> SchurEvaluator:
    """The example function as a closed-form evaluator."""
    return SchurEvaluator.from_function(
        example_closed_form, 2, EXAMPLE_DIM_Y, EXAMPLE_DIM_U, label="example33"
    )


def example_degenerate_direction() -> ComplexMatrix:
    """Unit vector u with S(l) u = 0 for the example function."""
    u = np.zeros((7, 1), dtype=np.complex128)
    u[3, 0] = np.sqrt(3.0) / 2.0
    u[5, 0] = -0.5
    return u


def example_complement_witness() -> ComplexMatrix:
    """(e_3; -e_2)/sqrt(2) in C^3 + C^3, orthogonal to the canonical subspace of (C, A_0)."""
    h = np.zeros((6, 1), dtype=np.complex128)
    h[2, 0] = 1.0 / np.sqrt(2.0)
    h[4, 0] = -1.0 / np.sqrt(2.0)
    return h


def permutation_colligation(d: int = 2) -> Colligation:
    """
    Unitary colligation with A = 0, B_j = e_j*, C = 1, D = 0.

    Its transfer function is S(l) = [l_1, ..., l_d].
    """
    a = OperatorTuple(tuple(np.zeros((1, 1)) for _ in range(d)))
    b = tuple(np.eye(d)[j:j + 1, :] for j in range(d))
    return Colligation(a, b, np.ones((1, 1)), np.zeros((1, d)))


def coordinate_pair(d: int = 2, scale: float = 1.0) -> OutputPair:
    """The pair (scale, 0) with a one-dimensional state space."""
    return OutputPair(np.full((1, 1), scale), OperatorTuple.zeros(d, 1))


def shift_colligation() -> Colligation:
    """The one-variable unitary colligation [[0, 1], [1, 0]] realizing S(l) = l."""
    return Colligation.from_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]), d=1, dim_x=1)
