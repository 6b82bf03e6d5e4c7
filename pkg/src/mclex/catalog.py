"""Named matrices that recur in the matrix-property literature.

These are the standard small examples: the Mal'tsev matrix, the diagonal
family (majority, near-unanimity), minority, the arithmetical matrix, and
a few syntactical refinements of classical Mal'tsev conditions.  They make
handy premises, goals and regression anchors.
"""

from __future__ import annotations

from .matrices import Matrix, from_grid


def maltsev() -> Matrix:
    """Difunctionality; defines Mal'tsev categories."""
    return from_grid([[0, 1, 1], [1, 1, 0]])


def diagonal(n: int) -> Matrix:
    """``n x n`` matrix with 1 on the diagonal, 0 elsewhere.

    For n <= 2 the property is trivial; n = 3 gives majority categories and
    n >= 4 the n-ary near-unanimity properties.
    """
    return from_grid([[1 if i == j else 0 for j in range(n)] for i in range(n)])


def majority() -> Matrix:
    return diagonal(3)


def minority() -> Matrix:
    return from_grid([[0, 1, 1], [1, 0, 1], [1, 1, 0]])


def arithmetical() -> Matrix:
    """Pixley's condition: Mal'tsev together with majority."""
    return from_grid([[0, 1, 1], [1, 1, 0], [0, 1, 0]])


def maltsev_nu4() -> Matrix:
    """Canonical representative of Mal'tsev with 4-ary near-unanimity."""
    return from_grid([[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 1, 1], [1, 0, 1, 1]])


def decomposable_refinement() -> Matrix:
    """Refinement of the Mal'tsev condition for directly decomposable
    congruences, as it falls out of the refinement procedure."""
    return from_grid(
        [[0, 0, 0, 1, 1], [1, 0, 1, 0, 1], [1, 0, 0, 1, 1], [1, 1, 0, 1, 0]]
    )


def decomposable_refinement_ordered() -> Matrix:
    """The doubly lexi-ordered arrangement of the same matrix."""
    return from_grid(
        [[0, 0, 0, 1, 1], [0, 0, 1, 1, 1], [0, 1, 1, 0, 1], [1, 0, 1, 1, 0]]
    )


def decomposable_refinement_truncated() -> Matrix:
    """The ordered refinement matrix with its last column dropped; it
    defines the same class and is the canonical 4x4 representative."""
    return from_grid([[0, 0, 0, 1], [0, 0, 1, 1], [0, 1, 1, 0], [1, 0, 1, 1]])


def normal_projections() -> Matrix:
    """Refinement of the condition for normal local projections (3x6)."""
    return from_grid(
        [[0, 0, 0, 1, 1, 1], [0, 1, 1, 0, 0, 1], [1, 0, 1, 0, 1, 1]]
    )


def ternary_example() -> Matrix:
    """A 3x5 matrix over {0,1,2} used as a running worked example."""
    return from_grid([[1, 1, 0, 2, 2], [0, 0, 1, 1, 0], [2, 0, 1, 2, 1]])


def ternary_example_canonical() -> Matrix:
    """Canonical 3x4 representative of the class of ternary_example()."""
    return from_grid([[0, 0, 1, 1], [0, 1, 0, 1], [1, 2, 2, 0]])


def cross_box_pairs() -> tuple[tuple[Matrix, Matrix], ...]:
    """Four pairs (3-row ternary, equivalent 4-row binary) of classes that
    need both a third alphabet value and a fourth row, depending on the box."""
    threes = [
        [[0, 0, 0, 1, 1], [0, 1, 1, 0, 1], [1, 0, 2, 2, 1]],
        [[0, 0, 0, 0, 1, 1, 1], [0, 1, 1, 2, 0, 0, 2], [1, 0, 2, 2, 0, 2, 1]],
        [[0, 0, 0, 0, 0, 1, 1, 1], [0, 1, 1, 1, 2, 0, 1, 2], [1, 0, 1, 2, 2, 0, 2, 0]],
        [[0, 0, 0, 0, 1, 1, 1, 1], [0, 1, 1, 1, 0, 0, 0, 1], [1, 0, 1, 2, 0, 1, 2, 2]],
    ]
    fours = [
        [[0, 0, 0, 1, 1], [0, 0, 1, 0, 1], [0, 1, 1, 1, 0], [1, 1, 0, 0, 1]],
        [[0, 0, 0, 1, 1], [0, 0, 1, 0, 1], [0, 1, 0, 1, 0], [1, 0, 1, 1, 0]],
        [[0, 0, 0, 0, 1, 1], [0, 0, 0, 1, 0, 1], [0, 1, 1, 0, 1, 0], [1, 0, 1, 1, 1, 0]],
        [
            [0, 0, 0, 0, 0, 1, 1, 1],
            [0, 0, 0, 1, 1, 0, 0, 1],
            [0, 1, 1, 0, 1, 0, 1, 0],
            [1, 0, 1, 1, 0, 1, 1, 0],
        ],
    ]
    return tuple((from_grid(a), from_grid(b)) for a, b in zip(threes, fours))
