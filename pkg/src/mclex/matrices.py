"""Integer matrices over a finite alphabet and class-preserving normal forms.

The basic object is a dense ``n x m`` grid with entries in ``{0, ..., k-1}``.
Every such grid encodes a closure condition on n-ary relations, and through
it a family of left exact categories; two grids that differ only by
duplication/permutation of rows or columns, per-row renaming of nonzero
values, or widening of the alphabet encode the same condition.  Everything
in this module is invariant for that condition: validation, normalisation,
linkage analysis, triviality detection and finite products.

Matrices are immutable values; all operations return fresh objects.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum


class MclexError(Exception):
    """Base class for all library errors."""


class BadShapeError(MclexError):
    """Entry grid does not match the declared row/column counts."""


class EntryOutOfRangeError(MclexError):
    """Some entry falls outside {0, ..., alphabet-1}."""


class EmptyMatrixError(MclexError):
    """Operation requires at least one column."""


class SameRowError(MclexError):
    """Linkage needs two distinct rows."""


class ParseError(MclexError):
    """Malformed matrix / tableau / poset input."""


class NormalizationError(MclexError):
    """The alternating sort loop failed to stabilise (should not happen)."""


@dataclass(frozen=True)
class Matrix:
    """An ``rows x cols`` grid over ``{0, ..., alphabet-1}``.

    ``cols == 0`` encodes an empty matrix; ``rows >= 1`` and
    ``alphabet >= 1`` always hold.  ``alphabet`` may exceed
    ``max(entries) + 1``: widening the alphabet does not change the
    property the matrix encodes.
    """

    rows: int
    cols: int
    alphabet: int
    entries: tuple[tuple[int, ...], ...]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> list[tuple[int, ...]]:
        return [tuple(col) for col in zip(*self.entries)] if self.cols else []

    @property
    def is_empty(self) -> bool:
        return self.cols == 0

    @property
    def max_entry(self) -> int:
        """Largest entry, or -1 for an empty matrix."""
        return max(max(r) for r in self.entries) if self.cols else -1

    @property
    def min_alphabet(self) -> int:
        """Smallest legal alphabet for these entries (1 for an empty matrix)."""
        return max(self.max_entry + 1, 1)

    def __str__(self) -> str:
        if self.is_empty:
            return f"<empty {self.rows}x0>"
        if self.max_entry <= 9:
            return "\n".join("".join(str(v) for v in r) for r in self.entries)
        return "\n".join(" ".join(str(v) for v in r) for r in self.entries)


def make_matrix(rows: int, cols: int, alphabet: int, grid) -> Matrix:
    """Validate and build a matrix.

    Raises:
        BadShapeError: grid dimensions disagree with ``rows``/``cols`` or
            ``rows < 1`` / ``alphabet < 1`` / ``cols < 0``.
        EntryOutOfRangeError: some entry is negative or ``>= alphabet``.
    """
    if rows < 1 or alphabet < 1 or cols < 0:
        raise BadShapeError(f"illegal shape ({rows}, {cols}, {alphabet})")
    entries = tuple(tuple(int(v) for v in r) for r in grid)
    if len(entries) != rows or any(len(r) != cols for r in entries):
        raise BadShapeError(f"grid is not {rows}x{cols}")
    for r in entries:
        for v in r:
            if v < 0 or v >= alphabet:
                raise EntryOutOfRangeError(f"entry {v} outside 0..{alphabet - 1}")
    return Matrix(rows, cols, alphabet, entries)


def from_grid(grid, alphabet: int | None = None) -> Matrix:
    """Build a matrix from a row-major grid, inferring the shape.

    With ``alphabet=None`` the alphabet is shrunk to ``max(entries) + 1``.
    """
    entries = tuple(tuple(int(v) for v in r) for r in grid)
    rows = len(entries)
    cols = len(entries[0]) if entries else 0
    k = alphabet
    if k is None:
        k = max((v for r in entries for v in r), default=0) + 1
    return make_matrix(rows, cols, max(k, 1), entries)


def empty_matrix(rows: int = 1) -> Matrix:
    return Matrix(rows, 0, 1, tuple(() for _ in range(rows)))


def canonical_key(m: Matrix) -> tuple:
    """Ordering key: (rows, cols, greatest entry, column-major reading).

    The last component juxtaposes the transposed columns, so comparing keys
    compares matrices the way canonical representatives are selected.
    """
    flat = tuple(v for col in m.columns() for v in col)
    return (m.rows, m.cols, m.max_entry, flat)


# ---------------------------------------------------------------------------
# Normal form


def _relabel_row(row: tuple[int, ...]) -> tuple[int, ...]:
    # Nonzero values renamed to 1, 2, ... in first-occurrence order; 0 fixed.
    mapping = {0: 0}
    nxt = 1
    out = []
    for v in row:
        if v not in mapping:
            mapping[v] = nxt
            nxt += 1
        out.append(mapping[v])
    return tuple(out)


def _dedup_sorted(items) -> list:
    return sorted(set(items))


def _grid_step(rows: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """One pass: dedup rows/cols, relabel rows, sort columns, sort rows."""
    rows = _dedup_sorted(rows)
    cols = _dedup_sorted(zip(*rows))
    rows = [tuple(c[i] for c in cols) for i in range(len(rows))]
    rows = [_relabel_row(r) for r in rows]
    cols = _dedup_sorted(zip(*rows))
    rows = _dedup_sorted(tuple(c[i] for c in cols) for i in range(len(rows)))
    return rows


def _normalize_fallback(rows: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    # Exhaustive search over row and column permutations for a fixpoint of
    # _grid_step; only reachable for tiny matrices if the sort loop cycles.
    rows = _dedup_sorted(rows)
    n, m = len(rows), len(rows[0])
    if math.factorial(n) * math.factorial(m) > 500_000:
        raise NormalizationError("sort loop cycled on a large matrix")
    best = None
    for rperm in itertools.permutations(range(n)):
        for cperm in itertools.permutations(range(m)):
            cand = [_relabel_row(tuple(rows[i][j] for j in cperm)) for i in rperm]
            if _grid_step(cand) == cand:
                if best is None or _flat_key(cand) < _flat_key(best):
                    best = list(cand)
    if best is None:
        raise NormalizationError("no stable doubly sorted arrangement found")
    return best


def _flat_key(rows) -> tuple:
    return tuple(v for col in zip(*rows) for v in col)


def normalize(m: Matrix) -> Matrix:
    """Canonical-ish member of the matrix's class at the same or smaller size.

    Removes duplicate rows and columns, renames nonzero values per row to
    first-occurrence order, sorts rows and columns lexicographically to a
    joint fixpoint, and shrinks the alphabet to ``max(entry) + 1``.

    Raises:
        EmptyMatrixError: the matrix has no columns.
    """
    if m.is_empty:
        raise EmptyMatrixError("cannot normalize an empty matrix")
    rows = list(m.entries)
    seen: set[tuple] = set()
    cap = m.rows * m.cols + 2
    for _ in range(cap):
        new = _grid_step(rows)
        if new == rows:
            break
        key = tuple(new)
        if key in seen:
            rows = _normalize_fallback(new)
            break
        seen.add(key)
        rows = new
    else:
        rows = _normalize_fallback(rows)
    k = max(v for r in rows for v in r) + 1
    return Matrix(len(rows), len(rows[0]), k, tuple(rows))


def is_doubly_lexi_ordered(m: Matrix) -> bool:
    """True iff rows and columns are both lexicographically non-decreasing."""
    rows = m.entries
    if any(rows[i] > rows[i + 1] for i in range(m.rows - 1)):
        return False
    cols = m.columns()
    return all(cols[j] <= cols[j + 1] for j in range(m.cols - 1))


# ---------------------------------------------------------------------------
# Linkage and triviality


@dataclass(frozen=True)
class LinkagePartition:
    """Join of the kernel partitions of two rows, over column indices.

    Two columns fall in one class iff they are connected by alternating
    equal-entry steps inside the two rows.  Column indices are 0-based.
    """

    row_pair: tuple[int, int]
    classes: tuple[tuple[int, ...], ...]

    def class_of(self, col: int) -> tuple[int, ...]:
        for cls in self.classes:
            if col in cls:
                return cls
        raise IndexError(col)


def linkage_classes(m: Matrix, i: int, j: int) -> LinkagePartition:
    """Partition the columns by linkage between rows ``i`` and ``j``.

    Raises:
        SameRowError: ``i == j``.
        EmptyMatrixError: no columns to partition.
    """
    if i == j:
        raise SameRowError("linkage needs two distinct rows")
    if m.is_empty:
        raise EmptyMatrixError("no columns to partition")
    parent = list(range(m.cols))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for row in (m.entries[i], m.entries[j]):
        first: dict[int, int] = {}
        for c, v in enumerate(row):
            if v in first:
                union(first[v], c)
            else:
                first[v] = c
    groups: dict[int, list[int]] = {}
    for c in range(m.cols):
        groups.setdefault(find(c), []).append(c)
    classes = tuple(tuple(g) for g in sorted(groups.values()))
    return LinkagePartition((i, j), classes)


class Triviality(Enum):
    NON_TRIVIAL = "non_trivial"
    TRIVIAL_NON_EMPTY = "trivial_non_empty"
    EMPTY = "empty"


@dataclass(frozen=True)
class TrivialityWitness:
    """Checkable reason a matrix forces every model to collapse.

    ``kind`` is ``"row_without_zero"`` (``rows`` holds one index) or
    ``"unlinked_zero_rows"`` (``rows`` holds the two row indices whose zero
    entries fall in disjoint linkage classes).
    """

    kind: str
    rows: tuple[int, ...]


@dataclass(frozen=True)
class TrivialityReport:
    verdict: Triviality
    witness: TrivialityWitness | None = None

    @property
    def is_trivial_nonempty(self) -> bool:
        return self.verdict is Triviality.TRIVIAL_NON_EMPTY


def triviality(m: Matrix) -> TrivialityReport:
    """Decide whether the matrix property collapses categories to preorders.

    A non-empty matrix is non-trivial iff every row contains a 0 and, for
    every pair of distinct rows, some linkage class contains a 0 position
    of each.  The existential form makes the check independent of which 0
    entry is picked in either row.
    """
    if m.is_empty:
        return TrivialityReport(Triviality.EMPTY)
    zeros = [frozenset(c for c, v in enumerate(r) if v == 0) for r in m.entries]
    for i, z in enumerate(zeros):
        if not z:
            return TrivialityReport(
                Triviality.TRIVIAL_NON_EMPTY, TrivialityWitness("row_without_zero", (i,))
            )
    for i in range(m.rows):
        for j in range(i + 1, m.rows):
            part = linkage_classes(m, i, j)
            linked = any(
                not zeros[i].isdisjoint(cls) and not zeros[j].isdisjoint(cls)
                for cls in part.classes
            )
            if not linked:
                return TrivialityReport(
                    Triviality.TRIVIAL_NON_EMPTY,
                    TrivialityWitness("unlinked_zero_rows", (i, j)),
                )
    return TrivialityReport(Triviality.NON_TRIVIAL)


# ---------------------------------------------------------------------------
# Products


def product(ms) -> Matrix:
    """Stack matrices into the single matrix expressing their conjunction.

    Rows are the concatenation of all row blocks; there is one column per
    choice of a column in each factor (choices enumerated with the last
    factor varying fastest).  The empty product is the 1x1 zero matrix.
    """
    ms = list(ms)
    if not ms:
        return make_matrix(1, 1, 1, [[0]])
    rows = sum(m.rows for m in ms)
    alphabet = max(m.alphabet for m in ms)
    factor_cols = [m.columns() for m in ms]
    stacked = [
        tuple(itertools.chain.from_iterable(choice))
        for choice in itertools.product(*factor_cols)
    ]
    entries = tuple(
        tuple(col[i] for col in stacked) for i in range(rows)
    ) if stacked else tuple(() for _ in range(rows))
    return Matrix(rows, len(stacked), alphabet, entries)


# ---------------------------------------------------------------------------
# Text and JSON formats


def format_matrix(m: Matrix) -> str:
    """Digit-grid text form, one row per line (alphabet at most 10)."""
    if m.is_empty:
        raise EmptyMatrixError("empty matrix has no text form; use JSON")
    if m.max_entry > 9:
        raise MclexError("text format needs single-digit entries; use JSON")
    return "\n".join("".join(str(v) for v in r) for r in m.entries)


def parse_matrix(text: str) -> Matrix:
    """Parse a digit-grid; the alphabet is inferred as ``max(entry) + 1``."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ParseError("no rows in matrix text")
    grid = []
    for ln in lines:
        if not ln.isdigit():
            raise ParseError(f"matrix rows must be digit strings: {ln!r}")
        grid.append([int(ch) for ch in ln])
    if len({len(r) for r in grid}) != 1:
        raise ParseError("rows have unequal lengths")
    return from_grid(grid)


def format_matrix_set(ms) -> str:
    """Blank-line separated text form of several matrices."""
    return "\n\n".join(format_matrix(m) for m in ms)


def parse_matrix_set(text: str) -> list[Matrix]:
    blocks = [b for b in text.replace("\r\n", "\n").split("\n\n") if b.strip()]
    if not blocks:
        raise ParseError("no matrices in input")
    return [parse_matrix(b) for b in blocks]


def matrix_to_obj(m: Matrix) -> dict:
    return {"k": m.alphabet, "rows": [list(r) for r in m.entries]}


def matrix_from_obj(obj) -> Matrix:
    if not isinstance(obj, dict) or "k" not in obj or "rows" not in obj:
        raise ParseError('matrix JSON needs "k" and "rows"')
    rows = obj["rows"]
    if not isinstance(rows, list) or not rows:
        raise ParseError('"rows" must be a non-empty list of rows')
    try:
        cols = len(rows[0])
        return make_matrix(len(rows), cols, int(obj["k"]), rows)
    except (TypeError, ValueError, MclexError) as exc:
        raise ParseError(f"bad matrix JSON: {exc}") from exc
