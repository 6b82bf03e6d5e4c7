"""Implication decisions between conjunctions of matrix properties.

``implies(S, U)`` answers whether every left exact category satisfying all
matrix properties in the premise set ``S`` also satisfies those in ``U``.
The engine reduces the question to a reachability problem over a finite set
of column tuples: starting from the columns of a goal matrix, keep adjoining
the extended column of every row-wise interpretation whose left columns are
already present, until the all-zero column appears or the set saturates.

Positive answers carry a replayable certificate (a lex-tableau, the
block-style derivation display); negative answers carry the saturated
column set as a counterexample witness.  Independent brute-force oracles
(:func:`oracle_functional`, :func:`oracle_implies`) re-derive the same
answers by exhaustive enumeration and exist purely to cross-check the
engine; they deliberately share none of its search machinery.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .matrices import (
    EmptyMatrixError,
    Matrix,
    MclexError,
    ParseError,
    canonical_key,
    matrix_from_obj,
    matrix_to_obj,
    normalize,
    triviality,
)


class GuardExceededError(MclexError):
    """Brute-force oracle asked to enumerate an intractable space."""


class TrivialPremiseError(MclexError):
    """oracle_implies has no defined semantics for trivial premises."""


# ---------------------------------------------------------------------------
# Matrix sets and column sets


def _member_key(m: Matrix) -> tuple:
    if m.is_empty:
        return (0,)
    return (1,) + canonical_key(normalize(m))


@dataclass(frozen=True)
class MatrixSet:
    """Finite set of matrices, deduplicated by normal form.

    Iteration order is canonical (sorted by the members' keys), so every
    run sees the same premise ordering and certificates are reproducible.
    """

    members: tuple[Matrix, ...]

    @classmethod
    def of(cls, ms) -> "MatrixSet":
        if isinstance(ms, MatrixSet):
            return ms
        if isinstance(ms, Matrix):
            ms = [ms]
        picked: dict[tuple, Matrix] = {}
        for m in ms:
            picked.setdefault(_member_key(m), m)
        members = sorted(picked.values(), key=canonical_key)
        return cls(tuple(members))

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class ColumnSet:
    """A set of ``arity``-tuples over ``{0, ..., alphabet-1}``."""

    arity: int
    alphabet: int
    tuples: frozenset[tuple[int, ...]]

    def __contains__(self, tup) -> bool:
        return tuple(tup) in self.tuples

    def __len__(self) -> int:
        return len(self.tuples)

    def sorted_tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)


def col(n: Matrix) -> ColumnSet:
    """The column relation of a matrix, over its shrunk alphabet."""
    return ColumnSet(n.rows, n.min_alphabet, frozenset(n.columns()))


# ---------------------------------------------------------------------------
# Derivation engine
#
# Columns are encoded as base-k integers, most significant digit = first
# row.  The workspace is a set of codes plus one set of length-d prefixes
# per depth, which lets the row-by-row backtracking prune any partial
# choice whose left columns cannot be completed inside the workspace.


class _Program:
    """Preprocessed premise matrix for derivation search into ``{0..k-1}``.

    Interpreted rows are grouped by *pattern* (the image of a source row on
    the premise's distinct columns); a pattern carries the set of extended
    entries its maps can produce plus one witness ``(row, map)`` per
    extended entry.  Bitmask tables answer "which patterns put an allowed
    digit in column j" in one AND per column.
    """

    __slots__ = ("mcols", "vecs", "f0mask", "wit", "pats_by_digit",
                 "pats_by_f0", "allpats", "avail", "k", "_per_digit",
                 "nrows", "_origin")

    def __init__(self, m: Matrix, k: int):
        self.k = k
        self.nrows = m.rows
        dcols = sorted(set(zip(*m.entries)))
        red_rows = [tuple(c[i] for c in dcols) for i in range(m.rows)]
        first_idx: dict[tuple[int, ...], int] = {}
        for i, rr in enumerate(red_rows):
            first_idx.setdefault(rr, i)
        self.mcols = len(dcols)
        index: dict[tuple[int, ...], int] = {}
        self.vecs: list[tuple[int, ...]] = []
        self.f0mask: list[int] = []
        self.wit: list[dict[int, tuple]] = []
        self._origin: list[dict[int, int]] = []
        for rr in sorted(first_idx):
            wi = first_idx[rr]
            dom = sorted(set(rr) | {0})
            for assign in itertools.product(range(k), repeat=len(dom)):
                fm = dict(zip(dom, assign))
                vec = tuple(fm[v] for v in rr)
                f0 = fm[0]
                pi = index.get(vec)
                if pi is None:
                    pi = index[vec] = len(self.vecs)
                    self.vecs.append(vec)
                    self.f0mask.append(0)
                    self.wit.append({})
                    self._origin.append({})
                if f0 not in self.wit[pi]:
                    self.wit[pi][f0] = (wi, tuple(fm.get(v, 0) for v in range(m.alphabet)))
                    self.f0mask[pi] |= 1 << f0
                self._origin[pi][f0] = self._origin[pi].get(f0, 0) | 1 << wi
        npat = len(self.vecs)
        self.allpats = (1 << npat) - 1
        # pats_by_digit[j] maps a digit set (bitmask over k) to the patterns
        # whose column-j digit lies in the set.
        per_digit = [[0] * k for _ in range(self.mcols)]
        for pi, vec in enumerate(self.vecs):
            for j in range(self.mcols):
                per_digit[j][vec[j]] |= 1 << pi
        self._per_digit = per_digit
        self.pats_by_digit = None
        if k <= 10:
            self.pats_by_digit = []
            for j in range(self.mcols):
                table = [0] * (1 << k)
                for dm in range(1, 1 << k):
                    low = dm & -dm
                    table[dm] = table[dm ^ low] | per_digit[j][low.bit_length() - 1]
                self.pats_by_digit.append(table)
        self.pats_by_f0 = [0] * k
        for pi in range(npat):
            fm = self.f0mask[pi]
            for v in range(k):
                if fm >> v & 1:
                    self.pats_by_f0[v] |= 1 << pi
        self.avail = [v for v in range(k) if self.pats_by_f0[v]]

    def pats_for(self, j: int, digitmask: int) -> int:
        if self.pats_by_digit is not None:
            return self.pats_by_digit[j][digitmask]
        out = 0
        per = self._per_digit[j]
        dm = digitmask
        while dm:
            low = dm & -dm
            out |= per[low.bit_length() - 1]
            dm ^= low
        return out

    def f0_pats_without_row(self, row: int) -> list[int]:
        """Per extended value, patterns producible by some row other than
        ``row``.  Only meaningful when the premise has distinct rows."""
        out = [0] * self.k
        bit = 1 << row
        for pi, byf0 in enumerate(self._origin):
            for v, rows in byf0.items():
                if rows & ~bit:
                    out[v] |= 1 << pi
        return out


@lru_cache(maxsize=4096)
def _premise_program(m: Matrix, k: int) -> _Program:
    return _Program(m, k)


class _ZeroFound(Exception):
    pass


class _Workspace:
    """Column-code set with per-depth prefix masks and exclusion counts.

    ``lmask[d]`` is a bitmask over ``k**d`` marking length-``d`` prefixes
    of member codes (a partial left column whose prefix is unmarked cannot
    be completed inside the workspace).  ``miss[d][p]`` counts non-member
    codes with prefix ``p``: once zero, every completion of ``p`` is a
    member and the column needs no further tracking.
    """

    def __init__(self, n: int, k: int, seed):
        self.n, self.k = n, k
        self.codes: set[int] = set()
        self.mask = 0
        self.lmask: list[int] = [0] * n
        self.miss: list[list[int]] = [[k ** n]]
        for d in range(1, n):
            self.miss.append([k ** (n - d)] * (k ** d))
        self._pows = [k ** (n - d) for d in range(n + 1)]
        for c in seed:
            self.add(c)

    def add(self, code: int) -> bool:
        if code in self.codes:
            return False
        self.codes.add(code)
        self.mask |= 1 << code
        for d in range(1, self.n):
            p = code // self._pows[d]
            self.lmask[d] |= 1 << p
            self.miss[d][p] -= 1
        self.miss[0][0] -= 1
        return True

    def remove(self, code: int) -> None:
        self.codes.discard(code)
        self.mask &= ~(1 << code)
        for d in range(1, self.n):
            p = code // self._pows[d]
            self.miss[d][p] += 1
            if self.miss[d][p] == self._pows[d]:
                self.lmask[d] &= ~(1 << p)
        self.miss[0][0] += 1

    def snapshot(self) -> "_Workspace":
        dup = object.__new__(_Workspace)
        dup.n, dup.k = self.n, self.k
        dup.codes = set(self.codes)
        dup.mask = self.mask
        dup.lmask = list(self.lmask)
        dup.miss = [list(row) for row in self.miss]
        dup._pows = self._pows
        return dup


def _box_codes(f0masks, k: int):
    """All digit tuples through a sequence of digit masks, with codes."""
    out = [(0, ())]
    for fm in f0masks:
        digits = [v for v in range(k) if fm >> v & 1]
        out = [(c * k + v, ds + (v,)) for c, ds in out for v in digits]
    return out


def _sweep(ws: _Workspace, base: _Workspace, mi: int, prog: _Program,
           records, stamp, want_zero_only: bool) -> bool:
    """One pass of all derivations from one premise, against ``base``.

    The search walks tuples of patterns depth-first.  A column is tracked
    while its prefix might still complete to a non-member; viable patterns
    at each depth are intersected per tracked column with one bitmask
    operation.  The extended entries decouple from column viability, so a
    complete pattern tuple contributes the whole box of its extended-entry
    choices at once, and when no tracked columns remain the box over all
    available entries is added without further search.
    """
    n, k = ws.n, ws.k
    kfull = (1 << k) - 1
    added = [False]
    pats_by_f0 = prog.pats_by_f0
    f0mask = prog.f0mask
    vecs = prog.vecs
    wit = prog.wit

    def emit(code: int, digits, pat_path) -> None:
        # pat_path has one pattern per level; bulk levels store -1 and get
        # the first pattern offering the digit.
        ws.add(code)
        added[0] = True
        if records is not None:
            w = []
            for lvl, d in enumerate(digits):
                pi = pat_path[lvl]
                if pi < 0:
                    pm = pats_by_f0[d]
                    pi = (pm & -pm).bit_length() - 1
                w.append(wit[pi][d])
            records[code] = (mi, tuple(w), next(stamp))
        if want_zero_only and code == 0:
            raise _ZeroFound

    avail_mask = 0
    for v in prog.avail:
        avail_mask |= 1 << v

    def flush(fs, pat_path) -> None:
        # Complete (or column-free) pattern tuple: add its box of codes.
        for code, digits in _box_codes(fs, k):
            if code not in ws.codes:
                emit(code, digits, pat_path)

    def go(depth: int, tracked, fs, pat_path) -> None:
        last = depth == n - 1
        lm = base.mask if last else base.lmask[depth + 1]
        vm = prog.allpats
        for j, p in tracked:
            digs = (lm >> (p * k)) & kfull
            if not digs:
                return
            vm &= prog.pats_for(j, digs)
            if not vm:
                return
        if last:
            boxes = None
            for v in range(k):
                pm = pats_by_f0[v] & vm
                if pm:
                    pi = (pm & -pm).bit_length() - 1
                    if boxes is None:
                        boxes = _box_codes(fs, k)
                    for code, digits in boxes:
                        full = code * k + v
                        if full not in ws.codes:
                            emit(full, digits + (v,), pat_path + [pi])
            return
        ms = base.miss[depth + 1]
        tail = n - 1 - depth
        rem = vm
        while rem:
            low = rem & -rem
            rem ^= low
            pi = low.bit_length() - 1
            vec = vecs[pi]
            ntr = []
            for j, p in tracked:
                c2 = p * k + vec[j]
                if ms[c2]:
                    ntr.append((j, c2))
            nfs = fs + [f0mask[pi]]
            npath = pat_path + [pi]
            if not ntr:
                flush(nfs + [avail_mask] * tail, npath + [-1] * tail)
            else:
                go(depth + 1, ntr, nfs, npath)

    if base.miss[0][0] == 0:
        return False  # base is the full space; nothing can be new
    if not prog.mcols:
        return False
    go(0, [(j, 0) for j in range(prog.mcols)], [], [])
    return added[0]


def _saturate(premises, n: int, k: int, seed, *, want_zero_only=False,
              record=False, single_pass=False):
    """Close ``seed`` under derivations from ``premises`` inside ``k**n``.

    Returns ``(codes, zero_reached, records)``.  With ``want_zero_only``
    the search stops as soon as code 0 is derived (the result set is then
    partial).  With ``single_pass`` derivations are evaluated against the
    seed only, giving one application of the expansion operator.  Records
    map each derived code to ``(premise_idx, witnesses, stamp)`` where
    witnesses are ``(row_index, full_map)`` pairs per target row.
    """
    ws = _Workspace(n, k, seed)
    records: dict[int, tuple] | None = {} if record else None
    if want_zero_only and 0 in ws.codes:
        return ws.codes, True, records

    prepped = [(mi, _premise_program(m, k)) for mi, m in enumerate(premises)]
    stamp = itertools.count(1)
    base = ws.snapshot() if single_pass else ws
    try:
        while True:
            any_added = False
            for mi, prog in prepped:
                if _sweep(ws, base, mi, prog, records, stamp, want_zero_only):
                    any_added = True
            if single_pass or not any_added:
                break
    except _ZeroFound:
        pass
    return ws.codes, 0 in ws.codes, records


def _one_step_target(prog: _Program, ws: _Workspace, tdigits,
                     pats_by_f0=None) -> bool:
    """Is a column with the given digits derivable in one step from ``ws``?"""
    n, k = ws.n, ws.k
    kfull = (1 << k) - 1
    if pats_by_f0 is None:
        pats_by_f0 = prog.pats_by_f0
    if any(not pats_by_f0[d] for d in tdigits):
        return False

    def go(depth: int, tracked) -> bool:
        last = depth == n - 1
        lm = ws.mask if last else ws.lmask[depth + 1]
        vm = prog.allpats & pats_by_f0[tdigits[depth]]
        for j, p in tracked:
            digs = (lm >> (p * k)) & kfull
            if not digs:
                return False
            vm &= prog.pats_for(j, digs)
            if not vm:
                return False
        if last:
            return True
        ms = ws.miss[depth + 1]
        rem = vm
        while rem:
            low = rem & -rem
            rem ^= low
            vec = prog.vecs[low.bit_length() - 1]
            ntr = []
            for j, p in tracked:
                c2 = p * k + vec[j]
                if ms[c2]:
                    ntr.append((j, c2))
            if not ntr or go(depth + 1, ntr):
                return True
        return False

    if not prog.mcols:
        return False
    return go(0, [(j, 0) for j in range(prog.mcols)])


def _encode(tup, k: int) -> int:
    code = 0
    for v in tup:
        code = code * k + v
    return code


def _decode(code: int, n: int, k: int) -> tuple[int, ...]:
    out = [0] * n
    for i in range(n - 1, -1, -1):
        out[i] = code % k
        code //= k
    return tuple(out)


def _goal_space(n: Matrix) -> tuple[int, int, set[int]]:
    k = n.min_alphabet
    seed = {_encode(c, k) for c in n.columns()}
    return n.rows, k, seed


def _check_premises(members) -> None:
    for m in members:
        if m.is_empty:
            raise EmptyMatrixError("premise matrices must be non-empty here")


def expand_once(s, r: ColumnSet) -> ColumnSet:
    """One application of the expansion operator: ``r`` plus every extended
    column derivable from ``r`` alone (no chaining within the call)."""
    members = MatrixSet.of(s).members
    _check_premises(members)
    k, n = r.alphabet, r.arity
    seed = {_encode(t, k) for t in r.tuples}
    codes, _, _ = _saturate(members, n, k, seed, single_pass=True)
    return ColumnSet(n, k, frozenset(_decode(c, n, k) for c in codes))


def closure(s, n: Matrix) -> ColumnSet:
    """Least superset of the goal's columns closed under premise derivations.

    The workspace alphabet is the goal's shrunk alphabet; the answer to the
    implication question is unchanged by widening it, and the smaller
    alphabet keeps the interpretation space minimal.
    """
    members = MatrixSet.of(s).members
    _check_premises(members)
    rows, k, seed = _goal_space(n)
    codes, _, _ = _saturate(members, rows, k, seed)
    return ColumnSet(rows, k, frozenset(_decode(c, rows, k) for c in codes))


# ---------------------------------------------------------------------------
# Certificates


@dataclass(frozen=True)
class RowInterpretation:
    """One target row of a derivation step.

    ``matrix`` indexes the tableau's premise list, ``row`` a row of that
    matrix, and ``map`` is the value map as a list indexed by source value.
    """

    matrix: int
    row: int
    map: tuple[int, ...]


@dataclass(frozen=True)
class DerivationStep:
    """A block of a lex-tableau: one interpreted-row choice per target row.

    The derived column is ``(map_1[0], ..., map_n[0])``; the left columns
    are recomputed from the premise rows and maps during verification.
    """

    rows: tuple[RowInterpretation, ...]
    derived: tuple[int, ...]


@dataclass(frozen=True)
class LexTableau:
    """Replayable positive certificate for one goal matrix."""

    premise: tuple[Matrix, ...]
    goal: Matrix
    steps: tuple[DerivationStep, ...]


def step_left_columns(step: DerivationStep, premise) -> list[tuple[int, ...]]:
    """The left columns a step consumes, one per source-matrix column."""
    src = premise[step.rows[0].matrix]
    out = []
    for j in range(src.cols):
        out.append(tuple(ri.map[src.entries[ri.row][j]] for ri in step.rows))
    return out


def _witness_left_codes(members, mi: int, wit, k: int) -> list[int]:
    src = members[mi]
    out = []
    for j in range(src.cols):
        code = 0
        for wi, fm in wit:
            code = code * k + fm[src.entries[wi][j]]
        out.append(code)
    return out


def _build_tableau(members, goal: Matrix, n: int, k: int, seed, records) -> LexTableau:
    needed: dict[int, tuple] = {}
    stack = [0]
    seen = {0}
    while stack:
        code = stack.pop()
        rec = records[code]
        needed[code] = rec
        for lc in _witness_left_codes(members, rec[0], rec[1], k):
            if lc not in seed and lc not in seen:
                seen.add(lc)
                stack.append(lc)
    steps = []
    for code, (mi, wit, _stamp) in sorted(needed.items(), key=lambda kv: kv[1][2]):
        rows = tuple(RowInterpretation(mi, wi, fm) for wi, fm in wit)
        steps.append(DerivationStep(rows, _decode(code, n, k)))
    return LexTableau(tuple(members), goal, tuple(steps))


class ShortCircuit(Enum):
    EMPTY_IN_PREMISE = "empty_in_premise"
    TRIVIAL_IN_PREMISE = "trivial_in_premise"


class FailureKind(Enum):
    EMPTY_MATRIX_IN_CONCLUSION = "empty_matrix_in_conclusion"
    SATURATION_WITHOUT_ZERO = "saturation_without_zero"


@dataclass(frozen=True)
class FailureWitness:
    kind: FailureKind
    goal: Matrix | None = None
    saturated: ColumnSet | None = None


@dataclass(frozen=True)
class Verdict:
    """Outcome of an implication decision.

    Certificates are present iff the decision holds and was settled by the
    derivation search (one tableau per goal matrix, in canonical goal
    order); short-circuited positives carry a tag instead.
    """

    holds: bool
    certificates: tuple[LexTableau, ...] | None = None
    failure_witness: FailureWitness | None = None
    short_circuit: ShortCircuit | None = None

    @property
    def certificate(self) -> LexTableau | None:
        if self.certificates and len(self.certificates) == 1:
            return self.certificates[0]
        return None


def implies(s, u) -> Verdict:
    """Decide whether premise properties entail every conclusion property.

    The steps: an empty matrix in the premise settles positively (its
    property already collapses everything); otherwise an empty matrix in
    the conclusion settles negatively; a trivial premise matrix settles
    positively; otherwise each conclusion matrix is checked by closing its
    column set under premise derivations and testing for the zero column.
    """
    prem = MatrixSet.of(s)
    conc = MatrixSet.of(u)
    # Step 0: empty matrices decide immediately.
    if any(m.is_empty for m in prem):
        return Verdict(True, short_circuit=ShortCircuit.EMPTY_IN_PREMISE)
    for n in conc:
        if n.is_empty:
            return Verdict(
                False,
                failure_witness=FailureWitness(
                    FailureKind.EMPTY_MATRIX_IN_CONCLUSION, goal=n
                ),
            )
    # Step 1: a trivial premise entails every non-empty goal.
    if any(triviality(m).is_trivial_nonempty for m in prem):
        return Verdict(True, short_circuit=ShortCircuit.TRIVIAL_IN_PREMISE)
    # Step 2: close each goal's columns under premise derivations.
    certs = []
    for n in conc:
        rows, k, seed = _goal_space(n)
        if 0 in seed:
            certs.append(LexTableau(prem.members, n, ()))
            continue
        codes, found, records = _saturate(
            prem.members, rows, k, seed, want_zero_only=True, record=True
        )
        if not found:
            sat = ColumnSet(rows, k, frozenset(_decode(c, rows, k) for c in codes))
            return Verdict(
                False,
                failure_witness=FailureWitness(
                    FailureKind.SATURATION_WITHOUT_ZERO, goal=n, saturated=sat
                ),
            )
        certs.append(_build_tableau(prem.members, n, rows, k, seed, records))
    # Step 3: every goal reached the zero column.
    return Verdict(True, certificates=tuple(certs))


def implies_bool(s, u) -> bool:
    """Same decision as :func:`implies` without building certificates."""
    prem = MatrixSet.of(s)
    conc = MatrixSet.of(u)
    if any(m.is_empty for m in prem):
        return True
    if any(n.is_empty for n in conc):
        return False
    if any(triviality(m).is_trivial_nonempty for m in prem):
        return True
    for n in conc:
        rows, k, seed = _goal_space(n)
        if 0 in seed:
            continue
        _, found, _ = _saturate(prem.members, rows, k, seed, want_zero_only=True)
        if not found:
            return False
    return True


def equivalent(m1: Matrix, m2: Matrix) -> bool:
    """Mutual implication: the two matrices define the same class."""
    return implies_bool([m1], [m2]) and implies_bool([m2], [m1])


# ---------------------------------------------------------------------------
# Tableau verification


def tableau_to_obj(t: LexTableau) -> dict:
    return {
        "premise": [matrix_to_obj(m) for m in t.premise],
        "goal": matrix_to_obj(t.goal),
        "steps": [
            {
                "rows": [
                    {"matrix": ri.matrix, "row": ri.row, "map": list(ri.map)}
                    for ri in st.rows
                ],
                "derived": list(st.derived),
            }
            for st in t.steps
        ],
    }


def tableau_from_obj(obj) -> LexTableau:
    if not isinstance(obj, dict):
        raise ParseError("tableau JSON must be an object")
    try:
        premise = tuple(matrix_from_obj(o) for o in obj["premise"])
        goal = matrix_from_obj(obj["goal"])
        steps = []
        for st in obj["steps"]:
            rows = tuple(
                RowInterpretation(int(r["matrix"]), int(r["row"]), tuple(int(v) for v in r["map"]))
                for r in st["rows"]
            )
            steps.append(DerivationStep(rows, tuple(int(v) for v in st["derived"])))
        return LexTableau(premise, goal, tuple(steps))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad tableau JSON: {exc}") from exc


def check_tableau(t) -> str | None:
    """Replay a tableau; return None if it verifies, else a diagnostic."""
    if isinstance(t, dict):
        try:
            t = tableau_from_obj(t)
        except ParseError as exc:
            return str(exc)
    goal = t.goal
    if goal.is_empty:
        return "goal is an empty matrix"
    n = goal.rows
    kbound = goal.alphabet
    available = set(goal.columns())
    if not t.steps:
        return None if (0,) * n in available else "no steps and no zero column in goal"
    for si, step in enumerate(t.steps):
        if len(step.rows) != n:
            return f"step {si}: expected {n} rows, got {len(step.rows)}"
        mi = step.rows[0].matrix
        if any(ri.matrix != mi for ri in step.rows):
            return f"step {si}: rows drawn from more than one premise matrix"
        if not 0 <= mi < len(t.premise):
            return f"step {si}: premise index {mi} out of range"
        src = t.premise[mi]
        if src.is_empty:
            return f"step {si}: premise matrix {mi} is empty"
        for ri in step.rows:
            if not 0 <= ri.row < src.rows:
                return f"step {si}: row index {ri.row} out of range"
            if len(ri.map) != src.alphabet:
                return f"step {si}: map not total on alphabet of size {src.alphabet}"
            if any(not 0 <= v < kbound for v in ri.map):
                return f"step {si}: map value outside goal alphabet"
        for lc in step_left_columns(step, t.premise):
            if lc not in available:
                return f"step {si}: left column {lc} not available"
        derived = tuple(ri.map[0] for ri in step.rows)
        if derived != step.derived:
            return f"step {si}: derived column does not match the maps"
        if derived in available:
            return f"step {si}: derived column {derived} is not new"
        available.add(derived)
    if t.steps[-1].derived != (0,) * n:
        return "final derived column is not the zero column"
    return None


def verify_tableau(t) -> bool:
    """True iff the tableau replays cleanly down to the zero column."""
    return check_tableau(t) is None


# ---------------------------------------------------------------------------
# Brute-force oracles (kept independent of the derivation engine)


def oracle_functional(m: Matrix, x: int) -> bool:
    """Exhaustively test functionality in an ``x``-element set.

    A matrix is dysfunctional iff two interpreted rows agree on every left
    entry but differ on the extended entry.  Enumerates every map for every
    pair of rows; no search pruning.

    Raises:
        GuardExceededError: ``x > 4``.
        EmptyMatrixError: ``m`` has no columns.
    """
    if x > 4:
        raise GuardExceededError("functionality oracle limited to sets of size <= 4")
    if m.is_empty:
        raise EmptyMatrixError("functionality oracle needs a non-empty matrix")
    if x <= 1:
        return True
    per_row: list[dict[tuple[int, ...], set[int]]] = []
    for row in m.entries:
        table: dict[tuple[int, ...], set[int]] = {}
        dom = sorted(set(row) | {0})
        for assign in itertools.product(range(x), repeat=len(dom)):
            f = dict(zip(dom, assign))
            table.setdefault(tuple(f[v] for v in row), set()).add(f[0])
        per_row.append(table)
    for t1, t2 in itertools.product(per_row, repeat=2):
        for vec, f0s in t1.items():
            g0s = t2.get(vec)
            if g0s is None:
                continue
            if len(f0s | g0s) >= 2:
                return False
    return True


def _naive_sharp(m: Matrix, n: int, x: int, rel: frozenset) -> bool:
    """Is ``rel`` closed under every n-row reduction of ``m``?  Plain loops."""
    rows = sorted(set(m.entries))
    maps = list(itertools.product(range(x), repeat=m.alphabet))
    cols = range(m.cols)
    for choice in itertools.product(rows, repeat=n):
        for fs in itertools.product(maps, repeat=n):
            ok = True
            for j in cols:
                if tuple(fs[i][choice[i][j]] for i in range(n)) not in rel:
                    ok = False
                    break
            if ok and tuple(f[0] for f in fs) not in rel:
                return False
    return True


def _naive_closed(goal: Matrix, x: int, rel: frozenset) -> bool:
    """Is ``rel`` closed under plain (single-map) interpretations of goal?"""
    n = goal.rows
    for f in itertools.product(range(x), repeat=goal.alphabet):
        ok = True
        for j in range(goal.cols):
            if tuple(f[goal.entries[i][j]] for i in range(n)) not in rel:
                ok = False
                break
        if ok and (f[0],) * n not in rel:
            return False
    return True


def oracle_implies(s, u, x: int) -> bool:
    """Semantic brute force: check every relation on an ``x``-element set.

    For each goal with ``n`` rows, enumerates all ``2**(x**n)`` n-ary
    relations and tests that each one closed under every premise reduction
    is also closed under the goal.  Exists as an independent cross-check of
    :func:`implies`; premises must be non-empty and non-trivial (the
    correspondence only holds there).

    Raises:
        GuardExceededError: some goal has ``x**rows > 16``.
        TrivialPremiseError: a premise matrix is trivial or empty.
    """
    prem = MatrixSet.of(s)
    conc = MatrixSet.of(u)
    for m in prem:
        if m.is_empty or triviality(m).is_trivial_nonempty:
            raise TrivialPremiseError(
                "semantic oracle requires non-empty, non-trivial premises"
            )
    for goal in conc:
        if goal.is_empty:
            raise GuardExceededError("semantic oracle cannot handle empty goals")
        n = goal.rows
        space = x ** n
        if space > 16:
            raise GuardExceededError(f"relation space 2**{space} too large")
        universe = list(itertools.product(range(x), repeat=n))
        for bits in range(1 << space):
            rel = frozenset(t for i, t in enumerate(universe) if bits >> i & 1)
            if all(_naive_sharp(m, n, x, rel) for m in prem):
                if not _naive_closed(goal, x, rel):
                    return False
    return True
