"""Classification of matrix properties within a dimension box.

``enumerate_matrices`` streams the filtered candidates of a box (distinct
sorted rows and columns, per-row value order, optional exclusion of the
degenerate sources); ``classify`` groups any candidate stream into classes
under mutual implication and computes the inclusion order with its Hasse
reduction; ``count_table`` reproduces the class-count rows; and
``box_intersect`` matches classes across boxes semantically.

Classification never compares two candidates syntactically: class identity
is always mutual implication, accelerated by a fingerprint of implications
against a fixed panel of reference matrices (a class invariant) and by
memoised, optionally disk-backed, pairwise decisions.
"""

from __future__ import annotations

import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cache
from pathlib import Path

from . import catalog
from .decision import (
    MatrixSet,
    _one_step_target,
    _premise_program,
    _Workspace,
    implies_bool,
)
from .matrices import (
    Matrix,
    MclexError,
    ParseError,
    Triviality,
    canonical_key,
    empty_matrix,
    format_matrix,
    matrix_from_obj,
    matrix_to_obj,
    normalize,
    triviality,
)


class NotAPartialOrderError(MclexError):
    """The claimed order relation is not antisymmetric."""


# ---------------------------------------------------------------------------
# Enumeration


@dataclass(frozen=True)
class EnumerationFilter:
    """Box bounds plus the class-preserving candidate filters.

    Every matrix class represented in the box keeps at least one
    representative under the structural filters (dedup, double lexi order,
    row value order); the two exclusion flags drop the sources of the two
    degenerate classes, which the classification conventions re-add.
    """

    rows: int
    cols: int
    alphabet: int
    dedup: bool = True
    doubly_lexi: bool = True
    row_value_order: bool = True
    exclude_zero_column: bool = True
    exclude_trivial: bool = False


def _digit_tables(n: int, k: int) -> list[tuple[int, ...]]:
    return [
        tuple((code // k ** (n - 1 - i)) % k for i in range(n))
        for code in range(k ** n)
    ]


def _enum_fixed_rows(n: int, k: int, m_max: int, *, row_value_order: bool,
                     exclude_zero_column: bool, exclude_trivial: bool):
    """DFS over strictly increasing column codes with row-order pruning."""
    space = k ** n
    digits = _digit_tables(n, k)
    start = 1 if exclude_zero_column else 0
    rows_acc: list[list[int]] = [[] for _ in range(n)]
    # decided[i] is True once row i is strictly below row i+1.
    decided = [False] * (n - 1)
    seen_max = [0] * n

    def emit() -> Matrix | None:
        entries = tuple(tuple(r) for r in rows_acc)
        m = Matrix(n, len(entries[0]), max(v for r in entries for v in r) + 1, entries)
        if exclude_trivial and triviality(m).verdict is not Triviality.NON_TRIVIAL:
            return None
        return m

    def rec(next_code: int):
        for c in range(next_code, space):
            d = digits[c]
            undo_pairs = []
            undo_vals = []
            ok = True
            for i in range(n - 1):
                if not decided[i]:
                    if d[i] < d[i + 1]:
                        decided[i] = True
                        undo_pairs.append(i)
                    elif d[i] > d[i + 1]:
                        ok = False
                        break
            if ok and row_value_order:
                for i in range(n):
                    v = d[i]
                    if v > seen_max[i]:
                        if v == seen_max[i] + 1:
                            undo_vals.append((i, seen_max[i]))
                            seen_max[i] = v
                        else:
                            ok = False
                            break
            if ok:
                for i in range(n):
                    rows_acc[i].append(d[i])
                if all(decided):
                    out = emit()
                    if out is not None:
                        yield out
                if len(rows_acc[0]) < m_max:
                    yield from rec(c + 1)
                for i in range(n):
                    rows_acc[i].pop()
            for i in undo_pairs:
                decided[i] = False
            for i, old in undo_vals:
                seen_max[i] = old

    if m_max >= 1:
        yield from rec(start)


def _filter_predicate(f: EnumerationFilter, m: Matrix) -> bool:
    if f.dedup and (len(set(m.entries)) != m.rows or len(set(m.columns())) != m.cols):
        return False
    if f.doubly_lexi:
        rows = m.entries
        if any(rows[i] > rows[i + 1] for i in range(m.rows - 1)):
            return False
        cols = m.columns()
        if any(cols[j] > cols[j + 1] for j in range(m.cols - 1)):
            return False
    if f.row_value_order:
        for row in m.entries:
            mx = 0
            for v in row:
                if v > mx:
                    if v != mx + 1:
                        return False
                    mx = v
    if f.exclude_zero_column and m.cols and any(
        all(v == 0 for v in col) for col in m.columns()
    ):
        return False
    if f.exclude_trivial and triviality(m).verdict is not Triviality.NON_TRIVIAL:
        return False
    return True


def enumerate_matrices(f: EnumerationFilter):
    """Yield each filtered matrix of the box exactly once.

    The standard filter set uses a column-subset DFS (columns are built in
    strictly increasing lexicographic order, which enforces distinct sorted
    columns, with early rejection of unsortable rows).  Disabling the
    structural filters falls back to brute-force generation and is only
    supported for small boxes.
    """
    if f.rows < 1 or f.alphabet < 1:
        raise MclexError("need rows >= 1 and alphabet >= 1")
    if f.cols == 0:
        yield empty_matrix()
        return
    if f.dedup and f.doubly_lexi:
        for n in range(1, f.rows + 1):
            yield from _enum_fixed_rows(
                n,
                f.alphabet,
                f.cols,
                row_value_order=f.row_value_order,
                exclude_zero_column=f.exclude_zero_column,
                exclude_trivial=f.exclude_trivial,
            )
        return
    total = sum(
        f.alphabet ** (n * m)
        for n in range(1, f.rows + 1)
        for m in range(1, f.cols + 1)
    )
    if total > 2_000_000:
        raise MclexError("non-standard filters need brute force; box too large")
    for n in range(1, f.rows + 1):
        for m in range(1, f.cols + 1):
            for flat in itertools.product(range(f.alphabet), repeat=n * m):
                grid = [flat[i * m:(i + 1) * m] for i in range(n)]
                mat = Matrix(n, m, max(flat) + 1, tuple(tuple(r) for r in grid))
                if _filter_predicate(f, mat):
                    yield mat


# ---------------------------------------------------------------------------
# Persistent decision cache


def matrix_cache_key(m: Matrix) -> str:
    if m.is_empty:
        return "E"
    nm = normalize(m)
    return f"{nm.alphabet}|" + ";".join(
        ",".join(str(v) for v in row) for row in nm.entries
    )


def pair_cache_key(premise_members, goal: Matrix) -> str:
    left = "+".join(sorted(matrix_cache_key(m) for m in premise_members))
    return left + "=>" + matrix_cache_key(goal)


class DecisionCache:
    """Disk-backed map from implication keys to booleans.

    Values are deterministic, so merging concurrent caches is a plain
    union; saves take an advisory lock, re-merge the on-disk content and
    replace the file atomically.
    """

    def __init__(self, path: str | os.PathLike | None = None):
        self.data: dict[str, bool] = {}
        self.path = Path(path) if path is not None else None
        if self.path is not None and self.path.exists():
            self.load(self.path)

    def get(self, key: str) -> bool | None:
        return self.data.get(key)

    def put(self, key: str, value: bool) -> None:
        self.data[key] = value

    def load(self, path) -> None:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ParseError("cache file must hold a JSON object")
        self.data.update({str(k): bool(v) for k, v in raw.items()})

    def save(self, path=None) -> None:
        path = Path(path) if path is not None else self.path
        if path is None:
            return
        lock = path.with_suffix(path.suffix + ".lock")
        with open(lock, "w") as lk:
            try:
                import fcntl

                fcntl.flock(lk, fcntl.LOCK_EX)
            except (ImportError, OSError):
                pass
            merged = dict(self.data)
            if path.exists():
                try:
                    with open(path, encoding="utf-8") as fh:
                        on_disk = json.load(fh)
                    merged = {**on_disk, **merged}
                except (OSError, json.JSONDecodeError):
                    pass
            tmp = path.with_suffix(path.suffix + ".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(merged, fh, sort_keys=True)
            os.replace(tmp, path)
            self.data = {str(k): bool(v) for k, v in merged.items()}


class ImplicationOracle:
    """Memoised single-premise implication decisions over normal forms."""

    def __init__(self, cache: DecisionCache | None = None):
        self.memo: dict[tuple, bool] = {}
        self.cache = cache

    def le(self, a: Matrix, b: Matrix) -> bool:
        """mclex{a} included in mclex{b}; both args should be normal forms."""
        key = (a.entries, b.entries)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        ckey = None
        if self.cache is not None:
            ckey = pair_cache_key([a], b)
            got = self.cache.get(ckey)
            if got is not None:
                self.memo[key] = got
                return got
        val = implies_bool([a], [b])
        self.memo[key] = val
        if self.cache is not None:
            self.cache.put(ckey, val)
        return val

    def equivalent(self, a: Matrix, b: Matrix) -> bool:
        return self.le(a, b) and self.le(b, a)


# ---------------------------------------------------------------------------
# Reference panel fingerprints


@cache
def _panel() -> tuple[Matrix, ...]:
    mats = [
        catalog.maltsev(),
        catalog.majority(),
        catalog.diagonal(4),
        catalog.diagonal(5),
        catalog.minority(),
        catalog.arithmetical(),
        catalog.maltsev_nu4(),
        catalog.decomposable_refinement_truncated(),
        catalog.normal_projections(),
        catalog.ternary_example_canonical(),
    ] + [pair[0] for pair in catalog.cross_box_pairs()]
    return tuple(normalize(m) for m in mats)


def class_fingerprint(m: Matrix, oracle: ImplicationOracle) -> tuple[bool, ...]:
    """Implications both ways against the fixed panel; a class invariant."""
    panel = _panel()
    up = tuple(oracle.le(m, p) for p in panel)
    down = tuple(oracle.le(p, m) for p in panel)
    return up + down


def _fp_worker(entries: tuple[tuple[int, ...], ...]) -> tuple[bool, ...]:
    m = Matrix(len(entries), len(entries[0]), max(v for r in entries for v in r) + 1, entries)
    return class_fingerprint(m, ImplicationOracle())


# ---------------------------------------------------------------------------
# Classes and posets


@dataclass(frozen=True)
class MatrixClass:
    """An equivalence class of matrices under mutual implication.

    ``members`` holds the classified representatives (not every matrix of
    the class); ``canonical`` minimises (rows, cols, greatest entry,
    column-major reading) among them.  Degenerate classes are tagged
    ``"preorder"``, ``"all_lex"`` or ``"terminal"``.
    """

    canonical: Matrix
    members: tuple[Matrix, ...]
    degenerate: str | None = None


@dataclass(frozen=True)
class ClassPoset:
    """Classes plus their inclusion order and its transitive reduction.

    ``order`` is reflexive and transitive over class indices; ``hasse``
    regenerates it under reflexive-transitive closure.
    """

    classes: tuple[MatrixClass, ...]
    order: frozenset[tuple[int, int]]
    hasse: frozenset[tuple[int, int]]

    def nondegenerate_indices(self) -> list[int]:
        return [i for i, c in enumerate(self.classes) if c.degenerate is None]


_PREORDER_CANON = Matrix(1, 1, 2, ((1,),))
_ALL_LEX_CANON = Matrix(1, 1, 1, ((0,),))
_TERMINAL_CANON = empty_matrix()


class _Classifier:
    def __init__(self, oracle: ImplicationOracle, keep_members: bool = True):
        self.oracle = oracle
        self.keep_members = keep_members
        self.canon: list[Matrix] = []
        self.members: list[list[Matrix]] = []
        self.degenerate: list[str | None] = []
        self.min_cols: list[int] = []
        self.buckets: dict[tuple, list[int]] = {}
        self.degen_ids: dict[str, int] = {}

    def _new_class(self, canon: Matrix, member: Matrix, tag: str | None,
                   fp: tuple | None) -> int:
        cid = len(self.canon)
        self.canon.append(canon)
        self.members.append([member] if self.keep_members else [canon])
        self.degenerate.append(tag)
        self.min_cols.append(member.cols)
        if fp is not None:
            self.buckets.setdefault(fp, []).append(cid)
        return cid

    def _degen(self, tag: str, member: Matrix) -> int:
        cid = self.degen_ids.get(tag)
        if cid is None:
            canon = {
                "preorder": _PREORDER_CANON,
                "all_lex": _ALL_LEX_CANON,
                "terminal": _TERMINAL_CANON,
            }[tag]
            cid = self._new_class(canon, canon, tag, None)
            self.degen_ids[tag] = cid
        if self.keep_members and member.entries != self.canon[cid].entries:
            self.members[cid].append(member)
        self.min_cols[cid] = min(self.min_cols[cid], member.cols)
        return cid

    def degenerate_tag(self, m: Matrix) -> str | None:
        if m.is_empty:
            return "terminal"
        if any(all(v == 0 for v in col) for col in m.columns()):
            return "all_lex"
        if triviality(m).is_trivial_nonempty:
            return "preorder"
        return None

    def add(self, m: Matrix, *, normalized: bool = False,
            fp: tuple | None = None) -> int:
        """Classify one candidate; returns its class index."""
        tag = self.degenerate_tag(m)
        if tag is not None:
            return self._degen(tag, m)
        nm = m if normalized else normalize(m)
        if fp is None:
            fp = class_fingerprint(nm, self.oracle)
        for cid in self.buckets.get(fp, ()):
            if self.oracle.equivalent(nm, self.canon[cid]):
                if self.keep_members:
                    self.members[cid].append(m)
                self.min_cols[cid] = min(self.min_cols[cid], m.cols)
                if canonical_key(nm) < canonical_key(self.canon[cid]):
                    self.canon[cid] = nm
                return cid
        return self._new_class(nm, m, None, fp)

    def ensure_degenerates(self, which=("preorder", "all_lex")) -> None:
        for tag in which:
            if tag == "preorder":
                self._degen("preorder", _PREORDER_CANON)
            elif tag == "all_lex":
                self._degen("all_lex", _ALL_LEX_CANON)
            else:
                self._degen("terminal", _TERMINAL_CANON)


# ---------------------------------------------------------------------------
# Order construction


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _OrderBuilder:
    """Incrementally closed order relation over class indices.

    True edges are kept transitively closed; false edges are kept raw and
    derived falses are answered at query time (a <= b is impossible when
    some known-false pair sits between a's known up-set and b's down-set).
    """

    def __init__(self, count: int):
        self.count = count
        self.up = [1 << i for i in range(count)]
        self.down = [1 << i for i in range(count)]
        self.false_out = [0] * count

    def set_true(self, a: int, b: int) -> None:
        xs = self.down[a]
        ys = self.up[b]
        for x in _bits(xs):
            self.up[x] |= ys
        for y in _bits(ys):
            self.down[y] |= xs

    def set_false(self, a: int, b: int) -> None:
        self.false_out[a] |= 1 << b

    def known(self, a: int, b: int) -> bool | None:
        if self.up[a] >> b & 1:
            return True
        ys = self.up[b]
        for x in _bits(self.down[a]):
            if self.false_out[x] & ys:
                return False
        return None

    def pairs(self) -> frozenset[tuple[int, int]]:
        out = set()
        for a in range(self.count):
            for b in _bits(self.up[a]):
                out.add((a, b))
        return frozenset(out)


def _seed_degenerates(ob: _OrderBuilder, tags: list[str | None]) -> None:
    term = [i for i, t in enumerate(tags) if t == "terminal"]
    pre = [i for i, t in enumerate(tags) if t == "preorder"]
    top = [i for i, t in enumerate(tags) if t == "all_lex"]
    for t in term:
        for j in range(ob.count):
            if j != t:
                ob.set_true(t, j)
                ob.set_false(j, t)
    for p in pre:
        for j in range(ob.count):
            if j == p or tags[j] == "terminal":
                continue
            ob.set_true(p, j)
            ob.set_false(j, p)
    for a in top:
        for j in range(ob.count):
            if j == a:
                continue
            if tags[j] != "terminal":
                ob.set_true(j, a)
            ob.set_false(a, j)


def _le_pair(args) -> bool:
    a_entries, b_entries = args
    a = Matrix(len(a_entries), len(a_entries[0]), max(v for r in a_entries for v in r) + 1, a_entries)
    b = Matrix(len(b_entries), len(b_entries[0]), max(v for r in b_entries for v in r) + 1, b_entries)
    return implies_bool([a], [b])


def _build_order(canons: list[Matrix], tags: list[str | None],
                 oracle: ImplicationOracle, jobs: int = 1) -> frozenset:
    count = len(canons)
    ob = _OrderBuilder(count)
    _seed_degenerates(ob, tags)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            while True:
                unknown = [
                    (a, b)
                    for a in range(count)
                    for b in range(count)
                    if a != b and ob.known(a, b) is None
                ]
                if not unknown:
                    break
                chunk = unknown[: max(64, 8 * jobs)]
                payload = [(canons[a].entries, canons[b].entries) for a, b in chunk]
                results = list(pool.map(_le_pair, payload, chunksize=8))
                for (a, b), val in zip(chunk, results):
                    if ob.known(a, b) is None:
                        (ob.set_true if val else ob.set_false)(a, b)
    else:
        for a in range(count):
            for b in range(count):
                if a == b or ob.known(a, b) is not None:
                    continue
                val = oracle.le(canons[a], canons[b])
                (ob.set_true if val else ob.set_false)(a, b)
    return ob.pairs()


def hasse_reduce(order, elements=None) -> frozenset[tuple[int, int]]:
    """Transitive reduction of a finite partial order given as pairs.

    Raises:
        NotAPartialOrderError: two distinct elements compare both ways
            (signals an upstream equivalence bug).
    """
    pairs = set(tuple(p) for p in order)
    els = sorted(set(elements) if elements is not None
                 else {a for a, _ in pairs} | {b for _, b in pairs})
    idx = {e: i for i, e in enumerate(els)}
    n = len(els)
    up = [0] * n
    for a, b in pairs:
        up[idx[a]] |= 1 << idx[b]
    for i in range(n):
        up[i] |= 1 << i
    # Transitive closure (input should already be transitive; harmless).
    changed = True
    while changed:
        changed = False
        for i in range(n):
            acc = up[i]
            for j in _bits(up[i]):
                acc |= up[j]
            if acc != up[i]:
                up[i] = acc
                changed = True
    for i in range(n):
        for j in _bits(up[i]):
            if i != j and up[j] >> i & 1:
                raise NotAPartialOrderError(
                    f"{els[i]!r} and {els[j]!r} compare both ways"
                )
    edges = set()
    for i in range(n):
        for j in _bits(up[i]):
            if i == j:
                continue
            through = False
            for c in _bits(up[i] & ~(1 << i) & ~(1 << j)):
                if up[c] >> j & 1:
                    through = True
                    break
            if not through:
                edges.add((els[i], els[j]))
    return frozenset(edges)


# ---------------------------------------------------------------------------
# Candidate pruning for full-box pipelines
#
# Inside a downward-closed candidate universe (all filtered matrices of a
# box), a candidate whose class is already witnessed by a strictly smaller
# candidate can be skipped: it can never be canonical and never determines
# the class's first-appearance column count.  Both checks below certify
# exactly that, via a single targeted derivation.


def _encode_cols(m: Matrix, k: int) -> list[int]:
    codes = []
    for col in m.columns():
        code = 0
        for v in col:
            code = code * k + v
        codes.append(code)
    return codes


def _is_reducible(m: Matrix) -> bool:
    """True when a row or column is derivable from the rest in one step.

    Only called on candidates with distinct rows and columns.  The row
    check asks whether the matrix minus one row derives the zero column
    from the full column set (patterns are restricted to ones producible
    without that row); the column check asks whether a column is
    derivable, by the whole matrix, from the other columns.
    """
    n, k = m.rows, m.min_alphabet
    codes = _encode_cols(m, k)
    ws = _Workspace(n, k, codes)
    prog = _premise_program(m, k)
    if n > 1:
        zero = (0,) * n
        for r in range(n):
            if _one_step_target(prog, ws, zero,
                                pats_by_f0=prog.f0_pats_without_row(r)):
                return True
    if m.cols > 1:
        for code in codes:
            ws.remove(code)
            digits = tuple((code // k ** (n - 1 - i)) % k for i in range(n))
            hit = _one_step_target(prog, ws, digits)
            ws.add(code)
            if hit:
                return True
    return False


# ---------------------------------------------------------------------------
# Public classification entry points


def classify(candidates, *, cache: DecisionCache | None = None,
             build_order: bool = True, jobs: int = 1) -> ClassPoset:
    """Partition candidates into classes and compute the inclusion poset.

    Accepts any iterable of matrices.  Degenerate candidates (empty, zero
    column, trivial) are tagged without decision calls; the rest are
    grouped by mutual implication.
    """
    oracle = ImplicationOracle(cache)
    clf = _Classifier(oracle)
    for m in candidates:
        clf.add(m)
    return _finish(clf, oracle, build_order, jobs)


def _finish(clf: _Classifier, oracle: ImplicationOracle,
            build_order: bool, jobs: int) -> ClassPoset:
    # Deterministic class order: degenerates by tag, then by canonical key.
    tag_rank = {"terminal": 0, "preorder": 1, "all_lex": 2, None: 3}
    perm = sorted(
        range(len(clf.canon)),
        key=lambda i: (tag_rank[clf.degenerate[i]], canonical_key(clf.canon[i])),
    )
    canons = [clf.canon[i] for i in perm]
    tags = [clf.degenerate[i] for i in perm]
    members = [tuple(clf.members[i]) for i in perm]
    if build_order:
        order = _build_order(canons, tags, oracle, jobs)
        hasse = hasse_reduce(order, elements=range(len(canons)))
    else:
        order = frozenset((i, i) for i in range(len(canons)))
        hasse = frozenset()
    classes = tuple(
        MatrixClass(c, ms, t) for c, ms, t in zip(canons, members, tags)
    )
    return ClassPoset(classes, order, hasse)


def _box_candidates(rows: int, cols: int, alphabet: int):
    filt = EnumerationFilter(rows, cols, alphabet,
                             exclude_zero_column=True, exclude_trivial=True)
    return enumerate_matrices(filt)


def classify_box(rows: int, cols: int, alphabet: int, *,
                 cache: DecisionCache | None = None, build_order: bool = True,
                 jobs: int = 1, keep_members: bool = True,
                 prune: bool = True) -> ClassPoset:
    """Classify a whole dimension box.

    Streams the filtered candidates, skips candidates whose class is
    certified to appear at a smaller size (sound only for full boxes),
    and re-adds the degenerate classes the filters excluded.
    """
    oracle = ImplicationOracle(cache)
    clf = _Classifier(oracle, keep_members=keep_members)
    if cols >= 1:
        clf.ensure_degenerates(
            ("preorder", "all_lex") if alphabet >= 2 else ("all_lex",)
        )
    cands = [m for m in _box_candidates(rows, cols, alphabet)
             if not (prune and _is_reducible(m))]
    if jobs > 1 and cands:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            fps = list(pool.map(_fp_worker, [m.entries for m in cands],
                                chunksize=16))
        for m, fp in zip(cands, fps):
            clf.add(m, normalized=True, fp=fp)
    else:
        for m in cands:
            clf.add(m, normalized=True)
    return _finish(clf, oracle, build_order, jobs)


def count_table(rows: int, alphabet: int, m_max: int, *,
                cache: DecisionCache | None = None, jobs: int = 1) -> list[int]:
    """Class counts of the boxes (rows, m, alphabet) for m = 1..m_max.

    Counts include the preorder and all-lex classes (obtainable from
    non-empty matrices) and exclude the empty-matrix class.
    """
    if m_max < 1:
        raise MclexError("m_max must be at least 1")
    if alphabet == 1:
        return [1] * m_max
    oracle = ImplicationOracle(cache)
    clf = _Classifier(oracle, keep_members=False)
    cands = [m for m in _box_candidates(rows, m_max, alphabet)
             if not _is_reducible(m)]
    if jobs > 1 and cands:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            fps = list(pool.map(_fp_worker, [m.entries for m in cands],
                                chunksize=16))
        for m, fp in zip(cands, fps):
            clf.add(m, normalized=True, fp=fp)
    else:
        for m in cands:
            clf.add(m, normalized=True)
    nondegen_min = [mc for mc, tag in zip(clf.min_cols, clf.degenerate)
                    if tag is None]
    return [2 + sum(1 for mc in nondegen_min if mc <= m)
            for m in range(1, m_max + 1)]


def box_intersect(p1: ClassPoset, p2: ClassPoset, *,
                  cache: DecisionCache | None = None) -> ClassPoset:
    """Sub-poset of classes present in both posets.

    Class identity across boxes is mutual implication of canonical
    representatives, never syntactic equality.
    """
    oracle = ImplicationOracle(cache)
    norm2: list[Matrix | None] = []
    buckets: dict[tuple, list[int]] = {}
    for j, c2 in enumerate(p2.classes):
        if c2.degenerate is not None:
            norm2.append(None)
            continue
        nm = normalize(c2.canonical)
        norm2.append(nm)
        buckets.setdefault(class_fingerprint(nm, oracle), []).append(j)
    tags2 = {c.degenerate for c in p2.classes if c.degenerate is not None}
    matched: list[tuple[int, MatrixClass]] = []
    for i, c1 in enumerate(p1.classes):
        if c1.degenerate is not None:
            if c1.degenerate in tags2:
                matched.append((i, c1))
            continue
        nm = normalize(c1.canonical)
        fp = class_fingerprint(nm, oracle)
        for j in buckets.get(fp, ()):
            if oracle.equivalent(nm, norm2[j]):
                other = p2.classes[j]
                canon = min(nm, normalize(other.canonical), key=canonical_key)
                members = tuple(dict.fromkeys(c1.members + other.members))
                matched.append((i, MatrixClass(canon, members, None)))
                break
    old_ids = [i for i, _ in matched]
    remap = {old: new for new, old in enumerate(old_ids)}
    order = frozenset(
        (remap[a], remap[b]) for a, b in p1.order if a in remap and b in remap
    )
    hasse = hasse_reduce(order, elements=range(len(matched))) if matched else frozenset()
    return ClassPoset(tuple(c for _, c in matched), order, hasse)


# ---------------------------------------------------------------------------
# Serialization


def poset_to_obj(p: ClassPoset, include_degenerate: bool = True) -> dict:
    keep = [i for i, c in enumerate(p.classes)
            if include_degenerate or c.degenerate is None]
    remap = {old: new for new, old in enumerate(keep)}
    classes = []
    for i in keep:
        c = p.classes[i]
        entry: dict = {"canonical": matrix_to_obj(c.canonical)}
        if c.degenerate is not None:
            entry["degenerate"] = c.degenerate
        classes.append(entry)
    hasse = sorted(
        [remap[a], remap[b]] for a, b in p.hasse if a in remap and b in remap
    )
    return {"classes": classes, "hasse": hasse}


def poset_from_obj(obj) -> ClassPoset:
    if not isinstance(obj, dict) or "classes" not in obj or "hasse" not in obj:
        raise ParseError('poset JSON needs "classes" and "hasse"')
    classes = []
    for entry in obj["classes"]:
        canon = matrix_from_obj(entry["canonical"])
        classes.append(MatrixClass(canon, (canon,), entry.get("degenerate")))
    n = len(classes)
    up = [1 << i for i in range(n)]
    for a, b in obj["hasse"]:
        up[int(a)] |= 1 << int(b)
    changed = True
    while changed:
        changed = False
        for i in range(n):
            acc = up[i]
            for j in _bits(up[i]):
                acc |= up[j]
            if acc != up[i]:
                up[i] = acc
                changed = True
    order = frozenset((i, j) for i in range(n) for j in _bits(up[i]))
    hasse = frozenset((int(a), int(b)) for a, b in obj["hasse"])
    return ClassPoset(tuple(classes), order, hasse)


def poset_to_dot(p: ClassPoset) -> str:
    """DOT graph of the nondegenerate part, labels as digit grids."""
    keep = p.nondegenerate_indices()
    remap = {old: new for new, old in enumerate(keep)}
    lines = [
        "digraph mclex {",
        "  rankdir=BT;",
        '  node [shape=box fontname="monospace"];',
    ]
    for i in keep:
        grid = format_matrix(p.classes[i].canonical).replace("\n", "\\n")
        lines.append(f'  c{remap[i]} [label="{grid}"];')
    for a, b in sorted(p.hasse):
        if a in remap and b in remap:
            lines.append(f"  c{remap[a]} -> c{remap[b]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
