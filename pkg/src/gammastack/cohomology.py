"""Co-Hochschild complex on reduced symmetric tensor powers.

The differential uses the standard cocommutative coproduct (multiset
splitting), so it is independent of brackets and preserves both total
degree and variable content.  All solves are done blockwise per content
vector, which keeps the exact elimination small.

The same matrices serve the enveloping-algebra quotients of the
admissibilization loop: for the cocommutative coproduct, splitting a
normal-ordered word is combinatorially identical to splitting the
corresponding symmetric monomial.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import permutations

from gammastack.liealg import _add_into
from gammastack.linalg import LinearSystem, Row, matrix_rank, solve_linear
from gammastack.formal import cocommutative_splits
from gammastack.tensors import Monomial, SparseTensor, monomial_degree, monomial_key

Word = tuple[int, ...]


def _perm_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def insert_cocommutative(a: SparseTensor, subsets: tuple[tuple[int, ...], ...], n: int) -> SparseTensor:
    """Insertion calculus with the undeformed coproduct; degree preserving."""
    out: dict[Monomial, Fraction] = {}
    for mono, c in a.coeffs.items():
        parts: list[tuple[list[Word], Fraction]] = [([() for _ in range(n)], c)]
        for word, sub in zip(mono, subsets):
            if not sub:
                if word:
                    parts = []
                    break
                continue
            if len(sub) == 1:
                for slots, _ in parts:
                    slots[sub[0] - 1] = tuple(sorted(slots[sub[0] - 1] + word))
                continue
            splits = _iterated_splits(word, len(sub))
            nxt: list[tuple[list[Word], Fraction]] = []
            for slots, cc in parts:
                for words, mult in splits.items():
                    slots2 = list(slots)
                    for pos, w in zip(sub, words):
                        slots2[pos - 1] = tuple(sorted(slots2[pos - 1] + w))
                    nxt.append((slots2, cc * mult))
            parts = nxt
        for slots, cc in parts:
            _add_into(out, tuple(slots), cc)
    return SparseTensor(n, a.trunc, out)


_split_cache: dict[tuple[Word, int], dict[tuple[Word, ...], int]] = {}


def _iterated_splits(word: Word, k: int) -> dict[tuple[Word, ...], int]:
    if k == 1:
        return {(word,): 1}
    key = (word, k)
    cached = _split_cache.get(key)
    if cached is not None:
        return cached
    out: dict[tuple[Word, ...], int] = {}
    for prev, m in _iterated_splits(word, k - 1).items():
        for (a, b), m2 in cocommutative_splits(prev[-1]).items():
            keyt = prev[:-1] + (a, b)
            out[keyt] = out.get(keyt, 0) + m * m2
    _split_cache[key] = out
    return out


def cohochschild_d(a: SparseTensor) -> SparseTensor:
    """d(a) = a^{2..k+1} + sum_i (-1)^i a^{1,..,(i i+1),..,k+1} + (-1)^{k+1} a^{1..k}."""
    k = a.slots
    n = k + 1
    terms = insert_cocommutative(a, tuple((i,) for i in range(2, k + 2)), n)
    for i in range(1, k + 1):
        subsets = []
        for j in range(1, k + 1):
            if j < i:
                subsets.append((j,))
            elif j == i:
                subsets.append((i, i + 1))
            else:
                subsets.append((j + 1,))
        term = insert_cocommutative(a, tuple(subsets), n)
        terms = terms + term.scale((-1) ** i)
    last = insert_cocommutative(a, tuple((i,) for i in range(1, k + 1)), n)
    return terms + last.scale((-1) ** (k + 1))


def alt(a: SparseTensor) -> SparseTensor:
    """Signed average over slot permutations, projected to multidegree (1,..,1)."""
    k = a.slots
    out: dict[Monomial, Fraction] = {}
    norm = Fraction(1, _factorial(k))
    for mono, c in a.coeffs.items():
        if any(len(s) != 1 for s in mono):
            continue
        for perm in permutations(range(k)):
            sign = _perm_sign(perm)
            target = tuple(mono[perm[i]] for i in range(k))
            _add_into(out, target, c * sign * norm)
    return SparseTensor(k, a.trunc, out)


def _factorial(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


# -- cochain bases -------------------------------------------------------------


def _slot_monomials(dim: int, deg: int) -> list[Word]:
    if deg == 0:
        return [()]
    out: list[Word] = []

    def rec(prefix: Word, start: int, remaining: int):
        if remaining == 0:
            out.append(prefix)
            return
        for i in range(start, dim):
            rec(prefix + (i,), i, remaining - 1)

    rec((), 0, deg)
    return out


def cochain_basis(dim: int, k: int, ndeg: int) -> list[Monomial]:
    """Monomial basis of (S^{>0}(g)^{(x)k})_ndeg in canonical order."""
    out: list[Monomial] = []

    def rec(slots: tuple[Word, ...], remaining: int, slots_left: int):
        if slots_left == 0:
            if remaining == 0:
                out.append(slots)
            return
        for d in range(1, remaining - slots_left + 2):
            for w in _slot_monomials(dim, d):
                rec(slots + (w,), remaining - d, slots_left - 1)

    rec((), ndeg, k)
    out.sort(key=monomial_key)
    return out


def _content(mono: Monomial) -> tuple[int, ...]:
    counts: dict[int, int] = {}
    for slot in mono:
        for i in slot:
            counts[i] = counts.get(i, 0) + 1
    dim = max(counts) + 1 if counts else 0
    return tuple(counts.get(i, 0) for i in range(dim))


def _content_key(mono: Monomial, dim: int) -> tuple[int, ...]:
    counts = [0] * dim
    for slot in mono:
        for i in slot:
            counts[i] += 1
    return tuple(counts)


class CochainSpace:
    """Enumerated basis of one (slot count, degree) component, content-split."""

    def __init__(self, dim: int, k: int, ndeg: int):
        self.dim = dim
        self.k = k
        self.ndeg = ndeg
        self.basis = cochain_basis(dim, k, ndeg)
        self.index = {m: i for i, m in enumerate(self.basis)}
        self.blocks: dict[tuple[int, ...], list[int]] = {}
        for i, m in enumerate(self.basis):
            self.blocks.setdefault(_content_key(m, dim), []).append(i)


class CoboundaryObstruction(Exception):
    """Raised when the requested class is not a coboundary."""

    def __init__(self, message: str, alt_class: SparseTensor):
        super().__init__(message)
        self.alt_class = alt_class


def _d_matrix_block(
    dim: int, k: int, ndeg: int, content: tuple[int, ...], src: list[Monomial], trunc: int
) -> tuple[list[Monomial], dict[Monomial, int], list[Row]]:
    """Columns indexed by src monomials; rows by (k+1)-cochain monomials."""
    row_index: dict[Monomial, int] = {}
    rows_of_col: list[dict[int, Fraction]] = []
    for mono in src:
        img = cohochschild_d(SparseTensor(k, trunc, {mono: Fraction(1)}))
        col: dict[int, Fraction] = {}
        for m, c in img.coeffs.items():
            if m not in row_index:
                row_index[m] = len(row_index)
            col[row_index[m]] = c
        rows_of_col.append(col)
    n_rows = len(row_index)
    rows: list[Row] = [dict() for _ in range(n_rows)]
    for j, col in enumerate(rows_of_col):
        for i, c in col.items():
            rows[i][j] = c
    row_list = [None] * n_rows
    for m, i in row_index.items():
        row_list[i] = m
    return row_list, row_index, rows


def solve_coboundary(
    alpha: SparseTensor,
    sign: int = 1,
    rng: random.Random | None = None,
    check_cocycle: bool = True,
) -> SparseTensor:
    """Find beta with d(beta) = sign * alpha, blockwise per variable content.

    alpha must be a homogeneous reduced k-cochain.  When rng is given, a
    random kernel combination is added to the deterministic representative
    (used by the randomized-lift uniqueness tests).  Raises
    CoboundaryObstruction carrying the alt projection when unsolvable.
    """
    k = alpha.slots
    if k < 2:
        raise ValueError("need at least a 2-cochain to solve for a coboundary")
    if not alpha.is_reduced():
        raise ValueError("alpha is not in the reduced subcomplex")
    degs = {monomial_degree(m) for m in alpha.coeffs}
    if not degs:
        return SparseTensor.zero(k - 1, alpha.trunc)
    if len(degs) > 1:
        # split by degree and recurse
        total = SparseTensor.zero(k - 1, alpha.trunc)
        for d in sorted(degs):
            total = total + solve_coboundary(alpha.homogeneous_part(d), sign, rng, check_cocycle)
        return total
    ndeg = degs.pop()
    if check_cocycle and not cohochschild_d(alpha).is_zero():
        raise ValueError("alpha is not a cocycle")
    if ndeg == k:
        obstruction = alt(alpha)
        if not obstruction.is_zero():
            raise CoboundaryObstruction(
                f"nonzero alternating obstruction in degree {ndeg}", obstruction
            )
    dim = max((i + 1 for m in alpha.coeffs for s in m for i in s), default=1)
    src_space = CochainSpace(dim, k - 1, ndeg)
    out: dict[Monomial, Fraction] = {}
    by_content: dict[tuple[int, ...], list[tuple[Monomial, Fraction]]] = {}
    for m, c in alpha.coeffs.items():
        by_content.setdefault(_content_key(m, dim), []).append((m, c))
    for content in sorted(by_content):
        cols = [src_space.basis[i] for i in src_space.blocks.get(content, [])]
        row_list, row_index, rows = _d_matrix_block(
            dim, k - 1, ndeg, content, cols, alpha.trunc
        )
        sys = LinearSystem(len(cols))
        rhs = [Fraction(0)] * len(row_list)
        consistent = True
        for m, c in by_content[content]:
            if m not in row_index:
                consistent = False
                break
            rhs[row_index[m]] = Fraction(sign) * c
        if not consistent:
            raise CoboundaryObstruction(
                "target outside the image of d", alt(alpha)
            )
        for row, b in zip(rows, rhs):
            sys.add_row(row, b)
        res = solve_linear(sys)
        if not res.solvable:
            raise CoboundaryObstruction(
                "inconsistent coboundary system", alt(alpha)
            )
        coeffs = list(res.solution)
        if rng is not None and res.kernel:
            for vec in res.kernel:
                c = Fraction(rng.randint(-2, 2))
                if c:
                    coeffs = [a + c * b for a, b in zip(coeffs, vec)]
        for j, c in enumerate(coeffs):
            if c:
                _add_into(out, cols[j], c)
    return SparseTensor(k - 1, alpha.trunc, out)


def cohomology_rank(dim: int, k: int, ndeg: int) -> int:
    """dim ker(d_k) - dim im(d_{k-1}) on the (k, ndeg) component."""
    space = CochainSpace(dim, k, ndeg)
    dim_ker = 0
    rank_prev = 0
    for content, idxs in sorted(space.blocks.items()):
        cols = [space.basis[i] for i in idxs]
        _, _, rows = _d_matrix_block(dim, k, ndeg, content, cols, ndeg)
        r = matrix_rank(rows, len(cols))
        dim_ker += len(cols) - r
    if k >= 2:
        prev = CochainSpace(dim, k - 1, ndeg)
        for content, idxs in sorted(prev.blocks.items()):
            cols = [prev.basis[i] for i in idxs]
            _, _, rows = _d_matrix_block(dim, k - 1, ndeg, content, cols, ndeg)
            rank_prev += matrix_rank(rows, len(cols))
    return dim_ker - rank_prev
