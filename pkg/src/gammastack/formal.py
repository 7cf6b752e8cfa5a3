"""Truncated function algebra of the dual formal group.

The commutative algebra is the truncated symmetric algebra S(g); the
gamma-dependent coproduct and Poisson bracket are computed by duality
against the enveloping algebra of the dual Lie algebra g*_gamma (bracket =
transpose of the deformed cobracket), through the symmetrization pairing
<x_1...x_m, xi_1...xi_n> = delta_{mn} perm(<x_i, xi_j>).

BCH star products come in two independent implementations: the word-series
kernel (log of exp-product in the free associative algebra, projected by
Dynkin-Specht-Wever) and the integral-recursion kernel with Bernoulli
numbers.  They are cross-checked in the tests and used on opposite sides
of construction-vs-verification.
"""

from __future__ import annotations

import random
from fractions import Fraction
from math import factorial

from gammastack.liealg import GammaLieBialgebra, LieBialgebra, Tensor2, _add_into, delta_gamma_tensor
from gammastack.tensors import (
    Monomial,
    SparseTensor,
    TensorSeries,
    monomial_degree,
    merge_slot,
    multiset_factor,
    unit_monomial,
)

Word = tuple[int, ...]


def build_delta_gamma(G: GammaLieBialgebra, gamma: int) -> LieBialgebra:
    """Lie bialgebra (g, mu, delta_gamma) with the f_gamma-deformed cobracket.

    delta_gamma(x) = delta(x) + [f_gamma, x (x) 1 + 1 (x) x].  Raises if the
    result fails co-Jacobi or the cocycle condition, which signals an
    invalid input (the upstream validator should have caught it).
    """
    cob: dict[tuple[int, int, int], Fraction] = {}
    for k in range(G.lba.dim):
        for (i, j), c in delta_gamma_tensor(G, gamma, k).items():
            if c:
                cob[(k, i, j)] = c
    out = LieBialgebra(G.lba.dim, G.lba.labels, G.lba.bracket, cob)
    bad = [i for i in out.validate() if i.condition in ("co-jacobi", "cocycle")]
    if bad:
        raise ValueError(
            f"deformed cobracket at {G.group.labels[gamma]} is not a Lie cobracket: {bad[0]}"
        )
    return out


# -- free-associative BCH word series ----------------------------------------

_bch_words_cache: dict[int, list[tuple[Fraction, Word]]] = {}


def _free_mul(p: dict[Word, Fraction], q: dict[Word, Fraction], nmax: int) -> dict[Word, Fraction]:
    out: dict[Word, Fraction] = {}
    for w1, c1 in p.items():
        for w2, c2 in q.items():
            if len(w1) + len(w2) > nmax:
                continue
            _add_into(out, w1 + w2, c1 * c2)
    return out


def bch_word_terms(nmax: int) -> list[tuple[Fraction, Word]]:
    """Coefficients of log(exp(x) exp(y)) in the free associative algebra.

    Each word over {0, 1} of length n contributes coeff/n times its
    right-nested bracketing (the Dynkin projection).
    """
    cached = _bch_words_cache.get(nmax)
    if cached is not None:
        return cached
    ex = {tuple([0] * k): Fraction(1, factorial(k)) for k in range(nmax + 1)}
    ey = {tuple([1] * k): Fraction(1, factorial(k)) for k in range(nmax + 1)}
    s = _free_mul(ex, ey, nmax)
    s.pop((), None)  # s = exp(x)exp(y) - 1, min degree 1
    log: dict[Word, Fraction] = {}
    power: dict[Word, Fraction] = {(): Fraction(1)}
    for k in range(1, nmax + 1):
        power = _free_mul(power, s, nmax)
        sign = Fraction((-1) ** (k + 1), k)
        for w, c in power.items():
            _add_into(log, w, sign * c)
    terms = sorted(((c, w) for w, c in log.items()), key=lambda t: (len(t[1]), t[1]))
    _bch_words_cache[nmax] = terms
    return terms


def bch_apply(bracket_fn, f, g, nmax: int):
    """Evaluate the BCH series with a given Lie bracket closure.

    bracket_fn(a, b) must return the bracket; f and g must support + and
    .scale(); words of length > nmax are dropped (their values vanish under
    the intended filtration).
    """
    operands = (f, g)
    result = None
    suffix_cache: dict[Word, object] = {}

    def nested(word: Word):
        if word in suffix_cache:
            return suffix_cache[word]
        if len(word) == 1:
            val = operands[word[0]]
        else:
            val = bracket_fn(operands[word[0]], nested(word[1:]))
        suffix_cache[word] = val
        return val

    for coeff, word in bch_word_terms(nmax):
        term = nested(word).scale(coeff / len(word))
        result = term if result is None else result + term
    return result


# -- Bernoulli-number recursion (independent BCH implementation) --------------

_bernoulli_cache: list[Fraction] = [Fraction(1)]


def bernoulli(n: int) -> Fraction:
    """Bernoulli numbers, B_1 = -1/2 convention."""
    while len(_bernoulli_cache) <= n:
        m = len(_bernoulli_cache)
        acc = Fraction(0)
        for k in range(m):
            acc += Fraction(factorial(m + 1), factorial(k) * factorial(m + 1 - k)) * _bernoulli_cache[k]
        _bernoulli_cache.append(-acc / (m + 1))
    return _bernoulli_cache[n]


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def bch_apply_recursion(bracket_fn, x, y, nmax: int):
    """BCH via the classical integral recursion.

    z_1 = x + y and (n+1) z_{n+1} = 1/2 [x - y, z_n]
    + sum_{p>=1, 2p<=n} B_{2p}/(2p)! sum_{k_1+...+k_{2p}=n}
      [z_{k_1}, [..., [z_{k_{2p}}, x + y]...]].
    """
    xy = x + y
    z = [None, xy]
    for n in range(1, nmax):
        acc = bracket_fn(x + y.scale(-1), z[n]).scale(Fraction(1, 2))
        for p in range(1, n // 2 + 1):
            coeff = bernoulli(2 * p) / factorial(2 * p)
            if coeff == 0:
                continue
            for ks in _compositions(n, 2 * p):
                term = xy
                for k in reversed(ks):
                    term = bracket_fn(z[k], term)
                acc = acc + term.scale(coeff)
        z.append(acc.scale(Fraction(1, n + 1)))
    total = z[1]
    for n in range(2, nmax + 1):
        total = total + z[n]
    return total


# -- cocommutative splitting (used for Delta^(k) leading parts & insertions) --


def cocommutative_splits(word: Word) -> dict[tuple[Word, Word], int]:
    """Two-block multiset splittings of a sorted word, with multinomial counts."""
    out: dict[tuple[Word, Word], int] = {((), ()): 1}
    for letter in word:
        nxt: dict[tuple[Word, Word], int] = {}
        for (a, b), m in out.items():
            key1 = (tuple(sorted(a + (letter,))), b)
            nxt[key1] = nxt.get(key1, 0) + m
            key2 = (a, tuple(sorted(b + (letter,))))
            nxt[key2] = nxt.get(key2, 0) + m
        out = nxt
    return out


# -- the pairing context -------------------------------------------------------


class PairingContext:
    """Cached duality data for one deformed cobracket at one truncation.

    Provides the coproduct, the Poisson bracket, insertions, and BCH star
    products on truncated tensor series.  Immutable after construction.
    """

    def __init__(self, lba_gamma: LieBialgebra, trunc: int, tag: str = "e", seed: int = 0):
        self.lba = lba_gamma
        self.dim = lba_gamma.dim
        self.trunc = trunc
        self.tag = tag
        # dual bracket [xi_i, xi_j] = sum_k cobracket[(k,i,j)] xi_k
        dual: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (k, i, j), c in lba_gamma.cobracket.items():
            dual.setdefault((i, j), {})[k] = c
        self._dual_bracket = dual
        self._straighten_cache: dict[Word, dict[Word, Fraction]] = {}
        self._mult_cache: dict[tuple[Word, Word], dict[Word, Fraction]] = {}
        self._pbw: list[Word] = self._enumerate_pbw(trunc)
        self._coproduct_table: dict[Word, dict[tuple[Word, Word], Fraction]] | None = None
        self._delta_u_cache: dict[Word, dict[tuple[Word, Word], Fraction]] = {}
        self._pair_bracket_cache: dict[tuple[Word, Word], dict[Word, Fraction]] = {}
        self._iter_coproduct_cache: dict[tuple[Word, int], dict[tuple[Word, ...], Fraction]] = {}
        self._mono_poisson_cache: dict[tuple[Monomial, Monomial, int], dict[Monomial, Fraction]] = {}
        self._spot_check_associativity(seed)

    # -- U(g*_gamma) arithmetic ----------------------------------------------

    def _enumerate_pbw(self, nmax: int) -> list[Word]:
        out: list[Word] = [()]
        frontier: list[Word] = [()]
        for _ in range(nmax):
            nxt = []
            for w in frontier:
                start = w[-1] if w else 0
                for i in range(start, self.dim):
                    nxt.append(w + (i,))
            out.extend(nxt)
            frontier = nxt
        return out

    def dual_bracket(self, i: int, j: int) -> dict[int, Fraction]:
        return self._dual_bracket.get((i, j), {})

    def straighten(self, word: Word) -> dict[Word, Fraction]:
        cached = self._straighten_cache.get(word)
        if cached is not None:
            return cached
        pos = None
        for t in range(len(word) - 1):
            if word[t] > word[t + 1]:
                pos = t
                break
        if pos is None:
            result = {word: Fraction(1)}
        else:
            a, b = word[pos], word[pos + 1]
            swapped = word[:pos] + (b, a) + word[pos + 2 :]
            result = dict(self.straighten(swapped))
            for k, c in self.dual_bracket(a, b).items():
                for w, c2 in self.straighten(word[:pos] + (k,) + word[pos + 2 :]).items():
                    _add_into(result, w, c * c2)
        self._straighten_cache[word] = result
        return result

    def pbw_mult(self, u: Word, v: Word) -> dict[Word, Fraction]:
        key = (u, v)
        cached = self._mult_cache.get(key)
        if cached is None:
            cached = self.straighten(u + v)
            self._mult_cache[key] = cached
        return cached

    def _spot_check_associativity(self, seed: int):
        rng = random.Random(seed)
        smalls = [w for w in self._pbw if 0 < len(w) <= max(2, self.trunc // 2)]
        if not smalls:
            return
        for _ in range(6):
            u, v, w = (rng.choice(smalls) for _ in range(3))
            left: dict[Word, Fraction] = {}
            for m, c in self.pbw_mult(u, v).items():
                for m2, c2 in self.pbw_mult(m, w).items():
                    _add_into(left, m2, c * c2)
            right: dict[Word, Fraction] = {}
            for m, c in self.pbw_mult(v, w).items():
                for m2, c2 in self.pbw_mult(u, m).items():
                    _add_into(right, m2, c * c2)
            if left != right:
                raise AssertionError("PBW straightening is not associative (bad cobracket?)")

    # -- coproduct -------------------------------------------------------------

    def _build_coproduct_table(self):
        table: dict[Word, dict[tuple[Word, Word], Fraction]] = {}
        for b1 in self._pbw:
            for b2 in self._pbw:
                if len(b1) + len(b2) > self.trunc:
                    continue
                denom = multiset_factor(b1) * multiset_factor(b2)
                for w, c in self.pbw_mult(b1, b2).items():
                    if len(w) > self.trunc:
                        continue
                    coeff = c * multiset_factor(w) / denom
                    table.setdefault(w, {})[(b1, b2)] = (
                        table.get(w, {}).get((b1, b2), Fraction(0)) + coeff
                    )
        self._coproduct_table = table

    def coproduct_word(self, word: Word) -> dict[tuple[Word, Word], Fraction]:
        """Delta_gamma of a 1-slot monomial as {(left word, right word): coeff}."""
        if self._coproduct_table is None:
            self._build_coproduct_table()
        return self._coproduct_table.get(word, {})

    def iterated_coproduct_word(self, word: Word, k: int) -> dict[tuple[Word, ...], Fraction]:
        """Delta^(k), with Delta^(1) = id and Delta applied to the last slot."""
        if k == 1:
            return {(word,): Fraction(1)}
        key = (word, k)
        cached = self._iter_coproduct_cache.get(key)
        if cached is not None:
            return cached
        prev = self.iterated_coproduct_word(word, k - 1)
        out: dict[tuple[Word, ...], Fraction] = {}
        for slots, c in prev.items():
            base_deg = sum(len(s) for s in slots[:-1])
            for (a, b), c2 in self.coproduct_word(slots[-1]).items():
                if base_deg + len(a) + len(b) > self.trunc:
                    continue
                _add_into(out, slots[:-1] + (a, b), c * c2)
        self._iter_coproduct_cache[key] = out
        return out

    # -- co-Poisson coderivation on U(g*_gamma) --------------------------------

    def _delta_u_generator(self, i: int) -> dict[tuple[Word, Word], Fraction]:
        out: dict[tuple[Word, Word], Fraction] = {}
        for (a, b, k), c in self.lba.bracket.items():
            if k == i and c:
                _add_into(out, (((a,)), ((b,))), c)
        # bracket[(a,b,k)] is coeff of e_k in [e_a,e_b]; mu^t(xi_k) = sum c (a,b)
        return out

    def delta_u(self, word: Word) -> dict[tuple[Word, Word], Fraction]:
        """Coderivation extending the dual-of-bracket cobracket of g*_gamma."""
        cached = self._delta_u_cache.get(word)
        if cached is not None:
            return cached
        if len(word) == 0:
            result: dict[tuple[Word, Word], Fraction] = {}
        elif len(word) == 1:
            result = self._delta_u_generator(word[0])
        else:
            head, tail = word[:-1], (word[-1],)
            result = {}
            # delta(uv) = delta(u) Delta(v) + Delta(u) delta(v)
            dv = self._delta_u_generator(word[-1])
            du = self.delta_u(head)
            for (p, q), c in du.items():
                for (s, t), m in (((tail, ()), 1), (((), tail), 1)):
                    for w1, c1 in self.pbw_mult(p, s).items():
                        for w2, c2 in self.pbw_mult(q, t).items():
                            _add_into(result, (w1, w2), c * m * c1 * c2)
            for (s, t), m in cocommutative_splits(head).items():
                for (p, q), c in dv.items():
                    for w1, c1 in self.pbw_mult(s, p).items():
                        for w2, c2 in self.pbw_mult(t, q).items():
                            _add_into(result, (w1, w2), Fraction(m) * c * c1 * c2)
        self._delta_u_cache[word] = result
        return result

    def pair_bracket(self, a: Word, b: Word) -> dict[Word, Fraction]:
        """{m_a, m_b}_gamma for 1-slot monomials, as {word: coeff}."""
        key = (a, b)
        cached = self._pair_bracket_cache.get(key)
        if cached is not None:
            return cached
        fa = multiset_factor(a) * multiset_factor(b)
        out: dict[Word, Fraction] = {}
        lo = len(a) + len(b) - 1
        for pi in self._pbw:
            if not pi or len(pi) < lo:
                continue
            c = self.delta_u(pi).get((a, b))
            if c:
                _add_into(out, pi, c * fa / multiset_factor(pi))
        self._pair_bracket_cache[key] = out
        return out

    # -- series-level operations ------------------------------------------------

    def series(self, coeffs: dict[Monomial, Fraction], slots: int = 1) -> TensorSeries:
        return SparseTensor(slots, self.trunc, coeffs, tag=self.tag)

    def zero(self, slots: int = 1) -> TensorSeries:
        return SparseTensor.zero(slots, self.trunc)

    def unit(self, slots: int = 1) -> TensorSeries:
        return SparseTensor.unit(slots, self.trunc)

    def coproduct(self, a: TensorSeries) -> TensorSeries:
        """Delta_gamma on a 1-slot series, yielding a 2-slot series."""
        if a.slots != 1:
            raise ValueError("coproduct expects a 1-slot series")
        out: dict[Monomial, Fraction] = {}
        for (word,), c in a.coeffs.items():
            for (b1, b2), c2 in self.coproduct_word(word).items():
                _add_into(out, (b1, b2), c * c2)
        return SparseTensor(2, self.trunc, out, tag=self.tag)

    def poisson(self, a: TensorSeries, b: TensorSeries) -> TensorSeries:
        """Product-Poisson bracket on n-slot series."""
        if a.slots != b.slots:
            raise ValueError("slot mismatch in poisson bracket")
        n = a.slots
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in a.coeffs.items():
            for m2, c2 in b.coeffs.items():
                c = c1 * c2
                key = (m1, m2, n)
                cached = self._mono_poisson_cache.get(key)
                if cached is None:
                    cached = self._mono_pair_poisson(m1, m2, n)
                    self._mono_poisson_cache[key] = cached
                for m, cm in cached.items():
                    _add_into(out, m, c * cm)
        return SparseTensor(n, self.trunc, out, tag=self.tag)

    def _mono_pair_poisson(self, m1: Monomial, m2: Monomial, n: int) -> dict[Monomial, Fraction]:
        out: dict[Monomial, Fraction] = {}
        merged = tuple(merge_slot(a, b) for a, b in zip(m1, m2))
        base_deg = sum(len(s) for s in merged)
        for s in range(n):
            rest_deg = base_deg - len(merged[s])
            if rest_deg > self.trunc:
                continue
            for w, c in self.pair_bracket(m1[s], m2[s]).items():
                if rest_deg + len(w) > self.trunc:
                    continue
                mono = merged[:s] + (w,) + merged[s + 1 :]
                _add_into(out, mono, c)
        return out

    def insert(self, a: TensorSeries, subsets: tuple[tuple[int, ...], ...], n: int) -> TensorSeries:
        """Insertion a^{I_1,...,I_m} into n slots via iterated coproducts.

        subsets are 1-based ordered index tuples, pairwise disjoint; slots
        not covered receive the unit.
        """
        if len(subsets) != a.slots:
            raise ValueError("need one index subset per slot")
        seen: set[int] = set()
        for sub in subsets:
            for i in sub:
                if not 1 <= i <= n:
                    raise ValueError(f"target slot {i} out of range")
                if i in seen:
                    raise ValueError("overlapping subsets")
                seen.add(i)
        out: dict[Monomial, Fraction] = {}
        for mono, c in a.coeffs.items():
            parts: list[tuple[Monomial, Fraction]] = [(unit_monomial(n), c)]
            for slot_word, sub in zip(mono, subsets):
                expanded = self.iterated_coproduct_word(slot_word, len(sub)) if sub else {}
                if not sub:
                    # empty target: slot must be the unit for the term to survive
                    if slot_word:
                        parts = []
                        break
                    continue
                nxt: list[tuple[Monomial, Fraction]] = []
                for target, cc in parts:
                    for words, c2 in expanded.items():
                        lst = list(target)
                        ok = True
                        deg = sum(len(s) for s in lst)
                        for pos, w in zip(sub, words):
                            lst[pos - 1] = merge_slot(lst[pos - 1], w)
                            deg += len(w)
                        if deg > self.trunc:
                            ok = False
                        if ok:
                            nxt.append((tuple(lst), cc * c2))
                parts = nxt
            for m, cc in parts:
                _add_into(out, m, cc)
        return SparseTensor(n, self.trunc, out, tag=self.tag)

    # -- BCH star products ------------------------------------------------------

    def _require_m2(self, s: TensorSeries, what: str):
        for m in s.coeffs:
            if monomial_degree(m) < 2:
                raise ValueError(f"{what}: monomial {m} has degree < 2, not in m^2")

    def bch_star(self, f: TensorSeries, g: TensorSeries) -> TensorSeries:
        """f * g with the word-series BCH kernel (group law on m^2)."""
        self._require_m2(f, "bch_star left operand")
        self._require_m2(g, "bch_star right operand")
        if f.is_zero():
            return g
        if g.is_zero():
            return f
        out = bch_apply(self.poisson, f, g, self.trunc)
        return out if out is not None else self.zero(f.slots)

    def bch_star_dynkin(self, f: TensorSeries, g: TensorSeries) -> TensorSeries:
        """Independent BCH evaluation via the Bernoulli recursion."""
        self._require_m2(f, "bch_star_dynkin left operand")
        self._require_m2(g, "bch_star_dynkin right operand")
        if f.is_zero():
            return g
        if g.is_zero():
            return f
        return bch_apply_recursion(self.poisson, f, g, self.trunc)

    def ad_star(self, u: TensorSeries, x: TensorSeries) -> TensorSeries:
        """exp({u, .}) applied to x: the Hamiltonian flow of u.

        Agrees with u * x * (-u) whenever x lies in m^2; this is the
        extension used on coproduct values that need not lie in m^2.
        """
        self._require_m2(u, "ad_star conjugator")
        if u.slots != x.slots:
            raise ValueError("slot mismatch in ad_star")
        total = x
        term = x
        k = 1
        while True:
            term = self.poisson(u, term).scale(Fraction(1, k))
            if term.is_zero():
                break
            total = total + term
            k += 1
            if k > self.trunc + 1:
                break
        return total

    def grouplike_defect(self, w: TensorSeries) -> TensorSeries:
        """Delta_gamma(w) - w^1 * w^2 for w in m^2 (zero iff w = 0 truncated)."""
        self._require_m2(w, "grouplike_defect argument")
        lhs = self.coproduct(w)
        rhs = self.bch_star(self.insert(w, ((1,),), 2), self.insert(w, ((2,),), 2))
        return lhs - rhs

    def counit(self, a: TensorSeries) -> Fraction:
        return a.coefficient(unit_monomial(a.slots))


def tensor2_to_series(t: Tensor2, trunc: int, tag: str | None = None) -> TensorSeries:
    """Embed a degree-(1,1) 2-tensor as a 2-slot series."""
    return SparseTensor(2, trunc, {(((i,)), ((j,))): c for (i, j), c in t.items()}, tag=tag)
