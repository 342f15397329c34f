"""Finite-type root systems, Weyl groups, reduced words and normal orderings.

Roots are integer vectors in the simple-root basis; weights are rational
vectors in the same basis.  Coroots are rational (in fact integer) vectors in
the simple-coroot basis.  Only the rank <= 2 types A1, A2, B2, G2 ship, which
realize every braid exponent m in {2, 3, 4, 6}; anything else can be added by
Cartan matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

Root = Tuple[int, ...]
Weight = Tuple[Fraction, ...]


class ConfigurationError(ValueError):
    """Bad algebra label, word or length condition."""


CARTAN_MATRICES = {
    # label -> (cartan matrix rows a[i][j], symmetrizers d)
    "A1": (((2,),), (1,)),
    "A2": (((2, -1), (-1, 2)), (1, 1)),
    # alpha1 long, alpha2 short
    "B2": (((2, -1), (-2, 2)), (2, 1)),
    # alpha1 long, alpha2 short
    "G2": (((2, -1), (-3, 2)), (3, 1)),
}


def _frac_vec(v) -> Weight:
    return tuple(Fraction(x) for x in v)


@dataclass(frozen=True)
class WeylElement:
    """Weyl group element stored as its matrix on root-basis coordinates."""

    rs: "RootSystem" = field(compare=False)
    matrix: Tuple[Tuple[Fraction, ...], ...]

    def act_root(self, v: Sequence) -> Weight:
        m = self.matrix
        return tuple(
            sum((m[i][j] * Fraction(v[j]) for j in range(len(v))), Fraction(0))
            for i in range(len(v))
        )

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        a, b = self.matrix, other.matrix
        n = len(a)
        prod = tuple(
            tuple(sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n))
            for i in range(n)
        )
        return WeylElement(self.rs, prod)

    def inverse(self) -> "WeylElement":
        # Weyl matrices on the root lattice have finite order
        w = self
        prev = self.rs.weyl_identity()
        while w != self.rs.weyl_identity():
            prev = prev * self  # prev = w^k, loop below fixes
            break
        # simplest: build from reversed canonical word
        word = self.canonical_word()
        out = self.rs.weyl_identity()
        for i in reversed(word):
            out = out * self.rs.simple_reflection(i)
        return out

    @property
    def is_identity(self) -> bool:
        n = len(self.matrix)
        return all(
            self.matrix[i][j] == (1 if i == j else 0) for i in range(n) for j in range(n)
        )

    def length(self) -> int:
        return sum(1 for g in self.rs.positive_roots if not _is_positive(self.act_root(g)))

    def canonical_word(self) -> Tuple[int, ...]:
        """Lexicographically least reduced word (deterministic tie-break)."""
        w = self
        letters: List[int] = []
        while not w.is_identity:
            for i in range(self.rs.rank):
                # l(s_i w) < l(w)  iff  w^{-1}(alpha_i) < 0; equivalently
                # alpha_i is sent negative by w acting on the left.  Use the
                # standard criterion via descent on the left: s_i w shorter.
                cand = self.rs.simple_reflection(i) * w
                if cand.length() < w.length():
                    letters.append(i)
                    w = cand
                    break
            else:  # pragma: no cover - cannot happen for Weyl matrices
                raise RuntimeError("no descent found")
        return tuple(letters)

    def __hash__(self):
        return hash(self.matrix)


def _is_positive(v: Sequence[Fraction]) -> bool:
    nonneg = all(x >= 0 for x in v)
    return nonneg and any(x > 0 for x in v)


@dataclass(frozen=True)
class WeylWord:
    """A word in simple reflections, together with its reducedness flag."""

    letters: Tuple[int, ...]
    is_reduced: bool

    def __iter__(self):
        return iter(self.letters)

    def __len__(self):
        return len(self.letters)


@dataclass(frozen=True)
class NormalOrdering:
    """A convex total order on the positive roots."""

    roots: Tuple[Root, ...]

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)

    def index(self, g: Root) -> int:
        return self.roots.index(g)


class RootSystem:
    """Root data for one finite-type simple Lie algebra."""

    def __init__(self, type_label: str):
        if type_label not in CARTAN_MATRICES:
            raise ConfigurationError(f"unknown algebra label {type_label!r}")
        self.type_label = type_label
        cartan, d = CARTAN_MATRICES[type_label]
        self.cartan_matrix = cartan
        self.d_values = d
        self.rank = len(cartan)
        for i in range(self.rank):
            for j in range(self.rank):
                if d[i] * cartan[i][j] != d[j] * cartan[j][i]:
                    raise ConfigurationError("Cartan matrix is not symmetrizable")
        # (alpha_i, alpha_j) = d_i a_{ij}
        self.bilinear = tuple(
            tuple(Fraction(d[i] * cartan[i][j]) for j in range(self.rank))
            for i in range(self.rank)
        )
        self.positive_roots: Tuple[Root, ...] = self._generate_positive_roots()
        self.coroot_table: Dict[Root, Weight] = {
            g: self._coroot(g) for g in self.positive_roots
        }
        self.rho: Weight = tuple(
            sum((Fraction(g[i]) for g in self.positive_roots), Fraction(0)) / 2
            for i in range(self.rank)
        )
        self._check_invariants()

    # -- construction ---------------------------------------------------

    def _simple_reflection_image(self, i: int, v: Sequence) -> Weight:
        # s_i(v) = v - <h_i, v> alpha_i
        pairing = sum(Fraction(self.cartan_matrix[i][j]) * Fraction(v[j]) for j in range(self.rank))
        out = list(_frac_vec(v))
        out[i] -= pairing
        return tuple(out)

    def _generate_positive_roots(self) -> Tuple[Root, ...]:
        simples = [tuple(1 if j == i else 0 for j in range(self.rank)) for i in range(self.rank)]
        seen = set(simples)
        frontier = list(simples)
        while frontier:
            nxt = []
            for v in frontier:
                for i in range(self.rank):
                    img = self._simple_reflection_image(i, v)
                    if _is_positive(img):
                        key = tuple(int(x) for x in img)
                        if key not in seen:
                            seen.add(key)
                            nxt.append(key)
            frontier = nxt
        return tuple(sorted(seen, key=lambda r: (sum(r), r)))

    def root_norm(self, g: Sequence) -> Fraction:
        """(g, g) in the invariant form."""
        return self.form(g, g)

    def form(self, a: Sequence, b: Sequence) -> Fraction:
        return sum(
            Fraction(a[i]) * self.bilinear[i][j] * Fraction(b[j])
            for i in range(self.rank)
            for j in range(self.rank)
        )

    def _coroot(self, g: Root) -> Weight:
        # h_g = sum_i g_i d_i * (2/(g,g)) h_i
        norm = self.root_norm(g)
        vec = tuple(Fraction(2 * g[i] * self.d_values[i], 1) / norm for i in range(self.rank))
        for x in vec:
            if x.denominator != 1:
                raise ConfigurationError("coroot is not integral")
        return vec

    def _check_invariants(self):
        pos = set(self.positive_roots)
        for a in pos:
            for b in pos:
                s = tuple(x + y for x, y in zip(a, b))
                if s in pos:
                    # coroot additivity rule
                    na, nb, ns = self.root_norm(a), self.root_norm(b), self.root_norm(s)
                    lhs = tuple(
                        na * self.coroot_table[a][i] + nb * self.coroot_table[b][i]
                        for i in range(self.rank)
                    )
                    rhs = tuple(ns * self.coroot_table[s][i] for i in range(self.rank))
                    if lhs != rhs:
                        raise ConfigurationError("coroot additivity fails")

    # -- pairings ---------------------------------------------------------

    def coroot(self, g: Sequence) -> Weight:
        """Coroot vector of any (positive or negative) root."""
        key = tuple(int(x) for x in g)
        if key in self.coroot_table:
            return self.coroot_table[key]
        neg = tuple(-x for x in key)
        if neg in self.coroot_table:
            return tuple(-c for c in self.coroot_table[neg])
        raise ConfigurationError(f"{g} is not a root")

    def is_root(self, g: Sequence) -> bool:
        key = tuple(int(x) for x in g) if all(Fraction(x).denominator == 1 for x in g) else None
        if key is None:
            return False
        return key in self.coroot_table or tuple(-x for x in key) in self.coroot_table

    def pairing(self, g: Sequence, lam: Sequence) -> Fraction:
        """<h_g, lam> for a root g and a weight lam (both in the root basis)."""
        norm = self.root_norm(g)
        return 2 * self.form(g, lam) / norm

    def coroot_pairing(self, coroot_vec: Sequence, lam: Sequence) -> Fraction:
        """<h, lam> where h = sum coroot_vec[i] h_i."""
        return sum(
            Fraction(coroot_vec[i])
            * sum(self.bilinear[i][j] * Fraction(lam[j]) for j in range(self.rank))
            / self.d_values[i]
            for i in range(self.rank)
        )

    def fundamental_weight(self, i: int) -> Weight:
        """Weight with <h_j, w> = delta_ij, as a root-basis vector."""
        # solve cartan^T? : <h_j, w> = sum_k a_{j,k} w_k
        n = self.rank
        rows = [[Fraction(self.cartan_matrix[j][k]) for k in range(n)] for j in range(n)]
        rhs = [Fraction(1 if j == i else 0) for j in range(n)]
        return tuple(_solve(rows, rhs))

    def weight_from_coefficients(self, coeffs: Sequence) -> Weight:
        """Weight sum(coeffs[i] * fundamental_i)."""
        out = [Fraction(0)] * self.rank
        for i, c in enumerate(coeffs):
            w = self.fundamental_weight(i)
            for j in range(self.rank):
                out[j] += Fraction(c) * w[j]
        return tuple(out)

    # -- Weyl group -------------------------------------------------------

    def weyl_identity(self) -> WeylElement:
        n = self.rank
        return WeylElement(self, tuple(
            tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)
        ))

    @lru_cache(maxsize=None)
    def _simple_reflection_cached(self, i: int):
        n = self.rank
        cols = []
        for j in range(n):
            basis = [0] * n
            basis[j] = 1
            cols.append(self._simple_reflection_image(i, basis))
        matrix = tuple(tuple(cols[j][i2] for j in range(n)) for i2 in range(n))
        return WeylElement(self, matrix)

    def simple_reflection(self, i: int) -> WeylElement:
        if not 0 <= i < self.rank:
            raise ConfigurationError(f"no simple root with index {i}")
        return self._simple_reflection_cached(i)

    def weyl_from_word(self, letters: Sequence[int]) -> WeylElement:
        w = self.weyl_identity()
        for i in letters:
            w = w * self.simple_reflection(i)
        return w

    def word(self, letters: Sequence[int]) -> WeylWord:
        letters = tuple(letters)
        w = self.weyl_from_word(letters)
        return WeylWord(letters, w.length() == len(letters))

    def longest_element(self) -> WeylElement:
        w = self.weyl_identity()
        n = len(self.positive_roots)
        while w.length() < n:
            for i in range(self.rank):
                cand = w * self.simple_reflection(i)
                if cand.length() > w.length():
                    w = cand
                    break
        return w

    def longest_word(self) -> WeylWord:
        return self.word(self.longest_element().canonical_word())

    def reduced_words(self, w: WeylElement) -> List[Tuple[int, ...]]:
        """All reduced words of w (desk-scale: rank <= 2)."""
        if w.is_identity:
            return [()]
        out = []
        for i in range(self.rank):
            cand = w * self.simple_reflection(i)
            if cand.length() < w.length():
                for tail in self.reduced_words(cand):
                    out.append(tail + (i,))
        # found by peeling on the right: w = w' * s_i
        return sorted(set(out))

    def braid_exponent(self, i: int, j: int) -> int:
        prod = self.cartan_matrix[i][j] * self.cartan_matrix[j][i]
        return {0: 2, 1: 3, 2: 4, 3: 6}[prod]

    # -- operations of the module interface -------------------------------

    def root_sequence(self, word: WeylWord, seed: WeylWord) -> List[Weight]:
        """Roots gamma_k = seed * w_{k-1} (alpha_{i_k}) along a reduced word."""
        if not word.is_reduced:
            raise ConfigurationError("word is not reduced")
        wp = self.weyl_from_word(seed.letters)
        w = self.weyl_from_word(word.letters)
        if (wp * w).length() != wp.length() + w.length():
            raise ConfigurationError("length condition l(seed*word)=l(seed)+l(word) fails")
        out = []
        prefix = wp
        for k, i in enumerate(word.letters):
            alpha = tuple(1 if j == i else 0 for j in range(self.rank))
            out.append(prefix.act_root(alpha))
            prefix = prefix * self.simple_reflection(i)
        return out

    def normal_ordering_from_word(self, word: WeylWord) -> NormalOrdering:
        seq = self.root_sequence(word, self.word(()))
        if len(seq) != len(self.positive_roots):
            raise ConfigurationError("word is not a reduced word of the longest element")
        roots = tuple(tuple(int(x) for x in g) for g in seq)
        ordering = NormalOrdering(roots)
        if not self.is_convex(ordering):
            raise ConfigurationError("ordering fails convexity")
        return ordering

    def default_ordering(self) -> NormalOrdering:
        return self.normal_ordering_from_word(self.longest_word())

    def is_convex(self, ordering: NormalOrdering) -> bool:
        roots = ordering.roots
        pos = {g: k for k, g in enumerate(roots)}
        for i, a in enumerate(roots):
            for j, b in enumerate(roots):
                if i >= j:
                    continue
                s = tuple(x + y for x, y in zip(a, b))
                if s in pos and not (i < pos[s] < j):
                    return False
        return True


def _solve(rows: List[List[Fraction]], rhs: List[Fraction]) -> List[Fraction]:
    """Tiny exact Gaussian elimination (square, nonsingular)."""
    n = len(rows)
    a = [row[:] + [rhs[i]] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


@lru_cache(maxsize=None)
def build_root_system(type_label: str) -> RootSystem:
    """Shared, immutable root-system instances keyed by algebra tag."""
    return RootSystem(type_label)
