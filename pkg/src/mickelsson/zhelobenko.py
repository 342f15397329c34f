"""Zhelobenko maps, their compositions along reduced words, and the braid
operators obtained by twisting with the Weyl-group automorphisms.

All maps act on classes in quotients of the localized smash algebra and land
in canonical coordinates, so every identity downstream is an equality of
coset normal forms.  Denominators ride along through the shift rule
q(x d) = q(x) tau(d); the series part only ever sees polynomial coefficients,
where the adjoint action of a root vector is nilpotent.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from . import _poly as P
from .coeffring import CartanRational
from .admissible import (
    CosetElement,
    CosetSpec,
    Smash,
    SmashElement,
    TensorVD,
    bc_operator,
    coset_mul_coeff,
    coset_reduce,
    nilpotent_spec,
    rank1_spec,
    standard_spec,
    z_from_tensor,
    zprime_from_tensor,
    ztilde_from_tensor,
    ztildeprime_from_tensor,
)
from .rootdata import ConfigurationError, RootSystem, WeylWord
from .uea import UEA, UEAElement, _root_neg, lusztig_T

Root = Tuple[int, ...]
F1 = Fraction(1)


# ---------------------------------------------------------------------------
# The basic series maps
# ---------------------------------------------------------------------------

def _split_denominator(alg: Smash, c: CartanRational):
    """Write c = (polynomial part) * d with d a product of inverted factors."""
    ring = alg.ring
    num = CartanRational(ring, dict(c.num), ())
    if not c.den:
        return num, None
    d = ring.one()
    for f in c.den:
        d = d * CartanRational(ring, ring.factor_value(f), ()).inv()
    return num, d


def _ad_embedded(alg: Smash, g: Root, x: SmashElement) -> SmashElement:
    gen = alg.embed(g)
    return gen * x - x * gen


def q_alpha_k(
    alg: Smash,
    gamma,
    x: SmashElement,
    k: int = 0,
    spec: Optional[CosetSpec] = None,
) -> CosetElement:
    """The order-k Zhelobenko assignment into A'/A'e_gamma (or A'/A'm)."""
    rs = alg.rs
    g = tuple(int(t) for t in gamma)
    spec = spec or rank1_spec(rs, g, "left")
    ring = alg.ring
    total = CosetElement(alg, spec, {})
    f_g = alg.embed(_root_neg(g))
    for (i, j), u in x.entries.items():
        for (fA, eA), c in u.terms.items():
            num, d = _split_denominator(alg, c)
            if d is not None:
                # term = a . D with D diagonal: D = tau_{wt(e^B) - wt_j}(den^{-1})
                wB = alg.ctx.exp_weight(eA, +1)
                d = d.tau(tuple(wB[t] - alg.V.weights[j][t] for t in range(alg.rs.rank)))
            a = SmashElement(alg, {(i, j): UEAElement(alg.ctx, {(fA, eA): num})})
            # sum over n >= k of (-1)^n/(n-k)! ad^{n-k}(x) f^n g_n
            acc = None
            adn = a
            n = k
            fac = F1
            fpow = alg.one()
            for _ in range(k):
                fpow = fpow * f_g
            while not adn.is_zero():
                if n > k:
                    fac *= n - k
                coeff = ring.one()
                for m in range(n):
                    coeff = coeff * ring.inverse_factor(g, -m)
                piece = adn * fpow
                piece = piece.coeff_right(coeff).scale(Fraction((-1) ** n, 1) / fac)
                red = coset_reduce(alg, piece, spec)
                acc = red if acc is None else acc + red
                adn = _ad_embedded(alg, g, adn)
                fpow = fpow * f_g
                n += 1
                if n > 120:  # pragma: no cover
                    raise RuntimeError("q map did not terminate")
            if acc is None:
                continue
            if d is not None:
                acc = coset_mul_coeff(acc, d.tau(g), side="right")
            total = total + acc
    return total


def q_alpha(alg: Smash, gamma, x: SmashElement, spec: Optional[CosetSpec] = None) -> CosetElement:
    return q_alpha_k(alg, gamma, x, 0, spec)


def qtilde_alpha(
    alg: Smash,
    gamma,
    x: SmashElement,
    spec: Optional[CosetSpec] = None,
) -> CosetElement:
    """Mirror series map into m_- A' \\ A'."""
    rs = alg.rs
    g = tuple(int(t) for t in gamma)
    spec = spec or rank1_spec(rs, tuple(-t for t in g), "mirror")
    ring = alg.ring
    total = CosetElement(alg, spec, {})
    e_g = alg.embed(g)
    ng = _root_neg(g)
    for (i, j), u in x.entries.items():
        for (fA, eA), c in u.terms.items():
            num, d = _split_denominator(alg, c)
            if d is not None:
                # term = D . a with D diagonal: D = tau_{-(wt_i + wt f^A)}(den^{-1})
                wA = alg.ctx.exp_weight(fA, -1)
                d = d.tau(tuple(-(alg.V.weights[i][t] + wA[t]) for t in range(alg.rs.rank)))
            a = SmashElement(alg, {(i, j): UEAElement(alg.ctx, {(fA, eA): num})})
            acc = None
            adn = a
            n = 0
            fac = F1
            epow = alg.one()
            while not adn.is_zero():
                if n:
                    fac *= n
                coeff = ring.one()
                for m in range(n):
                    coeff = coeff * ring.inverse_factor(g, -m)
                piece = (epow * adn).coeff_left(coeff).scale(F1 / fac)
                red = coset_reduce(alg, piece, spec)
                acc = red if acc is None else acc + red
                adn = _ad_embedded(alg, ng, adn)
                epow = epow * e_g
                n += 1
                if n > 120:  # pragma: no cover
                    raise RuntimeError("qtilde map did not terminate")
            if acc is None:
                continue
            if d is not None:
                acc = coset_mul_coeff(acc, d.tau(g), side="left")
            total = total + acc
    return total


# ---------------------------------------------------------------------------
# Compositions along reduced words
# ---------------------------------------------------------------------------

def word_data(rs: RootSystem, word: WeylWord, seed: WeylWord):
    """The root/subalgebra sequence attached to a reduced decomposition."""
    if not word.is_reduced:
        raise ConfigurationError("word is not reduced")
    wp = rs.weyl_from_word(seed.letters)
    w = rs.weyl_from_word(word.letters)
    if (wp * w).length() != wp.length() + w.length():
        raise ConfigurationError("length condition fails")
    out = []
    prefix = wp
    for i in word.letters:
        alpha = tuple(1 if j == i else 0 for j in range(rs.rank))
        gamma = tuple(int(t) for t in prefix.act_root(alpha))
        m_roots = tuple(
            tuple(int(t) for t in prefix.act_root(g)) for g in rs.positive_roots
        )
        out.append((gamma, m_roots))
        prefix = prefix * rs.simple_reflection(i)
    return out


def q_word(alg: Smash, word: WeylWord, seed: WeylWord, x: SmashElement) -> CosetElement:
    """q along a reduced word: rightmost factor acts first."""
    data = word_data(alg.rs, word, seed)
    cur = x
    cls = None
    for gamma, m_roots in reversed(data):
        spec = nilpotent_spec(alg.rs, m_roots, "left")
        cls = q_alpha(alg, gamma, cur, spec)
        cur = cls.lift()
    if cls is None:
        cls = coset_reduce(alg, x, nilpotent_spec(
            alg.rs,
            tuple(tuple(int(t) for t in alg.rs.weyl_from_word(seed.letters).act_root(g)) for g in alg.rs.positive_roots),
            "left",
        ))
    return cls


def qtilde_word(alg: Smash, word: WeylWord, seed: WeylWord, x: SmashElement) -> CosetElement:
    data = word_data(alg.rs, word, seed)
    cur = x
    cls = None
    for gamma, m_roots in reversed(data):
        spec = nilpotent_spec(alg.rs, m_roots, "mirror")
        cls = qtilde_alpha(alg, gamma, cur, spec)
        cur = cls.lift()
    if cls is None:
        cls = coset_reduce(alg, x, standard_spec(alg.rs, "mirror"))
    return cls


def q_w0(alg: Smash, x: SmashElement) -> CosetElement:
    """q along the longest element: double cosets onto the step algebra."""
    rs = alg.rs
    word = rs.word(rs.longest_element().canonical_word())
    return q_word(alg, word, rs.word(()), x)


def qtilde_w0(alg: Smash, x: SmashElement) -> CosetElement:
    rs = alg.rs
    word = rs.word(rs.longest_element().canonical_word())
    return qtilde_word(alg, word, rs.word(()), x)


# ---------------------------------------------------------------------------
# Weyl-group automorphisms of the smash algebra and braid operators
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _module_weyl_matrix(alg: Smash, i: int):
    """exp(pi e_i) exp(-pi f_i) exp(pi e_i) and its inverse, exact."""
    alpha = tuple(1 if j == i else 0 for j in range(alg.rs.rank))
    E = alg.V.matrix(alpha)
    Fm = alg.V.matrix(_root_neg(alpha))
    n = alg.dim

    def mexp(mat, sign=1):
        out = [[F1 if r == c else Fraction(0) for c in range(n)] for r in range(n)]
        term = [row[:] for row in out]
        k = 1
        while True:
            term = [
                [
                    sum(term[r][t] * sign * mat[t][c] for t in range(n))
                    for c in range(n)
                ]
                for r in range(n)
            ]
            if all(all(x == 0 for x in row) for row in term):
                return out
            out = [
                [out[r][c] + term[r][c] / Fraction(_factorial(k)) for c in range(n)]
                for r in range(n)
            ]
            k += 1

    def mmul(a, b):
        return [
            [sum(a[r][t] * b[t][c] for t in range(n)) for c in range(n)]
            for r in range(n)
        ]

    S = mmul(mexp(E), mmul(mexp(Fm, sign=-1), mexp(E)))
    Sinv = _mat_inverse(S)
    return S, Sinv


def _factorial(k):
    out = 1
    for t in range(2, k + 1):
        out *= t
    return out


def _mat_inverse(mat):
    n = len(mat)
    a = [row[:] + [F1 if r == c else Fraction(0) for c in range(n)] for r, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def smash_T(alg: Smash, i: int, x: SmashElement) -> SmashElement:
    """Extension of the braid automorphism: Weyl twist on U'(g) entries and
    conjugation by the module Weyl element on the End(V) factor."""
    S, Sinv = _module_weyl_matrix(alg, i)
    n = alg.dim
    out: Dict[Tuple[int, int], UEAElement] = {}
    for (r, c), u in x.entries.items():
        tu = lusztig_T(alg.ctx, i, u)
        for a in range(n):
            if not S[a][r]:
                continue
            for b in range(n):
                if not Sinv[c][b]:
                    continue
                add = tu.scale(S[a][r] * Sinv[c][b])
                key = (a, b)
                out[key] = out[key] + add if key in out else add
    return SmashElement(alg, out)


def smash_T_word(alg: Smash, letters: Sequence[int], x: SmashElement) -> SmashElement:
    for i in reversed(list(letters)):
        x = smash_T(alg, i, x)
    return x


def smash_T_inv(alg: Smash, i: int, x: SmashElement) -> SmashElement:
    """Inverse of the extended braid automorphism."""
    from .uea import lusztig_T_inv

    S, Sinv = _module_weyl_matrix(alg, i)
    n = alg.dim
    out: Dict[Tuple[int, int], UEAElement] = {}
    for (r, c), u in x.entries.items():
        tu = lusztig_T_inv(alg.ctx, i, u)
        for a in range(n):
            if not Sinv[a][r]:
                continue
            for b in range(n):
                if not S[c][b]:
                    continue
                add = tu.scale(Sinv[a][r] * S[c][b])
                key = (a, b)
                out[key] = out[key] + add if key in out else add
    return SmashElement(alg, out)


def qcheck(alg: Smash, i: int, x: CosetElement) -> CosetElement:
    """Braid operator on A'/A'n: Zhelobenko map after the Weyl twist."""
    spec = standard_spec(alg.rs, "left")
    assert x.spec == spec
    alpha = tuple(1 if j == i else 0 for j in range(alg.rs.rank))
    twisted = smash_T(alg, i, x.lift())
    return q_alpha(alg, alpha, twisted, spec)


def qcheck_word(alg: Smash, letters: Sequence[int], x: CosetElement) -> CosetElement:
    for i in reversed(list(letters)):
        x = qcheck(alg, i, x)
    return x


def qcheck_tilde(alg: Smash, i: int, x: CosetElement) -> CosetElement:
    """Mirror braid operator on n_- A' \\ A'."""
    spec = standard_spec(alg.rs, "mirror")
    assert x.spec == spec
    alpha = tuple(1 if j == i else 0 for j in range(alg.rs.rank))
    twisted = smash_T(alg, i, x.lift())
    return qtilde_alpha(alg, alpha, twisted, spec)


def qcheck_tilde_word(alg: Smash, letters: Sequence[int], x: CosetElement) -> CosetElement:
    for i in reversed(list(letters)):
        x = qcheck_tilde(alg, i, x)
    return x


# ---------------------------------------------------------------------------
# Generator images under the braid operators
# ---------------------------------------------------------------------------

def qcheck_on_z_expected(alg: Smash, i: int, mat) -> CosetElement:
    """Right side of the first-type image law: z_{C2[-rho](1 (x) T_i(v))}."""
    S, Sinv = _module_weyl_matrix(alg, i)
    n = alg.dim
    tv_mat = _conjugate(S, mat, Sinv)
    tv = TensorVD.from_matrix(alg, 2, tv_mat)
    alpha = tuple(1 if j == i else 0 for j in range(alg.rs.rank))
    out = bc_operator(alg, "C2", alpha, tuple(-t for t in alg.rs.rho)).apply(tv)
    return z_from_tensor(alg, out)


def qcheck_on_zprime_expected(alg: Smash, i: int, mat) -> CosetElement:
    """Right side of the second-type image law: z'_{B2[rho](1 (x) T_i(v))}."""
    S, Sinv = _module_weyl_matrix(alg, i)
    tv_mat = _conjugate(S, mat, Sinv)
    tv = TensorVD.from_matrix(alg, 2, tv_mat)
    alpha = tuple(1 if j == i else 0 for j in range(alg.rs.rank))
    out = bc_operator(alg, "B2", alpha, alg.rs.rho).apply(tv)
    return zprime_from_tensor(alg, out)


def qtilde_on_ztilde_expected(alg: Smash, i: int, mat) -> CosetElement:
    """Mirror first-type law: ztilde_{C1[-rho](T_i(v) (x) 1)}."""
    S, Sinv = _module_weyl_matrix(alg, i)
    tv = TensorVD.from_matrix(alg, 1, _conjugate(S, mat, Sinv))
    alpha = tuple(1 if j == i else 0 for j in range(alg.rs.rank))
    out = bc_operator(alg, "C1", alpha, tuple(-t for t in alg.rs.rho)).apply(tv)
    return ztilde_from_tensor(alg, out)


def qtilde_on_ztildeprime_expected(alg: Smash, i: int, mat) -> CosetElement:
    """Mirror second-type law: ztilde'_{B1[rho](T_i(v) (x) 1)}."""
    S, Sinv = _module_weyl_matrix(alg, i)
    tv = TensorVD.from_matrix(alg, 1, _conjugate(S, mat, Sinv))
    alpha = tuple(1 if j == i else 0 for j in range(alg.rs.rank))
    out = bc_operator(alg, "B1", alpha, alg.rs.rho).apply(tv)
    return ztildeprime_from_tensor(alg, out)


def _conjugate(S, mat, Sinv):
    n = len(S)
    tmp = [
        [sum(S[r][t] * mat[t][c] for t in range(n)) for c in range(n)]
        for r in range(n)
    ]
    return [
        [sum(tmp[r][t] * Sinv[t][c] for t in range(n)) for c in range(n)]
        for r in range(n)
    ]
