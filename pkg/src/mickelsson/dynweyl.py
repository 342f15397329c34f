"""Dynamical Weyl operators on finite-dimensional modules and intertwiners.

The weight parameter stays symbolic: matrices live over the same factored
rational-function ring as the Cartan coefficients, with the variables read as
the pairings t_i = <h_i, lambda>.  Genericity violations then show up as
explicit poles instead of silent division errors.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from . import _poly as P
from .coeffring import CartanRational, CoeffRing
from .rootdata import RootSystem, WeylWord
from .uea import UEA, SimpleModule, UEAElement, _root_neg, simple_module

F0 = Fraction(0)
F1 = Fraction(1)
Root = Tuple[int, ...]


@lru_cache(maxsize=None)
def lam_ring(rs: RootSystem) -> CoeffRing:
    """Rational functions of a symbolic weight, variables t_i = <h_i, lam>."""
    return CoeffRing(rs, var_names=tuple(f"t{i+1}" for i in range(rs.rank)))


def _mm(a, b):
    n = len(a)
    return [[sum(a[r][t] * b[t][c] for t in range(n)) for c in range(n)] for r in range(n)]


def _inv(mat):
    n = len(mat)
    a = [row[:] + [F1 if r == c else F0 for c in range(n)] for r, row in enumerate(mat)]
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


class WeightModule:
    """A finite-dimensional module with exact matrices and Weyl lifts."""

    def __init__(self, ctx: UEA, module: SimpleModule):
        self.ctx = ctx
        self.rs = ctx.rs
        self.V = module
        self.dim = module.dim
        self._lift_cache: Dict[int, list] = {}

    @classmethod
    def build(cls, rs: RootSystem, fundamental_coeffs: Sequence[int]) -> "WeightModule":
        ctx = UEA(rs)
        return cls(ctx, simple_module(ctx, fundamental_coeffs))

    def matrix(self, g) -> List[List[Fraction]]:
        return self.V.matrix(g)

    def weyl_lift(self, i: int):
        """exp(pi e_i) exp(-pi f_i) exp(pi e_i), an exact invertible matrix."""
        if i in self._lift_cache:
            return self._lift_cache[i]
        alpha = tuple(1 if j == i else 0 for j in range(self.rs.rank))
        E = self.V.matrix(alpha)
        Fm = self.V.matrix(_root_neg(alpha))
        n = self.dim

        def mexp(mat, sign=1):
            out = [[F1 if r == c else F0 for c in range(n)] for r in range(n)]
            term = [row[:] for row in out]
            k = 1
            while True:
                term = [
                    [sum(term[r][t] * sign * mat[t][c] for t in range(n)) for c in range(n)]
                    for r in range(n)
                ]
                if all(all(x == 0 for x in row) for row in term):
                    return out
                fact = 1
                for j in range(2, k + 1):
                    fact *= j
                out = [
                    [out[r][c] + term[r][c] / Fraction(fact) for c in range(n)]
                    for r in range(n)
                ]
                k += 1

        S = _mm(mexp(E), _mm(mexp(Fm, sign=-1), mexp(E)))
        self._lift_cache[i] = S
        return S

    def weyl_lift_word(self, letters: Sequence[int]):
        n = self.dim
        out = [[F1 if r == c else F0 for c in range(n)] for r in range(n)]
        for i in letters:
            out = _mm(out, self.weyl_lift(i))
        return out

    def equivariant(self, i: int) -> bool:
        """T pi(g) T^{-1} = pi(T_i(g)) on all root letters."""
        from .uea import _lusztig_letter_maps, chevalley_table

        table = chevalley_table(self.rs)
        S = self.weyl_lift(i)
        Sinv = _inv(S)
        letter_map = _lusztig_letter_maps(table)[i]
        for g in table.all_roots:
            lhs = _mm(_mm(S, self.V.matrix(g)), Sinv)
            c, img = letter_map[g]
            rhs = [[c * x for x in row] for row in self.V.matrix(img)]
            if lhs != rhs:
                return False
        return True


# ---------------------------------------------------------------------------
# Projector factors as symbolic matrices
# ---------------------------------------------------------------------------

def phat_on_module(
    mod: WeightModule,
    gamma,
    sign: int = +1,
    shift=None,
    lam_sign: int = +1,
) -> List[List[CartanRational]]:
    """Matrix of one projector factor at the symbolic weight lam_sign * lam + shift.

    sign=+1 is the lowering-left variant: coefficients
    prod_j 1/(<h_g, wt> + lam_sign t_g + <h_g, shift> + j) applied after
    pi(f_g)^k pi(e_g)^k; sign=-1 swaps raising and lowering and negates the
    weight eigenvalue in the denominators.
    """
    rs = mod.rs
    ring = lam_ring(rs)
    g = tuple(int(x) for x in gamma)
    shift_vec = tuple(shift) if shift is not None else tuple([Fraction(0)] * rs.rank)
    pair_shift = rs.pairing(g, shift_vec)
    n = mod.dim
    E = mod.V.matrix(g)
    Fm = mod.V.matrix(_root_neg(g))
    out = [[ring.one() if r == c else ring.zero() for c in range(n)] for r in range(n)]
    term = [[F1 if r == c else F0 for c in range(n)] for r in range(n)]
    k = 1
    fact = F1
    while True:
        if sign > 0:
            term = _mm(_mm(Fm, term), E)
        else:
            term = _mm(_mm(E, term), Fm)
        if all(all(x == 0 for x in row) for row in term):
            return out
        fact *= k
        for r in range(n):
            if all(term[r][c] == 0 for c in range(n)):
                continue
            hval = rs.pairing(g, mod.V.weights[r])
            coeff = ring.one()
            for j in range(1, k + 1):
                coeff = coeff * ring.inverse_factor(
                    tuple(lam_sign * x for x in g), sign * hval + pair_shift + j
                )
            coeff = coeff * (Fraction((-1) ** k, 1) / fact)
            for c in range(n):
                if term[r][c]:
                    out[r][c] = out[r][c] + coeff * term[r][c]
        k += 1
        if k > 4 * n + 4:  # pragma: no cover
            raise RuntimeError("factor series did not terminate on the module")


def dyn_weyl_operator(
    mod: WeightModule, word: WeylWord, rho_shift: bool = True
) -> List[List[CartanRational]]:
    """Operator v -> phat_{-g1}[lam+rho] ... phat_{-gn}[lam+rho] (T_w v)."""
    rs = mod.rs
    seq = rs.root_sequence(word, rs.word(()))
    n = mod.dim
    ring = lam_ring(rs)
    Tw = mod.weyl_lift_word(list(word.letters))
    out = [[ring.const(Tw[r][c]) for c in range(n)] for r in range(n)]
    shift = rs.rho if rho_shift else None
    for g in reversed(seq):
        g = tuple(int(x) for x in g)
        fac = phat_on_module(mod, g, sign=-1, shift=shift)
        out = [
            [
                _dot(ring, [fac[r][t] for t in range(n)], [out[t][c] for t in range(n)])
                for c in range(n)
            ]
            for r in range(n)
        ]
    return out


def _dot(ring, row, col):
    total = ring.zero()
    for a, b in zip(row, col):
        total = total + a * b
    return total


def inversion_check(mod: WeightModule, gamma) -> bool:
    """The product of opposite factors at opposite weights is the stated
    diagonal rational matrix, exactly in the symbolic weight."""
    rs = mod.rs
    ring = lam_ring(rs)
    g = tuple(int(x) for x in gamma)
    plus = phat_on_module(mod, g, sign=+1, lam_sign=+1)
    minus = phat_on_module(mod, g, sign=-1, lam_sign=-1)
    n = mod.dim
    prod = [
        [_dot(ring, [plus[r][t] for t in range(n)], [minus[t][c] for t in range(n)]) for c in range(n)]
        for r in range(n)
    ]
    for r in range(n):
        for c in range(n):
            if r != c:
                if not prod[r][c].is_zero():
                    return False
            else:
                hval = rs.pairing(g, mod.V.weights[r])
                expect = ring.linear_factor(g, hval) * ring.inverse_factor(g, 0)
                if prod[r][c] != expect:
                    return False
    return True


# ---------------------------------------------------------------------------
# Intertwiners between Verma-type modules (rank one, symbolic weight)
# ---------------------------------------------------------------------------

class TruncVerma:
    """Rank-one Verma module with symbolic highest weight t, height-truncated."""

    def __init__(self, rs: RootSystem, depth: int, shift: Fraction = F0):
        assert rs.rank == 1
        self.rs = rs
        self.ring = lam_ring(rs)
        self.depth = depth
        # highest weight pairing value: t + shift
        self.shift = Fraction(shift)

    def tvalue(self) -> CartanRational:
        return self.ring.h(0) + self.ring.const(self.shift)

    def e_action(self, m: int) -> Tuple[int, CartanRational]:
        """e . f^m = f^{m-1} * m (t - m + 1) (zero on the top)."""
        if m == 0:
            return (0, self.ring.zero())
        coeff = (self.tvalue() + self.ring.const(-(m - 1))) * Fraction(m)
        return (m - 1, coeff)

    def h_value(self, m: int) -> CartanRational:
        return self.tvalue() + self.ring.const(-2 * m)


class Intertwiner:
    """A map M_t -> End(V) (x) M_{t - nu} given by images of f^m . 1."""

    def __init__(self, smash, x_coset, depth: int = 6):
        from .admissible import CosetElement

        self.alg = smash
        self.rs = smash.rs
        assert self.rs.rank == 1
        self.ring = lam_ring(self.rs)
        self.depth = depth
        lift = x_coset.lift()
        # adjoint weight of the class (assumed homogeneous)
        wts = lift.weight_components()
        assert len(wts) == 1, "intertwiner source must be weight homogeneous"
        self.nu = next(iter(wts))
        self.nu_pair = self.rs.pairing((1,), self.nu)
        self.source = TruncVerma(self.rs, depth)
        self.target = TruncVerma(self.rs, depth + 8, shift=-self.nu_pair)
        # images[m] : dict (k, l, mm) -> coefficient for E_kl (x) f^mm . 1
        self.images: List[Dict[Tuple[int, int, int], CartanRational]] = []
        img0 = self._leading_image(lift)
        self.images.append(img0)
        for m in range(1, depth + 1):
            self.images.append(self._f_act(self.images[-1]))

    def _leading_image(self, lift) -> Dict[Tuple[int, int, int], CartanRational]:
        out: Dict[Tuple[int, int, int], CartanRational] = {}
        for (k, l), u in lift.entries.items():
            for (fA, eA), c in u.terms.items():
                if any(eA):
                    continue  # raising part dies on the highest vector
                m = fA[0]
                # evaluate the D part at the target weight t - nu
                val = self._eval_target(c)
                key = (k, l, m)
                out[key] = out.get(key, self.ring.zero()) + val
        return {k: v for k, v in out.items() if not v.is_zero()}

    def _eval_target(self, c: CartanRational) -> CartanRational:
        """Substitute h -> t - <h, nu> into an element of D."""
        ring = self.ring
        shift = -self.nu_pair
        num = P.p_shift(c.num, (shift,))
        out = CartanRational(ring, num, ())
        for idx, kk in c.den:
            out = out * ring.inverse_factor(ring.factor_roots[idx], kk + shift)
        return out

    def _f_act(self, img: Dict[Tuple[int, int, int], CartanRational]):
        """Action of f on End(V) (x) M: ad part plus module part."""
        alg = self.alg
        out: Dict[Tuple[int, int, int], CartanRational] = {}
        Fm = alg.V.matrix((-1,))
        n = alg.dim
        for (k, l, m), c in img.items():
            # ad_{pi f} on the unit
            for r in range(n):
                if Fm[r][k]:
                    key = (r, l, m)
                    out[key] = out.get(key, self.ring.zero()) + c * Fm[r][k]
                if Fm[l][r]:
                    key = (k, r, m)
                    out[key] = out.get(key, self.ring.zero()) - c * Fm[l][r]
            # f on the Verma factor
            if m + 1 <= self.target.depth:
                key = (k, l, m + 1)
                out[key] = out.get(key, self.ring.zero()) + c
        return {k: v for k, v in out.items() if not v.is_zero()}

    def image(self, m: int) -> Dict[Tuple[int, int, int], CartanRational]:
        return self.images[m]

    def intertwines(self) -> bool:
        """Check the e-action compatibility on the truncated basis."""
        alg = self.alg
        E = alg.V.matrix((1,))
        n = alg.dim
        for m in range(1, self.depth + 1):
            # e . (f^m . 1) in the source
            mm, coeff = self.source.e_action(m)
            expect: Dict[Tuple[int, int, int], CartanRational] = {}
            for key, c in self.images[mm].items():
                expect[key] = expect.get(key, self.ring.zero()) + c * coeff
            # e acting on the image of f^m . 1
            got: Dict[Tuple[int, int, int], CartanRational] = {}
            for (k, l, mt), c in self.images[m].items():
                for r in range(n):
                    if E[r][k]:
                        key = (r, l, mt)
                        got[key] = got.get(key, self.ring.zero()) + c * E[r][k]
                    if E[l][r]:
                        key = (k, r, mt)
                        got[key] = got.get(key, self.ring.zero()) - c * E[l][r]
                if mt:
                    tv = self.target
                    mt2, ce = tv.e_action(mt)
                    key = (k, l, mt2)
                    got[key] = got.get(key, self.ring.zero()) + c * ce
            got = {k: v for k, v in got.items() if not v.is_zero()}
            expect = {k: v for k, v in expect.items() if not v.is_zero()}
            if got != expect:
                return False
        return True


def compose_intertwiners(phi2: Intertwiner, phi1: Intertwiner, upto: int):
    """Images of f^m . 1 under the lifted composition (v . phi2) o phi1."""
    alg = phi1.alg
    n = alg.dim
    ring = phi1.ring
    out: List[Dict[Tuple[int, int, int], CartanRational]] = []
    for m in range(upto + 1):
        acc: Dict[Tuple[int, int, int], CartanRational] = {}
        for (k, l, mt), c in phi1.image(m).items():
            # phi2 applied to f^mt . 1 of the middle Verma, with the middle
            # weight shift: phi2's symbolic t is the middle highest weight
            mid_img = phi2.image(mt)
            for (k2, l2, m2), c2 in mid_img.items():
                # multiply units: E_{k l} . E_{k2 l2}
                if l != k2:
                    continue
                # shift phi2's symbolic weight: t -> t - nu1
                c2s = _shift_sym(ring, c2, -phi1.nu_pair)
                key = (k, l2, m2)
                add = c * c2s
                acc[key] = acc.get(key, ring.zero()) + add
        out.append({k: v for k, v in acc.items() if not v.is_zero()})
    return out


def _shift_sym(ring: CoeffRing, c: CartanRational, shift: Fraction) -> CartanRational:
    num = P.p_shift(c.num, (shift,))
    out = CartanRational(ring, num, ())
    for idx, kk in c.den:
        out = out * ring.inverse_factor(ring.factor_roots[idx], kk + shift)
    return out
