"""The localized Cartan coefficient ring D and its shift automorphisms.

Elements are exact rational functions in the simple coroots h_1..h_r whose
denominators are kept as factored multisets of linear forms (h_gamma + k),
gamma a positive root, k rational (integer in every expression the suites
build).  Keeping denominators factored makes membership in the multiplicative
set checkable and inversion cheap; fractions are always reduced, so equality
is structural.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple

from . import _poly as P
from .rootdata import RootSystem

Factor = Tuple[int, Fraction]  # (index into ring.factor_roots, additive shift)


class NonInvertibleError(ArithmeticError):
    """Inversion of an element outside the multiplicative set."""


class PoleError(ArithmeticError):
    """Evaluation hit a vanishing denominator factor."""


class CoeffRing:
    """Arithmetic context: variable names, allowed denominator directions."""

    def __init__(self, rs: RootSystem, var_names: Optional[Sequence[str]] = None):
        self.rs = rs
        self.nvars = rs.rank
        self.var_names = tuple(var_names) if var_names else tuple(
            f"h{i+1}" for i in range(rs.rank)
        )
        # every root, positive first; factor (g, k) means <coroot_g, h> + k
        self.factor_roots: Tuple[Tuple[int, ...], ...] = rs.positive_roots
        self.factor_coeffs = tuple(
            tuple(rs.coroot_table[g]) for g in self.factor_roots
        )
        self._line_dirs: Dict[int, Tuple[Fraction, ...]] = {}

    # -- element constructors -------------------------------------------

    def zero(self) -> "CartanRational":
        return CartanRational(self, P.p_zero(), ())

    def one(self) -> "CartanRational":
        return CartanRational(self, P.p_const(self.nvars, 1), ())

    def const(self, c) -> "CartanRational":
        return CartanRational(self, P.p_const(self.nvars, c), ())

    def h(self, i: int) -> "CartanRational":
        return CartanRational(self, P.p_var(self.nvars, i), ())

    def h_root(self, g: Sequence) -> "CartanRational":
        """h_gamma expanded into simple coroots."""
        vec = self.rs.coroot(g)
        return CartanRational(self, P.p_linear(vec, 0), ())

    def from_poly(self, poly: P.Poly) -> "CartanRational":
        return CartanRational(self, dict(poly), ())

    def factor_value(self, f: Factor) -> P.Poly:
        idx, k = f
        return P.p_linear(self.factor_coeffs[idx], k)

    def linear_factor(self, g: Sequence, k) -> "CartanRational":
        """The allowed element h_gamma + k (gamma any root; sign normalized)."""
        g = tuple(int(x) for x in g)
        k = Fraction(k)
        if g in self.factor_roots:
            idx = self.factor_roots.index(g)
            return CartanRational(self, self.factor_value((idx, k)), ())
        neg = tuple(-x for x in g)
        idx = self.factor_roots.index(neg)
        #  h_{-g} + k = -(h_g - k)
        return CartanRational(self, P.p_scale(self.factor_value((idx, -k)), -1), ())

    def inverse_factor(self, g: Sequence, k) -> "CartanRational":
        """(h_gamma + k)^{-1}."""
        return self.linear_factor(g, k).inv()

    # -- factorization over the multiplicative set -----------------------

    def _line_direction(self, idx: int) -> Tuple[Fraction, ...]:
        """A direction u with <coroot_idx, u> = 1 and no allowed form vanishing."""
        if idx in self._line_dirs:
            return self._line_dirs[idx]
        n = self.nvars
        candidates = []
        if n == 1:
            candidates = [(Fraction(1),)]
        else:
            for a in range(1, 8):
                for b in range(-7, 8):
                    candidates.append((Fraction(a), Fraction(b)))
                    candidates.append((Fraction(b), Fraction(a)))
        for u in candidates:
            vals = [
                sum(c * x for c, x in zip(coeffs, u)) for coeffs in self.factor_coeffs
            ]
            if all(v != 0 for v in vals):
                target = vals[idx]
                u = tuple(x / target for x in u)
                self._line_dirs[idx] = u
                return u
        raise RuntimeError("no generic direction found")

    def factor_into_allowed(self, poly: P.Poly):
        """Write poly = unit * prod (h_g + k); raise if impossible."""
        const = P.p_is_const(poly)
        if const is not None:
            if const == 0:
                raise NonInvertibleError("zero is not invertible")
            return const, ()
        work = dict(poly)
        factors = []
        progress = True
        while progress:
            const = P.p_is_const(work)
            if const is not None:
                return const, tuple(sorted(factors))
            progress = False
            for idx in range(len(self.factor_roots)):
                u = self._line_direction(idx)
                uni = P.p_univariate_from_line(work, u)
                for root in P.rational_roots(uni):
                    k = -root
                    while True:
                        q = P.p_try_divide_linear(
                            work, self.factor_coeffs[idx], k
                        )
                        if q is None:
                            break
                        factors.append((idx, k))
                        work = q
                        progress = True
                    const = P.p_is_const(work)
                    if const is not None:
                        return const, tuple(sorted(factors))
        raise NonInvertibleError(
            "numerator is not a product of allowed factors: "
            + P.p_render(poly, self.var_names)
        )

    # -- automorphism data ------------------------------------------------

    def tau_shifts(self, mu: Sequence) -> Tuple[Fraction, ...]:
        """Per-variable shifts <h_i, mu> of the automorphism tau_mu."""
        rs = self.rs
        return tuple(
            rs.pairing(tuple(1 if j == i else 0 for j in range(rs.rank)), mu)
            for i in range(rs.rank)
        )


class CartanRational:
    """One element of D: reduced fraction with factored denominator."""

    __slots__ = ("ring", "num", "den")

    def __init__(self, ring: CoeffRing, num: P.Poly, den: Sequence[Factor]):
        self.ring = ring
        self.num = num
        self.den = self._normalize(num, den)

    def _normalize(self, num, den):
        if not num:
            self.num = {}
            return ()
        counts: Dict[Factor, int] = {}
        for f in den:
            counts[f] = counts.get(f, 0) + 1
        # cancel factors dividing the numerator
        changed = True
        while changed:
            changed = False
            for f in list(counts):
                if counts[f] <= 0:
                    del counts[f]
                    continue
                idx, k = f
                q = P.p_try_divide_linear(num, self.ring.factor_coeffs[idx], k)
                if q is not None:
                    num = q
                    counts[f] -= 1
                    if counts[f] == 0:
                        del counts[f]
                    changed = True
        self.num = num
        out = []
        for f in sorted(counts):
            out.extend([f] * counts[f])
        return tuple(out)

    # -- ring operations --------------------------------------------------

    def _den_counts(self) -> Dict[Factor, int]:
        c: Dict[Factor, int] = {}
        for f in self.den:
            c[f] = c.get(f, 0) + 1
        return c

    def __add__(self, other: "CartanRational") -> "CartanRational":
        ring = self.ring
        ca, cb = self._den_counts(), other._den_counts()
        lcm: Dict[Factor, int] = dict(ca)
        for f, m in cb.items():
            lcm[f] = max(lcm.get(f, 0), m)
        pa, pb = self.num, other.num
        for f, m in lcm.items():
            extra_a = m - ca.get(f, 0)
            extra_b = m - cb.get(f, 0)
            fv = ring.factor_value(f)
            for _ in range(extra_a):
                pa = P.p_mul(pa, fv)
            for _ in range(extra_b):
                pb = P.p_mul(pb, fv)
        den = []
        for f in sorted(lcm):
            den.extend([f] * lcm[f])
        return CartanRational(ring, P.p_add(pa, pb), den)

    def __neg__(self) -> "CartanRational":
        return CartanRational(self.ring, P.p_neg(self.num), self.den)

    def __sub__(self, other: "CartanRational") -> "CartanRational":
        return self + (-other)

    def __mul__(self, other) -> "CartanRational":
        if isinstance(other, (int, Fraction)):
            return CartanRational(self.ring, P.p_scale(self.num, other), self.den)
        return CartanRational(
            self.ring, P.p_mul(self.num, other.num), self.den + other.den
        )

    __rmul__ = __mul__

    def inv(self) -> "CartanRational":
        unit, factors = self.ring.factor_into_allowed(self.num)
        num = P.p_const(self.ring.nvars, Fraction(1) / unit)
        for f in self.den:
            num = P.p_mul(num, self.ring.factor_value(f))
        return CartanRational(self.ring, num, factors)

    def __truediv__(self, other: "CartanRational") -> "CartanRational":
        return self * other.inv()

    def is_zero(self) -> bool:
        return not self.num

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        return self.ring is other.ring and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((tuple(sorted(self.num.items())), self.den))

    # -- automorphisms ------------------------------------------------------

    def tau(self, mu: Sequence) -> "CartanRational":
        """Shift automorphism tau_mu: h -> h + <h, mu>."""
        shifts = self.ring.tau_shifts(mu)
        num = P.p_shift(self.num, shifts)
        den = []
        rs = self.ring.rs
        for idx, k in self.den:
            den.append((idx, k + rs.pairing(self.ring.factor_roots[idx], mu)))
        return CartanRational(self.ring, num, den)

    def weyl(self, w, shifted: bool = False) -> "CartanRational":
        """Apply a Weyl element (plain or rho-shifted action)."""
        ring = self.ring
        rs = ring.rs
        n = ring.nvars
        offset = None
        if shifted:
            wrho = w.act_root(rs.rho)
            offset = tuple(wrho[i] - rs.rho[i] for i in range(n))
        images = []
        for i in range(n):
            alpha = tuple(1 if j == i else 0 for j in range(n))
            img_root = w.act_root(alpha)
            vec = rs.coroot(img_root)
            k = rs.pairing(alpha, offset) if shifted else Fraction(0)
            images.append(P.p_linear(vec, k))
        num = P.p_subst(self.num, images, n)
        den_factors = []
        sign_flips = Fraction(1)
        for idx, k in self.den:
            g = ring.factor_roots[idx]
            img = tuple(int(x) for x in w.act_root(g))
            shift = k + (rs.pairing(g, offset) if shifted else Fraction(0))
            if img in ring.factor_roots:
                den_factors.append((ring.factor_roots.index(img), shift))
            else:
                neg = tuple(-x for x in img)
                den_factors.append((ring.factor_roots.index(neg), -shift))
                sign_flips *= -1
        num = P.p_scale(num, sign_flips)
        return CartanRational(ring, num, den_factors)

    def evaluate(self, lam: Sequence) -> Fraction:
        """Substitute h_i -> <h_i, lam>; error on a vanishing factor."""
        point = self.ring.tau_shifts(lam)  # <h_i, lam> values
        den_val = Fraction(1)
        for idx, k in self.den:
            fv = sum(
                c * x for c, x in zip(self.ring.factor_coeffs[idx], point)
            ) + k
            if fv == 0:
                g = self.ring.factor_roots[idx]
                raise PoleError(f"denominator factor (h_{g} + {k}) vanishes")
            den_val *= fv
        return P.p_eval(self.num, point) / den_val

    # -- rendering ----------------------------------------------------------

    def render(self) -> str:
        ring = self.ring
        num = P.p_render(self.num, ring.var_names)
        if not self.den:
            return num
        parts = []
        counts = self._den_counts()
        for f in sorted(counts):
            body = P.p_render(ring.factor_value(f), ring.var_names)
            m = counts[f]
            parts.append(f"({body})" + (f"^{m}" if m > 1 else ""))
        den = "*".join(parts) if len(parts) == 1 else "(" + "*".join(parts) + ")"
        if len(self.num) > 1:
            num = f"({num})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"<D {self.render()}>"


@lru_cache(maxsize=None)
def ring_for(rs: RootSystem) -> CoeffRing:
    return CoeffRing(rs)
