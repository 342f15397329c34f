"""Extremal projectors as depth-truncated series, built two independent ways.

A TaylorSeries stores one PBW-homogeneous slice per lowering height.  The
multiplicative construction takes the ordered product of one-root factors
along a convex ordering; the equation-solving construction determines each
slice from annihilation conditions through a Shapovalov Gram solve.  Both are
exact per slice; all identity checks compare slices.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .coeffring import CartanRational
from .rootdata import NormalOrdering, RootSystem
from .uea import UEA, UEAElement, fmono_basis, shapovalov_gram, _solve, _det

Weight = Tuple[Fraction, ...]


class TaylorSeries:
    """Weight-graded, depth-truncated series of PBW elements."""

    def __init__(self, ctx: UEA, slices: Dict[int, UEAElement], depth: int):
        self.ctx = ctx
        self.depth = depth
        self.slices = {
            k: v for k, v in slices.items() if k <= depth and not v.is_zero()
        }

    @classmethod
    def from_element(cls, ctx: UEA, elem: UEAElement, depth: int) -> "TaylorSeries":
        slices: Dict[int, Dict] = {}
        for (fA, eA), c in elem.terms.items():
            k = sum(-x for x in ctx.exp_weight(fA, -1))
            slices.setdefault(k, {})[(fA, eA)] = c
        return cls(ctx, {k: UEAElement(ctx, t) for k, t in slices.items()}, depth)

    def slice(self, k: int) -> UEAElement:
        return self.slices.get(k, self.ctx.zero())

    def __mul__(self, other: "TaylorSeries") -> "TaylorSeries":
        depth = min(self.depth, other.depth)
        out: Dict[int, UEAElement] = {}
        for i, a in self.slices.items():
            if i > depth:
                continue
            for j, b in other.slices.items():
                if j > depth:
                    continue
                prod = a * b
                for k, piece in TaylorSeries.from_element(self.ctx, prod, depth).slices.items():
                    out[k] = out[k] + piece if k in out else piece
        return TaylorSeries(self.ctx, out, depth)

    def __add__(self, other: "TaylorSeries") -> "TaylorSeries":
        depth = min(self.depth, other.depth)
        out = dict(self.slices)
        for k, v in other.slices.items():
            out[k] = out[k] + v if k in out else v
        return TaylorSeries(self.ctx, out, depth)

    def __sub__(self, other: "TaylorSeries") -> "TaylorSeries":
        return self + other.scale(-1)

    def scale(self, c) -> "TaylorSeries":
        return TaylorSeries(self.ctx, {k: v.scale(c) for k, v in self.slices.items()}, self.depth)

    def truncate(self, depth: int) -> "TaylorSeries":
        return TaylorSeries(self.ctx, self.slices, depth)

    def is_zero(self) -> bool:
        return not self.slices

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TaylorSeries)
            and self.depth == other.depth
            and self.slices == other.slices
        )

    def transpose(self) -> "TaylorSeries":
        return TaylorSeries(
            self.ctx, {k: v.transpose() for k, v in self.slices.items()}, self.depth
        )

    def mul_element(self, x: UEAElement, side: str = "right") -> "TaylorSeries":
        """Multiply by a plain algebra element on one side (exact, regraded)."""
        out: Dict[int, UEAElement] = {}
        for _k, v in self.slices.items():
            prod = v * x if side == "right" else x * v
            for k2, piece in TaylorSeries.from_element(self.ctx, prod, self.depth).slices.items():
                out[k2] = out[k2] + piece if k2 in out else piece
        return TaylorSeries(self.ctx, out, self.depth)

    def render(self) -> Dict[int, str]:
        return {k: self.slices[k].render() for k in sorted(self.slices)}


def projector_factor(
    ctx: UEA, gamma: Sequence, lam: Weight, depth: int, sign: int = +1
) -> TaylorSeries:
    """Single-root factor of the extremal projector, truncated at depth.

    sign=+1 builds the lowering-left variant with coefficients
    1/prod_j (h_g + <h_g, lam> + j); sign=-1 the raising-left variant with
    1/prod_j (-h_g + <h_g, lam> + j).
    """
    from .uea import omega

    rs = ctx.rs
    g = tuple(int(x) for x in gamma)
    ht = sum(g)
    pairing = rs.pairing(g, lam)
    ring = ctx.ring
    slices: Dict[int, UEAElement] = {0: ctx.one()}
    n = 1
    fac = Fraction(1)
    e_g, f_g = ctx.e(g), ctx.f(g)
    if sign < 0:
        # mirror-side factor, stored through the Cartan involution omega so
        # that its raising-left normal form becomes an ordinary PBW series
        e_g, f_g = omega(ctx, e_g), omega(ctx, f_g)
    e_pow, f_pow = ctx.one(), ctx.one()
    while n * ht <= depth:
        fac *= n
        e_pow = e_pow * e_g
        f_pow = f_pow * f_g
        coeff = ring.one()
        for j in range(1, n + 1):
            if sign > 0:
                coeff = coeff * ring.inverse_factor(g, pairing + j)
            else:
                # omega of 1/(-h_g + <h_g,lam> + j) is 1/(h_g + <h_g,lam> + j)
                coeff = coeff * ring.inverse_factor(g, pairing + j)
        term = ((f_pow if sign > 0 else e_pow) * (e_pow if sign > 0 else f_pow)).coeff_left(coeff)
        slices_n = term.scale(Fraction((-1) ** n, 1) / fac)
        for k, piece in TaylorSeries.from_element(ctx, slices_n, depth).slices.items():
            slices[k] = slices[k] + piece if k in slices else piece
        n += 1
    return TaylorSeries(ctx, slices, depth)


def extremal_projector(
    ctx: UEA,
    lam: Optional[Weight] = None,
    depth: int = 3,
    ordering: Optional[NormalOrdering] = None,
    sign: int = +1,
) -> TaylorSeries:
    """Ordered product of the one-root factors along a convex ordering."""
    rs = ctx.rs
    if lam is None:
        lam = rs.rho
    ordering = ordering or ctx.ordering
    if not rs.is_convex(ordering):
        raise ValueError("ordering is not convex")
    out = None
    for g in ordering.roots:
        factor = projector_factor(ctx, g, lam, depth, sign=sign)
        out = factor if out is None else out * factor
    return out


def solve_from_equations(ctx: UEA, depth: int) -> TaylorSeries:
    """The unique depth-truncated solution of the annihilation equations.

    Slices are produced per weight by inverting the Shapovalov Gram matrix
    over the localized Cartan ring; the Gram determinant always factors into
    allowed denominators (a singular block would flag an arithmetic bug).
    """
    from .uea import positive_weights_up_to

    ring = ctx.ring
    slices: Dict[int, UEAElement] = {0: ctx.one()}
    weights = positive_weights_up_to(ctx, depth)
    for nu in weights:
        k = sum(nu)
        monos = fmono_basis(ctx, nu)
        if not monos:
            continue
        m = len(monos)
        f_elems = [UEAElement(ctx, {(b, ctx._zero_exp): ring.one()}) for b in monos]
        e_elems = [UEAElement(ctx, {(ctx._zero_exp, b): ring.one()}) for b in monos]
        # Gram-type pairing of normal raising monomials against lowering ones
        gram = [[(e_elems[b] * f_elems[j]).beta() for j in range(m)] for b in range(m)]
        # contributions of already-known lower slices to P(f_mono_j . 1)
        lower = ctx.zero()
        for kk in range(0, k):
            if kk in slices:
                lower = lower + slices[kk]
        targets = []
        for j in range(m):
            img = lower * f_elems[j]
            targets.append(
                [img.terms.get((monos[a], ctx._zero_exp), ring.zero()) for a in range(m)]
            )
        det, adj = _adjugate(gram, ring)
        det_inv = det.inv()
        slice_terms: Dict = {}
        for a in range(m):
            for b in range(m):
                # C[a][b] = -sum_j target[j][a] * (G^{-1})[j][b]
                total = ring.zero()
                for j in range(m):
                    total = total + targets[j][a] * (adj[j][b] * det_inv)
                if not total.is_zero():
                    slice_terms[(monos[a], monos[b])] = -total
        slices[k] = slices.get(k, ctx.zero()) + UEAElement(ctx, slice_terms)
    return TaylorSeries(ctx, slices, depth)


def _adjugate(gram, ring):
    """Determinant and adjugate of a small matrix over the Cartan ring."""
    m = len(gram)
    if m == 0:
        return ring.one(), []
    det = _crdet(gram, ring)
    adj = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            minor = [
                [gram[r][c] for c in range(m) if c != j]
                for r in range(m)
                if r != i
            ]
            cof = _crdet(minor, ring) if minor else ring.one()
            adj[j][i] = cof * Fraction((-1) ** (i + j), 1)
    return det, adj


def _crdet(mat, ring):
    m = len(mat)
    if m == 0:
        return ring.one()
    if m == 1:
        return mat[0][0]
    out = ring.zero()
    for j in range(m):
        minor = [row[:j] + row[j + 1:] for row in mat[1:]]
        out = out + mat[0][j] * _crdet(minor, ring) * Fraction((-1) ** j, 1)
    return out


def annihilation_defect(ctx: UEA, series: TaylorSeries, side: str = "left") -> bool:
    """True when e_a . P (or P . e_{-a}) vanishes up to the truncation depth."""
    for i in range(ctx.rs.rank):
        alpha = tuple(1 if j == i else 0 for j in range(ctx.rs.rank))
        if side == "left":
            # slice m of e.P is complete for m <= depth - 1 (slice m+1 feeds it)
            prod = series.mul_element(ctx.e(alpha), side="left")
            check_depth = series.depth - 1
        else:
            # slice m of P.f is complete for m <= depth
            prod = series.mul_element(ctx.f(alpha), side="right")
            check_depth = series.depth
        for k, piece in prod.slices.items():
            if k <= check_depth and not piece.is_zero():
                return False
    return True


def idempotence_defect(series: TaylorSeries) -> bool:
    """True when P*P == P slice by slice up to the truncation depth."""
    return (series * series) == series
