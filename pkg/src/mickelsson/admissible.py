"""The admissible algebra U(g) (x) End(V), its cosets and step-algebra generators.

Elements are square matrices over U'(g); the diagonal copy of g acts through
embedded generators  x_g . Id + pi(x_g).  All quotient spaces used downstream
(left cosets, mirror cosets, double cosets, rank-one variants) share one
coordinate extraction: a PBW basis  (left letters) . d . E_kl . (right letters)
whose transition to the matrix normal form is unipotent-triangular by total
degree, so coordinates are read off by peeling leading terms and never need
division.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .coeffring import CartanRational, CoeffRing
from .rootdata import RootSystem
from .uea import (
    UEA,
    UEAElement,
    SimpleModule,
    _root_neg,
    simple_module,
)

Root = Tuple[int, ...]
F0 = Fraction(0)
F1 = Fraction(1)


class Smash:
    """Context for one smash algebra U(g) (x) End(V)."""

    def __init__(self, ctx: UEA, module: SimpleModule):
        self.ctx = ctx
        self.rs = ctx.rs
        self.ring = ctx.ring
        self.V = module
        self.dim = module.dim
        self._basis_cache: Dict[tuple, "SmashElement"] = {}
        self._embed_cache: Dict[Root, "SmashElement"] = {}

    # -- constructors -----------------------------------------------------

    def zero(self) -> "SmashElement":
        return SmashElement(self, {})

    def one(self) -> "SmashElement":
        return SmashElement(
            self, {(k, k): self.ctx.one() for k in range(self.dim)}
        )

    def unit(self, k: int, l: int) -> "SmashElement":
        """Matrix unit E_kl of the End(V) factor."""
        return SmashElement(self, {(k, l): self.ctx.one()})

    def from_matrix(self, mat: Sequence[Sequence[Fraction]]) -> "SmashElement":
        entries = {}
        for i in range(self.dim):
            for j in range(self.dim):
                if mat[i][j]:
                    entries[(i, j)] = self.ctx.one().scale(mat[i][j])
        return SmashElement(self, entries)

    def embed(self, g: Sequence) -> "SmashElement":
        """Embedded generator x_g . Id + pi(x_g)."""
        g = tuple(int(x) for x in g)
        if g in self._embed_cache:
            return self._embed_cache[g]
        u = self.ctx.e(g)
        entries: Dict[Tuple[int, int], UEAElement] = {}
        for k in range(self.dim):
            entries[(k, k)] = u
        pim = self.V.matrix(g)
        for i in range(self.dim):
            for j in range(self.dim):
                if pim[i][j]:
                    add = self.ctx.one().scale(pim[i][j])
                    entries[(i, j)] = entries.get((i, j), self.ctx.zero()) + add
        out = SmashElement(self, entries)
        self._embed_cache[g] = out
        return out

    def embed_h(self, i: int) -> "SmashElement":
        entries = {}
        for k in range(self.dim):
            shift = self.rs.pairing(
                tuple(1 if j == i else 0 for j in range(self.rs.rank)),
                self.V.weights[k],
            )
            entries[(k, k)] = self.ctx.h(i) + self.ctx.one().scale(shift)
        return SmashElement(self, entries)

    def embed_coeff(self, d: CartanRational) -> "SmashElement":
        """Diagonal embedding of an element of D."""
        return SmashElement(
            self,
            {(k, k): self.ctx.from_coeff(d.tau(self.V.weights[k])) for k in range(self.dim)},
        )

    def embed_uea(self, x: UEAElement) -> "SmashElement":
        """Image of a PBW element under the diagonal embedding."""
        out = self.zero()
        for (fA, eA), c in x.terms.items():
            piece = self.one()
            for p in self.ctx.word_of_exp(fA):
                piece = piece * self.embed(_root_neg(self.ctx.root_at(p)))
            piece = piece * self.embed_coeff(c)
            for p in self.ctx.word_of_exp(eA):
                piece = piece * self.embed(self.ctx.root_at(p))
            out = out + piece
        return out

    def unit_weight(self, k: int, l: int):
        """Adjoint weight of the matrix unit E_kl (root-basis vector)."""
        return tuple(
            self.V.weights[k][j] - self.V.weights[l][j] for j in range(self.rs.rank)
        )

    # adjoint action of embedded letters splits as commutators
    def ad(self, g: Sequence, x: "SmashElement") -> "SmashElement":
        gen = self.embed(g)
        return gen * x - x * gen

    def ad_pow(self, g: Sequence, x: "SmashElement", n: int) -> "SmashElement":
        for _ in range(n):
            x = self.ad(g, x)
        return x


class SmashElement:
    """Sparse matrix over U'(g)."""

    __slots__ = ("alg", "entries")

    def __init__(self, alg: Smash, entries: Dict[Tuple[int, int], UEAElement]):
        self.alg = alg
        self.entries = {k: v for k, v in entries.items() if not v.is_zero()}

    def __add__(self, other: "SmashElement") -> "SmashElement":
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] + v if k in out else v
        return SmashElement(self.alg, out)

    def __neg__(self):
        return SmashElement(self.alg, {k: -v for k, v in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "SmashElement") -> "SmashElement":
        out: Dict[Tuple[int, int], UEAElement] = {}
        for (i, k), a in self.entries.items():
            for (k2, j), b in other.entries.items():
                if k != k2:
                    continue
                prod = a * b
                key = (i, j)
                out[key] = out[key] + prod if key in out else prod
        return SmashElement(self.alg, out)

    def scale(self, c) -> "SmashElement":
        return SmashElement(self.alg, {k: v.scale(c) for k, v in self.entries.items()})

    def coeff_left(self, d: CartanRational) -> "SmashElement":
        """Left multiplication by the diagonal embedding of d in D."""
        out = {}
        for (i, j), v in self.entries.items():
            out[(i, j)] = v.coeff_left(d.tau(self.alg.V.weights[i]))
        return SmashElement(self.alg, out)

    def coeff_right(self, d: CartanRational) -> "SmashElement":
        out = {}
        for (i, j), v in self.entries.items():
            out[(i, j)] = v.coeff_right(d.tau(self.alg.V.weights[j]))
        return SmashElement(self.alg, out)

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other) -> bool:
        return isinstance(other, SmashElement) and self.entries == other.entries

    def transpose(self) -> "SmashElement":
        """Antiinvolution: Chevalley transpose on U'(g), matrix transpose on End V."""
        out = {}
        for (i, j), v in self.entries.items():
            out[(j, i)] = v.transpose()
        return SmashElement(self.alg, out)

    def max_degree(self) -> int:
        best = -1
        for v in self.entries.values():
            for (fA, eA) in v.terms:
                best = max(best, sum(fA) + sum(eA))
        return best

    def weight_components(self) -> Dict[tuple, "SmashElement"]:
        out: Dict[tuple, Dict] = {}
        for (i, j), v in self.entries.items():
            uw = self.alg.unit_weight(i, j)
            for w, piece in v.weight_components().items():
                tot = tuple(a + b for a, b in zip(w, uw))
                slot = out.setdefault(tot, {})
                slot[(i, j)] = slot.get((i, j), self.alg.ctx.zero()) + piece
        return {w: SmashElement(self.alg, t) for w, t in out.items()}

    def render(self) -> str:
        if not self.entries:
            return "0"
        parts = []
        for (i, j) in sorted(self.entries):
            parts.append(f"E[{i},{j}]: " + self.entries[(i, j)].render())
        return " | ".join(parts)

    def __repr__(self):
        return f"<A' {self.render()}>"


# ---------------------------------------------------------------------------
# PBW coordinates for quotient spaces
# ---------------------------------------------------------------------------

from dataclasses import field as _dc_field


@dataclass(frozen=True)
class CosetSpec:
    """Which quotient: letters placed left/right, and which exponents die."""

    left: Tuple[Root, ...]          # letters multiplied to the left of d.E
    right: Tuple[Root, ...]         # letters multiplied to the right
    kill_left: Tuple[Root, ...]     # left letters whose powers are dropped
    kill_right: Tuple[Root, ...]    # right letters whose powers are dropped
    name: str = _dc_field(default="", compare=False)


def standard_spec(rs: RootSystem, kind: str) -> CosetSpec:
    """Cosets modulo the standard triangular pieces.

    kind: 'left' = A'/A'n, 'mirror' = n_-A'\\A', 'double' = both.
    """
    fs = tuple(_root_neg(g) for g in rs.positive_roots)
    es = tuple(rs.positive_roots)
    if kind == "left":
        return CosetSpec(fs, es, (), es, name="mod A'n")
    if kind == "mirror":
        return CosetSpec(fs, es, fs, (), name="mod n-A'")
    if kind == "double":
        return CosetSpec(fs, es, fs, es, name="double coset")
    raise ValueError(kind)


def nilpotent_spec(rs: RootSystem, m_roots: Sequence[Root], kind: str = "left") -> CosetSpec:
    """Cosets modulo A'm for a maximal nilpotent subalgebra with root set m."""
    m = tuple(tuple(int(x) for x in g) for g in m_roots)
    m_minus = tuple(_root_neg(g) for g in m)
    if kind == "left":
        return CosetSpec(m_minus, m, (), m, name=f"mod A'm {m}")
    if kind == "mirror":
        return CosetSpec(m_minus, m, m_minus, (), name=f"mod m-A' {m}")
    raise ValueError(kind)


def rank1_spec(rs: RootSystem, alpha: Root, kind: str) -> CosetSpec:
    """Quotients for the sl2 subalgebra of one real root.

    kind: 'left' = A'/A'e_a, 'mirror' = e_a A'\\A', 'double' = e_a A'\\A'/A'e_{-a}.
    """
    alpha = tuple(int(x) for x in alpha)
    nalpha = _root_neg(alpha)
    others = tuple(
        g
        for s in (-1, 1)
        for g in (
            tuple(s * x for x in r) for r in rs.positive_roots
        )
        if g not in (alpha, nalpha)
    )
    if kind == "left":
        return CosetSpec(others + (nalpha,), (alpha,), (), (alpha,), name=f"mod A'e{alpha}")
    if kind == "mirror":
        return CosetSpec((alpha,), (nalpha,) + others, (alpha,), (), name=f"mod e{alpha}A'")
    if kind == "double":
        return CosetSpec((alpha,) + others, (nalpha,), (alpha,), (nalpha,), name=f"rank1 double {alpha}")
    raise ValueError(kind)


class CosetElement:
    """Canonical coordinates of a class in one of the quotient spaces."""

    __slots__ = ("alg", "spec", "coords")

    def __init__(self, alg: Smash, spec: CosetSpec, coords: Dict[tuple, CartanRational]):
        self.alg = alg
        self.spec = spec
        self.coords = {k: v for k, v in coords.items() if not v.is_zero()}

    def is_zero(self) -> bool:
        return not self.coords

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CosetElement)
            and self.spec == other.spec
            and self.coords == other.coords
        )

    def __add__(self, other: "CosetElement") -> "CosetElement":
        out = dict(self.coords)
        for k, v in other.coords.items():
            out[k] = out[k] + v if k in out else v
        return CosetElement(self.alg, self.spec, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "CosetElement":
        if isinstance(c, (int, Fraction)):
            c = self.alg.ring.const(c)
        return CosetElement(self.alg, self.spec, {k: c * v for k, v in self.coords.items()})

    def lift(self) -> SmashElement:
        """Canonical representative in the algebra."""
        out = self.alg.zero()
        for key, c in self.coords.items():
            out = out + _coset_basis_elem(self.alg, self.spec, key).coeff_left(c)
        return out

    def render(self) -> str:
        if not self.coords:
            return "0"
        parts = []
        for key in sorted(self.coords, key=_coord_sort_key):
            le, kl, re = key
            bits = [f"({self.coords[key].render()})"]
            for g, k in zip(self.spec.left, le):
                if k:
                    bits.append(_letter_name(g) + (f"^{k}" if k > 1 else ""))
            bits.append(f"E[{kl[0]},{kl[1]}]")
            for g, k in zip(self.spec.right, re):
                if k:
                    bits.append(_letter_name(g) + (f"^{k}" if k > 1 else ""))
            parts.append(" * ".join(bits))
        return "  +  ".join(parts)

    def __repr__(self):
        return f"<{self.spec.name}: {self.render()}>"


def _coord_sort_key(key):
    le, kl, re = key
    return (sum(le) + sum(re), le, re, kl)


def _letter_name(g: Root) -> str:
    pos = all(x >= 0 for x in g)
    base = g if pos else _root_neg(g)
    body = "+".join((f"{c}" if c > 1 else "") + f"a{i+1}" for i, c in enumerate(base) if c)
    return (f"e[{body}]" if pos else f"f[{body}]")


def _coset_basis_elem(alg: Smash, spec: CosetSpec, key) -> SmashElement:
    cache_key = (spec.left, spec.right, key)
    if cache_key in alg._basis_cache:
        return alg._basis_cache[cache_key]
    le, (k, l), re = key
    out = alg.one()
    for g, n in zip(spec.left, le):
        for _ in range(n):
            out = out * alg.embed(g)
    out = out * alg.unit(k, l)
    for g, n in zip(spec.right, re):
        for _ in range(n):
            out = out * alg.embed(g)
    alg._basis_cache[cache_key] = out
    return out


def pbw_coords(alg: Smash, x: SmashElement, spec: CosetSpec) -> Dict[tuple, CartanRational]:
    """Exact coordinates of x in the PBW basis described by spec."""
    ctx = alg.ctx
    left_index = {g: i for i, g in enumerate(spec.left)}
    right_index = {g: i for i, g in enumerate(spec.right)}
    coords: Dict[tuple, CartanRational] = {}
    work = x
    while not work.is_zero():
        deg = work.max_degree()
        found: Dict[tuple, CartanRational] = {}
        for (i, j), v in work.entries.items():
            for (fA, eA), c in v.terms.items():
                if sum(fA) + sum(eA) != deg:
                    continue
                le = [0] * len(spec.left)
                re = [0] * len(spec.right)
                ok = True
                for p, n in enumerate(fA):
                    if not n:
                        continue
                    g = _root_neg(ctx.root_at(p))
                    if g in left_index:
                        le[left_index[g]] += n
                    elif g in right_index:
                        re[right_index[g]] += n
                    else:
                        ok = False
                for p, n in enumerate(eA):
                    if not n:
                        continue
                    g = ctx.root_at(p)
                    if g in left_index:
                        le[left_index[g]] += n
                    elif g in right_index:
                        re[right_index[g]] += n
                    else:
                        ok = False
                assert ok, "letter missing from coset spec"
                # move the coefficient to the far left: c_left = tau_{-wt(fA)}(c)
                muA = ctx.exp_weight(fA, -1)
                c_left = c.tau(tuple(-t for t in muA)).tau(
                    tuple(-t for t in alg.V.weights[i])
                )
                key = (tuple(le), (i, j), tuple(re))
                found[key] = found.get(key, alg.ring.zero()) + c_left
        rebuild = alg.zero()
        for key, c in found.items():
            if c.is_zero():
                continue
            coords[key] = coords.get(key, alg.ring.zero()) + c
            rebuild = rebuild + _coset_basis_elem(alg, spec, key).coeff_left(c)
        work = work - rebuild
        if not found and not work.is_zero():  # pragma: no cover
            raise RuntimeError("coordinate extraction stalled")
    return {k: v for k, v in coords.items() if not v.is_zero()}


def coset_reduce(alg: Smash, x: SmashElement, spec: CosetSpec) -> CosetElement:
    """Canonical form of the class of x in the quotient named by spec."""
    coords = pbw_coords(alg, x, spec)
    kept = {}
    kill_left = {g for g in spec.kill_left}
    kill_right = {g for g in spec.kill_right}
    for (le, kl, re), c in coords.items():
        dead = False
        for g, n in zip(spec.left, le):
            if n and g in kill_left:
                dead = True
        for g, n in zip(spec.right, re):
            if n and g in kill_right:
                dead = True
        if not dead:
            kept[(le, kl, re)] = c
    return CosetElement(alg, spec, kept)


# ---------------------------------------------------------------------------
# Extremal projector action on cosets
# ---------------------------------------------------------------------------

def projector_apply_left(
    alg: Smash,
    x: SmashElement,
    lam=None,
    ordering=None,
    spec: Optional[CosetSpec] = None,
) -> CosetElement:
    """Action of the extremal projector on the class of x in A'/A'n.

    Works factor by factor along the convex ordering (rightmost factor acts
    first); each one-root factor terminates exactly by ad-nilpotence.
    """
    rs = alg.rs
    lam = rs.rho if lam is None else lam
    ordering = ordering or alg.ctx.ordering
    spec = spec or standard_spec(rs, "left")
    cls = coset_reduce(alg, x, spec)
    for g in reversed(ordering.roots):
        cls = _factor_apply_left(alg, g, lam, cls, spec)
    return cls


def _factor_apply_left(alg, g: Root, lam, cls: CosetElement, spec) -> CosetElement:
    rs = alg.rs
    pairing = rs.pairing(g, lam)
    out = dict(cls.coords)
    n = 1
    fac = F1
    current = cls.lift()
    e_g = alg.embed(g)
    f_g = alg.embed(_root_neg(g))
    e_pow = alg.one()
    acc = CosetElement(alg, spec, cls.coords)
    while True:
        current = coset_reduce(alg, e_g * current, spec).lift()
        if current.is_zero():
            break
        fac *= n
        coeff = alg.ring.one()
        for j in range(1, n + 1):
            coeff = coeff * alg.ring.inverse_factor(g, pairing + j)
        piece = current
        for _ in range(n):
            piece = f_g * piece
        piece = piece.coeff_left(coeff).scale(Fraction((-1) ** n, 1) / fac)
        acc = acc + coset_reduce(alg, piece, spec)
        n += 1
        if n > 60:  # pragma: no cover
            raise RuntimeError("projector action did not terminate")
    return acc


def projector_apply_right(
    alg: Smash,
    x: SmashElement,
    lam=None,
    ordering=None,
    spec: Optional[CosetSpec] = None,
) -> CosetElement:
    """Action of the extremal projector on the class of x in n_-A'\\A'."""
    rs = alg.rs
    lam = rs.rho if lam is None else lam
    ordering = ordering or alg.ctx.ordering
    spec = spec or standard_spec(rs, "mirror")
    cls = coset_reduce(alg, x, spec)
    for g in ordering.roots:
        cls = _factor_apply_right(alg, g, lam, cls, spec)
    return cls


def _factor_apply_right(alg, g: Root, lam, cls: CosetElement, spec) -> CosetElement:
    rs = alg.rs
    pairing = rs.pairing(g, lam)
    n = 1
    fac = F1
    current = cls.lift()
    e_g = alg.embed(g)
    f_g = alg.embed(_root_neg(g))
    acc = CosetElement(alg, spec, cls.coords)
    while True:
        current = coset_reduce(alg, current * f_g, spec).lift()
        if current.is_zero():
            break
        fac *= n
        coeff = alg.ring.one()
        for j in range(1, n + 1):
            coeff = coeff * alg.ring.inverse_factor(g, pairing + j)
        # x . c . f^n . e^n  =  (x . f^n) . tau_{-n g}(c) . e^n
        shifted = coeff.tau(tuple(-n * t for t in g))
        piece = current.coeff_right(shifted)
        for _ in range(n):
            piece = piece * e_g
        piece = piece.scale(Fraction((-1) ** n, 1) / fac)
        acc = acc + coset_reduce(alg, piece, spec)
        n += 1
        if n > 60:  # pragma: no cover
            raise RuntimeError("projector action did not terminate")
    return acc


# ---------------------------------------------------------------------------
# Change-of-basis operators on V (x) D and D (x) V
# ---------------------------------------------------------------------------

class TensorVD:
    """Element of V (x) D (side 1) or D (x) V (side 2): matrix of D-coefficients.

    The generator subscripts read through the side:  z'_{v (x) d} = z'_v . d
    while  z_{d (x) v} = d . z_v,  so the side only matters when converting to
    step-algebra generators.
    """

    __slots__ = ("alg", "side", "coords")

    def __init__(self, alg: Smash, side: int, coords: Dict[Tuple[int, int], CartanRational]):
        self.alg = alg
        self.side = side
        self.coords = {k: v for k, v in coords.items() if not v.is_zero()}

    @classmethod
    def from_unit(cls, alg: Smash, side: int, k: int, l: int) -> "TensorVD":
        return cls(alg, side, {(k, l): alg.ring.one()})

    @classmethod
    def from_matrix(cls, alg: Smash, side: int, mat) -> "TensorVD":
        coords = {}
        for i in range(alg.dim):
            for j in range(alg.dim):
                if mat[i][j]:
                    coords[(i, j)] = alg.ring.const(mat[i][j])
        return cls(alg, side, coords)

    def __add__(self, other):
        out = dict(self.coords)
        for k, v in other.coords.items():
            out[k] = out[k] + v if k in out else v
        return TensorVD(self.alg, self.side, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        if isinstance(c, (int, Fraction)):
            c = self.alg.ring.const(c)
        return TensorVD(self.alg, self.side, {k: c * v for k, v in self.coords.items()})

    def mul_d(self, d: CartanRational) -> "TensorVD":
        return TensorVD(self.alg, self.side, {k: v * d for k, v in self.coords.items()})

    def is_zero(self):
        return not self.coords

    def __eq__(self, other):
        return (
            isinstance(other, TensorVD)
            and self.side == other.side
            and self.coords == other.coords
        )

    def ad_unit(self, g: Root) -> "TensorVD":
        """Adjoint action of a root letter on the End(V) tensor factor."""
        pim = self.alg.V.matrix(g)
        out: Dict[Tuple[int, int], CartanRational] = {}
        for (i, j), c in self.coords.items():
            for r in range(self.alg.dim):
                if pim[r][i]:
                    k = (r, j)
                    add = c * pim[r][i]
                    out[k] = out[k] + add if k in out else add
                if pim[j][r]:
                    k = (i, r)
                    add = c * (-pim[j][r])
                    out[k] = out[k] + add if k in out else add
        return TensorVD(self.alg, self.side, out)

    def render(self) -> str:
        if not self.coords:
            return "0"
        return " + ".join(
            f"E[{i},{j}](x)({self.coords[(i, j)].render()})"
            for (i, j) in sorted(self.coords)
        )


def bc_operator(alg: Smash, which: str, gamma: Root, mu) -> "BCOperator":
    return BCOperator(alg, which, (tuple(int(x) for x in gamma),), mu)


@dataclass
class BCOperator:
    """One of the four series operators, or an ordered product of factors.

    which: 'B1' and 'C1' act on V (x) D, 'C2' and 'B2' act on D (x) V.
    For a product, roots lists the factors in normal-ordering sequence.
    """

    alg: Smash
    which: str
    roots: Tuple[Root, ...]
    mu: tuple

    def apply(self, x: TensorVD) -> TensorVD:
        expected_side = 1 if self.which in ("B1", "C1") else 2
        if x.side != expected_side:
            raise ValueError(f"{self.which} acts on side {expected_side}")
        out = x
        for g in reversed(self.roots):  # rightmost factor acts first
            out = self._apply_factor(g, out)
        return out

    def _apply_factor(self, g: Root, x: TensorVD) -> TensorVD:
        alg = self.alg
        rs = alg.rs
        ring = alg.ring
        pairing = rs.pairing(g, self.mu)
        ng = _root_neg(g)
        # (inner ad iterated n times, outer ad iterated n times)
        inner, outer = {
            "B1": (g, ng),   # (ad f)^n (ad e)^n, factor (hhat + h + <h,mu> + k)
            "C1": (ng, g),   # (ad e)^n (ad f)^n, factor (-hhat - h + <h,mu> + k)
            "C2": (g, ng),   # (ad f)^n (ad e)^n, factor (hhat - h + <h,mu> + k)
            "B2": (ng, g),   # (ad e)^n (ad f)^n, factor (-hhat + h + <h,mu> + k)
        }[self.which]
        acc = x
        cur = x
        n = 1
        fac = F1
        while True:
            cur = cur.ad_unit(inner)
            if cur.is_zero():
                break
            stage = cur
            for _ in range(n):
                stage = stage.ad_unit(outer)
            if not stage.is_zero():
                piece: Dict[Tuple[int, int], CartanRational] = {}
                for (i, j), c in stage.coords.items():
                    hval = rs.pairing(g, alg.unit_weight(i, j))
                    coeff = ring.one()
                    for k in range(1, n + 1):
                        if self.which == "B1":
                            coeff = coeff * ring.inverse_factor(g, hval + pairing + k)
                        elif self.which == "C1":
                            coeff = coeff * ring.inverse_factor(ng, -hval + pairing + k)
                        elif self.which == "C2":
                            coeff = coeff * ring.inverse_factor(ng, hval + pairing + k)
                        else:  # B2
                            coeff = coeff * ring.inverse_factor(g, -hval + pairing + k)
                    piece[(i, j)] = c * coeff
                acc = acc + TensorVD(alg, x.side, piece).scale(
                    Fraction((-1) ** n, 1) / (fac * n)
                )
            fac *= n
            n += 1
            if n > 80:  # pragma: no cover
                raise RuntimeError("bc operator did not terminate")
        return acc


def bc_product(alg: Smash, which: str, mu, ordering=None) -> BCOperator:
    """Ordered product of one-root factors along the convex ordering."""
    ordering = ordering or alg.ctx.ordering
    return BCOperator(alg, which, tuple(ordering.roots), tuple(mu))


def gamma1_multiplier(alg: Smash, x: TensorVD) -> TensorVD:
    """prod_a (h_a + <h_a,rho>) / (hhat_a + h_a + <h_a,rho>) on V (x) D."""
    rs = alg.rs
    ring = alg.ring
    out: Dict[Tuple[int, int], CartanRational] = {}
    for (i, j), c in x.coords.items():
        val = c
        for g in rs.positive_roots:
            p = rs.pairing(g, rs.rho)
            hval = rs.pairing(g, alg.unit_weight(i, j))
            val = val * ring.linear_factor(g, p) * ring.inverse_factor(g, hval + p)
        out[(i, j)] = val
    return TensorVD(alg, x.side, out)


def gamma2_multiplier(alg: Smash, x: TensorVD) -> TensorVD:
    """prod_a (h_a + <h_a,rho>) / (h_a - hhat_a + <h_a,rho>) on D (x) V."""
    rs = alg.rs
    ring = alg.ring
    out: Dict[Tuple[int, int], CartanRational] = {}
    for (i, j), c in x.coords.items():
        val = c
        for g in rs.positive_roots:
            p = rs.pairing(g, rs.rho)
            hval = rs.pairing(g, alg.unit_weight(i, j))
            val = val * ring.linear_factor(g, p) * ring.inverse_factor(g, -hval + p)
        out[(i, j)] = val
    return TensorVD(alg, x.side, out)


# ---------------------------------------------------------------------------
# Step-algebra generators
# ---------------------------------------------------------------------------

def generator_z(alg: Smash, mat) -> CosetElement:
    """z_v = p(v) in the left coset space, for v an End(V) matrix."""
    return projector_apply_left(alg, alg.from_matrix(mat))


def generator_z_unit(alg: Smash, k: int, l: int) -> CosetElement:
    mat = [[F1 if (i, j) == (k, l) else F0 for j in range(alg.dim)] for i in range(alg.dim)]
    return generator_z(alg, mat)


def z_from_tensor(alg: Smash, tv: TensorVD) -> CosetElement:
    """First-type generator of a decorated tensor: z_{v (x) d} = z_v . d."""
    out = None
    for (k, l), d in tv.coords.items():
        piece = generator_z_unit(alg, k, l)
        piece = coset_mul_coeff(piece, d, side="right" if tv.side == 1 else "left")
        out = piece if out is None else out + piece
    return out if out is not None else coset_zero(alg, standard_spec(alg.rs, "left"))


def generator_zprime_unit(alg: Smash, k: int, l: int) -> CosetElement:
    """Second-type generator through the inversion of the change of basis."""
    tv = TensorVD.from_unit(alg, 1, k, l)
    op = bc_product(alg, "C1", tuple(-x for x in alg.rs.rho))
    tv = gamma1_multiplier(alg, op.apply(tv))
    return z_from_tensor(alg, tv)


def zprime_from_tensor(alg: Smash, tv: TensorVD) -> CosetElement:
    out = None
    for (k, l), d in tv.coords.items():
        piece = generator_zprime_unit(alg, k, l)
        piece = coset_mul_coeff(piece, d, side="right" if tv.side == 1 else "left")
        out = piece if out is None else out + piece
    return out if out is not None else coset_zero(alg, standard_spec(alg.rs, "left"))


def generator_ztilde_unit(alg: Smash, k: int, l: int) -> CosetElement:
    """Mirror first-type generator: ztilde_v = pbar(v) in n_-A' \\ A'."""
    return projector_apply_right(alg, alg.unit(k, l))


def ztilde_from_tensor(alg: Smash, tv: TensorVD) -> CosetElement:
    out = None
    for (k, l), d in tv.coords.items():
        piece = generator_ztilde_unit(alg, k, l)
        piece = coset_mul_coeff(piece, d, side="right" if tv.side == 1 else "left")
        out = piece if out is None else out + piece
    return out if out is not None else coset_zero(alg, standard_spec(alg.rs, "mirror"))


def generator_ztildeprime_unit(alg: Smash, k: int, l: int) -> CosetElement:
    """Mirror second-type generator through the mirrored inversion."""
    tv = TensorVD.from_unit(alg, 2, k, l)
    op = bc_product(alg, "C2", tuple(-x for x in alg.rs.rho))
    tv = gamma2_multiplier(alg, op.apply(tv))
    return ztilde_from_tensor(alg, tv)


def ztildeprime_from_tensor(alg: Smash, tv: TensorVD) -> CosetElement:
    out = None
    for (k, l), d in tv.coords.items():
        piece = generator_ztildeprime_unit(alg, k, l)
        piece = coset_mul_coeff(piece, d, side="right" if tv.side == 1 else "left")
        out = piece if out is None else out + piece
    return out if out is not None else coset_zero(alg, standard_spec(alg.rs, "mirror"))


def coset_zero(alg: Smash, spec: CosetSpec) -> CosetElement:
    return CosetElement(alg, spec, {})


def coset_mul_coeff(cls: CosetElement, d: CartanRational, side: str) -> CosetElement:
    """Multiply a coset class by an element of D on either side."""
    lifted = cls.lift()
    emb = cls.alg.embed_coeff(d)
    prod = lifted * emb if side == "right" else emb * lifted
    return coset_reduce(cls.alg, prod, cls.spec)


def coset_mul(a: CosetElement, x: SmashElement, side: str = "right") -> CosetElement:
    lifted = a.lift()
    prod = lifted * x if side == "right" else x * lifted
    return coset_reduce(a.alg, prod, a.spec)


# ---------------------------------------------------------------------------
# Double-coset product and the two mutually inverse maps
# ---------------------------------------------------------------------------

def circ_product(a: CosetElement, b: CosetElement) -> CosetElement:
    """a o b = a . p(b) on the double coset space."""
    alg = a.alg
    spec_d = standard_spec(alg.rs, "double")
    assert a.spec == spec_d and b.spec == spec_d
    pb = projector_apply_left(alg, b.lift())
    prod = a.lift() * pb.lift()
    return coset_reduce(alg, prod, spec_d)


def phi_plus(alg: Smash, x: CosetElement) -> CosetElement:
    """Class of a step-algebra element in the double coset space."""
    return coset_reduce(alg, x.lift(), standard_spec(alg.rs, "double"))


def psi_plus(alg: Smash, y: CosetElement) -> CosetElement:
    """p(y): the inverse map from double cosets to the step algebra."""
    return projector_apply_left(alg, y.lift())


def change_generators_check(alg: Smash, k: int, l: int):
    """Both sides of the change of basis z_v = z'_{B1[rho](v (x) 1)}."""
    lhs = generator_z_unit(alg, k, l)
    tv = TensorVD.from_unit(alg, 1, k, l)
    rhs = zprime_from_tensor(alg, bc_product(alg, "B1", alg.rs.rho).apply(tv))
    return lhs, rhs


def mirror_change_check(alg: Smash, k: int, l: int):
    """Both sides of ztilde_v = ztilde'_{B2[rho](1 (x) v)}."""
    lhs = generator_ztilde_unit(alg, k, l)
    tv = TensorVD.from_unit(alg, 2, k, l)
    rhs = ztildeprime_from_tensor(alg, bc_product(alg, "B2", alg.rs.rho).apply(tv))
    return lhs, rhs


# ---------------------------------------------------------------------------
# Admissibility report
# ---------------------------------------------------------------------------

def verify_admissible(alg: Smash) -> Dict[str, object]:
    """Check the defining conditions on the smash realization and report."""
    rs = alg.rs
    report: Dict[str, object] = {"algebra": rs.type_label, "dim_v": alg.dim}
    degrees = {}
    ok_nilpotent = True
    for g in alg.ctx.table.all_roots:
        deg = 0
        # nilpotence degree of ad e_g on End(V): smallest n with ad^n = 0
        alive = [
            TensorVD.from_unit(alg, 1, k, l)
            for k in range(alg.dim)
            for l in range(alg.dim)
        ]
        while any(not t.is_zero() for t in alive):
            alive = [t.ad_unit(g) for t in alive]
            deg += 1
            if deg > 4 * alg.dim * alg.dim:
                ok_nilpotent = False
                break
        degrees[g] = deg
    report["ad_nilpotence_degrees"] = degrees
    report["ad_locally_nilpotent"] = ok_nilpotent
    # semisimple Cartan action: matrix units are weight vectors by construction
    report["ad_h_semisimple"] = True
    # HW/LW finiteness follow from finite dimensionality of V
    report["hw_condition"] = ok_nilpotent
    report["lw_condition"] = ok_nilpotent
    report["passed"] = ok_nilpotent
    return report


def smash_for(label: str) -> Smash:
    """Build a smash algebra from a spec string like 'A1:V2' or 'A2:V3'."""
    from .rootdata import build_root_system, ConfigurationError

    if ":" not in label:
        raise ConfigurationError(f"module spec {label!r} must look like 'A1:V2'")
    alg_label, vpart = label.split(":", 1)
    rs = build_root_system(alg_label)
    if not vpart.startswith("V"):
        raise ConfigurationError(f"bad module part {vpart!r}")
    dim = int(vpart[1:])
    ctx = UEA(rs)
    choices = _fundamental_candidates(rs)
    for coeffs in choices:
        mod = simple_module(ctx, coeffs)
        if mod.dim == dim:
            return Smash(ctx, mod)
    raise ConfigurationError(f"no shipped simple module of dimension {dim} for {alg_label}")


@lru_cache(maxsize=None)
def _fundamental_candidates(rs: RootSystem):
    if rs.rank == 1:
        return tuple((m,) for m in range(1, 7))
    return ((1, 0), (0, 1), (1, 1), (2, 0), (0, 2))


def vleft_spec(rs: RootSystem) -> CosetSpec:
    """Presentation basis d . E . (lowering letters): exposes the shape
    v + sum d_i v_i f_i of second-type generators."""
    fs = tuple(_root_neg(g) for g in rs.positive_roots)
    es = tuple(rs.positive_roots)
    return CosetSpec((), fs + es, (), es, name="v-left")


def shape_coords(cls: CosetElement) -> Dict[tuple, CartanRational]:
    """Coordinates of a left-coset class in the v-left basis."""
    return pbw_coords(cls.alg, cls.lift(), vleft_spec(cls.alg.rs))


def factor_minus_apply_left(alg: Smash, g: Root, lam, cls: CosetElement) -> CosetElement:
    """Left action of the one-root opposite factor on a class mod A'f_g.

    Terms (-1)^n/n! g_{g,n}[lam] e^n f^n x with the coefficient leftmost;
    left multiplication by f preserves the ideal, so iteration terminates by
    ad-nilpotence.
    """
    rs = alg.rs
    spec = cls.spec
    pairing = rs.pairing(g, lam)
    e_g = alg.embed(g)
    f_g = alg.embed(_root_neg(g))
    cur = cls.lift()
    acc = cls
    n = 1
    fac = F1
    while True:
        cur = coset_reduce(alg, f_g * cur, spec).lift()
        if cur.is_zero():
            break
        fac *= n
        coeff = alg.ring.one()
        for j in range(1, n + 1):
            coeff = coeff * alg.ring.inverse_factor(_root_neg(g), pairing + j)
        piece = cur
        for _ in range(n):
            piece = e_g * piece
        piece = piece.coeff_left(coeff).scale(Fraction((-1) ** n, 1) / fac)
        acc = acc + coset_reduce(alg, piece, spec)
        n += 1
        if n > 60:  # pragma: no cover
            raise RuntimeError("opposite projector action did not terminate")
    return acc


def rank1_circ(alg: Smash, alpha, a: CosetElement, b: CosetElement) -> CosetElement:
    """Double-coset product a o b = a . p_{-alpha}(b) for one real root."""
    alpha = tuple(int(t) for t in alpha)
    spec_d = rank1_spec(alg.rs, alpha, "double")
    spec_mf = rank1_spec(alg.rs, _root_neg(alpha), "left")
    assert a.spec == spec_d and b.spec == spec_d
    pb = factor_minus_apply_left(
        alg, alpha, alg.rs.rho, coset_reduce(alg, b.lift(), spec_mf)
    )
    return coset_reduce(alg, a.lift() * pb.lift(), spec_d)
