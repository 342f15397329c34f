"""Sparse multivariate polynomials over exact rationals.

Internal helper layer: polynomials are plain dicts mapping exponent tuples
to nonzero Fractions.  Everything downstream (the localized Cartan ring,
Shapovalov Gram solves, weight-module matrices) sits on top of these few
functions, so they stay small and allocation-light.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Sequence, Tuple

Mono = Tuple[int, ...]
Poly = Dict[Mono, Fraction]

ZERO = Fraction(0)
ONE = Fraction(1)


def p_zero() -> Poly:
    return {}

def p_const(nvars: int, c) -> Poly:
    c = Fraction(c)
    if c == 0:
        return {}
    return {(0,) * nvars: c}

def p_var(nvars: int, i: int) -> Poly:
    mono = tuple(1 if j == i else 0 for j in range(nvars))
    return {mono: ONE}

def p_linear(coeffs: Sequence, const) -> Poly:
    """Polynomial sum(coeffs[i]*x_i) + const."""
    n = len(coeffs)
    p: Poly = {}
    for i, c in enumerate(coeffs):
        c = Fraction(c)
        if c:
            p[tuple(1 if j == i else 0 for j in range(n))] = c
    c = Fraction(const)
    if c:
        p[(0,) * n] = c
    return p

def p_is_zero(p: Poly) -> bool:
    return not p

def p_is_const(p: Poly):
    """Return the constant value if p is constant, else None."""
    if not p:
        return ZERO
    if len(p) == 1:
        mono, c = next(iter(p.items()))
        if not any(mono):
            return c
    return None

def p_add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, ZERO) + c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out

def p_neg(a: Poly) -> Poly:
    return {m: -c for m, c in a.items()}

def p_sub(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, ZERO) - c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out

def p_scale(a: Poly, c) -> Poly:
    c = Fraction(c)
    if not c:
        return {}
    return {m: v * c for m, v in a.items()}

def p_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return {}
    out: Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            v = out.get(m, ZERO) + ca * cb
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out

def p_pow(a: Poly, k: int) -> Poly:
    if k == 0:
        # nvars is not recoverable from an empty dict; callers avoid a**0
        mono = next(iter(a), None)
        n = len(mono) if mono is not None else 0
        return p_const(n, 1)
    out = a
    for _ in range(k - 1):
        out = p_mul(out, a)
    return out

def p_degree(p: Poly) -> int:
    return max((sum(m) for m in p), default=-1)

def p_eval(p: Poly, point: Sequence) -> Fraction:
    total = ZERO
    for m, c in p.items():
        v = c
        for e, x in zip(m, point):
            if e:
                v *= Fraction(x) ** e
        total += v
    return total

def p_subst(p: Poly, images: Sequence[Poly], nvars_out: int) -> Poly:
    """Substitute x_i -> images[i] (each a polynomial in the output ring)."""
    out: Poly = {}
    cache: Dict[Tuple[int, int], Poly] = {}

    def var_pow(i: int, e: int) -> Poly:
        key = (i, e)
        if key not in cache:
            cache[key] = p_pow(images[i], e)
        return cache[key]

    for m, c in p.items():
        term = p_const(nvars_out, c)
        for i, e in enumerate(m):
            if e:
                term = p_mul(term, var_pow(i, e))
        out = p_add(out, term)
    return out

def p_shift(p: Poly, shifts: Sequence) -> Poly:
    """Substitute x_i -> x_i + shifts[i] (rational shifts)."""
    if all(Fraction(s) == 0 for s in shifts):
        return dict(p)
    n = len(shifts)
    images = [p_add(p_var(n, i), p_const(n, shifts[i])) for i in range(n)]
    return p_subst(p, images, n)


def p_divmod_linear(p: Poly, coeffs: Sequence[Fraction], const: Fraction):
    """Divide p by the linear form L = sum(coeffs[i] x_i) + const.

    Returns (q, r) with p = q*L + r, where r is independent of the pivot
    variable (the first one with a nonzero coefficient in L).
    """
    pivot = None
    for i, c in enumerate(coeffs):
        if c:
            pivot = i
            break
    if pivot is None:
        raise ZeroDivisionError("linear form has no variable part")
    cp = Fraction(coeffs[pivot])
    q: Poly = {}
    r = dict(p)
    while True:
        # highest pivot-degree term still containing the pivot variable
        best = None
        for m in r:
            if m[pivot] > 0 and (best is None or m[pivot] > best[pivot]):
                best = m
    # note: plain max over pivot exponent; ties resolved arbitrarily is fine
        if best is None:
            return q, r
        c = r[best]
        qm = list(best)
        qm[pivot] -= 1
        qm = tuple(qm)
        qc = c / cp
        q[qm] = q.get(qm, ZERO) + qc
        if not q[qm]:
            del q[qm]
        # subtract qc * x^qm * L from r
        for i, ci in enumerate(coeffs):
            if not ci:
                continue
            m2 = list(qm)
            m2[i] += 1
            m2 = tuple(m2)
            v = r.get(m2, ZERO) - qc * Fraction(ci)
            if v:
                r[m2] = v
            else:
                r.pop(m2, None)
        cc = Fraction(const)
        if cc:
            v = r.get(qm, ZERO) - qc * cc
            if v:
                r[qm] = v
            else:
                r.pop(qm, None)


def p_try_divide_linear(p: Poly, coeffs, const):
    """Exact division by a linear form; returns quotient or None."""
    q, r = p_divmod_linear(p, [Fraction(c) for c in coeffs], Fraction(const))
    if r:
        return None
    return q


def p_univariate_from_line(p: Poly, direction: Sequence[Fraction]):
    """Coefficient list (ascending) of s -> p(s * direction)."""
    deg = p_degree(p)
    out = [ZERO] * (deg + 1)
    for m, c in p.items():
        v = c
        for e, d in zip(m, direction):
            if e:
                v *= Fraction(d) ** e
        out[sum(m)] += v
    while out and not out[-1]:
        out.pop()
    return out


def rational_roots(coeffs):
    """All rational roots of a univariate polynomial given by ascending coeffs."""
    coeffs = [Fraction(c) for c in coeffs]
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    if not coeffs:
        return []
    shift = 0
    while coeffs and not coeffs[0]:
        coeffs.pop(0)
        shift += 1
    roots = []
    if shift:
        roots.append(ZERO)
    if len(coeffs) <= 1:
        return roots
    # clear denominators -> integer polynomial
    from math import lcm
    den = lcm(*[c.denominator for c in coeffs])
    ints = [int(c * den) for c in coeffs]
    a0, an = abs(ints[0]), abs(ints[-1])

    def divisors(n):
        ds = []
        d = 1
        while d * d <= n:
            if n % d == 0:
                ds.append(d)
                ds.append(n // d)
            d += 1
        return ds

    for p in divisors(a0):
        for q in divisors(an):
            for s in (1, -1):
                cand = Fraction(s * p, q)
                val = ZERO
                for c in reversed(ints):
                    val = val * cand + c
                if val == 0 and cand not in roots:
                    roots.append(cand)
    return roots


def p_render(p: Poly, names: Sequence[str]) -> str:
    """Canonical text form, graded-lex descending monomial order."""
    if not p:
        return "0"
    def key(m):
        return (-sum(m), tuple(-e for e in m))
    parts = []
    for m in sorted(p, key=key):
        c = p[m]
        factors = []
        for i, e in enumerate(m):
            if e == 1:
                factors.append(names[i])
            elif e > 1:
                factors.append(f"{names[i]}^{e}")
        body = "*".join(factors)
        if not body:
            term = str(c)
        elif c == 1:
            term = body
        elif c == -1:
            term = "-" + body
        else:
            term = f"{c}*{body}"
        parts.append(term)
    s = parts[0]
    for t in parts[1:]:
        s += ("+" + t) if not t.startswith("-") else t
    return s
