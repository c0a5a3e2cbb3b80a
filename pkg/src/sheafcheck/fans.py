"""Exact rational hyperplane-arrangement fans and strict feasibility.

A central hyperplane arrangement cuts a rational vector space into
relatively open polyhedral cones, one per realizable sign vector.  Cones are
enumerated by incremental sign refinement; feasibility of a sign pattern
(strict inequalities and equations through the origin) is decided by
Fourier-Motzkin elimination over Fraction arithmetic, which also
back-substitutes an exact interior witness point.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


def _dot(a, x):
    return sum(ai * xi for ai, xi in zip(a, x))


def _scale_vec(a, c):
    return tuple(ai * c for ai in a)


def _sub_vec(a, b):
    return tuple(ai - bi for ai, bi in zip(a, b))


def primitive(vec) -> tuple[int, ...]:
    """Clear denominators and divide by the gcd; canonical integer direction."""
    fracs = [Fraction(v) for v in vec]
    if all(f == 0 for f in fracs):
        return tuple(0 for _ in fracs)
    denom = 1
    for f in fracs:
        denom = denom * f.denominator // gcd(denom, f.denominator)
    ints = [int(f * denom) for f in fracs]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    return tuple(v // g for v in ints)


def canonical_normal(vec) -> tuple[int, ...] | None:
    """Primitive direction with positive leading nonzero entry; None if zero."""
    p = primitive(vec)
    lead = next((v for v in p if v != 0), None)
    if lead is None:
        return None
    return p if lead > 0 else tuple(-v for v in p)


def feasible_point(constraints, dim: int):
    """An exact interior point of {x : a.x REL 0 for (a, REL) in constraints},
    with REL one of '>', '<', '='; None when the system is infeasible.

    Homogeneous systems only.  Deterministic: equations are substituted in
    order, the last variable is eliminated first, and free choices take
    midpoints (or 0 / +-1 against single-sided bounds).
    """
    work = [(tuple(Fraction(c) for c in a), rel) for a, rel in constraints]
    return _solve(work, dim)


def _solve(constraints, dim: int):
    pending = []
    for a, rel in constraints:
        if all(c == 0 for c in a):
            if rel != "=":
                return None
            continue
        pending.append((a, rel))
    if dim == 0:
        return ()

    # substitute the first equation with a nonzero coefficient
    for idx, (a, rel) in enumerate(pending):
        if rel == "=":
            k = max(i for i, c in enumerate(a) if c != 0)
            coeff = a[k]
            rest = [(j, c) for j, c in enumerate(a) if j != k and c != 0]
            reduced = []
            for a2, rel2 in pending[:idx] + pending[idx + 1:]:
                if a2[k] != 0:
                    f = a2[k] / coeff
                    a2 = _sub_vec(a2, _scale_vec(a, f))
                a2 = tuple(c for j, c in enumerate(a2) if j != k)
                reduced.append((a2, rel2))
            sub = _solve(reduced, dim - 1)
            if sub is None:
                return None
            partial = list(sub[:k]) + [Fraction(0)] + list(sub[k:])
            partial[k] = -sum(c * partial[j] for j, c in rest) / coeff
            return tuple(partial)

    # all strict: eliminate the last variable
    k = dim - 1
    lowers, uppers, passthrough = [], [], []
    for a, rel in pending:
        c = a[k]
        body = a[:k]
        if c == 0:
            passthrough.append((body, rel))
            continue
        # a.x > 0  <=>  c*x_k > -body.x'
        bound = tuple(-b / c for b in body)
        if (c > 0) == (rel == ">"):
            lowers.append(bound)
        else:
            uppers.append(bound)
    combined = list(passthrough)
    for lo in lowers:
        for hi in uppers:
            combined.append((_sub_vec(hi, lo), ">"))
    sub = _solve(combined, dim - 1)
    if sub is None:
        return None
    lo_vals = [_dot(b, sub) for b in lowers]
    hi_vals = [_dot(b, sub) for b in uppers]
    if lo_vals and hi_vals:
        lo, hi = max(lo_vals), min(hi_vals)
        if not lo < hi:
            return None
        xk = (lo + hi) / 2
    elif lo_vals:
        xk = max(lo_vals) + 1
    elif hi_vals:
        xk = min(hi_vals) - 1
    else:
        xk = Fraction(0)
    return tuple(sub) + (xk,)


class Cone:
    """A relatively open cone of an arrangement: its sign vector and an exact
    interior witness."""

    __slots__ = ("signs", "witness")

    def __init__(self, signs: tuple[int, ...], witness: tuple) -> None:
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "witness", tuple(Fraction(w) for w in witness))

    def __setattr__(self, name, value):
        raise AttributeError("Cone is immutable")

    @property
    def is_zero_cone(self) -> bool:
        return all(w == 0 for w in self.witness)

    def face_leq(self, other: "Cone") -> bool:
        """Is this cone contained in the closure of ``other``?"""
        return all(s == 0 or s == t for s, t in zip(self.signs, other.signs))

    def __repr__(self):
        return f"Cone(signs={self.signs})"


def arrangement_cones(normals, dim: int) -> tuple[Cone, ...]:
    """All realizable sign-vector cones of the central arrangement given by
    ``normals`` in a ``dim``-dimensional space, deterministically ordered."""
    faces: list[tuple[tuple[int, ...], tuple]] = [((), feasible_point([], dim) or ())]
    if dim == 0:
        return (Cone((0,) * len(tuple(normals)), ()),)
    normals = [tuple(Fraction(c) for c in a) for a in normals]
    for j, a in enumerate(normals):
        refined = []
        for signs, _w in faces:
            for s in (-1, 0, 1):
                cand = signs + (s,)
                cons = []
                for jj, sign in enumerate(cand):
                    rel = {1: ">", -1: "<", 0: "="}[sign]
                    cons.append((normals[jj], rel))
                w = feasible_point(cons, dim)
                if w is not None:
                    refined.append((cand, w))
        faces = refined
    faces.sort(key=lambda f: f[0])
    return tuple(Cone(signs, w) for signs, w in faces)


def sign_vector(normals, point) -> tuple[int, ...]:
    point = tuple(Fraction(p) for p in point)
    out = []
    for a in normals:
        v = _dot(tuple(Fraction(c) for c in a), point)
        out.append(0 if v == 0 else (1 if v > 0 else -1))
    return tuple(out)
