"""Finitely supported cochain complexes, cohomology, fibers, quasi-isomorphisms.

Complexes are Z-graded with differentials raising degree by one; each complex
has finite degree support (families of complexes may have unbounded support
across members).  ``d o d = 0`` and chain-map squares are enforced at
construction and can never be in a latent broken state.

Cohomology groups carry deterministic representative bases (first-pivot
convention over fields, Smith-adapted bases over Z) so induced maps are
reproducible bit for bit.
"""

from __future__ import annotations

from .matrix import (
    Matrix,
    inverse,
    kernel_basis,
    rank,
    rref,
    smith_normal_form,
    solve,
)
from .modules import FgModule, ModuleHom
from .rings import Ring, ValidationError


class ChainComplex:
    __slots__ = ("ring", "_ranks", "_diffs")

    def __init__(self, ring: Ring, ranks: dict[int, int], diffs: dict[int, Matrix] | None = None) -> None:
        diffs = diffs or {}
        clean_ranks = {}
        for k, r in ranks.items():
            if r < 0:
                raise ValidationError("negative rank")
            if r > 0:
                clean_ranks[int(k)] = int(r)
        clean_diffs = {}
        for k, m in diffs.items():
            k = int(k)
            if m.ring != ring:
                raise ValidationError("differential ring mismatch")
            src = clean_ranks.get(k, 0)
            tgt = clean_ranks.get(k + 1, 0)
            if (m.rows, m.cols) != (tgt, src):
                raise ValidationError(f"differential at degree {k} has shape {m.rows}x{m.cols}, expected {tgt}x{src}")
            if not m.is_zero():
                clean_diffs[k] = m
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "_ranks", dict(sorted(clean_ranks.items())))
        object.__setattr__(self, "_diffs", dict(sorted(clean_diffs.items())))
        for k in list(clean_diffs):
            if k + 1 in clean_diffs:
                if not (clean_diffs[k + 1] @ clean_diffs[k]).is_zero():
                    raise ValidationError(f"d o d != 0 between degrees {k} and {k + 2}")

    def __setattr__(self, name, value):
        raise AttributeError("ChainComplex is immutable")

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(self._ranks)

    def rank(self, k: int) -> int:
        return self._ranks.get(k, 0)

    def diff(self, k: int) -> Matrix:
        m = self._diffs.get(k)
        if m is not None:
            return m
        return Matrix.zeros(self.ring, self.rank(k + 1), self.rank(k))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ChainComplex)
            and self.ring == other.ring
            and self._ranks == other._ranks
            and self._diffs == other._diffs
        )

    def __hash__(self) -> int:
        return hash((self.ring, tuple(self._ranks.items()), tuple(sorted(self._diffs.items()))))

    def __repr__(self) -> str:
        ranks = ", ".join(f"{k}:{r}" for k, r in self._ranks.items())
        return f"ChainComplex({self.ring}, ranks={{{ranks}}})"

    @staticmethod
    def zero(ring: Ring) -> "ChainComplex":
        return ChainComplex(ring, {})

    @staticmethod
    def concentrated(ring: Ring, degree: int, rank_: int) -> "ChainComplex":
        return ChainComplex(ring, {degree: rank_})

    def is_acyclic(self) -> bool:
        return all(cohomology(self, j).value.is_trivial() for j in self.degrees)


class ChainMap:
    __slots__ = ("source", "target", "_comps")

    def __init__(self, source: ChainComplex, target: ChainComplex, comps: dict[int, Matrix] | None = None) -> None:
        if source.ring != target.ring:
            raise ValidationError("chain map ring mismatch")
        comps = comps or {}
        clean = {}
        for k, m in comps.items():
            k = int(k)
            if (m.rows, m.cols) != (target.rank(k), source.rank(k)):
                raise ValidationError(f"chain map component at degree {k} has wrong shape")
            if not m.is_zero():
                clean[k] = m
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "_comps", dict(sorted(clean.items())))
        for k in set(source.degrees) | set(target.degrees):
            lhs = self.component(k + 1) @ source.diff(k)
            rhs = target.diff(k) @ self.component(k)
            if not (lhs == rhs):
                raise ValidationError(f"chain map does not commute with differentials at degree {k}")

    def __setattr__(self, name, value):
        raise AttributeError("ChainMap is immutable")

    def component(self, k: int) -> Matrix:
        m = self._comps.get(k)
        if m is not None:
            return m
        return Matrix.zeros(self.source.ring, self.target.rank(k), self.source.rank(k))

    @staticmethod
    def identity(c: ChainComplex) -> "ChainMap":
        return ChainMap(c, c, {k: Matrix.identity(c.ring, c.rank(k)) for k in c.degrees})

    @staticmethod
    def zero(source: ChainComplex, target: ChainComplex) -> "ChainMap":
        return ChainMap(source, target, {})

    def compose(self, inner: "ChainMap") -> "ChainMap":
        """self after inner."""
        degs = set(self.source.degrees) | set(inner.source.degrees)
        return ChainMap(
            inner.source,
            self.target,
            {k: self.component(k) @ inner.component(k) for k in degs},
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ChainMap)
            and self.source == other.source
            and self.target == other.target
            and self._comps == other._comps
        )

    def __hash__(self) -> int:
        return hash((self.source, self.target, tuple(sorted(self._comps.items()))))

    def is_levelwise_surjective(self) -> bool:
        from .matrix import is_surjective

        return all(is_surjective(self.component(k)) for k in set(self.source.degrees) | set(self.target.degrees))

    def is_levelwise_iso(self) -> bool:
        from .matrix import is_invertible

        for k in set(self.source.degrees) | set(self.target.degrees):
            if self.source.rank(k) != self.target.rank(k):
                return False
            if not is_invertible(self.component(k)):
                return False
        return True


def direct_sum(a: ChainComplex, b: ChainComplex) -> ChainComplex:
    ring = a.ring
    degs = set(a.degrees) | set(b.degrees)
    ranks = {k: a.rank(k) + b.rank(k) for k in degs}
    diffs = {}
    for k in degs:
        da, db = a.diff(k), b.diff(k)
        rows = a.rank(k + 1) + b.rank(k + 1)
        cols = a.rank(k) + b.rank(k)
        if rows and cols:
            grid = [[ring.zero()] * cols for _ in range(rows)]
            for i in range(da.rows):
                for j in range(da.cols):
                    grid[i][j] = da.entries[i][j]
            for i in range(db.rows):
                for j in range(db.cols):
                    grid[a.rank(k + 1) + i][a.rank(k) + j] = db.entries[i][j]
            diffs[k] = Matrix(ring, rows, cols, grid)
    return ChainComplex(ring, ranks, diffs)


def summand_projection(a: ChainComplex, b: ChainComplex) -> ChainMap:
    """Projection direct_sum(a, b) -> a."""
    total = direct_sum(a, b)
    ring = a.ring
    comps = {}
    for k in total.degrees:
        ra, rb = a.rank(k), b.rank(k)
        grid = [[ring.one() if i == j else ring.zero() for j in range(ra + rb)] for i in range(ra)]
        comps[k] = Matrix(ring, ra, ra + rb, grid)
    return ChainMap(total, a, comps)


class CohomologyClassGroup:
    """H^j of a complex with a deterministic chain-level representative basis.

    ``value`` is the abstract module; ``rep_basis`` has one column per kept
    generator (free generators over fields; torsion-then-free over Z).
    ``coordinates`` expresses any cocycle in those generators, canonically
    reduced modulo the torsion divisors.
    """

    __slots__ = ("ring", "degree", "value", "rep_basis", "_boundaries", "_kernel",
                 "_adapted", "_divisors")

    def __init__(self, ring, degree, value, rep_basis, boundaries, kernel, adapted, divisors):
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "rep_basis", rep_basis)
        object.__setattr__(self, "_boundaries", boundaries)
        object.__setattr__(self, "_kernel", kernel)
        object.__setattr__(self, "_adapted", adapted)
        object.__setattr__(self, "_divisors", divisors)

    def __setattr__(self, name, value):
        raise AttributeError("CohomologyClassGroup is immutable")

    @property
    def ngens(self) -> int:
        return self.rep_basis.cols

    @property
    def free_rank(self) -> int:
        return self.value.invariants()[0]

    def coordinates(self, vec: Matrix) -> Matrix:
        """Class of the cocycle ``vec`` in the kept generators (one column)."""
        if self.ring.is_field:
            span = self._boundaries.hstack(self.rep_basis)
            sol = solve(span, vec)
            if sol is None:
                raise ValidationError("vector is not a cocycle of this group")
            b = self._boundaries.cols
            return Matrix(self.ring, self.ngens, vec.cols,
                          [sol.entries[b + i] for i in range(self.ngens)])
        y = solve(self._kernel, vec)
        if y is None:
            raise ValidationError("vector is not an integral cocycle of this group")
        yy = self._adapted @ y
        out = []
        for pos, div in self._divisors:
            row = []
            for j in range(vec.cols):
                val = yy.entries[pos][j]
                row.append(val % div if div else val)
            out.append(row)
        return Matrix(self.ring, self.ngens, vec.cols, out)

    def reduce_matrix(self, m: Matrix) -> Matrix:
        """Canonically reduce entries of a generator matrix modulo torsion rows."""
        if self.ring.is_field:
            return m
        grid = []
        for i, (_, div) in enumerate(self._divisors):
            grid.append([v % div if div else v for v in m.entries[i]])
        return Matrix(self.ring, m.rows, m.cols, grid)


def cohomology(c: ChainComplex, j: int) -> CohomologyClassGroup:
    """H^j(c) = ker d^j / im d^{j-1} with representative basis."""
    ring = c.ring
    d_out = c.diff(j)
    d_in = c.diff(j - 1)
    cycles = kernel_basis(d_out)  # rank_j x z

    if ring.is_field:
        red, piv = rref(d_in)
        bound = d_in.cols_slice(piv)  # independent boundary basis
        combined = bound.hstack(cycles)
        _, piv2 = rref(combined)
        kept = [p - bound.cols for p in piv2 if p >= bound.cols]
        reps = cycles.cols_slice(kept)
        value = FgModule.free(ring, reps.cols)
        return CohomologyClassGroup(ring, j, value, reps, bound, None, None,
                                    tuple((i, 0) for i in range(reps.cols)))

    # over Z: boundaries in kernel coordinates, then Smith-adapt
    y = solve(cycles, d_in) if d_in.cols else Matrix.zeros(ring, cycles.cols, 0)
    if y is None:
        raise ValidationError("boundaries do not lie in the cycle lattice (broken complex)")
    dmat, ly, _ry = smith_normal_form(y)
    z = cycles.cols
    npiv = sum(1 for i in range(min(dmat.rows, dmat.cols)) if dmat.entries[i][i] != 0)
    ly_inv = inverse(ly)
    adapted_basis = cycles @ ly_inv
    kept: list[tuple[int, int]] = []
    for i in range(npiv):
        if dmat.entries[i][i] != 1:
            kept.append((i, dmat.entries[i][i]))
    for i in range(npiv, z):
        kept.append((i, 0))
    reps = adapted_basis.cols_slice([pos for pos, _ in kept])
    pres = Matrix(ring, len(kept), sum(1 for _, d in kept if d),
                  [[(d if (i == jcol) else 0) for jcol, (_, d) in enumerate(k2 for k2 in kept if k2[1])]
                   for i, (_, d) in enumerate(kept)])
    # presentation: diagonal torsion relations in the kept-generator order
    torsion_positions = [i for i, (_, d) in enumerate(kept) if d]
    grid = [[0] * len(torsion_positions) for _ in range(len(kept))]
    for col, i in enumerate(torsion_positions):
        grid[i][col] = kept[i][1]
    pres = Matrix(ring, len(kept), len(torsion_positions), grid)
    value = FgModule(ring, pres)
    return CohomologyClassGroup(ring, j, value, reps, d_in, cycles, ly, tuple(kept))


def cohomology_rank(c: ChainComplex, j: int) -> int:
    """Free rank of H^j; the fast path used by rank oracles."""
    if c.ring.is_field:
        return c.rank(j) - rank(c.diff(j)) - rank(c.diff(j - 1))
    return cohomology(c, j).free_rank


def cohomology_invariants(c: ChainComplex, j: int) -> tuple[int, tuple[int, ...]]:
    return cohomology(c, j).value.invariants()


def induced_map_on_cohomology(
    f: ChainMap,
    j: int,
    source_h: CohomologyClassGroup | None = None,
    target_h: CohomologyClassGroup | None = None,
) -> Matrix:
    """Matrix of H^j(f) with respect to the stored representative bases."""
    hs = source_h if source_h is not None else cohomology(f.source, j)
    ht = target_h if target_h is not None else cohomology(f.target, j)
    if hs.ngens == 0:
        return Matrix.zeros(f.source.ring, ht.ngens, 0)
    mapped = f.component(j) @ hs.rep_basis
    return ht.coordinates(mapped)


def induced_hom(f: ChainMap, j: int,
                source_h: CohomologyClassGroup | None = None,
                target_h: CohomologyClassGroup | None = None) -> ModuleHom:
    hs = source_h if source_h is not None else cohomology(f.source, j)
    ht = target_h if target_h is not None else cohomology(f.target, j)
    return ModuleHom(hs.value, ht.value, induced_map_on_cohomology(f, j, hs, ht))


class QuasiIsoResult:
    __slots__ = ("ok", "failing_degree", "per_degree")

    def __init__(self, ok: bool, failing_degree: int | None, per_degree: dict[int, bool]):
        self.ok = ok
        self.failing_degree = failing_degree
        self.per_degree = per_degree

    def __bool__(self) -> bool:
        return self.ok


def is_quasi_iso(f: ChainMap) -> QuasiIsoResult:
    """True iff H^j(f) is an isomorphism for every j in the union of supports."""
    degrees = sorted(set(f.source.degrees) | set(f.target.degrees))
    per: dict[int, bool] = {}
    failing = None
    for j in degrees:
        ok_j = induced_hom(f, j).is_isomorphism()
        per[j] = ok_j
        if not ok_j and failing is None:
            failing = j
    return QuasiIsoResult(failing is None, failing, per)


# -- fiber ------------------------------------------------------------------


def fiber(f: ChainMap) -> ChainComplex:
    """fib(f)^k = A^k + B^{k-1} with differential [[dA, 0], [f, -dB]].

    Sits in the exact sequence
    ... -> H^j(fib) -> H^j(source) -> H^j(target) -> H^{j+1}(fib) -> ...
    """
    a, b = f.source, f.target
    ring = a.ring
    degs = set(a.degrees) | {k + 1 for k in b.degrees}
    ranks = {k: a.rank(k) + b.rank(k - 1) for k in degs}
    diffs = {}
    for k in degs | {k - 1 for k in degs}:
        rows = a.rank(k + 1) + b.rank(k)
        cols = a.rank(k) + b.rank(k - 1)
        if rows == 0 or cols == 0:
            continue
        grid = [[ring.zero()] * cols for _ in range(rows)]
        da = a.diff(k)
        for i in range(da.rows):
            for jj in range(da.cols):
                grid[i][jj] = da.entries[i][jj]
        fk = f.component(k)
        for i in range(fk.rows):
            for jj in range(fk.cols):
                grid[a.rank(k + 1) + i][jj] = fk.entries[i][jj]
        db = b.diff(k - 1)
        for i in range(db.rows):
            for jj in range(db.cols):
                grid[a.rank(k + 1) + i][a.rank(k) + jj] = ring.neg(db.entries[i][jj])
        diffs[k] = Matrix(ring, rows, cols, grid)
    return ChainComplex(ring, ranks, diffs)


def fiber_projection(f: ChainMap) -> ChainMap:
    """The chain map fib(f) -> source."""
    fib = fiber(f)
    a = f.source
    ring = a.ring
    comps = {}
    for k in fib.degrees:
        ra = a.rank(k)
        cols = fib.rank(k)
        grid = [[ring.one() if i == j else ring.zero() for j in range(cols)] for i in range(ra)]
        comps[k] = Matrix(ring, ra, cols, grid)
    return ChainMap(fib, a, comps)


def fiber_connecting(f: ChainMap, j: int,
                     target_h: CohomologyClassGroup | None = None,
                     fiber_h: CohomologyClassGroup | None = None) -> Matrix:
    """Matrix of the connecting map H^j(target) -> H^{j+1}(fib(f))."""
    fib = fiber(f)
    a, b = f.source, f.target
    hb = target_h if target_h is not None else cohomology(b, j)
    hf = fiber_h if fiber_h is not None else cohomology(fib, j + 1)
    ring = a.ring
    if hb.ngens == 0:
        return Matrix.zeros(ring, hf.ngens, 0)
    cols = []
    for idx in range(hb.ngens):
        z = hb.rep_basis.col(idx)
        lifted = [[ring.zero()] for _ in range(a.rank(j + 1))] + [list(row) for row in z.entries]
        cols.append(Matrix(ring, fib.rank(j + 1), 1, lifted))
    stacked = cols[0]
    for c in cols[1:]:
        stacked = stacked.hstack(c)
    return hf.coordinates(stacked)
