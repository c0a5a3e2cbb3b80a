"""Cellular sheaves of chain complexes on embedded finite simplicial complexes.

Open subsets are modeled Alexandrov-style as coface-closed cell sets.
Derived sections over an open set are computed as the total complex of the
poset-nerve (ordered chains of cells) cochain complex: this computes the
derived limit of the stalk diagram, restricts along inclusions by honest
degreewise-surjective projections, and reproduces cellular sheaf cohomology
on the full complex.

The deformation checker drives the sublevel family of a PL function through
the propagation hypotheses and independently verifies the conclusion
(quasi-isomorphism of all restriction maps between section complexes).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exactalg.complexes import (
    ChainComplex,
    ChainMap,
    cohomology,
    fiber,
    is_quasi_iso,
)
from .exactalg.matrix import Matrix, rank
from .exactalg.rings import Ring, ValidationError, rational_str

Cell = tuple[int, ...]


def cell_key(cell: Cell) -> tuple:
    return (len(cell), cell)


def cell_label(cell: Cell) -> str:
    return "(" + ",".join(str(v) for v in cell) + ")"


class SimplicialComplex:
    """A finite simplicial complex with exact rational vertex coordinates.

    Cells are sorted tuples of vertex indices; the face set is downward
    closed and every simplex is geometrically non-degenerate (affinely
    independent vertices).
    """

    __slots__ = ("vertices", "simplices", "_cofacets", "_manifold")

    def __init__(self, vertices, simplices) -> None:
        verts = tuple(tuple(Fraction(c) for c in v) for v in vertices)
        if verts:
            n = len(verts[0])
            if any(len(v) != n for v in verts):
                raise ValidationError("vertex coordinates have mixed dimensions")
        cells = set()
        for s in simplices:
            cell = tuple(sorted(int(v) for v in s))
            if len(set(cell)) != len(cell) or not cell:
                raise ValidationError(f"bad simplex {s}")
            if cell[-1] >= len(verts):
                raise ValidationError(f"simplex {s} references a missing vertex")
            cells.add(cell)
        for cell in list(cells):
            for i in range(len(cell)):
                face = cell[:i] + cell[i + 1:]
                if face and face not in cells:
                    raise ValidationError(f"face {face} of {cell} is missing (not downward closed)")
        for cell in cells:
            if len(cell) >= 2:
                base = verts[cell[0]]
                rows = [[verts[v][k] - base[k] for k in range(len(base))] for v in cell[1:]]
                m = Matrix.from_rows(Ring("q"), rows)
                if rank(m) != len(cell) - 1:
                    raise ValidationError(f"simplex {cell} is geometrically degenerate")
        cofacets: dict[Cell, list[Cell]] = {c: [] for c in cells}
        for c in cells:
            for i in range(len(c)):
                face = c[:i] + c[i + 1:]
                if face:
                    cofacets[face].append(c)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "simplices", frozenset(cells))
        object.__setattr__(self, "_cofacets", {k: tuple(sorted(v, key=cell_key)) for k, v in cofacets.items()})
        object.__setattr__(self, "_manifold", None)

    def __setattr__(self, name, value):
        raise AttributeError("SimplicialComplex is immutable")

    @property
    def cells(self) -> tuple[Cell, ...]:
        return tuple(sorted(self.simplices, key=cell_key))

    @property
    def dim(self) -> int:
        return max((len(c) - 1 for c in self.simplices), default=-1)

    @property
    def ambient_dim(self) -> int:
        return len(self.vertices[0]) if self.vertices else 0

    def cofacets(self, cell: Cell) -> tuple[Cell, ...]:
        return self._cofacets[cell]

    def facets(self, cell: Cell) -> tuple[Cell, ...]:
        return tuple(cell[:i] + cell[i + 1:] for i in range(len(cell)) if len(cell) > 1)

    def star(self, cell: Cell) -> "OpenCellSet":
        cs = set(cell)
        return OpenCellSet(self, [c for c in self.simplices if cs <= set(c)])

    def closure(self, cells) -> tuple[Cell, ...]:
        out = set()
        for c in cells:
            c = tuple(sorted(c))
            for mask in range(1, 1 << len(c)):
                face = tuple(v for i, v in enumerate(c) if mask & (1 << i))
                out.add(face)
        return tuple(sorted(out, key=cell_key))

    # -- manifold structure -------------------------------------------------

    def manifold_flags(self) -> dict[Cell, str]:
        """Per-cell 'interior'/'boundary' classification; raises when the
        complex is not a combinatorial manifold (pure, ridge degrees <= 2)."""
        if self._manifold is not None:
            return self._manifold
        d = self.dim
        for c in self.simplices:
            if not self._cofacets[c] and len(c) - 1 != d:
                raise ValidationError("complex is not pure: maximal cell of low dimension")
        boundary: set[Cell] = set()
        for c in self.simplices:
            if len(c) - 1 == d - 1:
                deg = len(self._cofacets[c])
                if deg > 2:
                    raise ValidationError(f"ridge {c} lies in {deg} facets: not a manifold")
                if deg == 1:
                    boundary.add(c)
        closed_boundary = set(self.closure(boundary))
        flags = {c: "boundary" if c in closed_boundary else "interior" for c in self.simplices}
        object.__setattr__(self, "_manifold", flags)
        return flags


class OpenCellSet:
    """A coface-closed set of cells: the Alexandrov model of an open subset."""

    __slots__ = ("complex", "cells")

    def __init__(self, complex_: SimplicialComplex, cells) -> None:
        cs = frozenset(tuple(sorted(c)) for c in cells)
        for c in cs:
            if c not in complex_.simplices:
                raise ValidationError(f"cell {c} is not in the complex")
            for cf in complex_.cofacets(c):
                if cf not in cs:
                    raise ValidationError(f"not coface-closed: {c} is in, its coface {cf} is not")
        object.__setattr__(self, "complex", complex_)
        object.__setattr__(self, "cells", cs)

    def __setattr__(self, name, value):
        raise AttributeError("OpenCellSet is immutable")

    def sorted_cells(self) -> tuple[Cell, ...]:
        return tuple(sorted(self.cells, key=cell_key))

    def __contains__(self, cell) -> bool:
        return tuple(sorted(cell)) in self.cells

    def __len__(self) -> int:
        return len(self.cells)

    def __eq__(self, other) -> bool:
        return isinstance(other, OpenCellSet) and self.complex is other.complex and self.cells == other.cells

    def __hash__(self) -> int:
        return hash(self.cells)

    def intersect(self, other: "OpenCellSet") -> "OpenCellSet":
        return OpenCellSet(self.complex, self.cells & other.cells)

    def issubset(self, other: "OpenCellSet") -> bool:
        return self.cells <= other.cells


class CellSheaf:
    """Stalk complexes on cells with generization chain maps along codim-1
    face relations, functorial across every codimension-2 diamond."""

    __slots__ = ("complex", "ring", "stalks", "generization", "_gen_cache")

    def __init__(self, complex_: SimplicialComplex, ring: Ring, stalks: dict, generization: dict) -> None:
        stalks = {tuple(sorted(k)): v for k, v in stalks.items()}
        for c in complex_.simplices:
            if c not in stalks:
                raise ValidationError(f"missing stalk on cell {c}")
            if stalks[c].ring != ring:
                raise ValidationError(f"stalk on {c} has the wrong ring")
        gens = {}
        for (a, b), f in generization.items():
            a, b = tuple(sorted(a)), tuple(sorted(b))
            if not (set(a) < set(b) and len(b) == len(a) + 1):
                raise ValidationError(f"generization key {(a, b)} is not a codim-1 face relation")
            gens[(a, b)] = f
        for c in complex_.simplices:
            for cf in complex_.cofacets(c):
                if (c, cf) not in gens:
                    raise ValidationError(f"missing generization map {c} -> {cf}")
                f = gens[(c, cf)]
                if f.source != stalks[c] or f.target != stalks[cf]:
                    raise ValidationError(f"generization map {c} -> {cf} has wrong endpoints")
        # codim-2 diamonds must commute
        for c in complex_.simplices:
            for cf in complex_.cofacets(c):
                for cff in complex_.cofacets(cf):
                    mids = [m for m in complex_.facets(cff) if set(c) < set(m)]
                    assert cf in mids
                    for m in mids:
                        if m == cf:
                            continue
                        left = gens[(cf, cff)].compose(gens[(c, cf)])
                        right = gens[(m, cff)].compose(gens[(c, m)])
                        if left != right:
                            raise ValidationError(
                                f"generization square does not commute on the diamond "
                                f"{cell_label(c)} < {cell_label(cf)},{cell_label(m)} < {cell_label(cff)}"
                            )
        object.__setattr__(self, "complex", complex_)
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "stalks", stalks)
        object.__setattr__(self, "generization", gens)
        object.__setattr__(self, "_gen_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("CellSheaf is immutable")

    def stalk(self, cell: Cell) -> ChainComplex:
        return self.stalks[tuple(sorted(cell))]

    def gen(self, a: Cell, b: Cell) -> ChainMap:
        """Generization along any face relation a <= b (composed, cached)."""
        a, b = tuple(sorted(a)), tuple(sorted(b))
        if a == b:
            return ChainMap.identity(self.stalks[a])
        key = (a, b)
        got = self._gen_cache.get(key)
        if got is not None:
            return got
        if not set(a) < set(b):
            raise ValidationError(f"{a} is not a face of {b}")
        missing = sorted(set(b) - set(a))
        cur = a
        out = None
        for v in missing:
            nxt = tuple(sorted(cur + (v,)))
            step = self.generization[(cur, nxt)]
            out = step if out is None else step.compose(out)
            cur = nxt
        self._gen_cache[key] = out
        return out

    def support(self) -> tuple[Cell, ...]:
        """Cellular closure of the cells with non-acyclic stalks."""
        carriers = [c for c in self.complex.cells if not self.stalks[c].is_acyclic()]
        return self.complex.closure(carriers)


# ---------------------------------------------------------------------------
# derived sections over open cell sets
# ---------------------------------------------------------------------------


def _chains_in(U: OpenCellSet) -> tuple[tuple[Cell, ...], ...]:
    """All strictly increasing face-relation chains inside U, deterministically
    ordered by (length, cells)."""
    cells = U.sorted_cells()
    ending: dict[Cell, list[tuple[Cell, ...]]] = {}
    for c in cells:
        mine = [(c,)]
        cset = set(c)
        for f in cells:
            if f != c and set(f) < cset:
                for ch in ending[f]:
                    mine.append(ch + (c,))
        ending[c] = mine
    out = [ch for c in cells for ch in ending[c]]
    out.sort(key=lambda ch: (len(ch), tuple(cell_key(c) for c in ch)))
    return tuple(out)


def _section_basis(U: OpenCellSet, F: CellSheaf):
    """Per total degree: ordered components (chain, stalk degree, stalk rank)."""
    basis: dict[int, list[tuple[tuple[Cell, ...], int, int]]] = {}
    for ch in _chains_in(U):
        p = len(ch) - 1
        stalk = F.stalk(ch[-1])
        for q in stalk.degrees:
            basis.setdefault(p + q, []).append((ch, q, stalk.rank(q)))
    for n in basis:
        basis[n].sort(key=lambda item: (len(item[0]), tuple(cell_key(c) for c in item[0]), item[1]))
    return basis


def _component_offsets(components):
    offsets = []
    total = 0
    for ch, q, r in components:
        offsets.append(total)
        total += r
    return offsets, total


def sections(U: OpenCellSet, F: CellSheaf) -> ChainComplex:
    """Derived sections of F over the open set U.

    Total complex of the poset-nerve cochain complex: the component at a
    chain of cells carries the stalk of the top cell, the nerve differential
    combines insertions (with alternating signs, generizing when the top
    grows) and the stalk differentials twisted by the chain length.
    """
    basis = _section_basis(U, F)
    ring = F.ring
    ranks = {n: _component_offsets(comps)[1] for n, comps in basis.items()}
    index: dict[int, dict[tuple, int]] = {}
    for n, comps in basis.items():
        offsets, _ = _component_offsets(comps)
        index[n] = {(ch, q): off for (ch, q, _r), off in zip(comps, offsets)}
    chain_set = {ch for comps in basis.values() for (ch, _q, _r) in comps}

    diffs = {}
    for n, comps in sorted(basis.items()):
        tgt_rank = ranks.get(n + 1, 0)
        src_rank = ranks[n]
        if tgt_rank == 0 or src_rank == 0:
            continue
        grid = [[ring.zero()] * src_rank for _ in range(tgt_rank)]
        tgt_index = index.get(n + 1, {})
        offsets, _ = _component_offsets(comps)
        for (ch, q, r), off in zip(comps, offsets):
            if r == 0:
                continue
            p = len(ch) - 1
            stalk = F.stalk(ch[-1])
            # stalk differential, twisted by (-1)^p
            d = stalk.diff(q)
            toff = tgt_index.get((ch, q + 1))
            if toff is not None and d.rows:
                sign = 1 if p % 2 == 0 else -1
                for i in range(d.rows):
                    for j in range(d.cols):
                        v = d.entries[i][j]
                        grid[toff + i][off + j] = ring.canon(v if sign == 1 else ring.neg(v))
            # nerve insertions
            chset = set(ch)
            top = ch[-1]
            for e in U.sorted_cells():
                if e in chset:
                    continue
                eset = set(e)
                for pos in range(p + 2):
                    lower_ok = pos == 0 or set(ch[pos - 1]) < eset
                    upper_ok = pos == p + 1 or eset < set(ch[pos])
                    if not (lower_ok and upper_ok):
                        continue
                    new = ch[:pos] + (e,) + ch[pos:]
                    if new not in chain_set:
                        continue
                    sign = 1 if pos % 2 == 0 else -1
                    if pos <= p:
                        toff = tgt_index.get((new, q))
                        if toff is None:
                            continue
                        for i in range(r):
                            grid[toff + i][off + i] = ring.add(
                                grid[toff + i][off + i],
                                ring.one() if sign == 1 else ring.neg(ring.one()),
                            )
                    else:
                        toff = tgt_index.get((new, q))
                        if toff is None:
                            continue
                        g = F.gen(top, e).component(q)
                        for i in range(g.rows):
                            for j in range(g.cols):
                                v = g.entries[i][j]
                                grid[toff + i][off + j] = ring.add(
                                    grid[toff + i][off + j],
                                    v if sign == 1 else ring.neg(v),
                                )
        diffs[n] = Matrix(ring, tgt_rank, src_rank, grid)
    return ChainComplex(ring, ranks, diffs)


def restriction_map(U: OpenCellSet, V: OpenCellSet, F: CellSheaf,
                    source: ChainComplex | None = None,
                    target: ChainComplex | None = None) -> ChainMap:
    """The degreewise-surjective restriction sections(U) -> sections(V) for
    V a coface-closed subset of U: projection onto the chains inside V."""
    if not V.issubset(U):
        raise ValidationError("restriction target must be a subset")
    src = source if source is not None else sections(U, F)
    tgt = target if target is not None else sections(V, F)
    src_basis = _section_basis(U, F)
    tgt_basis = _section_basis(V, F)
    ring = F.ring
    comps = {}
    for n in set(src_basis) | set(tgt_basis):
        tcomps = tgt_basis.get(n, [])
        scomps = src_basis.get(n, [])
        soff, srank = _component_offsets(scomps)
        toff, trank = _component_offsets(tcomps)
        if trank == 0 or srank == 0:
            continue
        sindex = {(ch, q): off for (ch, q, _), off in zip(scomps, soff)}
        grid = [[ring.zero()] * srank for _ in range(trank)]
        for (ch, q, r), off in zip(tcomps, toff):
            s_off = sindex[(ch, q)]
            for i in range(r):
                grid[off + i][s_off + i] = ring.one()
        comps[n] = Matrix(ring, trank, srank, grid)
    return ChainMap(src, tgt, comps)


def stalk_to_sections(cell: Cell, W: OpenCellSet, F: CellSheaf) -> ChainMap:
    """Canonical comparison F_cell -> sections(W) for W inside star(cell):
    generize onto every length-one chain."""
    cell = tuple(sorted(cell))
    for c in W.cells:
        if not set(cell) <= set(c):
            raise ValidationError("comparison needs W inside the star of the cell")
    stalk = F.stalk(cell)
    tgt = sections(W, F)
    basis = _section_basis(W, F)
    ring = F.ring
    comps = {}
    for n, tcomps in basis.items():
        toff, trank = _component_offsets(tcomps)
        srank = stalk.rank(n)
        if trank == 0 or srank == 0:
            continue
        grid = [[ring.zero()] * srank for _ in range(trank)]
        for (ch, q, r), off in zip(tcomps, toff):
            if len(ch) == 1 and q == n:
                g = F.gen(cell, ch[0]).component(q)
                for i in range(g.rows):
                    for j in range(g.cols):
                        grid[off + i][j] = g.entries[i][j]
        comps[n] = Matrix(ring, trank, srank, grid)
    return ChainMap(stalk, tgt, comps)


def sections_supported(Z, U: OpenCellSet, F: CellSheaf) -> ChainComplex:
    """Sections over U supported in the closed (within U) set Z = U - V:
    the fiber of the restriction sections(U) -> sections(V)."""
    zset = frozenset(tuple(sorted(c)) for c in Z)
    vcells = U.cells - zset
    if not zset <= U.cells:
        raise ValidationError("Z must consist of cells of U")
    try:
        V = OpenCellSet(U.complex, vcells)
    except ValidationError as exc:
        raise ValidationError("Z is not closed within U (complement is not coface-closed)") from exc
    return fiber(restriction_map(U, V, F))


def stalk_of_supported_sections(cell: Cell, W: OpenCellSet, F: CellSheaf) -> ChainComplex:
    """Stalk at the cell of the sections supported outside W: the fiber of
    F_cell -> sections(star(cell) n W).  Acyclic exactly when the
    propagation hypothesis holds at points of the cell."""
    cell = tuple(sorted(cell))
    trace = F.complex.star(cell).intersect(W)
    return fiber(stalk_to_sections(cell, trace, F))


# ---------------------------------------------------------------------------
# PL functions, sublevels, level carriers
# ---------------------------------------------------------------------------


class PLFunction:
    """Vertex values extended affinely over each simplex."""

    __slots__ = ("complex", "values")

    def __init__(self, complex_: SimplicialComplex, values) -> None:
        vals = tuple(Fraction(v) for v in values)
        if len(vals) != len(complex_.vertices):
            raise ValidationError("need one value per vertex")
        object.__setattr__(self, "complex", complex_)
        object.__setattr__(self, "values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("PLFunction is immutable")

    def critical_values(self) -> tuple[Fraction, ...]:
        return tuple(sorted(set(self.values)))

    def min_on(self, cell: Cell) -> Fraction:
        return min(self.values[v] for v in cell)

    def max_on(self, cell: Cell) -> Fraction:
        return max(self.values[v] for v in cell)


def sublevel(phi: PLFunction, s) -> OpenCellSet:
    """Cells meeting the open sublevel set {phi < s}: min over the closed
    cell strictly below s.  Coface-closed by construction and constant in s
    between critical values."""
    s = Fraction(s)
    return OpenCellSet(phi.complex, [c for c in phi.complex.simplices if phi.min_on(c) < s])


def z_set(phi: PLFunction, s) -> tuple[Cell, ...]:
    """Carrier cells of the level set {phi = s}: the cells whose relative
    interior meets it.  These are the obstruction-test cells between the
    sublevel at s and the sublevels just above; the result is a cell list,
    not necessarily face-closed (faces missing here carry no level points)."""
    s = Fraction(s)
    out = []
    for c in sorted(phi.complex.simplices, key=cell_key):
        lo, hi = phi.min_on(c), phi.max_on(c)
        if (lo < s < hi) or (lo == s == hi):
            out.append(c)
    return tuple(out)


# ---------------------------------------------------------------------------
# the deformation checker
# ---------------------------------------------------------------------------


@dataclass
class DeformationReport:
    critical_values: list
    samples: list
    hyp_union: dict
    hyp_compact: dict
    hyp_propagation: dict
    conclusion: dict
    z_sets: dict
    section_cohomology: dict
    hypotheses_pass: bool = False
    conclusion_pass: bool = False
    theorem_consistent: bool = True

    def to_dict(self) -> dict:
        return {
            "critical_values": self.critical_values,
            "samples": self.samples,
            "hypothesis_union": self.hyp_union,
            "hypothesis_compact_support": self.hyp_compact,
            "hypothesis_propagation": self.hyp_propagation,
            "conclusion": self.conclusion,
            "z_sets": self.z_sets,
            "section_cohomology": self.section_cohomology,
            "hypotheses_pass": self.hypotheses_pass,
            "conclusion_pass": self.conclusion_pass,
            "theorem_consistent": self.theorem_consistent,
        }


def deformation_samples(phi: PLFunction) -> tuple[Fraction, ...]:
    """Critical values, midpoints of the finite gaps, and one value above the
    top (whose sublevel is the whole union): verdicts are constant on the
    strata these samples represent."""
    crits = phi.critical_values()
    if not crits:
        return (Fraction(0),)
    samples = []
    for i, c in enumerate(crits):
        samples.append(c)
        if i + 1 < len(crits):
            samples.append((c + crits[i + 1]) / 2)
    samples.append(crits[-1] + 1)
    return tuple(samples)


def stratum_samples(phi: PLFunction) -> tuple[Fraction, ...]:
    """One parameter per stratum of the sublevel family, bottom to top."""
    crits = phi.critical_values()
    if not crits:
        return (Fraction(0),)
    return (crits[0] - 1,) + deformation_samples(phi)


def check_deformation(F: CellSheaf, phi: PLFunction) -> DeformationReport:
    """Full deformation check for the sublevel family of phi.

    Hypotheses: (union) the sublevel at each critical value equals the
    sublevel just below it; (compact support) automatic on a finite complex;
    (propagation) for every sampled pair s <= t and every carrier cell of the
    level set at s, the stalk of sections supported outside the sublevel at t
    is acyclic.  Conclusion, verified independently for every sampled pair:
    the restriction between section complexes is a quasi-isomorphism.  A
    report where all hypotheses pass and any conclusion fails is a defect.
    """
    if F.complex is not phi.complex:
        raise ValidationError("sheaf and function live on different complexes")
    crits = phi.critical_values()
    samples = deformation_samples(phi)

    sublevels = {s: sublevel(phi, s) for s in samples}
    distinct: dict[frozenset, ChainComplex] = {}
    for s in samples:
        key = sublevels[s].cells
        if key not in distinct:
            distinct[key] = sections(sublevels[s], F)

    hyp_union = {"ok": True, "entries": []}
    for i, c in enumerate(crits):
        below_rep = c - 1 if i == 0 else (crits[i - 1] + c) / 2
        same = sublevels[c].cells == sublevel(phi, below_rep).cells
        hyp_union["entries"].append({"at": rational_str(c), "equals_union_below": same})
        if not same:
            hyp_union["ok"] = False

    hyp_compact = {"ok": True, "note": "finite complex: closures of sublevel differences are compact"}

    zsets = {rational_str(s): [list(c) for c in z_set(phi, s)] for s in samples}
    hyp_prop = {"ok": True, "entries": [], "failures": []}
    datum_cache: dict[tuple[Cell, frozenset], bool] = {}
    for si, s in enumerate(samples):
        zcells = z_set(phi, s)
        if not zcells:
            continue
        for t in samples[si:]:
            U_t = sublevels[t]
            for cell in zcells:
                key = (cell, U_t.cells)
                if key not in datum_cache:
                    datum_cache[key] = stalk_of_supported_sections(cell, U_t, F).is_acyclic()
                ok = datum_cache[key]
                entry = {"s": rational_str(s), "t": rational_str(t),
                         "cell": list(cell), "acyclic": ok}
                hyp_prop["entries"].append(entry)
                if not ok:
                    hyp_prop["failures"].append(entry)
    hyp_prop["ok"] = not hyp_prop["failures"]

    conclusion = {"ok": True, "entries": [], "failures": []}
    pair_cache: dict[tuple[frozenset, frozenset], tuple[bool, int | None]] = {}
    for si, s in enumerate(samples):
        for t in samples[si:]:
            Us, Ut = sublevels[s], sublevels[t]
            if Us.cells == Ut.cells:
                ok, failing = True, None
            else:
                key = (Ut.cells, Us.cells)
                if key not in pair_cache:
                    res = is_quasi_iso(restriction_map(
                        Ut, Us, F, source=distinct[Ut.cells], target=distinct[Us.cells]))
                    pair_cache[key] = (res.ok, res.failing_degree)
                ok, failing = pair_cache[key]
            entry = {"s": rational_str(s), "t": rational_str(t), "quasi_iso": ok}
            if failing is not None:
                entry["failing_degree"] = failing
            conclusion["entries"].append(entry)
            if not ok:
                conclusion["failures"].append(entry)
    conclusion["ok"] = not conclusion["failures"]

    sec_cohom = {}
    for s in samples:
        cx = distinct[sublevels[s].cells]
        degs = sorted(set(cx.degrees))
        ranks = {}
        for j in degs:
            desc = cohomology(cx, j).value
            if not desc.is_trivial():
                ranks[str(j)] = desc.describe()
        sec_cohom[rational_str(s)] = ranks

    hyp_pass = hyp_union["ok"] and hyp_compact["ok"] and hyp_prop["ok"]
    return DeformationReport(
        critical_values=[rational_str(c) for c in crits],
        samples=[rational_str(s) for s in samples],
        hyp_union=hyp_union,
        hyp_compact=hyp_compact,
        hyp_propagation=hyp_prop,
        conclusion=conclusion,
        z_sets=zsets,
        section_cohomology=sec_cohom,
        hypotheses_pass=hyp_pass,
        conclusion_pass=conclusion["ok"],
        theorem_consistent=not (hyp_pass and not conclusion["ok"]),
    )


def sections_tower(F: CellSheaf, phi: PLFunction):
    """The sublevel family of section complexes assembled as a tame tower.

    Restriction maps are degreewise-surjective projections and the value at a
    critical parameter equals the value on the stratum just below it, so the
    levelwise hypotheses of the complex constancy criterion hold by
    construction; the cohomology colimit condition carries the content."""
    from .towers import ComplexesCat, TameTower

    crits = phi.critical_values()
    samples = stratum_samples(phi)
    pieces = []
    sets = []
    order = []
    for s in samples:
        order.append(s)
        sets.append(sublevel(phi, s))
        pieces.append(sections(sets[-1], F))
    down = []
    for i, c in enumerate(crits):
        idx = order.index(c)
        above = restriction_map(sets[idx + 1], sets[idx], F,
                                source=pieces[idx + 1], target=pieces[idx])
        below = restriction_map(sets[idx], sets[idx - 1], F,
                                source=pieces[idx], target=pieces[idx - 1])
        down.append((above, below))
    return TameTower(ComplexesCat, crits, pieces, down)
