"""Independent verification routes used by the test suite only.

These deliberately avoid the production code paths they check: sections are
recomputed through a Cech complex on the cover by minimal-cell stars (the
classical cellular cochain complex when the open set is everything), and
long-exact-sequence exactness is decided by subgroup equality inside
presented modules.
"""

from __future__ import annotations

from itertools import combinations

from sheafcheck.cellsheaf import CellSheaf, OpenCellSet, cell_key
from sheafcheck.exactalg import (
    ChainComplex,
    ChainMap,
    Matrix,
    ModuleHom,
    cohomology,
    cohomology_invariants,
    fiber,
    fiber_connecting,
    fiber_projection,
    induced_hom,
)


def cech_star_sections(U: OpenCellSet, F: CellSheaf) -> ChainComplex:
    """Sections over U via the cover by stars of minimal cells.

    Every intersection of covering stars is the star of the join cell, whose
    sections are the stalk there, so the Cech complex of the cover computes
    the derived sections.  For U = all cells this is exactly the classical
    cellular cochain complex with incidence signs from the vertex order.
    """
    ring = F.ring
    cells = U.sorted_cells()
    mins = [c for c in cells if not any(set(f) < set(c) for f in cells)]

    def join(subset):
        out = set()
        for m in subset:
            out |= set(m)
        cell = tuple(sorted(out))
        return cell if cell in F.complex.simplices else None

    components = []  # (subset index tuple, join cell)
    for p in range(len(mins)):
        for subset in combinations(range(len(mins)), p + 1):
            j = join([mins[i] for i in subset])
            if j is not None:
                components.append((subset, j))

    basis: dict[int, list[tuple[tuple, tuple, int, int]]] = {}
    for subset, jcell in components:
        p = len(subset) - 1
        stalk = F.stalk(jcell)
        for q in stalk.degrees:
            basis.setdefault(p + q, []).append((subset, jcell, q, stalk.rank(q)))
    for n in basis:
        basis[n].sort(key=lambda it: (len(it[0]), it[0], it[2]))

    def offsets(comps):
        offs, total = [], 0
        for _s, _j, _q, r in comps:
            offs.append(total)
            total += r
        return offs, total

    ranks = {n: offsets(comps)[1] for n, comps in basis.items()}
    diffs = {}
    for n, comps in sorted(basis.items()):
        tgt = basis.get(n + 1, [])
        toffs, trank = offsets(tgt)
        soffs, srank = offsets(comps)
        if trank == 0 or srank == 0:
            continue
        tindex = {(s, q): off for (s, _j, q, _r), off in zip(tgt, toffs)}
        tcell = {(s, q): j for (s, j, q, _r) in tgt}
        grid = [[ring.zero()] * srank for _ in range(trank)]
        for (subset, jcell, q, r), off in zip(comps, soffs):
            p = len(subset) - 1
            stalk = F.stalk(jcell)
            d = stalk.diff(q)
            key = (subset, q + 1)
            if key in tindex and d.rows:
                sign = 1 if p % 2 == 0 else -1
                for i in range(d.rows):
                    for jj in range(d.cols):
                        v = d.entries[i][jj]
                        grid[tindex[key] + i][off + jj] = v if sign == 1 else ring.neg(v)
            for m in range(len(mins)):
                if m in subset:
                    continue
                bigger = tuple(sorted(subset + (m,)))
                key = (bigger, q)
                if key not in tindex:
                    continue
                pos = bigger.index(m)
                sign = 1 if pos % 2 == 0 else -1
                g = F.gen(jcell, tcell[key]).component(q)
                for i in range(g.rows):
                    for jj in range(g.cols):
                        v = g.entries[i][jj]
                        grid[tindex[key] + i][off + jj] = ring.add(
                            grid[tindex[key] + i][off + jj],
                            v if sign == 1 else ring.neg(v))
        diffs[n] = Matrix(ring, trank, srank, grid)
    return ChainComplex(ring, ranks, diffs)


def sections_invariants_agree(U: OpenCellSet, F: CellSheaf, production: ChainComplex) -> bool:
    oracle = cech_star_sections(U, F)
    degrees = set(production.degrees) | set(oracle.degrees)
    return all(
        cohomology_invariants(production, j) == cohomology_invariants(oracle, j)
        for j in degrees
    )


def hom_sequence_exact(homs) -> bool:
    """Exactness of a composable run of module homs at every interior node:
    image of each arrow equals the kernel of the next."""
    for f, g in zip(homs, homs[1:]):
        if not g.compose(f).equal_to(ModuleHom(f.source, g.target,
                                               Matrix.zeros(f.matrix.ring, g.target.ngens, f.source.ngens))):
            return False
        if not f.image().eq(g.kernel()):
            return False
    return True


def fiber_les_homs(f: ChainMap, degrees) -> list[ModuleHom]:
    """The long exact sequence of fiber(f) as a run of module homs:
    ... -> H^j(fib) -> H^j(A) -> H^j(B) -> H^{j+1}(fib) -> ..."""
    fib = fiber(f)
    proj = fiber_projection(f)
    degrees = sorted(degrees)
    groups = {}
    for j in range(degrees[0] - 1, degrees[-1] + 2):
        groups[("fib", j)] = cohomology(fib, j)
        groups[("a", j)] = cohomology(f.source, j)
        groups[("b", j)] = cohomology(f.target, j)
    homs = []
    for j in range(degrees[0], degrees[-1] + 1):
        homs.append(induced_hom(proj, j, groups[("fib", j)], groups[("a", j)]))
        homs.append(induced_hom(f, j, groups[("a", j)], groups[("b", j)]))
        delta = fiber_connecting(f, j, groups[("b", j)], groups[("fib", j + 1)])
        homs.append(ModuleHom(groups[("b", j)].value, groups[("fib", j + 1)].value, delta))
    return homs
