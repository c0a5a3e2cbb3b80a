"""Shared builders: standard complexes and sheaves, randomized towers, maps,
and scenario payload serializers.

Randomness always flows through an explicit ``random.Random`` so every suite
is reproducible; random chain data is sampled from the exact solution space
of its defining constraints (kernel sampling), never patched afterwards.
"""

from __future__ import annotations

import random
from fractions import Fraction

from sheafcheck.exactalg import (
    ChainComplex,
    ChainMap,
    GF,
    Matrix,
    QQ,
    Ring,
    ZZ,
    direct_sum,
    inverse,
    is_invertible,
    kernel_basis,
    rational_str,
    summand_projection,
)
from sheafcheck.cellsheaf import CellSheaf, PLFunction, SimplicialComplex
from sheafcheck.towers import ComplexesCat, FinSet, SetMap, SetsCat, TameTower

RINGS = (QQ, GF(2), GF(5), ZZ)


def random_matrix(ring: Ring, rng: random.Random, rows: int, cols: int, bound: int = 3) -> Matrix:
    return Matrix(ring, rows, cols,
                  [[ring.canon(rng.randint(-bound, bound)) for _ in range(cols)]
                   for _ in range(rows)])


# ---------------------------------------------------------------------------
# random complexes and chain maps
# ---------------------------------------------------------------------------


def random_complex(ring: Ring, rng: random.Random, max_rank: int = 6,
                   degree_span: tuple[int, int] = (-3, 3), n_degrees: int = 3) -> ChainComplex:
    """Random complex with honest differentials: each next differential is
    sampled from the exact annihilator of the previous one."""
    lo, hi = degree_span
    start = rng.randint(lo, max(lo, hi - n_degrees + 1))
    degrees = list(range(start, start + n_degrees))
    ranks = {j: rng.randint(0, max_rank) for j in degrees}
    diffs: dict[int, Matrix] = {}
    prev: Matrix | None = None
    for j in degrees[:-1]:
        rows, cols = ranks.get(j + 1, 0), ranks.get(j, 0)
        if rows == 0 or cols == 0:
            prev = None
            continue
        if prev is None:
            m = random_matrix(ring, rng, rows, cols, bound=2)
        else:
            # rows of m must kill the image of prev: m = R @ K^T for
            # K a kernel basis of prev^T
            k = kernel_basis(prev.transpose())
            m = random_matrix(ring, rng, rows, k.cols, bound=2) @ k.transpose()
        diffs[j] = m
        prev = m
    return ChainComplex(ring, ranks, diffs)


def random_chain_map(rng: random.Random, source: ChainComplex, target: ChainComplex,
                     bound: int = 2) -> ChainMap:
    """A random chain map: a random exact point of the linear space of all
    degreewise matrices commuting with both differentials."""
    ring = source.ring
    degs = sorted(set(source.degrees) | set(target.degrees))
    slots = [(j, target.rank(j), source.rank(j)) for j in degs]
    offsets = {}
    total = 0
    for j, r, c in slots:
        offsets[j] = total
        total += r * c
    if total == 0:
        return ChainMap.zero(source, target)

    rows = []
    for j, _r, _c in slots:
        # constraint: f^{j+1} d_src^j - d_tgt^j f^j = 0, entrywise
        da, db = source.diff(j), target.diff(j)
        n_out, n_in = target.rank(j + 1), source.rank(j)
        for p in range(n_out):
            for q in range(n_in):
                row = [ring.zero()] * total
                for t in range(source.rank(j + 1)):
                    if da.entries[t][q] != ring.zero() and source.rank(j + 1) and target.rank(j + 1):
                        row[offsets.get(j + 1, 0) + p * source.rank(j + 1) + t] = da.entries[t][q]
                for t in range(target.rank(j)):
                    if db.entries[p][t] != ring.zero() and source.rank(j) and target.rank(j):
                        idx = offsets[j] + t * source.rank(j) + q
                        row[idx] = ring.sub(row[idx], db.entries[p][t])
                if any(v != ring.zero() for v in row):
                    rows.append(row)
    if rows:
        constraint = Matrix(ring, len(rows), total, rows)
        kb = kernel_basis(constraint)
    else:
        kb = Matrix.identity(ring, total)
    coeffs = Matrix(ring, kb.cols, 1, [[ring.canon(rng.randint(-bound, bound))] for _ in range(kb.cols)])
    vec = (kb @ coeffs).column_vector() if kb.cols else tuple(ring.zero() for _ in range(total))
    comps = {}
    for j, r, c in slots:
        if r and c:
            off = offsets[j]
            comps[j] = Matrix(ring, r, c,
                              [[vec[off + i * c + k] for k in range(c)] for i in range(r)])
    return ChainMap(source, target, comps)


def acyclic_complex(ring: Ring, rng: random.Random, degree: int, rank: int) -> ChainComplex:
    """cone(identity) on a free piece: acyclic with a levelwise-surjective
    projection off of it."""
    return ChainComplex(ring, {degree: rank, degree + 1: rank},
                        {degree: Matrix.identity(ring, rank)})


# ---------------------------------------------------------------------------
# tame towers of complexes
# ---------------------------------------------------------------------------


def recipe_tower(ring: Ring, rng: random.Random, n_crit: int = 2,
                 max_rank: int = 4) -> TameTower:
    """Hypothesis-satisfying tower: constant core, acyclic summands appearing
    above each critical value, projections as structure maps."""
    core = random_complex(ring, rng, max_rank=max_rank, n_degrees=3)
    crits = sorted(rng.sample(range(-3, 4), n_crit))
    pieces = []
    downs = []
    current = core
    for _ in range(n_crit):
        pieces.append(current)          # interval below the critical value
        pieces.append(current)          # at the critical value
        deg = rng.randint(-3, 2)
        pad = acyclic_complex(ring, rng, deg, rng.randint(1, 2))
        downs.append((summand_projection(current, pad), ChainMap.identity(current)))
        current = direct_sum(current, pad)
    pieces.append(current)              # top interval
    return TameTower(ComplexesCat, crits, pieces, downs)


def adversarial_tower(ring: Ring, rng: random.Random, which: str) -> TameTower:
    """A tower violating exactly one hypothesis of the complex constancy
    criterion: 'surjective', 'limit', or 'colimit'."""
    if which == "surjective":
        a = acyclic_complex(ring, rng, 0, 1)
        if ring.kind == "fp" and ring.p == 2:
            b = direct_sum(a, a)
            incl = ChainMap(a, b, {0: Matrix(ring, 2, 1, [[1], [0]]),
                                   1: Matrix(ring, 2, 1, [[1], [0]])})
            return TameTower(ComplexesCat, [0], [b, b, a], [(incl, ChainMap.identity(b))])
        two = ChainMap(a, a, {0: Matrix(ring, 1, 1, [[2]]), 1: Matrix(ring, 1, 1, [[2]])})
        return TameTower(ComplexesCat, [0], [a, a, a], [(two, ChainMap.identity(a))])
    if which == "limit":
        core = random_complex(ring, rng, max_rank=3, n_degrees=2)
        pad = acyclic_complex(ring, rng, 0, 1)
        big = direct_sum(core, pad)
        return TameTower(ComplexesCat, [0], [core, big, big],
                         [(ChainMap.identity(big), summand_projection(core, pad))])
    if which == "colimit":
        k = ChainComplex.concentrated(ring, 0, 1)
        zero = ChainComplex.zero(ring)
        return TameTower(ComplexesCat, [0], [zero, zero, k],
                         [(ChainMap.zero(k, zero), ChainMap.identity(zero))])
    raise ValueError(which)


# ---------------------------------------------------------------------------
# set towers
# ---------------------------------------------------------------------------


def random_set_tower(rng: random.Random, max_crit: int = 6, max_size: int = 8,
                     bias_constant: bool = False) -> TameTower:
    n_crit = rng.randint(1, max_crit)
    crits = sorted(rng.sample(range(-8, 9), n_crit))
    sizes = [rng.randint(1, max_size) for _ in range(2 * n_crit + 1)]
    if bias_constant:
        sizes = [sizes[0]] * len(sizes)
    pieces = [FinSet([f"e{i}" for i in range(s)]) for s in sizes]
    downs = []
    for i in range(n_crit):
        hi, at, lo = pieces[2 * i + 2], pieces[2 * i + 1], pieces[2 * i]
        downs.append((random_set_map(rng, hi, at, bijective=bias_constant),
                      random_set_map(rng, at, lo, bijective=bias_constant)))
    return TameTower(SetsCat, crits, pieces, downs)


def random_set_map(rng: random.Random, src: FinSet, tgt: FinSet, bijective: bool = False) -> SetMap:
    if bijective and len(src) == len(tgt):
        perm = list(tgt.elements)
        rng.shuffle(perm)
        return SetMap(src, tgt, dict(zip(src.elements, perm)))
    return SetMap(src, tgt, {e: rng.choice(tgt.elements) for e in src.elements})


def exhaustive_rho_bijective(t: TameTower) -> bool:
    """Independent oracle: compose structure maps as raw dictionaries and test
    bijectivity set-theoretically for every stratum pair."""
    for b in range(t.n_strata):
        for a in range(b + 1):
            mapping = {e: e for e in t.pieces[b].elements}
            for j in range(b, a, -1):
                step = t._step_down(j)
                mapping = {e: step.mapping[v] for e, v in mapping.items()}
            values = list(mapping.values())
            injective = len(set(values)) == len(values)
            surjective = set(values) == set(t.pieces[a].elements)
            if not (injective and surjective):
                return False
    return True


# ---------------------------------------------------------------------------
# simplicial complexes and sheaves
# ---------------------------------------------------------------------------


def standard_line() -> SimplicialComplex:
    return SimplicialComplex([[-1], [0], [1]], [[0], [1], [2], [0, 1], [1, 2]])


def segment_complex(n_vertices: int = 3) -> SimplicialComplex:
    verts = [[i] for i in range(n_vertices)]
    simplices = [[i] for i in range(n_vertices)] + [[i, i + 1] for i in range(n_vertices - 1)]
    return SimplicialComplex(verts, simplices)


_CIRCLES = {
    4: [[0, -1], [1, 0], [-1, 0], [0, 1]],
    6: [[0, -2], [1, -1], [1, 1], [0, 2], [-1, 1], [-1, -1]],
}


def polygon_circle(n: int = 4) -> SimplicialComplex:
    verts = _CIRCLES[n]
    if n == 4:
        edges = [[0, 1], [0, 2], [1, 3], [2, 3]]
    else:
        edges = [sorted([i, (i + 1) % n]) for i in range(n)]
    return SimplicialComplex(verts, [[i] for i in range(n)] + edges)


def triangle_disk() -> SimplicialComplex:
    """A single filled triangle (a 2-manifold with boundary)."""
    return SimplicialComplex([[0, 0], [2, 0], [0, 2]],
                             [[0], [1], [2], [0, 1], [0, 2], [1, 2], [0, 1, 2]])


def constant_sheaf(K: SimplicialComplex, ring: Ring, rank: int = 1, degree: int = 0) -> CellSheaf:
    stalk = ChainComplex.concentrated(ring, degree, rank)
    ident = Matrix.identity(ring, rank)
    stalks = {c: stalk for c in K.cells}
    gens = {(c, cf): ChainMap(stalk, stalk, {degree: ident})
            for c in K.cells for cf in K.cofacets(c)}
    return CellSheaf(K, ring, stalks, gens)


def skyscraper_sheaf(K: SimplicialComplex, ring: Ring, at, rank: int = 1, degree: int = 0) -> CellSheaf:
    at = tuple(sorted(at))
    stalk = ChainComplex.concentrated(ring, degree, rank)
    zero = ChainComplex.zero(ring)
    stalks = {c: (stalk if c == at else zero) for c in K.cells}
    gens = {(c, cf): ChainMap.zero(stalks[c], stalks[cf])
            for c in K.cells for cf in K.cofacets(c)}
    return CellSheaf(K, ring, stalks, gens)


def region_constant_sheaf(K: SimplicialComplex, ring: Ring, region,
                          degree: int = 0) -> CellSheaf:
    """Rank-1 constant on the given cells, zero outside, identity generization
    inside; valid for any region (mixed routes compose to zero)."""
    region = {tuple(sorted(c)) for c in region}
    stalk = ChainComplex.concentrated(ring, degree, 1)
    zero = ChainComplex.zero(ring)
    ident = Matrix.identity(ring, 1)
    stalks = {c: (stalk if c in region else zero) for c in K.cells}
    gens = {}
    for c in K.cells:
        for cf in K.cofacets(c):
            if c in region and cf in region:
                gens[(c, cf)] = ChainMap(stalk, stalk, {degree: ident})
            else:
                gens[(c, cf)] = ChainMap.zero(stalks[c], stalks[cf])
    return CellSheaf(K, ring, stalks, gens)


def open_ray_sheaf(K: SimplicialComplex, ring: Ring) -> CellSheaf:
    """On the standard line: constant on the open right edge only (the model
    of the constant sheaf on the open right interval, extended by zero)."""
    return region_constant_sheaf(K, ring, [(1, 2)])


def closed_ray_sheaf(K: SimplicialComplex, ring: Ring) -> CellSheaf:
    """On the standard line: constant on the closed right half [middle, end]."""
    return region_constant_sheaf(K, ring, [(1,), (1, 2), (2,)])


def random_invertible(ring: Ring, rng: random.Random, n: int) -> Matrix:
    if ring.kind == "z":
        m = Matrix.identity(ring, n)
        for _ in range(2 * n):
            i, j = rng.randrange(n), rng.randrange(n)
            if i == j:
                continue
            e = [[ring.one() if a == b else ring.zero() for b in range(n)] for a in range(n)]
            e[i][j] = ring.canon(rng.randint(-2, 2))
            m = m @ Matrix(ring, n, n, e)
        return m
    while True:
        m = random_matrix(ring, rng, n, n, bound=3)
        if is_invertible(m):
            return m


def local_system(K: SimplicialComplex, ring: Ring, rng: random.Random,
                 rank: int = 2, degree: int = 0) -> CellSheaf:
    """Twisted constant sheaf: per-cell change of basis; every generization
    map is invertible and functoriality holds by construction."""
    stalk = ChainComplex.concentrated(ring, degree, rank)
    twists = {c: random_invertible(ring, rng, rank) for c in K.cells}
    stalks = {c: stalk for c in K.cells}
    gens = {}
    for c in K.cells:
        for cf in K.cofacets(c):
            gens[(c, cf)] = ChainMap(stalk, stalk, {degree: twists[cf] @ inverse(twists[c])})
    return CellSheaf(K, ring, stalks, gens)


def sheaf_direct_sum(a: CellSheaf, b: CellSheaf) -> CellSheaf:
    K, ring = a.complex, a.ring
    stalks = {c: direct_sum(a.stalk(c), b.stalk(c)) for c in K.cells}
    gens = {}
    for c in K.cells:
        for cf in K.cofacets(c):
            src, tgt = stalks[c], stalks[cf]
            comps = {}
            for k in src.degrees:
                fa = a.generization[(c, cf)].component(k)
                fb = b.generization[(c, cf)].component(k)
                rows, cols = tgt.rank(k), src.rank(k)
                grid = [[ring.zero()] * cols for _ in range(rows)]
                for i in range(fa.rows):
                    for j in range(fa.cols):
                        grid[i][j] = fa.entries[i][j]
                for i in range(fb.rows):
                    for j in range(fb.cols):
                        grid[a.stalk(cf).rank(k) + i][a.stalk(c).rank(k) + j] = fb.entries[i][j]
                if rows and cols:
                    comps[k] = Matrix(ring, rows, cols, grid)
            gens[(c, cf)] = ChainMap(src, tgt, comps)
    return CellSheaf(K, ring, stalks, gens)


def random_1d_complex(rng: random.Random, max_vertices: int = 6) -> SimplicialComplex:
    if rng.random() < 0.35:
        return polygon_circle(rng.choice([4, 6]))
    n = rng.randint(3, max_vertices)
    verts = [[i, rng.randint(-2, 2)] for i in range(n)]
    simplices = [[i] for i in range(n)] + [[i, i + 1] for i in range(n - 1)]
    return SimplicialComplex(verts, simplices)


def random_sheaf(K: SimplicialComplex, ring: Ring, rng: random.Random) -> CellSheaf:
    choice = rng.random()
    if choice < 0.3:
        base = constant_sheaf(K, ring)
    elif choice < 0.5:
        base = skyscraper_sheaf(K, ring, rng.choice(list(K.cells)), degree=rng.randint(-1, 1))
    elif choice < 0.7:
        seed = rng.choice(list(K.cells))
        upset = [c for c in K.cells if set(seed) <= set(c)]
        base = region_constant_sheaf(K, ring, upset, degree=rng.randint(-1, 1))
    elif choice < 0.85:
        base = region_constant_sheaf(K, ring, K.closure([rng.choice(list(K.cells))]))
    else:
        base = local_system(K, ring, rng, rank=1 + rng.randint(0, 1))
    if rng.random() < 0.35:
        base = sheaf_direct_sum(
            base, skyscraper_sheaf(K, ring, rng.choice(list(K.cells)), degree=rng.randint(-1, 1)))
    return base


def random_pl_function(K: SimplicialComplex, rng: random.Random) -> PLFunction:
    return PLFunction(K, [Fraction(rng.randint(-3, 3)) for _ in K.vertices])


# ---------------------------------------------------------------------------
# serializers: domain objects -> scenario payloads
# ---------------------------------------------------------------------------


def ring_payload(ring: Ring) -> dict:
    if ring.kind == "fp":
        return {"kind": "fp", "p": ring.p}
    return {"kind": ring.kind}


def matrix_payload(m: Matrix) -> list:
    return [[m.ring.scalar_str(v) for v in row] for row in m.entries]


def complex_payload(c: ChainComplex) -> dict:
    return {
        "ranks": {str(k): c.rank(k) for k in c.degrees},
        "differentials": {str(k): matrix_payload(c.diff(k))
                          for k in c.degrees if not c.diff(k).is_zero()},
    }


def chain_map_payload(f: ChainMap) -> dict:
    comps = {}
    for k in set(f.source.degrees) | set(f.target.degrees):
        m = f.component(k)
        if not m.is_zero():
            comps[str(k)] = matrix_payload(m)
    return {"components": comps}


def complex_tower_payload(t: TameTower, degrees) -> dict:
    return {
        "critical_values": [rational_str(c) for c in t.critical_values],
        "pieces": [complex_payload(p) for p in t.pieces],
        "down_maps": [{"above": chain_map_payload(a), "below": chain_map_payload(b)}
                      for a, b in t.down_maps],
        "degrees": list(degrees),
    }


def set_tower_payload(t: TameTower) -> dict:
    return {
        "critical_values": [rational_str(c) for c in t.critical_values],
        "pieces": [{"elements": list(p.elements)} for p in t.pieces],
        "down_maps": [{"above": dict(a.mapping), "below": dict(b.mapping)}
                      for a, b in t.down_maps],
    }


def simplicial_payload(K: SimplicialComplex) -> dict:
    return {
        "vertices": [[rational_str(c) for c in v] for v in K.vertices],
        "simplices": [list(c) for c in K.cells],
    }


def sheaf_payload(F: CellSheaf) -> dict:
    stalks = [{"cell": list(c), "complex": complex_payload(F.stalk(c))}
              for c in F.complex.cells]
    gens = []
    for c in F.complex.cells:
        for cf in F.complex.cofacets(c):
            gens.append({"from": list(c), "to": list(cf),
                         "map": chain_map_payload(F.generization[(c, cf)])})
    return {"stalks": stalks, "generization": gens}


def scenario_dict(sid: str, kind: str, ring: Ring | None, payload: dict, expect=None) -> dict:
    out = {"schema_version": 1, "id": sid, "kind": kind, "payload": payload}
    if ring is not None:
        out["ring"] = ring_payload(ring)
    if expect is not None:
        out["expect"] = expect
    return out


def deformation_scenario(sid: str, F: CellSheaf, phi: PLFunction, expect=None) -> dict:
    return scenario_dict(sid, "deformation", F.ring, {
        "complex": simplicial_payload(F.complex),
        "sheaf": sheaf_payload(F),
        "phi": [rational_str(v) for v in phi.values],
    }, expect)


def microsupport_scenario(sid: str, F: CellSheaf, expect=None, include_boundary=False) -> dict:
    return scenario_dict(sid, "microsupport", F.ring, {
        "complex": simplicial_payload(F.complex),
        "sheaf": sheaf_payload(F),
        "include_boundary": include_boundary,
    }, expect)


def crosscheck_scenario(sid: str, F: CellSheaf, phi: PLFunction, expect=None) -> dict:
    return scenario_dict(sid, "crosscheck", F.ring, {
        "complex": simplicial_payload(F.complex),
        "sheaf": sheaf_payload(F),
        "phi": [rational_str(v) for v in phi.values],
    }, expect)
