"""Micro-support of cellular sheaves on combinatorial manifolds in R^n.

For each cell the conormal space is cut into rational polyhedral cones by
the hyperplanes dual to the star's vertex directions; the half-space trace
of a covector on the star, and hence the propagation test (the fiber of the
stalk against the sections of the negative half-star), is constant on each
cone.  A cone is in the micro-support when that test complex fails to be
acyclic at the cone's representative; tags are closed under the face
relation and the zero section carries the support tag.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .cellsheaf import (
    Cell,
    CellSheaf,
    OpenCellSet,
    PLFunction,
    SimplicialComplex,
    cell_key,
    stalk_of_supported_sections,
    stalk_to_sections,
    sublevel,
    z_set,
)
from .exactalg.complexes import ChainComplex, fiber
from .exactalg.matrix import Matrix, kernel_basis, solve
from .exactalg.rings import Ring, ValidationError, rational_str
from .fans import Cone, arrangement_cones, canonical_normal, primitive, sign_vector

_QQ = Ring("q")


class Covector:
    """A cotangent vector based at a cell: the direction must annihilate the
    cell's tangent space (lie in the conormal space)."""

    __slots__ = ("cell", "direction")

    def __init__(self, complex_: SimplicialComplex, cell, direction) -> None:
        cell = tuple(sorted(cell))
        direction = tuple(Fraction(d) for d in direction)
        base = complex_.vertices[cell[0]]
        for v in cell[1:]:
            tangent = [complex_.vertices[v][k] - base[k] for k in range(len(base))]
            if sum(t * d for t, d in zip(tangent, direction)) != 0:
                raise ValidationError("direction is not conormal to the cell")
        object.__setattr__(self, "cell", cell)
        object.__setattr__(self, "direction", direction)

    def __setattr__(self, name, value):
        raise AttributeError("Covector is immutable")


def conormal_space_basis(K: SimplicialComplex, cell: Cell) -> Matrix:
    """Columns spanning the conormal space of the cell (exact, deterministic)."""
    cell = tuple(sorted(cell))
    base = K.vertices[cell[0]]
    n = len(base)
    rows = [[K.vertices[v][k] - base[k] for k in range(n)] for v in cell[1:]]
    if not rows:
        return Matrix.identity(_QQ, n)
    return kernel_basis(Matrix.from_rows(_QQ, rows))


class ConormalFan:
    """The conormal space of a cell cut by the hyperplanes dual to the star's
    vertex directions, with one exact interior representative per cone."""

    __slots__ = ("complex", "base_cell", "normal_basis", "hyperplanes", "cones")

    def __init__(self, complex_, base_cell, normal_basis, hyperplanes, cones) -> None:
        object.__setattr__(self, "complex", complex_)
        object.__setattr__(self, "base_cell", base_cell)
        object.__setattr__(self, "normal_basis", normal_basis)
        object.__setattr__(self, "hyperplanes", hyperplanes)
        object.__setattr__(self, "cones", cones)

    def __setattr__(self, name, value):
        raise AttributeError("ConormalFan is immutable")

    @property
    def dim(self) -> int:
        return self.normal_basis.cols

    def ambient_representative(self, cone: Cone) -> tuple[int, ...]:
        n = self.normal_basis.rows
        if not cone.witness:
            return tuple(0 for _ in range(n))
        amb = self.normal_basis @ Matrix.column(_QQ, list(cone.witness))
        return primitive(amb.column_vector())

    def locate(self, direction) -> Cone:
        """The cone whose relative interior contains the conormal covector."""
        direction = tuple(Fraction(d) for d in direction)
        coords = solve(self.normal_basis, Matrix.column(_QQ, list(direction)))
        if coords is None or not (self.normal_basis @ coords ==
                                  Matrix.column(_QQ, list(direction))):
            raise ValidationError("covector is not conormal to the base cell")
        signs = sign_vector(self.hyperplanes, coords.column_vector())
        for cone in self.cones:
            if cone.signs == signs:
                return cone
        raise ValidationError("no cone carries the covector (internal error)")


def conormal_fan(K: SimplicialComplex, cell, include_boundary: bool = False) -> ConormalFan:
    """Exact conormal fan at an interior cell of a manifold-flagged complex."""
    cell = tuple(sorted(cell))
    flags = K.manifold_flags()
    if flags[cell] == "boundary" and not include_boundary:
        raise ValidationError(f"cell {cell} lies on the boundary; enable include_boundary for non-normative verdicts")
    basis = conormal_space_basis(K, cell)
    d = basis.cols
    base = K.vertices[cell[0]]
    star_vertices = sorted({v for c in K.star(cell).cells for v in c if v not in cell})
    normals = []
    for w in star_vertices:
        vec = [K.vertices[w][k] - base[k] for k in range(len(base))]
        row = Matrix(_QQ, 1, len(vec), [vec]) @ basis
        canon = canonical_normal(row.entries[0]) if d else None
        if canon is not None:
            normals.append(canon)
    normals = sorted(set(normals))
    cones = arrangement_cones(normals, d)
    return ConormalFan(K, cell, basis, tuple(normals), cones)


def half_space_trace(K: SimplicialComplex, cell: Cell, direction) -> OpenCellSet:
    """Cells of the star meeting the open negative half-space of the covector."""
    cell = tuple(sorted(cell))
    direction = tuple(Fraction(d) for d in direction)
    base = K.vertices[cell[0]]

    def ell(v: int) -> Fraction:
        return sum((K.vertices[v][k] - base[k]) * direction[k] for k in range(len(base)))

    star = K.star(cell)
    return OpenCellSet(K, [c for c in star.cells if min(ell(v) for v in c) < 0])


def morse_datum(F: CellSheaf, cell, xi, include_boundary: bool = False) -> ChainComplex:
    """The local propagation test for a conormal covector at a cell: the fiber
    of the stalk against the sections of the star's negative half-space
    trace.  Acyclic exactly when the covector is non-characteristic there."""
    cell = tuple(sorted(cell))
    if isinstance(xi, Covector):
        if xi.cell != cell:
            raise ValidationError("covector is based at a different cell")
        direction = xi.direction
    else:
        direction = Covector(F.complex, cell, xi).direction
    flags = F.complex.manifold_flags()
    if flags[cell] == "boundary" and not include_boundary:
        raise ValidationError(f"cell {cell} lies on the boundary; enable include_boundary for non-normative verdicts")
    trace = half_space_trace(F.complex, cell, direction)
    return fiber(stalk_to_sections(cell, trace, F))


@dataclass
class MicroSupportReport:
    entries: list = field(default_factory=list)

    def entry_for(self, cell) -> dict:
        cell = list(tuple(sorted(cell)))
        for e in self.entries:
            if e["cell"] == cell:
                return e
        raise KeyError(cell)

    def to_dict(self) -> dict:
        return {"entries": self.entries}


def micro_support(F: CellSheaf, include_boundary: bool = False) -> MicroSupportReport:
    """Tag every conormal cone at every interior cell as in or out of the
    micro-support, with the zero-section tag carrying membership in the
    support.  Raw verdicts come from the propagation test at each cone's
    representative; the final tags are closed under the cone face relation
    (a cone inherits membership from any cone whose closure contains it)."""
    K = F.complex
    flags = K.manifold_flags()
    supp = set(F.support())
    entries = []
    for cell in K.cells:
        interior = flags[cell] == "interior"
        if not interior and not include_boundary:
            continue
        fan = conormal_fan(K, cell, include_boundary=include_boundary)
        raw: dict[tuple[int, ...], bool] = {}
        reps: dict[tuple[int, ...], tuple[int, ...]] = {}
        nonzero_cones = [c for c in fan.cones if not c.is_zero_cone]
        for cone in nonzero_cones:
            rep = fan.ambient_representative(cone)
            datum = morse_datum(F, cell, rep, include_boundary=include_boundary)
            raw[cone.signs] = not datum.is_acyclic()
            reps[cone.signs] = rep
        closed: dict[tuple[int, ...], bool] = {}
        for cone in nonzero_cones:
            closed[cone.signs] = raw[cone.signs] or any(
                raw[other.signs]
                for other in nonzero_cones
                if other.signs != cone.signs and cone.face_leq(other)
            )
        cone_entries = [
            {
                "signs": list(cone.signs),
                "representative": list(reps[cone.signs]),
                "raw_in_ss": raw[cone.signs],
                "in_ss": closed[cone.signs],
            }
            for cone in nonzero_cones
        ]
        entries.append({
            "cell": list(cell),
            "interior": interior,
            "non_normative": not interior,
            "in_support": cell in supp,
            "cones": cone_entries,
        })
    return MicroSupportReport(entries)


@dataclass
class CrosscheckReport:
    entries: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    disagreements: int = 0
    ok: bool = True

    def to_dict(self) -> dict:
        return {
            "entries": self.entries,
            "skipped": self.skipped,
            "disagreements": self.disagreements,
            "ok": self.ok,
        }


def crosscheck_noncharacteristic(F: CellSheaf, phi: PLFunction) -> CrosscheckReport:
    """Cross-validate the two obstruction pipelines.

    At every critical value s and every level-carrier cell where the function
    is affine on the star and constant on the cell, the covector given by the
    function's differential is located in the conormal fan; the propagation
    verdict at the cone's representative must agree with the direct verdict
    of the supported-sections stalk at the diagonal pair (s, s).  Any
    disagreement is a defect."""
    K = F.complex
    flags = K.manifold_flags()
    report = CrosscheckReport()
    fans: dict[Cell, ConormalFan] = {}
    for s in phi.critical_values():
        U_s = sublevel(phi, s)
        for cell in z_set(phi, s):
            label = {"cell": list(cell), "at": rational_str(s)}
            if phi.min_on(cell) != phi.max_on(cell):
                report.skipped.append({**label, "reason": "differential not conormal (function not constant on cell)"})
                continue
            if flags[cell] != "interior":
                report.skipped.append({**label, "reason": "boundary cell"})
                continue
            base = K.vertices[cell[0]]
            star_vertices = sorted({v for c in K.star(cell).cells for v in c})
            rows = [[K.vertices[w][k] - base[k] for k in range(len(base))] for w in star_vertices]
            rhs = [[phi.values[w] - s] for w in star_vertices]
            sol = solve(Matrix.from_rows(_QQ, rows), Matrix(_QQ, len(rhs), 1, rhs))
            if sol is None:
                report.skipped.append({**label, "reason": "function is not affine on the star"})
                continue
            xi = sol.column_vector()
            fan = fans.get(cell)
            if fan is None:
                fan = conormal_fan(K, cell)
                fans[cell] = fan
            cone = fan.locate(xi)
            rep = fan.ambient_representative(cone)
            raw = not morse_datum(F, cell, rep).is_acyclic()
            direct = not stalk_of_supported_sections(cell, U_s, F).is_acyclic()
            entry = {
                **label,
                "covector": [rational_str(x) for x in xi],
                "cone_signs": list(cone.signs),
                "fan_verdict_in_ss": raw,
                "direct_obstruction": direct,
                "agree": raw == direct,
            }
            report.entries.append(entry)
            if not entry["agree"]:
                report.disagreements += 1
    report.ok = report.disagreements == 0
    return report
