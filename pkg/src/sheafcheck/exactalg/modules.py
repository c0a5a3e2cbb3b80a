"""Finitely generated modules given by cokernel presentations, and their homs.

A module over Q, F_p, or Z is the cokernel of its presentation matrix
(generators index the rows, relations the columns).  Over a field the
isomorphism class is a rank; over Z it is (free rank, invariant factors).
Homs are generator matrices checked to respect relations, with exact
surjectivity / injectivity / isomorphism tests, and submodules are generator
sets inside an ambient presented module with decidable membership.
"""

from __future__ import annotations

from .matrix import Matrix, elementary_divisors, kernel_basis, rank, solve
from .rings import Ring, ValidationError


class FgModule:
    __slots__ = ("ring", "presentation")

    def __init__(self, ring: Ring, presentation: Matrix) -> None:
        if presentation.ring != ring:
            raise ValidationError("presentation ring mismatch")
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "presentation", presentation)

    def __setattr__(self, name, value):
        raise AttributeError("FgModule is immutable")

    @staticmethod
    def free(ring: Ring, n: int) -> "FgModule":
        return FgModule(ring, Matrix.zeros(ring, n, 0))

    @staticmethod
    def cyclic(ring: Ring, order: int) -> "FgModule":
        """Z/order over Z (order 0 gives Z)."""
        if ring.kind != "z":
            raise ValidationError("cyclic torsion modules live over Z")
        if order == 0:
            return FgModule.free(ring, 1)
        return FgModule(ring, Matrix(ring, 1, 1, [[order]]))

    @property
    def ngens(self) -> int:
        return self.presentation.rows

    def invariants(self) -> tuple[int, tuple[int, ...]]:
        """(free rank, invariant factors > 1); over a field the factor list is empty."""
        if self.ring.is_field:
            return self.ngens - rank(self.presentation), ()
        divs = elementary_divisors(self.presentation)
        torsion = tuple(d for d in divs if d != 1)
        return self.ngens - len(divs), torsion

    def is_trivial(self) -> bool:
        free, torsion = self.invariants()
        return free == 0 and not torsion

    def iso_to(self, other: "FgModule") -> bool:
        return self.ring == other.ring and self.invariants() == other.invariants()

    def describe(self) -> str:
        free, torsion = self.invariants()
        if free == 0 and not torsion:
            return "0"
        parts = []
        if free:
            base = str(self.ring)
            parts.append(base if free == 1 else f"{base}^{free}")
        parts.extend(f"Z/{d}" for d in torsion)
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"FgModule({self.describe()})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FgModule)
            and self.ring == other.ring
            and self.presentation == other.presentation
        )

    def __hash__(self) -> int:
        return hash((self.ring, self.presentation))

    def element_in_relations(self, vec: Matrix) -> bool:
        """Does the column ``vec`` represent zero (lie in the relation span)?"""
        return solve(self.presentation, vec) is not None


class ModuleHom:
    """A hom of presented modules, as a matrix on generators."""

    __slots__ = ("source", "target", "matrix")

    def __init__(self, source: FgModule, target: FgModule, matrix: Matrix) -> None:
        if matrix.ring != source.ring or source.ring != target.ring:
            raise ValidationError("hom ring mismatch")
        if matrix.rows != target.ngens or matrix.cols != source.ngens:
            raise ValidationError("hom shape mismatch")
        moved = matrix @ source.presentation
        for j in range(moved.cols):
            if solve(target.presentation, moved.col(j)) is None:
                raise ValidationError("matrix does not respect the source relations")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("ModuleHom is immutable")

    @staticmethod
    def identity(module: FgModule) -> "ModuleHom":
        return ModuleHom(module, module, Matrix.identity(module.ring, module.ngens))

    def compose(self, inner: "ModuleHom") -> "ModuleHom":
        """self after inner."""
        if inner.target != self.source:
            raise ValidationError("composition mismatch")
        return ModuleHom(inner.source, self.target, self.matrix @ inner.matrix)

    def equal_to(self, other: "ModuleHom") -> bool:
        if self.matrix.rows != other.matrix.rows or self.matrix.cols != other.matrix.cols:
            return False
        diff = self.matrix - other.matrix
        return all(self.target.element_in_relations(diff.col(j)) for j in range(diff.cols))

    def is_surjective(self) -> bool:
        stacked = self.matrix.hstack(self.target.presentation)
        if self.source.ring.is_field:
            return rank(stacked) == self.target.ngens
        divs = elementary_divisors(stacked)
        return len(divs) == self.target.ngens and all(d == 1 for d in divs)

    def kernel(self) -> "Submodule":
        stacked = self.matrix.hstack(self.target.presentation)
        ker = kernel_basis(stacked)
        top = Matrix(self.matrix.ring, self.source.ngens, ker.cols,
                     [ker.entries[i] for i in range(self.source.ngens)])
        return Submodule(self.source, top)

    def is_injective(self) -> bool:
        ker = self.kernel()
        return all(
            self.source.element_in_relations(ker.generators.col(j))
            for j in range(ker.generators.cols)
        )

    def is_isomorphism(self) -> bool:
        return self.is_surjective() and self.is_injective()

    def image(self) -> "Submodule":
        return Submodule(self.target, self.matrix)


class Submodule:
    """A submodule of a presented module, given by generator columns."""

    __slots__ = ("ambient", "generators")

    def __init__(self, ambient: FgModule, generators: Matrix) -> None:
        if generators.rows != ambient.ngens or generators.ring != ambient.ring:
            raise ValidationError("submodule generator shape mismatch")
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "generators", generators)

    def __setattr__(self, name, value):
        raise AttributeError("Submodule is immutable")

    def _span(self) -> Matrix:
        return self.generators.hstack(self.ambient.presentation)

    def contains(self, vec: Matrix) -> bool:
        return solve(self._span(), vec) is not None

    def leq(self, other: "Submodule") -> bool:
        return all(other.contains(self.generators.col(j)) for j in range(self.generators.cols))

    def eq(self, other: "Submodule") -> bool:
        return self.leq(other) and other.leq(self)

    def as_module(self) -> FgModule:
        """The submodule as an abstract module on its generator columns."""
        span = self._span()
        ker = kernel_basis(span)
        k = self.generators.cols
        rel = Matrix(span.ring, k, ker.cols, [ker.entries[i] for i in range(k)])
        return FgModule(self.ambient.ring, rel)

    def map_by(self, hom: ModuleHom) -> "Submodule":
        return Submodule(hom.target, hom.matrix @ self.generators)
