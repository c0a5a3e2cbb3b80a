"""Scenario files: schema validation, dispatch to checkers, canonical reports.

A scenario is a JSON document with a mandatory ``schema_version``, an ``id``,
a ``kind``, a per-kind ``payload``, and an optional ``expect`` block that the
produced report must match (making the corpus self-testing).  All scalar
numerics (matrix entries, coordinates, function values, critical parameters)
are exact rationals written as strings ``"n"`` or ``"num/den"``; floats are
rejected anywhere in the file.  Reports are emitted canonically: sorted keys,
rationals as strings, cells as sorted vertex lists, no environment data, so
the same input yields byte-identical output on every run.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .exactalg.complexes import ChainComplex, ChainMap
from .exactalg.matrix import Matrix
from .exactalg.modules import FgModule, ModuleHom
from .exactalg.rings import Ring, ValidationError, parse_rational, rational_str
from .cellsheaf import (
    CellSheaf,
    PLFunction,
    SimplicialComplex,
    check_deformation,
)
from .microsupport import crosscheck_noncharacteristic, micro_support
from .towers import (
    FinGroup,
    FinSet,
    GroupHom,
    GroupsCat,
    LimitWitness,
    ModulesCat,
    NTower,
    PointedFinSet,
    PointedSetsCat,
    SetMap,
    SetsCat,
    TameTower,
    ComplexesCat,
    HomotopyShadow,
    check_constant_complexes,
    check_constant_sets,
    check_homotopy_shadow,
    is_mittag_leffler,
    milnor_check,
)

SCHEMA_VERSION = 1

KINDS = (
    "tower-sets",
    "tower-complexes",
    "tower-ml",
    "homotopy-shadow",
    "deformation",
    "microsupport",
    "crosscheck",
)

STATUS_OK = "ok"
STATUS_HYP = "hypothesis-failure"
STATUS_VIOLATION = "theorem-violation"

SEV_OK = 0
SEV_EXPECT = 2
SEV_VIOLATION = 3
SEV_ERROR = 4


class SchemaError(ValidationError):
    """The scenario file does not validate against the schema."""


def _reject_float(_value):
    raise SchemaError("floating point numerals are not accepted in scenario files")


def parse_scenario_text(text: str) -> "Scenario":
    try:
        raw = json.loads(text, parse_float=_reject_float, parse_constant=_reject_float)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    return Scenario(raw)


class Scenario:
    __slots__ = ("raw", "id", "kind", "expect")

    def __init__(self, raw) -> None:
        if not isinstance(raw, dict):
            raise SchemaError("scenario must be a JSON object")
        if raw.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError(f"schema_version must be {SCHEMA_VERSION}")
        sid = raw.get("id")
        if not isinstance(sid, str) or not sid:
            raise SchemaError("scenario needs a nonempty string id")
        kind = raw.get("kind")
        if kind not in KINDS:
            raise SchemaError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
        if "payload" not in raw or not isinstance(raw["payload"], dict):
            raise SchemaError("scenario needs a payload object")
        expect = raw.get("expect")
        if expect is not None and not isinstance(expect, dict):
            raise SchemaError("expect block must be an object")
        self.raw = raw
        self.id = sid
        self.kind = kind
        self.expect = expect

    def canonical(self) -> dict:
        return _canonical_value(self.raw)


def _canonical_value(v):
    if isinstance(v, dict):
        return {k: _canonical_value(v[k]) for k in sorted(v)}
    if isinstance(v, list):
        return [_canonical_value(x) for x in v]
    if isinstance(v, str):
        try:
            return rational_str(parse_rational(v))
        except (ValueError, ZeroDivisionError):
            return v
    return v


def emit_scenario(s: Scenario) -> bytes:
    return (json.dumps(s.canonical(), sort_keys=True, indent=2) + "\n").encode()


# ---------------------------------------------------------------------------
# payload builders
# ---------------------------------------------------------------------------


def _rat(v, what: str) -> Fraction:
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise SchemaError(f"{what} must be an exact rational string or integer")
    try:
        return parse_rational(str(v))
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{what}: bad rational {v!r}") from exc


def _build_ring(spec, default=None) -> Ring:
    if spec is None:
        if default is not None:
            return default
        raise SchemaError("missing ring")
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SchemaError("ring must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "fp":
        return Ring("fp", int(spec.get("p", 0)))
    if kind in ("q", "z"):
        return Ring(kind)
    raise SchemaError(f"unknown ring kind {kind!r}")


def ring_from_flag(flag: str) -> Ring:
    if flag == "q":
        return Ring("q")
    if flag == "z":
        return Ring("z")
    if flag.startswith("fp:"):
        return Ring("fp", int(flag.split(":", 1)[1]))
    raise SchemaError(f"bad ring flag {flag!r}: expected q, z, or fp:<p>")


def _build_matrix(ring: Ring, rows, what: str, shape=None) -> Matrix:
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise SchemaError(f"{what} must be a list of rows")
    entries = [[_rat(v, what) for v in row] for row in rows]
    nrows = len(entries)
    ncols = len(entries[0]) if entries else (shape[1] if shape else 0)
    if shape is not None:
        nrows, ncols = shape
        if not entries and ncols == 0:
            entries = [[] for _ in range(nrows)]
        if len(entries) != nrows or any(len(r) != ncols for r in entries):
            raise SchemaError(f"{what} must have shape {nrows}x{ncols}")
    return Matrix(ring, nrows, ncols, entries)


def _build_complex(ring: Ring, spec, what: str) -> ChainComplex:
    if not isinstance(spec, dict):
        raise SchemaError(f"{what} must be an object")
    ranks = {int(k): int(v) for k, v in (spec.get("ranks") or {}).items()}
    diffs = {}
    for k, rows in (spec.get("differentials") or {}).items():
        k = int(k)
        diffs[k] = _build_matrix(ring, rows, f"{what} differential {k}",
                                 shape=(ranks.get(k + 1, 0), ranks.get(k, 0)))
    try:
        return ChainComplex(ring, ranks, diffs)
    except ValidationError as exc:
        raise SchemaError(f"{what}: {exc}") from exc


def _build_chain_map(source: ChainComplex, target: ChainComplex, spec, what: str) -> ChainMap:
    comps = {}
    for k, rows in (spec.get("components") or {}).items():
        k = int(k)
        comps[k] = _build_matrix(source.ring, rows, f"{what} component {k}",
                                 shape=(target.rank(k), source.rank(k)))
    try:
        return ChainMap(source, target, comps)
    except ValidationError as exc:
        raise SchemaError(f"{what}: {exc}") from exc


def _build_module(ring: Ring, spec, what: str) -> FgModule:
    gens = int(spec.get("generators", 0))
    rel = spec.get("relations") or []
    ncols = len(rel[0]) if rel else 0
    mat = _build_matrix(ring, rel, f"{what} relations", shape=(gens, ncols))
    return FgModule(ring, mat)


def _build_module_hom(src: FgModule, tgt: FgModule, rows, what: str) -> ModuleHom:
    mat = _build_matrix(src.ring, rows, what, shape=(tgt.ngens, src.ngens))
    try:
        return ModuleHom(src, tgt, mat)
    except ValidationError as exc:
        raise SchemaError(f"{what}: {exc}") from exc


def _build_finset(spec, what: str):
    if "base" in spec:
        return PointedFinSet(spec.get("elements") or [], spec["base"])
    return FinSet(spec.get("elements") or [])


def _build_setmap(src, tgt, mapping, what: str) -> SetMap:
    try:
        return SetMap(src, tgt, mapping or {})
    except ValidationError as exc:
        raise SchemaError(f"{what}: {exc}") from exc


def _build_group(spec, what: str) -> FinGroup:
    table = spec.get("table") or {}
    flat = {}
    for a, row in table.items():
        for b, c in row.items():
            flat[(a, b)] = c
    try:
        return FinGroup(spec.get("elements") or [], flat)
    except ValidationError as exc:
        raise SchemaError(f"{what}: {exc}") from exc


def _build_simplicial(spec, what: str) -> SimplicialComplex:
    verts = [[_rat(c, f"{what} vertex coordinate") for c in v] for v in spec.get("vertices") or []]
    try:
        return SimplicialComplex(verts, spec.get("simplices") or [])
    except ValidationError as exc:
        raise SchemaError(f"{what}: {exc}") from exc


def _build_sheaf(K: SimplicialComplex, ring: Ring, spec, what: str) -> CellSheaf:
    stalks = {}
    for item in spec.get("stalks") or []:
        cell = tuple(sorted(int(v) for v in item["cell"]))
        stalks[cell] = _build_complex(ring, item.get("complex") or {}, f"{what} stalk {cell}")
    gens = {}
    for item in spec.get("generization") or []:
        a = tuple(sorted(int(v) for v in item["from"]))
        b = tuple(sorted(int(v) for v in item["to"]))
        if a not in stalks or b not in stalks:
            raise SchemaError(f"{what}: generization references missing stalk {a} or {b}")
        gens[(a, b)] = _build_chain_map(stalks[a], stalks[b], item.get("map") or {},
                                        f"{what} generization {a}->{b}")
    try:
        return CellSheaf(K, ring, stalks, gens)
    except ValidationError as exc:
        raise SchemaError(f"{what}: {exc}") from exc


def _build_tower_sets(payload) -> TameTower:
    crits = [_rat(c, "critical value") for c in payload.get("critical_values") or []]
    pieces = [_build_finset(p, "tower piece") for p in payload.get("pieces") or []]
    downs = []
    for i, dm in enumerate(payload.get("down_maps") or []):
        hi, at, lo = 2 * i + 2, 2 * i + 1, 2 * i
        if hi >= len(pieces):
            raise SchemaError("down_maps do not match the critical values")
        above = _build_setmap(pieces[hi], pieces[at], dm.get("above"), f"above map {i}")
        below = _build_setmap(pieces[at], pieces[lo], dm.get("below"), f"below map {i}")
        downs.append((above, below))
    cat = PointedSetsCat if pieces and isinstance(pieces[0], PointedFinSet) else SetsCat
    try:
        return TameTower(cat, crits, pieces, downs)
    except ValidationError as exc:
        raise SchemaError(str(exc)) from exc


def _build_tower_complexes(payload, ring: Ring) -> TameTower:
    crits = [_rat(c, "critical value") for c in payload.get("critical_values") or []]
    pieces = [_build_complex(ring, p, f"tower piece {i}") for i, p in enumerate(payload.get("pieces") or [])]
    downs = []
    for i, dm in enumerate(payload.get("down_maps") or []):
        hi, at, lo = 2 * i + 2, 2 * i + 1, 2 * i
        above = _build_chain_map(pieces[hi], pieces[at], dm.get("above") or {}, f"above map {i}")
        below = _build_chain_map(pieces[at], pieces[lo], dm.get("below") or {}, f"below map {i}")
        downs.append((above, below))
    try:
        return TameTower(ComplexesCat, crits, pieces, downs)
    except ValidationError as exc:
        raise SchemaError(str(exc)) from exc


def _build_ntower_modules(payload, ring: Ring) -> NTower:
    stages = [_build_module(ring, m, f"stage {i}") for i, m in enumerate(payload.get("stages") or [])]
    maps = []
    for i, rows in enumerate(payload.get("maps") or []):
        maps.append(_build_module_hom(stages[i + 1], stages[i], rows, f"map {i}"))
    tail = _build_module_hom(stages[-1], stages[-1], payload.get("tail") or [], "tail endomorphism")
    try:
        return NTower(ModulesCat, stages, maps, tail)
    except ValidationError as exc:
        raise SchemaError(str(exc)) from exc


def _build_shadow(payload) -> HomotopyShadow:
    crits = [_rat(c, "critical value") for c in payload.get("critical_values") or []]
    n_max = int(payload.get("n_max", 0))
    towers = {}
    witnesses = {}
    for block in payload.get("degrees") or []:
        n = int(block["n"])
        kind = block.get("kind")
        pieces_spec = block.get("pieces") or []
        downs_spec = block.get("down_maps") or []
        wit_spec = block.get("witnesses") or []
        if kind == "pointed-sets":
            pieces = [_build_finset(p, f"degree {n} piece") for p in pieces_spec]
            cat = PointedSetsCat
            mk_map = lambda s, t, m, w: _build_setmap(s, t, m, w)
            mk_obj = lambda spec: _build_finset(spec, f"degree {n} witness")
        elif kind == "groups":
            pieces = [_build_group(p, f"degree {n} piece") for p in pieces_spec]
            cat = GroupsCat
            mk_map = lambda s, t, m, w: GroupHom(s, t, m or {})
            mk_obj = lambda spec: _build_group(spec, f"degree {n} witness")
        elif kind == "modules":
            ring = Ring("z")
            pieces = [_build_module(ring, p, f"degree {n} piece") for p in pieces_spec]
            cat = ModulesCat
            mk_map = lambda s, t, m, w: _build_module_hom(s, t, m or [], w)
            mk_obj = lambda spec: _build_module(Ring("z"), spec, f"degree {n} witness")
        else:
            raise SchemaError(f"degree {n}: unknown stage kind {kind!r}")
        downs = []
        for i, dm in enumerate(downs_spec):
            hi, at, lo = 2 * i + 2, 2 * i + 1, 2 * i
            above = mk_map(pieces[hi], pieces[at], dm.get("above"), f"degree {n} above map {i}")
            below = mk_map(pieces[at], pieces[lo], dm.get("below"), f"degree {n} below map {i}")
            downs.append((above, below))
        towers[n] = TameTower(cat, crits, pieces, downs)
        for i, w in enumerate(wit_spec):
            value = mk_obj(w.get("value") or {})
            frm = mk_map(pieces[2 * i + 1], value, w.get("from_stage"), f"degree {n} witness-from {i}")
            to = mk_map(value, pieces[2 * i], w.get("to_limit"), f"degree {n} witness-to {i}")
            witnesses[(n, i)] = LimitWitness(value, frm, to)
    return HomotopyShadow(n_max, towers, witnesses)


# ---------------------------------------------------------------------------
# running and reporting
# ---------------------------------------------------------------------------


def _expect_mismatches(expect, actual, path="") -> list[str]:
    out = []
    if isinstance(expect, dict):
        if not isinstance(actual, dict):
            return [f"{path or '.'}: expected object"]
        for k, v in expect.items():
            if k not in actual:
                out.append(f"{path}/{k}: missing")
            else:
                out.extend(_expect_mismatches(v, actual[k], f"{path}/{k}"))
        return out
    if isinstance(expect, list):
        if not isinstance(actual, list) or len(actual) != len(expect):
            return [f"{path}: expected list of length {len(expect)}"]
        for i, (e, a) in enumerate(zip(expect, actual)):
            out.extend(_expect_mismatches(e, a, f"{path}[{i}]"))
        return out
    if expect != actual:
        out.append(f"{path}: expected {expect!r}, got {actual!r}")
    return out


def run_scenario(s: Scenario, strict_hypotheses: bool = False,
                 default_ring: Ring | None = None) -> tuple[dict, int]:
    """Execute one scenario; returns (report dict, severity).

    Severity: 0 consistent, 2 expectation mismatch or (--strict-hypotheses)
    hypothesis failure, 3 theorem violation, 4 schema/precondition error.
    """
    report = {"scenario": s.id, "kind": s.kind, "schema_version": SCHEMA_VERSION}
    try:
        verdicts, status = _dispatch(s, default_ring)
    except (SchemaError, ValidationError) as exc:
        report["status"] = "error"
        report["error"] = str(exc)
        return report, SEV_ERROR
    report["verdicts"] = verdicts
    report["status"] = status
    severity = SEV_OK
    if status == STATUS_VIOLATION:
        severity = SEV_VIOLATION
    elif status == STATUS_HYP and strict_hypotheses:
        severity = SEV_EXPECT
    if s.expect is not None:
        mism = _expect_mismatches(s.expect, verdicts)
        report["expectation"] = {"met": not mism, "mismatches": mism}
        if mism:
            severity = max(severity, SEV_EXPECT)
    return report, severity


def _dispatch(s: Scenario, default_ring: Ring | None) -> tuple[dict, str]:
    payload = s.raw["payload"]
    ring_spec = s.raw.get("ring")

    if s.kind == "tower-sets":
        rep = check_constant_sets(_build_tower_sets(payload))
        verdicts = rep.to_dict()
        if rep.criterion_satisfied:
            status = STATUS_OK if rep.all_structure_maps_bijective else STATUS_VIOLATION
        else:
            status = STATUS_HYP
        return verdicts, status

    if s.kind == "tower-complexes":
        ring = _build_ring(ring_spec, default_ring)
        tower = _build_tower_complexes(payload, ring)
        degrees = [int(j) for j in payload.get("degrees") or [0]]
        rep = check_constant_complexes(tower, degrees)
        verdicts = rep.to_dict()
        for n in payload.get("milnor_degrees") or []:
            verdicts.setdefault("milnor", {})[str(n)] = milnor_check(tower, int(n)).to_dict()
        if not rep.theorem_consistent:
            return verdicts, STATUS_VIOLATION
        return verdicts, STATUS_OK if rep.hypotheses_pass else STATUS_HYP

    if s.kind == "tower-ml":
        ring = _build_ring(ring_spec, default_ring)
        verdict = is_mittag_leffler(_build_ntower_modules(payload, ring))
        return verdict.to_dict(), STATUS_OK

    if s.kind == "homotopy-shadow":
        rep = check_homotopy_shadow(_build_shadow(payload))
        verdicts = rep.to_dict()
        pipelines_ok = all(v["pipeline_ok"] for v in rep.per_degree.values())
        if pipelines_ok and not rep.overall_constant:
            return verdicts, STATUS_VIOLATION
        return verdicts, STATUS_OK if rep.overall_constant else STATUS_HYP

    if s.kind == "deformation":
        ring = _build_ring(ring_spec, default_ring)
        K = _build_simplicial(payload.get("complex") or {}, "complex")
        F = _build_sheaf(K, ring, payload.get("sheaf") or {}, "sheaf")
        phi = PLFunction(K, [_rat(v, "phi value") for v in payload.get("phi") or []])
        rep = check_deformation(F, phi)
        verdicts = rep.to_dict()
        if not rep.theorem_consistent:
            return verdicts, STATUS_VIOLATION
        return verdicts, STATUS_OK if rep.hypotheses_pass else STATUS_HYP

    if s.kind == "microsupport":
        ring = _build_ring(ring_spec, default_ring)
        K = _build_simplicial(payload.get("complex") or {}, "complex")
        F = _build_sheaf(K, ring, payload.get("sheaf") or {}, "sheaf")
        rep = micro_support(F, include_boundary=bool(payload.get("include_boundary", False)))
        return rep.to_dict(), STATUS_OK

    if s.kind == "crosscheck":
        ring = _build_ring(ring_spec, default_ring)
        K = _build_simplicial(payload.get("complex") or {}, "complex")
        F = _build_sheaf(K, ring, payload.get("sheaf") or {}, "sheaf")
        phi = PLFunction(K, [_rat(v, "phi value") for v in payload.get("phi") or []])
        rep = crosscheck_noncharacteristic(F, phi)
        return rep.to_dict(), STATUS_OK if rep.ok else STATUS_VIOLATION

    raise SchemaError(f"unhandled kind {s.kind!r}")


# ---------------------------------------------------------------------------
# canonical emission
# ---------------------------------------------------------------------------


def emit(report: dict, format: str = "json") -> bytes:
    """Canonical serialization: sorted keys, stable layout, trailing newline."""
    if format == "json":
        return (json.dumps(report, sort_keys=True, indent=2) + "\n").encode()
    if format == "markdown":
        return _emit_markdown(report).encode()
    raise SchemaError(f"unknown format {format!r}")


def _md_value(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def _emit_markdown(report: dict) -> str:
    lines = [f"# scenario {report.get('scenario', '?')}", ""]
    lines.append(f"- kind: {report.get('kind')}")
    lines.append(f"- status: {report.get('status')}")
    if "error" in report:
        lines.append(f"- error: {report['error']}")
    exp = report.get("expectation")
    if exp is not None:
        lines.append(f"- expectation met: {_md_value(exp['met'])}")
        for m in exp["mismatches"]:
            lines.append(f"  - mismatch: {m}")
    verdicts = report.get("verdicts")
    if verdicts is not None:
        lines.append("")
        lines.append("## verdicts")
        lines.append("")
        for key in sorted(verdicts):
            val = verdicts[key]
            if isinstance(val, dict):
                lines.append(f"- {key}:")
                for k2 in sorted(val):
                    lines.append(f"  - {k2}: {_md_value(val[k2])}")
            else:
                lines.append(f"- {key}: {_md_value(val)}")
    lines.append("")
    return "\n".join(lines)
