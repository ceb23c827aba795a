"""Solver-independent integer-linear models and MPS / LP export.

Three model families are built here:

* the exact Return model (assignment y, item indicators z, aisle depths d);
* the exact S-shape model (adds aisle visits delta, visit ordinals q and
  their parity o = q - 2u);
* the pattern model, which replaces per-order assignment by counts x[t, j]
  of orders of each aisle pattern t in batch j.

Every model is a plain :class:`ModelIR`; nothing here talks to a solver.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .core import Instance, Partition, extract_patterns
from .evaluation import _evaluate_members

KINDS = ("binary", "integer", "continuous")
SENSES = ("<=", "=", ">=")
INF = math.inf


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    lb: float = 0.0
    ub: float = INF

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown variable kind {self.kind!r}")
        if self.kind == "binary":
            object.__setattr__(self, "lb", 0.0)
            object.__setattr__(self, "ub", 1.0)


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: Mapping[str, float]
    sense: str
    rhs: float = 0.0

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ValueError(f"unknown sense {self.sense!r}")
        object.__setattr__(self, "coeffs", dict(self.coeffs))

    def activity(self, values: Mapping[str, float]) -> float:
        return sum(c * values[v] for v, c in self.coeffs.items())

    def satisfied(self, values: Mapping[str, float], tol: float = 1e-9) -> bool:
        a = self.activity(values)
        if self.sense == "<=":
            return a <= self.rhs + tol
        if self.sense == ">=":
            return a >= self.rhs - tol
        return abs(a - self.rhs) <= tol


@dataclass(frozen=True, eq=False)
class ModelIR:
    name: str
    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective: Mapping[str, float]
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "objective", dict(self.objective))
        object.__setattr__(self, "metadata", dict(self.metadata))
        self.validate()

    def validate(self) -> None:
        names = set()
        for v in self.variables:
            if v.name in names:
                raise ValueError(f"variable {v.name} declared twice")
            names.add(v.name)
        rows = set()
        for c in self.constraints:
            if c.name in rows:
                raise ValueError(f"constraint {c.name} declared twice")
            rows.add(c.name)
            for v, a in c.coeffs.items():
                if v not in names:
                    raise ValueError(f"constraint {c.name} references undeclared variable {v}")
                if not math.isfinite(a):
                    raise ValueError(f"constraint {c.name}: non-finite coefficient on {v}")
            if not math.isfinite(c.rhs):
                raise ValueError(f"constraint {c.name}: non-finite rhs")
        for v in self.objective:
            if v not in names:
                raise ValueError(f"objective references undeclared variable {v}")

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def var(self, name: str) -> Variable:
        return self._by_name[name]

    @property
    def _by_name(self) -> dict[str, Variable]:
        return {v.name: v for v in self.variables}

    def objective_value(self, values: Mapping[str, float]) -> float:
        return sum(c * values[v] for v, c in self.objective.items())

    def is_feasible(self, values: Mapping[str, float], tol: float = 1e-9) -> bool:
        for v in self.variables:
            x = values[v.name]
            if x < v.lb - tol or x > v.ub + tol:
                return False
            if v.kind != "continuous" and abs(x - round(x)) > tol:
                return False
        return all(c.satisfied(values, tol) for c in self.constraints)

    def canonical(self):
        """Hashable normal form: zero coefficients dropped, everything sorted."""
        variables = tuple(sorted((v.name, v.kind, float(v.lb), float(v.ub)) for v in self.variables))
        rows = tuple(sorted(
            (c.name, c.sense, float(c.rhs),
             tuple(sorted((k, float(a)) for k, a in c.coeffs.items() if a != 0)))
            for c in self.constraints
        ))
        obj = tuple(sorted((k, float(a)) for k, a in self.objective.items() if a != 0))
        return variables, rows, obj

    def structurally_equal(self, other: "ModelIR") -> bool:
        return self.canonical() == other.canonical()


@dataclass(frozen=True)
class ModelBuildConfig:
    """Big-M choices and the ordinal encoding of the S-shape model.

    ``big_m_item`` / ``big_m_aisle`` are either ``"tight"`` (|I_k| and
    min(|I_b|, C)) or an integer that must be at least the tight value.

    ``ordinal_form="cumulative"`` sets q[j, b] = delta[j, b] * (number of
    visited aisles up to b), linearised. ``"adjacent"`` uses the
    adjacent-difference equation with its product q[j, b+1] * delta[j, b]
    replaced by an auxiliary w. With delta at the true visits that system
    has no solution once a visited aisle is followed by an unvisited one
    (below the last aisle); left free, the model pads delta and overstates
    the cost. It is kept only so the defect can be demonstrated.

    ``linearize_sshape`` exists for interface completeness; the IR holds
    linear rows only, so it must stay true.
    """

    big_m_item: str | int = "tight"
    big_m_aisle: str | int = "tight"
    ordinal_form: str = "cumulative"
    linearize_sshape: bool = True

    def __post_init__(self):
        if not self.linearize_sshape:
            raise ValueError("ModelIR is linear; the S-shape product terms must be linearised")
        if self.ordinal_form not in ("cumulative", "adjacent"):
            raise ValueError("ordinal_form must be 'cumulative' or 'adjacent'")


def _big_m(rule, tight: int, what: str) -> int:
    if rule == "tight":
        return tight
    if int(rule) < tight:
        raise ValueError(f"{what} big-M {rule} below the valid bound {tight}")
    return int(rule)


def yname(i, j):
    return f"y_{i}_{j}"


def _assignment_block(instance: Instance, config: ModelBuildConfig):
    """Variables and rows shared by both exact models (assignment and items)."""
    J = range(1, instance.n_batches + 1)
    ids = [o.order_id for o in instance.orders]
    variables = [Variable(yname(i, j), "binary") for i in ids for j in J]
    variables += [Variable(f"z_{j}_{k}", "binary") for j in J for k in instance.used_items]
    rows = [Constraint(f"assign_{i}", {yname(i, j): 1 for j in J}, "=", 1) for i in ids]
    cap_sense = "=" if instance.strict else "<="
    rows += [Constraint(f"cap_{j}", {yname(i, j): 1 for i in ids}, cap_sense, instance.capacity)
             for j in J]
    for j in J:
        for k, members in instance.orders_with_item.items():
            m_k = _big_m(config.big_m_item, len(members), "item")
            coeffs = {f"z_{j}_{k}": m_k}
            coeffs.update({yname(i, j): -1 for i in members})
            rows.append(Constraint(f"item_{j}_{k}", coeffs, ">=", 0))
    obj = {f"z_{j}_{k}": instance.tau for j in J for k in instance.used_items}
    return variables, rows, obj


def build_exact_return(instance: Instance, config: ModelBuildConfig = ModelBuildConfig()) -> ModelIR:
    variables, rows, obj = _assignment_block(instance, config)
    J = range(1, instance.n_batches + 1)
    B = range(1, instance.layout.n_aisles + 1)
    variables += [Variable(f"d_{j}_{b}", "continuous", 0.0, INF) for j in J for b in B]
    for j in J:
        for b in B:
            for p in instance.profiles:
                r = p.max_depth_per_aisle.get(b)
                if r:
                    rows.append(Constraint(f"depth_{j}_{b}_{p.order_id}",
                                           {f"d_{j}_{b}": 1, yname(p.order_id, j): -r}, ">=", 0))
            obj[f"d_{j}_{b}"] = 2 * (1 - instance.tau)
    return ModelIR(f"{instance.name}-return", variables, rows, obj,
                   {"formulation": "exact_return", "big_m_item": str(config.big_m_item)})


def build_exact_sshape(instance: Instance, config: ModelBuildConfig = ModelBuildConfig()) -> ModelIR:
    variables, rows, obj = _assignment_block(instance, config)
    J = range(1, instance.n_batches + 1)
    nb = instance.layout.n_aisles
    B = range(1, nb + 1)
    for j in J:
        for b in B:
            variables += [
                Variable(f"dl_{j}_{b}", "binary"),
                Variable(f"q_{j}_{b}", "integer", 0, nb),
                Variable(f"u_{j}_{b}", "integer", 0, nb // 2),
                Variable(f"o_{j}_{b}", "binary"),
            ]
        if config.ordinal_form == "adjacent":
            variables += [Variable(f"w_{j}_{b}", "integer", 0, nb) for b in B if b < nb]

    for j in J:
        visits = {f"dl_{j}_{b}": 1 for b in B}
        for b in B:
            members = instance.orders_in_aisle[b]
            m_b = _big_m(config.big_m_aisle, max(1, min(len(members), instance.capacity)), "aisle")
            coeffs = {f"dl_{j}_{b}": m_b}
            coeffs.update({yname(i, j): -1 for i in members})
            rows.append(Constraint(f"aisle_{j}_{b}", coeffs, ">=", 0))

            q, dl = f"q_{j}_{b}", f"dl_{j}_{b}"
            upper = {k: -1.0 for k in visits}
            upper[q] = upper.get(q, 0) + 1
            rows.append(Constraint(f"qub_{j}_{b}", upper, "<=", 0))
            rows.append(Constraint(f"qlb_{j}_{b}", {q: 1, dl: -1}, ">=", 0))
            rows.append(Constraint(f"parity_{j}_{b}",
                                   {q: 1, f"u_{j}_{b}": -2, f"o_{j}_{b}": -1}, "=", 0))
            obj[f"o_{j}_{b}"] = 2 * instance.layout.length(b) * (1 - instance.tau)

            if config.ordinal_form == "cumulative":
                # q = dl * (visits among aisles 1..b)
                running = {f"dl_{j}_{c}": -1.0 for c in range(1, b + 1)}
                le = dict(running)
                le[q] = 1
                rows.append(Constraint(f"ordle_{j}_{b}", le, "<=", 0))
                rows.append(Constraint(f"ordon_{j}_{b}", {q: 1, dl: -nb}, "<=", 0))
                ge = dict(running)
                ge[q] = 1
                ge[dl] = ge[dl] - nb
                rows.append(Constraint(f"ordge_{j}_{b}", ge, ">=", -nb))
            elif b < nb:
                # q[b+1] - q[b] = q[b+1] (1 - dl[b]) + dl[b], with w = q[b+1] * dl[b]
                w, qn = f"w_{j}_{b}", f"q_{j}_{b + 1}"
                rows.append(Constraint(f"ordseq_{j}_{b}", {w: 1, q: -1, dl: -1}, "=", 0))
                rows.append(Constraint(f"wdl_{j}_{b}", {w: 1, dl: -nb}, "<=", 0))
                rows.append(Constraint(f"wq_{j}_{b}", {w: 1, qn: -1}, "<=", 0))
                rows.append(Constraint(f"wlo_{j}_{b}", {w: 1, qn: -1, dl: -nb}, ">=", -nb))
    return ModelIR(f"{instance.name}-sshape", variables, rows, obj,
                   {"formulation": "exact_sshape", "ordinal_form": config.ordinal_form,
                    "big_m_item": str(config.big_m_item), "big_m_aisle": str(config.big_m_aisle)})


def aisle_weights(instance: Instance, weighting: str) -> tuple[int, ...]:
    """Per-aisle surrogate weight, index 0 unused."""
    if weighting == "AP1":
        return (0,) + (1,) * instance.layout.n_aisles
    if weighting == "AP2":
        return (0,) + instance.layout.aisle_lengths
    raise ValueError(f"weighting must be 'AP1' or 'AP2', got {weighting!r}")


def build_approx(instance: Instance, weighting: str = "AP2",
                 symmetry_breaking: bool = True) -> ModelIR:
    w = aisle_weights(instance, weighting)
    patterns = extract_patterns(instance)
    J = range(1, instance.n_batches + 1)
    B = range(1, instance.layout.n_aisles + 1)
    variables = [Variable(f"x_{p.pattern_id}_{j}", "integer", 0, p.size)
                 for p in patterns for j in J]
    variables += [Variable(f"dl_{j}_{b}", "binary") for j in J for b in B]
    rows = [Constraint(f"pattern_{p.pattern_id}", {f"x_{p.pattern_id}_{j}": 1 for j in J},
                       "=", p.size) for p in patterns]
    cap_sense = "=" if instance.strict else "<="
    rows += [Constraint(f"cap_{j}", {f"x_{p.pattern_id}_{j}": 1 for p in patterns},
                        cap_sense, instance.capacity) for j in J]
    for b in B:
        visiting = [p for p in patterns if b in p.aisle_set]
        m_b = max(1, min(instance.capacity, sum(p.size for p in visiting)))
        for j in J:
            coeffs = {f"dl_{j}_{b}": m_b}
            coeffs.update({f"x_{p.pattern_id}_{j}": -1 for p in visiting})
            rows.append(Constraint(f"aisle_{j}_{b}", coeffs, ">=", 0))
    if symmetry_breaking and patterns:
        first = patterns[0].pattern_id
        rows += [Constraint(f"sym_{j}", {f"x_{first}_{j}": 1, f"x_{first}_{j + 1}": -1}, ">=", 0)
                 for j in J if j < instance.n_batches]
    obj = {f"dl_{j}_{b}": w[b] for j in J for b in B}
    return ModelIR(f"{instance.name}-{weighting.lower()}", variables, rows, obj,
                   {"formulation": f"approx_{weighting}",
                    "symmetry_breaking": str(symmetry_breaking)})


def beta_ratio(approx: ModelIR, exact: ModelIR) -> float:
    if exact.n_variables == 0:
        raise ValueError("exact model has no variables")
    return approx.n_variables / exact.n_variables


# -- encoding partitions as model points ---------------------------------

def encode_exact_solution(instance: Instance, partition: Partition, strategy: str) -> dict[str, float]:
    """The IR point that a fixed partition induces (optimal auxiliaries)."""
    partition.validate(instance)
    J = range(1, instance.n_batches + 1)
    vals = {yname(o.order_id, j): float(partition.batch_of[o.order_id] == j)
            for o in instance.orders for j in J}
    nb = instance.layout.n_aisles
    for j, members in zip(J, partition.batches()):
        ev = _evaluate_members(instance, j, members)
        items = set().union(*(instance.orders[instance.order_index[o]].items for o in members))
        for k in instance.used_items:
            vals[f"z_{j}_{k}"] = float(k in items)
        for b in range(1, nb + 1):
            if strategy == "return":
                vals[f"d_{j}_{b}"] = float(ev.max_depths.get(b, 0))
            else:
                q = ev.ordinals.get(b, 0)
                vals[f"dl_{j}_{b}"] = float(b in ev.ordinals)
                vals[f"q_{j}_{b}"] = float(q)
                vals[f"o_{j}_{b}"] = float(q % 2)
                vals[f"u_{j}_{b}"] = float(q // 2)
    return vals


def pattern_counts(instance: Instance, partition: Partition) -> dict[tuple[int, int], int]:
    """x[(pattern_id, batch)] counts for a partition."""
    of = {o: p.pattern_id for p in extract_patterns(instance) for o in p.member_orders}
    x: dict[tuple[int, int], int] = {}
    for oid, j in partition.batch_of.items():
        x[(of[oid], j)] = x.get((of[oid], j), 0) + 1
    return x


def encode_approx_solution(instance: Instance, partition: Partition) -> dict[str, float]:
    patterns = extract_patterns(instance)
    x = pattern_counts(instance, partition)
    vals = {}
    for j in range(1, instance.n_batches + 1):
        used = [p for p in patterns if x.get((p.pattern_id, j), 0)]
        aisles = set().union(*(p.aisle_set for p in used)) if used else set()
        for p in patterns:
            vals[f"x_{p.pattern_id}_{j}"] = float(x.get((p.pattern_id, j), 0))
        for b in range(1, instance.layout.n_aisles + 1):
            vals[f"dl_{j}_{b}"] = float(b in aisles)
    return vals


# -- MPS ------------------------------------------------------------------

def _num(v: float) -> str:
    v = float(v)
    if v == 0:
        return "0"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _mps_line(f1="", f2="", f3="", f4="", f5="", f6="") -> str:
    return f" {f1:<2} {f2:<8}  {f3:<8}  {f4:<12}   {f5:<8}  {f6:<12}".rstrip()


_MPS_SENSE = {"<=": "L", "=": "E", ">=": "G"}


def format_mps(ir: ModelIR) -> str:
    """Fixed-column MPS. Names longer than 8 characters overflow their field,
    so long-named models need a reader that splits on whitespace."""
    out = [f"* obopp {k}={v}" for k, v in ir.metadata.items()]
    out.append(f"NAME          {ir.name}")
    out.append("ROWS")
    out.append(_mps_line("N", "OBJ"))
    out += [_mps_line(_MPS_SENSE[c.sense], c.name) for c in ir.constraints]

    entries: dict[str, list[tuple[str, float]]] = {v.name: [] for v in ir.variables}
    for name, a in ir.objective.items():
        if a != 0:
            entries[name].append(("OBJ", a))
    for c in ir.constraints:
        for name, a in c.coeffs.items():
            if a != 0:
                entries[name].append((c.name, a))

    out.append("COLUMNS")
    in_int = False
    for v in ir.variables:
        want_int = v.kind != "continuous"
        if want_int != in_int:
            tag = "'INTORG'" if want_int else "'INTEND'"
            out.append(_mps_line("", "MARKER", "'MARKER'", "", tag))
            in_int = want_int
        col = entries[v.name] or [("OBJ", 0.0)]
        for k in range(0, len(col), 2):
            pair = col[k:k + 2]
            fields = [pair[0][0], _num(pair[0][1])]
            if len(pair) > 1:
                fields += [pair[1][0], _num(pair[1][1])]
            out.append(_mps_line("", v.name, *fields))
    if in_int:
        out.append(_mps_line("", "MARKER", "'MARKER'", "", "'INTEND'"))

    out.append("RHS")
    for c in ir.constraints:
        if c.rhs != 0:
            out.append(_mps_line("", "RHS", c.name, _num(c.rhs)))

    out.append("BOUNDS")
    for v in ir.variables:
        if v.kind == "binary":
            out.append(_mps_line("BV", "BND", v.name))
            continue
        if v.lb == -INF and v.ub == INF:
            out.append(_mps_line("FR", "BND", v.name))
            continue
        if v.lb == -INF:
            out.append(_mps_line("MI", "BND", v.name))
        elif v.lb != 0:
            out.append(_mps_line("LO", "BND", v.name, _num(v.lb)))
        if v.ub != INF:
            out.append(_mps_line("UP", "BND", v.name, _num(v.ub)))
        elif v.kind == "integer":
            out.append(_mps_line("PL", "BND", v.name))
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def parse_mps(text: str) -> ModelIR:
    name = "model"
    metadata = {}
    section = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    obj_row = None
    coeffs: dict[str, dict[str, float]] = {}
    objective: dict[str, float] = {}
    rhs: dict[str, float] = {}
    var_order: list[str] = []
    integer: set[str] = set()
    bounds: dict[str, list] = {}
    kinds: dict[str, str] = {}
    in_int = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.startswith("*"):
            m = re.match(r"\*\s*obopp\s+([^=\s]+)=(.*)$", raw)
            if m:
                metadata[m.group(1)] = m.group(2)
            continue
        if not raw.strip():
            continue
        tok = raw.split()
        if not raw[0].isspace():
            section = tok[0]
            if section == "NAME":
                name = " ".join(tok[1:]) or name
            continue
        try:
            if section == "ROWS":
                sense, row = tok
                if sense == "N":
                    obj_row = obj_row or row
                else:
                    row_sense[row] = {"L": "<=", "E": "=", "G": ">="}[sense]
                    row_order.append(row)
                    coeffs[row] = {}
            elif section == "COLUMNS":
                if len(tok) == 3 and tok[1] == "'MARKER'":
                    in_int = tok[2] == "'INTORG'"
                    continue
                var = tok[0]
                if var not in kinds:
                    var_order.append(var)
                    kinds[var] = "continuous"
                if in_int:
                    integer.add(var)
                for row, val in zip(tok[1::2], tok[2::2]):
                    if row == obj_row:
                        objective[var] = float(val)
                    else:
                        coeffs[row][var] = float(val)
            elif section == "RHS":
                for row, val in zip(tok[1::2], tok[2::2]):
                    rhs[row] = float(val)
            elif section == "BOUNDS":
                kind, var = tok[0], tok[2]
                lb, ub = bounds.setdefault(var, [0.0, INF])
                if kind == "BV":
                    kinds[var] = "binary"
                elif kind == "UP":
                    bounds[var][1] = float(tok[3])
                elif kind == "LO":
                    bounds[var][0] = float(tok[3])
                elif kind == "FX":
                    bounds[var] = [float(tok[3]), float(tok[3])]
                elif kind == "MI":
                    bounds[var][0] = -INF
                elif kind == "PL":
                    bounds[var][1] = INF
                elif kind == "FR":
                    bounds[var] = [-INF, INF]
                else:
                    raise ValueError(f"unsupported bound type {kind}")
            else:
                raise ValueError(f"data line outside a known section: {section}")
        except (ValueError, KeyError, IndexError) as exc:
            raise ValueError(f"MPS line {lineno}: {exc}") from None
    variables = []
    for v in var_order:
        kind = kinds[v]
        if kind != "binary" and v in integer:
            kind = "integer"
        lb, ub = bounds.get(v, [0.0, INF])
        variables.append(Variable(v, kind, lb, ub))
    rows = [Constraint(r, coeffs[r], row_sense[r], rhs.get(r, 0.0)) for r in row_order]
    return ModelIR(name, variables, rows, objective, metadata)


# -- LP -------------------------------------------------------------------

def _lp_terms(coeffs: Mapping[str, float], per_line: int = 6) -> list[str]:
    terms = [f"{'-' if a < 0 else '+'} {_num(abs(a))} {v}" for v, a in coeffs.items() if a != 0]
    if not terms:
        return ["0 " + next(iter(coeffs), "")] if coeffs else [""]
    return [" ".join(terms[k:k + per_line]) for k in range(0, len(terms), per_line)]


def format_lp(ir: ModelIR) -> str:
    out = [f"\\ obopp {k}={v}" for k, v in ir.metadata.items()]
    out.append(f"\\ Problem name: {ir.name}")
    out.append("Minimize")
    obj_lines = _lp_terms(ir.objective) if any(ir.objective.values()) else [""]
    out.append(f" obj: {obj_lines[0]}".rstrip())
    out += [f"   {line}" for line in obj_lines[1:]]
    out.append("Subject To")
    for c in ir.constraints:
        lines = _lp_terms(c.coeffs)
        lines[-1] = f"{lines[-1]} {c.sense} {_num(c.rhs)}"
        out.append(f" {c.name}: {lines[0]}")
        out += [f"   {line}" for line in lines[1:]]
    out.append("Bounds")
    for v in ir.variables:
        if v.kind == "binary":
            continue
        lo = "-inf" if v.lb == -INF else _num(v.lb)
        hi = "+inf" if v.ub == INF else _num(v.ub)
        out.append(f" {lo} <= {v.name} <= {hi}")
    for header, kind in (("Generals", "integer"), ("Binaries", "binary")):
        names = [v.name for v in ir.variables if v.kind == kind]
        if names:
            out.append(header)
            out += [" " + " ".join(names[k:k + 8]) for k in range(0, len(names), 8)]
    out.append("End")
    return "\n".join(out) + "\n"


def _parse_expr(text: str) -> dict[str, float]:
    tok = text.split()
    coeffs: dict[str, float] = {}
    sign, coef = 1.0, None
    for t in tok:
        if t in "+-":
            sign = -1.0 if t == "-" else 1.0
            continue
        try:
            coef = float(t)
            continue
        except ValueError:
            pass
        coeffs[t] = coeffs.get(t, 0.0) + sign * (1.0 if coef is None else coef)
        sign, coef = 1.0, None
    return coeffs


def _lp_bound(t: str) -> float:
    t = t.lower()
    if t in ("-inf", "-infinity"):
        return -INF
    if t in ("+inf", "inf", "+infinity", "infinity"):
        return INF
    return float(t)


def parse_lp(text: str) -> ModelIR:
    metadata = {}
    name = "model"
    section = None
    blocks: dict[str, list[str]] = {"obj": [], "st": [], "bounds": [], "gen": [], "bin": []}
    heads = {"minimize": "obj", "subject to": "st", "bounds": "bounds",
             "generals": "gen", "binaries": "bin", "end": None}
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("\\"):
            m = re.match(r"\\\s*obopp\s+([^=\s]+)=(.*)$", line)
            if m:
                metadata[m.group(1)] = m.group(2)
            m = re.match(r"\\\s*Problem name:\s*(.*)$", line)
            if m:
                name = m.group(1)
            continue
        if not line:
            continue
        if line.lower() in heads:
            section = heads[line.lower()]
            continue
        if section is None:
            raise ValueError(f"LP text outside a section: {line!r}")
        blocks[section].append(line)

    obj_text = " ".join(blocks["obj"])
    objective = _parse_expr(obj_text.split(":", 1)[1] if ":" in obj_text else obj_text)

    rows = []
    current = []
    for line in blocks["st"] + ["__end__:"]:
        if re.match(r"^[^\s:]+:", line) and current:
            label, body = " ".join(current).split(":", 1)
            m = re.match(r"(.*?)(<=|>=|=)\s*(\S+)\s*$", body)
            if not m:
                raise ValueError(f"LP constraint {label}: missing sense or rhs")
            rows.append(Constraint(label.strip(), _parse_expr(m.group(1)), m.group(2),
                                   float(m.group(3))))
            current = []
        current.append(line)

    declared: dict[str, list] = {}
    for line in blocks["bounds"]:
        lo, _, var, _, hi = line.split()
        declared[var] = [_lp_bound(lo), _lp_bound(hi)]
    generals = {v for line in blocks["gen"] for v in line.split()}
    binaries = {v for line in blocks["bin"] for v in line.split()}

    order: list[str] = []
    seen = set()
    for var in list(objective) + [v for r in rows for v in r.coeffs] + list(declared) \
            + sorted(generals) + sorted(binaries):
        if var not in seen:
            seen.add(var)
            order.append(var)
    variables = []
    for v in order:
        if v in binaries:
            variables.append(Variable(v, "binary"))
        else:
            lb, ub = declared.get(v, [0.0, INF])
            variables.append(Variable(v, "integer" if v in generals else "continuous", lb, ub))
    return ModelIR(name, variables, rows, objective, metadata)


def export_model(ir: ModelIR, path, format: str = "MPS") -> None:
    fmt = format.upper()
    if fmt == "MPS":
        text = format_mps(ir)
    elif fmt == "LP":
        text = format_lp(ir)
    else:
        raise ValueError(f"unknown model format {format!r}")
    Path(path).write_text(text, encoding="utf-8")


def read_model(path, format: str | None = None) -> ModelIR:
    fmt = (format or Path(path).suffix.lstrip(".")).upper()
    text = Path(path).read_text(encoding="utf-8")
    if fmt == "MPS":
        return parse_mps(text)
    if fmt == "LP":
        return parse_lp(text)
    raise ValueError(f"unknown model format {fmt!r}")
