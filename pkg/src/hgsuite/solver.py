"""Finite-domain constraint solving over term literals.

Backtracking search with interval (ints) and candidate-set (enums)
propagation.  Determinism is part of the contract: variables are tried
in declaration order, int values ascending, enum values lexicographic,
so a satisfiable problem always yields the same witness.

``solve`` is budgeted: exceeding the node budget is reported as its own
outcome, never as Unsat.  ``oracle_solve`` is the slow, dumb twin used
by tests: it enumerates the whole domain product.

``merge`` builds one Problem out of several rules' constraint sets.
Alpha-renaming keeps the rules' namespaces apart, with two deliberate
exceptions: attribute state of the same bound device unifies, and
environment features (temperature, illuminance, humidity, power,
timeOfDay) unify across sensors unless env unification is disabled.
Only linear integer arithmetic is accepted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .catalog import DEFAULT_INT_DOMAIN, FEATURE_DOMAINS, Catalog
from .errors import SolverError
from .terms import (
    Arith,
    AttrVar,
    BoolConst,
    ConstraintLit,
    EventVal,
    IntConst,
    StrConst,
    SymInput,
    Term,
    is_linear,
    lit_terms,
    sort_of,
)

NODE_BUDGET = 10**6
ORACLE_LIMIT = 10**6

# String-sorted attributes (mode, phrase) have open value sets; the
# sentinel stands for "any value not mentioned by the constraints".
OTHER_VALUE = "~other"

_ORDER_OPS = frozenset({"<", "<=", ">", ">="})


@dataclass(frozen=True, slots=True)
class IntRange:
    lo: int
    hi: int

    def size(self) -> int:
        return max(0, self.hi - self.lo + 1)


@dataclass(frozen=True, slots=True)
class EnumDomain:
    values: tuple[str, ...]

    def size(self) -> int:
        return len(self.values)


Domain = IntRange | EnumDomain


@dataclass(frozen=True, slots=True)
class VarDecl:
    name: str
    domain: Domain


@dataclass(frozen=True, slots=True)
class Problem:
    vars: tuple[VarDecl, ...]
    constraints: tuple[ConstraintLit, ...]
    provenance: tuple[str, ...] = ()

    def domain(self, name: str) -> Domain:
        for decl in self.vars:
            if decl.name == name:
                return decl.domain
        raise KeyError(name)


@dataclass(frozen=True, slots=True)
class Outcome:
    kind: str  # "sat" | "unsat" | "budget"
    witness: Mapping[str, int | str] | None = None
    nodes: int = 0

    @property
    def is_sat(self) -> bool:
        return self.kind == "sat"

    @property
    def is_unsat(self) -> bool:
        return self.kind == "unsat"


# ----------------------------------------------------------- plumbing


def _normalize_term(term: Term) -> Term:
    """Booleans are modeled as the enum {false, true}."""
    if isinstance(term, BoolConst):
        return StrConst("true" if term.value else "false")
    if isinstance(term, SymInput) and term.sort == "bool":
        return SymInput(term.name, "str")
    if isinstance(term, Arith):
        return Arith(term.op, _normalize_term(term.lhs), _normalize_term(term.rhs))
    return term


def _normalize_lit(lit: ConstraintLit) -> ConstraintLit:
    return ConstraintLit(lit.op, _normalize_term(lit.lhs), _normalize_term(lit.rhs))


def _check_problem(problem: Problem) -> list[ConstraintLit]:
    domains = {decl.name: decl.domain for decl in problem.vars}
    lits = []
    for lit in problem.constraints:
        lit = _normalize_lit(lit)
        for side in (lit.lhs, lit.rhs):
            if not is_linear(side):
                raise SolverError("NonLinear", f"nonlinear term in {lit}")
        for term in lit_terms(lit):
            if isinstance(term, (AttrVar, EventVal)):
                raise SolverError(
                    "UnrenamedTerm", f"solver problems take SymInput leaves only, got {term!r}"
                )
            if isinstance(term, SymInput):
                dom = domains.get(term.name)
                if dom is None:
                    raise SolverError("UnknownVariable", f"undeclared variable {term.name!r}")
                want_int = isinstance(dom, IntRange)
                if want_int != (term.sort == "int"):
                    raise SolverError("SortMismatch", f"{term.name!r} domain does not fit its sort")
        if lit.op in _ORDER_OPS and (sort_of(lit.lhs) != "int" or sort_of(lit.rhs) != "int"):
            raise SolverError("SortMismatch", f"ordering comparison over non-int sides: {lit}")
        if lit.op in ("==", "!=") and sort_of(lit.lhs) != sort_of(lit.rhs):
            raise SolverError("SortMismatch", f"comparison across sorts: {lit}")
        lits.append(lit)
    return lits


def _eval_term(term: Term, values: Mapping[str, int | str]) -> int | str:
    if isinstance(term, IntConst):
        return term.value
    if isinstance(term, StrConst):
        return term.value
    if isinstance(term, SymInput):
        return values[term.name]
    assert isinstance(term, Arith)
    a = _eval_term(term.lhs, values)
    b = _eval_term(term.rhs, values)
    assert isinstance(a, int) and isinstance(b, int)
    return a + b if term.op == "+" else a - b if term.op == "-" else a * b


def eval_lit_values(lit: ConstraintLit, values: Mapping[str, int | str]) -> bool:
    """Evaluate a solver literal under a name -> value assignment."""
    lit = _normalize_lit(lit)
    a = _eval_term(lit.lhs, values)
    b = _eval_term(lit.rhs, values)
    if lit.op == "==":
        return a == b
    if lit.op == "!=":
        return a != b
    assert isinstance(a, int) and isinstance(b, int)
    return a < b if lit.op == "<" else a <= b if lit.op == "<=" else a > b if lit.op == ">" else a >= b


def check_witness(problem: Problem, witness: Mapping[str, int | str]) -> bool:
    """True iff the witness satisfies every constraint and every domain."""
    for decl in problem.vars:
        if decl.name not in witness:
            return False
        value = witness[decl.name]
        if isinstance(decl.domain, IntRange):
            if not isinstance(value, int) or not decl.domain.lo <= value <= decl.domain.hi:
                return False
        elif value not in decl.domain.values:
            return False
    try:
        return all(eval_lit_values(lit, witness) for lit in problem.constraints)
    except KeyError:
        return False


# -------------------------------------------------------- propagation

# Mutable domain state during search: ints as [lo, hi] lists, enums as
# sorted value lists.


def _initial_state(problem: Problem) -> dict[str, list]:
    state: dict[str, list] = {}
    for decl in problem.vars:
        if isinstance(decl.domain, IntRange):
            state[decl.name] = ["int", decl.domain.lo, decl.domain.hi]
        else:
            state[decl.name] = ["enum", sorted(decl.domain.values)]
    return state


def _copy_state(state: dict[str, list]) -> dict[str, list]:
    return {name: list(dom) if dom[0] == "int" else [dom[0], list(dom[1])] for name, dom in state.items()}


def _is_empty(dom: list) -> bool:
    return dom[1] > dom[2] if dom[0] == "int" else not dom[1]


def _ceil_div(p: int, q: int) -> int:
    return -((-p) // q)


def _linear_parts(term: Term, target: str, state: Mapping[str, list]) -> tuple[int, int, int]:
    """Decompose an int term as a*target + [lo, hi] under current bounds."""
    if isinstance(term, IntConst):
        return 0, term.value, term.value
    if isinstance(term, SymInput):
        if term.name == target:
            return 1, 0, 0
        dom = state[term.name]
        assert dom[0] == "int"
        return 0, dom[1], dom[2]
    assert isinstance(term, Arith)
    a1, lo1, hi1 = _linear_parts(term.lhs, target, state)
    a2, lo2, hi2 = _linear_parts(term.rhs, target, state)
    if term.op == "+":
        return a1 + a2, lo1 + lo2, hi1 + hi2
    if term.op == "-":
        return a1 - a2, lo1 - hi2, hi1 - lo2
    # Multiplication: linearity guarantees at most one side has variables.
    if a2 == 0 and lo2 == hi2:
        c = lo2
        return a1 * c, min(lo1 * c, hi1 * c), max(lo1 * c, hi1 * c)
    if a1 == 0 and lo1 == hi1:
        c = lo1
        return a2 * c, min(lo2 * c, hi2 * c), max(lo2 * c, hi2 * c)
    products = [lo1 * lo2, lo1 * hi2, hi1 * lo2, hi1 * hi2]
    if a1 != 0 or a2 != 0:
        raise SolverError("NonLinear", "variable product")
    return 0, min(products), max(products)


def _narrow_int(dom: list, lo: int | None = None, hi: int | None = None) -> bool:
    """Tighten an int domain in place; True when it changed."""
    changed = False
    if lo is not None and lo > dom[1]:
        dom[1] = lo
        changed = True
    if hi is not None and hi < dom[2]:
        dom[2] = hi
        changed = True
    return changed


def _term_enum_value(term: Term, state: Mapping[str, list]) -> str | None:
    """The known value of an enum-side term, if pinned."""
    if isinstance(term, StrConst):
        return term.value
    if isinstance(term, SymInput):
        dom = state[term.name]
        if dom[0] == "enum" and len(dom[1]) == 1:
            return dom[1][0]
    return None


def _propagate_lit(lit: ConstraintLit, state: dict[str, list]) -> bool:
    """One narrowing pass for one literal; True when a domain changed."""
    names = sorted({t.name for t in lit_terms(lit) if isinstance(t, SymInput)})
    if not names:
        return False
    changed = False
    first = state[names[0]]
    if first[0] == "enum":
        # Enum literals: ==/!= between a var and a value or another var.
        lhs, rhs = lit.lhs, lit.rhs
        for var_side, other in ((lhs, rhs), (rhs, lhs)):
            if not isinstance(var_side, SymInput):
                continue
            dom = state[var_side.name]
            value = _term_enum_value(other, state)
            if value is not None:
                if lit.op == "==":
                    new = [v for v in dom[1] if v == value]
                else:
                    new = [v for v in dom[1] if v != value]
                if len(new) != len(dom[1]):
                    dom[1] = new
                    changed = True
        if lit.op == "==" and isinstance(lhs, SymInput) and isinstance(rhs, SymInput):
            a, b = state[lhs.name], state[rhs.name]
            common = sorted(set(a[1]) & set(b[1]))
            if len(common) != len(a[1]) or len(common) != len(b[1]):
                a[1] = list(common)
                b[1] = list(common)
                changed = True
        return changed
    for target in names:
        a, tlo, thi = 0, 0, 0
        try:
            al, llo, lhi = _linear_parts(lit.lhs, target, state)
            ar, rlo, rhi = _linear_parts(lit.rhs, target, state)
        except KeyError:
            continue
        a = al - ar
        tlo, thi = llo - rhi, lhi - rlo
        dom = state[target]
        if lit.op == "!=":
            if a != 0 and tlo == thi and (-tlo) % a == 0:
                v = (-tlo) // a
                if dom[1] == dom[2] == v:
                    dom[1] = v + 1  # empty it
                    changed = True
                elif v == dom[1]:
                    dom[1] = v + 1
                    changed = True
                elif v == dom[2]:
                    dom[2] = v - 1
                    changed = True
            continue
        # Rewrite as a*x OP' bound with the most permissive slack.
        bounds: list[tuple[str, int]] = []
        if lit.op in (">", ">="):
            slack = 1 if lit.op == ">" else 0
            bounds.append((">=", slack - thi))
        elif lit.op in ("<", "<="):
            slack = 1 if lit.op == "<" else 0
            bounds.append(("<=", -slack - tlo))
        else:  # ==
            bounds.append((">=", -thi))
            bounds.append(("<=", -tlo))
        for op, rhs_bound in bounds:
            if a == 0:
                ok = rhs_bound <= 0 if op == ">=" else rhs_bound >= 0
                if not ok:
                    dom[1], dom[2] = 1, 0  # no value can help
                    return True
                continue
            if op == ">=":
                if a > 0:
                    changed |= _narrow_int(dom, lo=_ceil_div(rhs_bound, a))
                else:
                    changed |= _narrow_int(dom, hi=rhs_bound // a)
            else:
                if a > 0:
                    changed |= _narrow_int(dom, hi=rhs_bound // a)
                else:
                    changed |= _narrow_int(dom, lo=_ceil_div(rhs_bound, a))
    return changed


def _propagate(lits: Sequence[ConstraintLit], state: dict[str, list], max_sweeps: int = 30) -> bool:
    """Narrow to fixpoint (or sweep cap). False when a domain emptied."""
    for _ in range(max_sweeps):
        changed = False
        for lit in lits:
            try:
                changed |= _propagate_lit(lit, state)
            except SolverError:
                raise
            if any(_is_empty(state[t.name]) for t in lit_terms(lit) if isinstance(t, SymInput)):
                return False
        if not changed:
            return True
    return True


# -------------------------------------------------------------- solve


def solve(problem: Problem, node_budget: int = NODE_BUDGET) -> Outcome:
    """Decide the conjunction; deterministic minimal witness when Sat."""
    lits = _check_problem(problem)
    order = [decl.name for decl in problem.vars]
    state = _initial_state(problem)
    if not _propagate(lits, state):
        return Outcome("unsat")

    nodes = 0
    budget_hit = False

    def assigned_values(st: dict[str, list]) -> dict[str, int | str]:
        out: dict[str, int | str] = {}
        for name, dom in st.items():
            if dom[0] == "int" and dom[1] == dom[2]:
                out[name] = dom[1]
            elif dom[0] == "enum" and len(dom[1]) == 1:
                out[name] = dom[1][0]
        return out

    def full_check(values: Mapping[str, int | str]) -> bool:
        return all(eval_lit_values(lit, values) for lit in lits)

    def dfs(idx: int, st: dict[str, list]) -> dict[str, int | str] | None:
        nonlocal nodes, budget_hit
        if idx == len(order):
            values = assigned_values(st)
            return values if full_check(values) else None
        name = order[idx]
        dom = st[name]
        candidates: Iterable[int | str]
        if dom[0] == "int":
            candidates = range(dom[1], dom[2] + 1)
        else:
            candidates = list(dom[1])
        for value in candidates:
            nodes += 1
            if nodes > node_budget:
                budget_hit = True
                return None
            child = _copy_state(st)
            if dom[0] == "int":
                child[name][1] = child[name][2] = value
            else:
                child[name][1] = [value]
            if not _propagate(lits, child):
                continue
            result = dfs(idx + 1, child)
            if result is not None:
                return result
            if budget_hit:
                return None
        return None

    witness = dfs(0, state)
    if witness is not None:
        return Outcome("sat", witness, nodes)
    if budget_hit:
        return Outcome("budget", None, nodes)
    return Outcome("unsat", None, nodes)


def oracle_solve(problem: Problem, limit: int = ORACLE_LIMIT) -> Outcome:
    """Exhaustive twin of ``solve``; raises on oversized domain products."""
    lits = _check_problem(problem)
    total = 1
    for decl in problem.vars:
        total *= decl.domain.size()
        if total > limit:
            raise SolverError(
                "OracleBudgetExceeded", f"domain product exceeds {limit} assignments"
            )

    names = [decl.name for decl in problem.vars]
    pools: list[list[int | str]] = []
    for decl in problem.vars:
        if isinstance(decl.domain, IntRange):
            pools.append(list(range(decl.domain.lo, decl.domain.hi + 1)))
        else:
            pools.append(sorted(decl.domain.values))
        if not pools[-1]:
            return Outcome("unsat")

    values: dict[str, int | str] = {}

    def enumerate_from(idx: int) -> dict[str, int | str] | None:
        if idx == len(names):
            return dict(values) if all(eval_lit_values(lit, values) for lit in lits) else None
        for value in pools[idx]:
            values[names[idx]] = value
            hit = enumerate_from(idx + 1)
            if hit is not None:
                return hit
        del values[names[idx]]
        return None

    witness = enumerate_from(0)
    return Outcome("sat", witness) if witness is not None else Outcome("unsat")


# -------------------------------------------------------------- merge


@dataclass(frozen=True, slots=True)
class MergePart:
    """One rule's constraints plus the context needed to rename them."""

    rule_id: str
    lits: tuple[ConstraintLit, ...]
    device_of: Mapping[str, str] = field(default_factory=dict)
    capabilities: Mapping[str, str] = field(default_factory=dict)


def merge(
    catalog: Catalog,
    parts: Sequence[MergePart],
    device_eq: Sequence[ConstraintLit] = (),
    env_unification: bool = True,
) -> Problem:
    """Combine rules' constraint sets into one renamed Problem."""
    decls: list[VarDecl] = []
    index: dict[str, Domain] = {}
    string_vars: set[str] = set()
    string_pool: set[str] = set()
    constraints: list[ConstraintLit] = []
    provenance: list[str] = []

    def declare(name: str, domain: Domain, is_string: bool = False) -> None:
        old = index.get(name)
        if old is None:
            index[name] = domain
            decls.append(VarDecl(name, domain))
            if is_string:
                string_vars.add(name)
            return
        if type(old) is not type(domain) or is_string != (name in string_vars):
            raise SolverError("SortMismatch", f"{name!r} used at incompatible sorts")
        # Same variable reached through two capability views: both apply,
        # so the domain is the intersection.
        if isinstance(old, IntRange) and isinstance(domain, IntRange):
            index[name] = IntRange(max(old.lo, domain.lo), min(old.hi, domain.hi))
        elif isinstance(old, EnumDomain) and isinstance(domain, EnumDomain) and not is_string:
            if old.values != domain.values:
                index[name] = EnumDomain(tuple(v for v in old.values if v in domain.values))

    def attr_domain(part: MergePart, dev: str, attr: str) -> tuple[Domain, str, bool]:
        cap_name = part.capabilities.get(dev)
        if cap_name is None:
            raise SolverError("UnknownVariable", f"no capability known for device {dev!r}")
        spec = catalog.attribute(cap_name, attr)
        if spec.sort == "enum":
            return EnumDomain(spec.values), "str", False
        if spec.sort == "int":
            lo, hi = catalog.int_domain(cap_name, attr)
            return IntRange(lo, hi), "int", False
        if spec.sort == "bool":
            return EnumDomain(("false", "true")), "str", False
        return EnumDomain(()), "str", True  # open string; domain filled at the end

    def rename(term: Term, part: MergePart) -> Term:
        term = _normalize_term(term)
        if isinstance(term, SymInput):
            name = f"{part.rule_id}::{term.name}"
            if term.sort == "int":
                declare(name, IntRange(*DEFAULT_INT_DOMAIN))
                return SymInput(name, "int")
            declare(name, EnumDomain(()), is_string=True)
            return SymInput(name, "str")
        if isinstance(term, AttrVar):
            domain, sort, is_string = attr_domain(part, term.device, term.attribute)
            if env_unification and term.attribute in catalog.env_features:
                name = f"env::{term.attribute}"
            elif term.device in part.device_of:
                name = f"dev::{part.device_of[term.device]}::{term.attribute}"
            else:
                name = f"{part.rule_id}::{term.device}.{term.attribute}"
            declare(name, domain, is_string=is_string)
            return SymInput(name, sort)
        if isinstance(term, EventVal):
            raise SolverError("UnfoldedEvent", "event values must be folded before merging")
        if isinstance(term, Arith):
            return Arith(term.op, rename(term.lhs, part), rename(term.rhs, part))
        return term

    for part in parts:
        for lit in part.lits:
            renamed = ConstraintLit(lit.op, rename(lit.lhs, part), rename(lit.rhs, part))
            constraints.append(renamed)
            provenance.append(part.rule_id)
    for lit in device_eq:
        lit = _normalize_lit(lit)
        for term in lit_terms(lit):
            if isinstance(term, SymInput) and term.name not in index:
                if term.sort == "int":
                    declare(term.name, IntRange(*DEFAULT_INT_DOMAIN))
                else:
                    declare(term.name, EnumDomain(()), is_string=True)
        constraints.append(lit)
        provenance.append("deviceEq")

    # Open string domains: every mentioned constant plus "anything else".
    for lit in constraints:
        terms = list(lit_terms(lit))
        if any(isinstance(t, SymInput) and t.name in string_vars for t in terms):
            string_pool.update(t.value for t in terms if isinstance(t, StrConst))
    pool = tuple(sorted(string_pool)) + (OTHER_VALUE,)
    for name in string_vars:
        index[name] = EnumDomain(pool)
    decls = [VarDecl(d.name, index[d.name]) for d in decls]

    for lit in constraints:
        for side in (lit.lhs, lit.rhs):
            if not is_linear(side):
                raise SolverError("NonLinear", f"nonlinear term in {lit}")

    return Problem(tuple(decls), tuple(constraints), tuple(provenance))


# ------------------------------------------------------------- SMT-LIB


def to_smtlib(problem: Problem) -> str:
    """Render as QF_LIA text (enums integer-coded) for offline debugging."""
    enum_values: list[str] = []
    for decl in problem.vars:
        if isinstance(decl.domain, EnumDomain):
            enum_values.extend(decl.domain.values)
    for lit in problem.constraints:
        for term in lit_terms(lit):
            if isinstance(term, StrConst):
                enum_values.append(term.value)
            elif isinstance(term, BoolConst):
                enum_values.append("true" if term.value else "false")
    codes = {value: idx for idx, value in enumerate(sorted(set(enum_values)))}

    def num(n: int) -> str:
        return str(n) if n >= 0 else f"(- {-n})"

    def render(term: Term) -> str:
        term = _normalize_term(term)
        if isinstance(term, IntConst):
            return num(term.value)
        if isinstance(term, StrConst):
            return num(codes[term.value])
        if isinstance(term, SymInput):
            return f"|{term.name}|"
        assert isinstance(term, Arith)
        return f"({term.op} {render(term.lhs)} {render(term.rhs)})"

    lines = ["(set-logic QF_LIA)"]
    if codes:
        table = " ".join(f"{idx}={value}" for value, idx in sorted(codes.items(), key=lambda kv: kv[1]))
        lines.append(f"; enum codes: {table}")
    for decl in problem.vars:
        lines.append(f"(declare-const |{decl.name}| Int)")
        if isinstance(decl.domain, IntRange):
            lines.append(f"(assert (<= {num(decl.domain.lo)} |{decl.name}|))")
            lines.append(f"(assert (<= |{decl.name}| {num(decl.domain.hi)}))")
        else:
            members = " ".join(f"(= |{decl.name}| {num(codes[v])})" for v in sorted(decl.domain.values))
            lines.append(f"(assert (or {members}))" if members else "(assert false)")
    for lit in problem.constraints:
        op = {"==": "=", "!=": "distinct"}.get(lit.op, lit.op)
        lines.append(f"(assert ({op} {render(lit.lhs)} {render(lit.rhs)}))")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"
