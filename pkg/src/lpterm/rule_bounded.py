"""The rule-bounded criterion, plus the size-bounded check and program
expansion used to cross-validate witnesses.

A non-trivial SCC is rule-bounded when positive integer weight vectors (one
per predicate defined in the SCC) exist such that for every relevant rule some
atom of its srbody has weighted size at least the weighted head size, for all
non-negative term sizes.  A program is rule-bounded when every non-trivial SCC
is; rule-bounded programs terminate under bottom-up evaluation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .graph import BodyClassification, SccInfo, build_firing_graph, classify_bodies, scc_info
from .linsolve import (
    AlphaAssignment,
    AlphaVar,
    BilinearInequality,
    alpha_vector,
    c_ge,
    feasible_alpha,
    forall_reduction,
    group_by_variable,
    render_system,
)
from .sizes import atom_size_vector, atom_total_size
from .terms import Atom, Pred, Program, Rule, vars_of

DEFAULT_MAX_CHOICES = 4096

BOUNDED = "BOUNDED"
UNBOUNDED = "UNBOUNDED"
UNKNOWN = "UNKNOWN"
SKIPPED_TRIVIAL = "SKIPPED_TRIVIAL"

RULE_BOUNDED = "RULE_BOUNDED"
NOT_RULE_BOUNDED = "NOT_RULE_BOUNDED"


class EmptySrbodyError(ValueError):
    """A relevant rule has no srbody atom to pick: the SCC cannot satisfy the
    criterion under any choice."""

    def __init__(self, rule_id: int):
        super().__init__(f"rule r{rule_id} is relevant but srbody(r{rule_id}) is empty")
        self.rule_id = rule_id


@dataclass(frozen=True)
class SccVerdict:
    component: int
    rules: tuple[int, ...]
    status: str  # BOUNDED | UNBOUNDED | UNKNOWN | SKIPPED_TRIVIAL
    alpha: AlphaAssignment | None = None
    choice: dict[int, int] | None = None  # relevant rule id -> chosen body position
    reason: str | None = None
    constraint_dump: str | None = None


@dataclass(frozen=True)
class RuleBoundedResult:
    status: str  # RULE_BOUNDED | NOT_RULE_BOUNDED | UNKNOWN
    sccs: tuple[SccVerdict, ...]

    def bounded_sccs(self) -> list[SccVerdict]:
        return [v for v in self.sccs if v.status == BOUNDED]


def scc_constraint_system(
    p: Program,
    classification: tuple[BodyClassification, ...],
    scc_rules: tuple[int, ...],
    choice: dict[int, int],
) -> list[BilinearInequality]:
    """One inequality per relevant rule of the SCC for a fixed srbody choice."""
    relevant = [r for r in scc_rules if classification[r].relevant]
    system: list[BilinearInequality] = []
    for rid in relevant:
        info = classification[rid]
        if not info.srbody:
            raise EmptySrbodyError(rid)
        if rid not in choice or choice[rid] not in info.srbody:
            raise ValueError(f"choice must pick one srbody atom for rule r{rid}")
        rule = p.rules[rid]
        chosen = rule.body[choice[rid]]
        system.append(
            BilinearInequality(
                pos_pred=chosen.sig,
                pos_vec=atom_size_vector(chosen),
                neg_pred=rule.head.sig,
                neg_vec=atom_size_vector(rule.head),
            )
        )
    return system


def _alpha_space(preds: frozenset[Pred]) -> list[AlphaVar]:
    out: list[AlphaVar] = []
    for pred in sorted(preds):
        out.extend(alpha_vector(pred))
    return out


def check_scc_rule_bounded(
    p: Program,
    classification: tuple[BodyClassification, ...],
    scc: SccInfo,
    component: int,
    max_choices: int = DEFAULT_MAX_CHOICES,
) -> SccVerdict:
    """Search the cartesian product of srbody choices for a feasible system.

    Choices are enumerated lazily, rules in id order and atoms in body-position
    order; the first feasible system wins.  Exceeding the choice cap without a
    witness yields UNKNOWN, which is never conflated with UNBOUNDED.
    """
    rules = scc.components[component]
    relevant = [r for r in rules if classification[r].relevant]
    alpha_vars = _alpha_space(scc.preds[component])

    for rid in relevant:
        if not classification[rid].srbody:
            return SccVerdict(
                component,
                rules,
                UNBOUNDED,
                reason=f"EMPTY_SRBODY(r{rid})",
            )

    if not relevant:
        alpha = {v: 1 for v in alpha_vars}
        return SccVerdict(component, rules, BOUNDED, alpha=alpha, choice={})

    options = [sorted(classification[rid].srbody) for rid in relevant]
    last_dump: str | None = None
    checked = 0
    for combo in itertools.product(*options):
        if checked >= max_choices:
            return SccVerdict(
                component,
                rules,
                UNKNOWN,
                reason=f"CHOICE_CAP_EXCEEDED({max_choices})",
            )
        checked += 1
        choice = dict(zip(relevant, combo))
        system = scc_constraint_system(p, classification, rules, choice)
        grouped = [group_by_variable(b) for b in system]
        constraints = [e for g in grouped for e in forall_reduction(g)]
        alpha = feasible_alpha(constraints, alpha_vars)
        if alpha is not None:
            # Mandatory re-verification against the chosen inequalities.
            assert all(e.evaluate(alpha) >= 0 for e in constraints)
            return SccVerdict(component, rules, BOUNDED, alpha=alpha, choice=choice)
        last_dump = render_system([c_ge(e) for e in constraints])
    return SccVerdict(
        component,
        rules,
        UNBOUNDED,
        reason="INFEASIBLE_ALL_CHOICES",
        constraint_dump=last_dump,
    )


def check_program_rule_bounded(
    p: Program, max_choices: int = DEFAULT_MAX_CHOICES
) -> RuleBoundedResult:
    """Check every non-trivial SCC; trivial ones are skipped (they cannot fire
    themselves repeatedly, so they derive finitely many atoms)."""
    g = build_firing_graph(p)
    s = scc_info(g)
    classification = classify_bodies(p, g, s)
    verdicts: list[SccVerdict] = []
    for ci, comp in enumerate(s.components):
        if not s.nontrivial[ci]:
            verdicts.append(SccVerdict(ci, comp, SKIPPED_TRIVIAL))
            continue
        verdicts.append(check_scc_rule_bounded(p, classification, s, ci, max_choices))
    if any(v.status == UNBOUNDED for v in verdicts):
        status = NOT_RULE_BOUNDED
    elif any(v.status == UNKNOWN for v in verdicts):
        status = UNKNOWN
    else:
        status = RULE_BOUNDED
    return RuleBoundedResult(status, tuple(verdicts))


# ---------------------------------------------------------------------------
# Size-bounded programs and program expansion (witness cross-validation)


@dataclass(frozen=True)
class SizeBoundedResult:
    size_bounded: bool
    witnesses: dict[int, int] = field(default_factory=dict)  # rule id -> sbody position
    failing_rule: int | None = None


def _tsize_dominates(b: Atom, head: Atom) -> bool:
    """tsize(b) - tsize(head) >= 0 for all non-negative naturals: per-variable
    net coefficient >= 0 and constant >= 0 (the constant-coefficient instance
    of the grouping argument)."""
    tb, th = atom_total_size(b), atom_total_size(head)
    if tb.const - th.const < 0:
        return False
    bc, hc = tb.coeff_map, th.coeff_map
    return all(bc.get(x, 0) - c >= 0 for x, c in hc.items())


def check_size_bounded(p: Program) -> SizeBoundedResult:
    """Every non-fact rule needs an sbody atom whose total size dominates the
    head's total size for all non-negative term sizes."""
    witnesses: dict[int, int] = {}
    for rid, rule in enumerate(p.rules):
        if rule.is_fact:
            continue
        found = None
        head_vars = vars_of(rule.head)
        for pos, atom in enumerate(rule.body):
            if atom.is_builtin or not head_vars <= vars_of(atom):
                continue
            if _tsize_dominates(atom, rule.head):
                found = pos
                break
        if found is None:
            return SizeBoundedResult(False, witnesses, failing_rule=rid)
        witnesses[rid] = found
    return SizeBoundedResult(True, witnesses)


def expand_program(p: Program, omega: dict[Pred, tuple[int, ...]]) -> Program:
    """Duplicate each argument t_j of an atom omega[pred][j] times.

    Atoms whose predicate is not in omega (and builtins) are left unchanged;
    omega must cover every predicate defined by the program and use positive
    counts matching the arities.
    """
    for pred, vec in omega.items():
        if len(vec) != pred.arity:
            raise ValueError(f"expansion vector for {pred} must have length {pred.arity}")
        if any(k < 1 for k in vec):
            raise ValueError(f"expansion vector for {pred} must be positive")
    missing = p.defined_preds - set(omega)
    if missing:
        raise ValueError(f"expansion must cover defined predicates: {sorted(map(str, missing))}")

    def expand_atom(a: Atom) -> Atom:
        vec = omega.get(a.sig)
        if a.is_builtin or vec is None:
            return a
        args: list = []
        for t, k in zip(a.args, vec):
            args.extend([t] * k)
        return Atom(a.pred, tuple(args))

    rules = tuple(
        Rule(expand_atom(r.head), tuple(expand_atom(b) for b in r.body)) for r in p.rules
    )
    return Program(rules, st_applied=p.st_applied)


def restrict_to_relevant(
    p: Program, classification: tuple[BodyClassification, ...], rule_ids: tuple[int, ...]
) -> Program:
    """The subprogram of the given rules that are relevant (Rel of an SCC)."""
    return Program(tuple(p.rules[r] for r in rule_ids if classification[r].relevant))


def alpha_to_omega(alpha: AlphaAssignment) -> dict[Pred, tuple[int, ...]]:
    """Regroup a flat alpha assignment into per-predicate expansion vectors."""
    preds = {v.pred for v in alpha}
    return {
        pred: tuple(alpha[AlphaVar(pred, i)] for i in range(1, pred.arity + 1))
        for pred in preds
    }
