"""Budgeted bottom-up evaluation of positive normal programs.

A semi-naive fixpoint loop: every iteration derives exactly the atoms that use
at least one atom from the previous iteration's delta in a non-builtin body
position.  Budgets (iterations, derived atoms, ground term size, wall clock)
make the engine a safe empirical oracle on programs that may not terminate.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .terms import Atom, Compound, Pred, Program, Rule, Term, Var, is_ground, vars_of

_NUMERAL = re.compile(r"-?\d+")


class EvalError(Exception):
    pass


def ground_size(t: Term) -> int:
    """Size of a ground term by direct recursion: the number of function
    symbol argument slots (constants weigh 0)."""
    if isinstance(t, Var):
        raise EvalError(f"ground_size of non-ground term {t!r}")
    return len(t.args) + sum(ground_size(a) for a in t.args)


def atom_ground_size(a: Atom) -> int:
    return sum(ground_size(t) for t in a.args)


# ---------------------------------------------------------------------------
# Ground term order for builtins


def _term_key(t: Term):
    """Total order on ground terms: numeric constants first (numerically),
    then other constants by name, then compounds by (functor, arity) and
    recursively by arguments."""
    if isinstance(t, Var):
        raise EvalError(f"cannot compare non-ground term {t!r}")
    if not t.args:
        if _NUMERAL.fullmatch(t.functor):
            return (0, int(t.functor), "")
        return (1, 0, t.functor)
    return (2, (t.functor, len(t.args)), tuple(_term_key(a) for a in t.args))


def eval_builtin(a: Atom) -> bool:
    left, right = a.args
    if not (is_ground(left) and is_ground(right)):
        raise EvalError(f"builtin {a!r} evaluated on non-ground arguments")
    if a.pred == "=":
        return left == right
    if a.pred == "!=":
        return left != right
    kl, kr = _term_key(left), _term_key(right)
    if a.pred == "<":
        return kl < kr
    if a.pred == "<=":
        return kl <= kr
    if a.pred == ">":
        return kl > kr
    return kl >= kr


# ---------------------------------------------------------------------------
# Fact store


class FactStore:
    """A set of ground atoms indexed by predicate and by the top functor of
    the first argument."""

    def __init__(self, atoms: Iterable[Atom] = ()):
        self._atoms: set[Atom] = set()
        self._by_pred: dict[Pred, set[Atom]] = {}
        self._by_first: dict[tuple[Pred, str], set[Atom]] = {}
        for a in atoms:
            self.add(a)

    def add(self, a: Atom) -> bool:
        if not is_ground(a):
            raise EvalError(f"fact store only holds ground atoms, got {a!r}")
        if a in self._atoms:
            return False
        self._atoms.add(a)
        self._by_pred.setdefault(a.sig, set()).add(a)
        if a.args and isinstance(a.args[0], Compound):
            self._by_first.setdefault((a.sig, a.args[0].functor), set()).add(a)
        return True

    def candidates(self, sig: Pred, first_functor: str | None = None) -> set[Atom]:
        if first_functor is not None:
            return self._by_first.get((sig, first_functor), set())
        return self._by_pred.get(sig, set())

    def __contains__(self, a: Atom) -> bool:
        return a in self._atoms

    def __iter__(self) -> Iterator[Atom]:
        return iter(self._atoms)

    def __len__(self) -> int:
        return len(self._atoms)


# ---------------------------------------------------------------------------
# Matching and joins


def match_term(pattern: Term, ground: Term, binding: dict[Var, Term]) -> dict[Var, Term] | None:
    """One-sided matching of a pattern with variables against a ground term."""
    if isinstance(pattern, Var):
        bound = binding.get(pattern)
        if bound is None:
            out = dict(binding)
            out[pattern] = ground
            return out
        return binding if bound == ground else None
    if isinstance(ground, Var):
        return None
    if pattern.functor != ground.functor or len(pattern.args) != len(ground.args):
        return None
    for pa, ga in zip(pattern.args, ground.args):
        binding = match_term(pa, ga, binding)
        if binding is None:
            return None
    return binding


def match_atom(pattern: Atom, ground: Atom, binding: dict[Var, Term]) -> dict[Var, Term] | None:
    if pattern.pred != ground.pred or len(pattern.args) != len(ground.args):
        return None
    for pa, ga in zip(pattern.args, ground.args):
        binding = match_term(pa, ga, binding)
        if binding is None:
            return None
    return binding


def _instantiate(t: Term, binding: Mapping[Var, Term]) -> Term:
    if isinstance(t, Var):
        try:
            return binding[t]
        except KeyError:
            raise EvalError(f"non-ground derivation: variable {t!r} unbound") from None
    if not t.args:
        return t
    return Compound(t.functor, tuple(_instantiate(a, binding) for a in t.args))


def instantiate_atom(a: Atom, binding: Mapping[Var, Term]) -> Atom:
    return Atom(a.pred, tuple(_instantiate(t, binding) for t in a.args))


def immediate_consequence(p: Program, store: FactStore, delta: FactStore) -> FactStore:
    """Semi-naive step.

    Returns the atoms derivable by a rule instantiation that uses at least one
    delta atom in a non-builtin position, minus atoms already in the store
    (the store is expected to contain the delta).  Builtin guards are
    evaluated as soon as their variables are bound.
    """
    new = FactStore()
    for rule in p.rules:
        if rule.is_fact:
            continue
        positions = [i for i, a in enumerate(rule.body) if not a.is_builtin]
        builtins = [(i, a) for i, a in enumerate(rule.body) if a.is_builtin]
        for k, delta_pos in enumerate(positions):
            _join(rule, positions, builtins, 0, k, {}, store, delta, new)
    return new


def _join(
    rule: Rule,
    positions: list[int],
    builtins: list[tuple[int, Atom]],
    idx: int,
    delta_idx: int,
    binding: dict[Var, Term],
    store: FactStore,
    delta: FactStore,
    out: FactStore,
) -> None:
    if idx == len(positions):
        for _, guard in builtins:
            if not eval_builtin(instantiate_atom(guard, binding)):
                return
        head = instantiate_atom(rule.head, binding)
        if head not in store:
            out.add(head)
        return
    pattern = rule.body[positions[idx]]
    first = _first_functor(pattern, binding)
    if idx == delta_idx:
        source = delta.candidates(pattern.sig, first)
    else:
        source = store.candidates(pattern.sig, first)
    for fact in source:
        # Positions before the delta position must use old atoms only;
        # otherwise instantiations would be found once per delta choice.
        if idx < delta_idx and fact in delta:
            continue
        extended = match_atom(pattern, fact, binding)
        if extended is None:
            continue
        ok = True
        for _, guard in builtins:
            if vars_of(guard) <= set(extended):
                if not eval_builtin(instantiate_atom(guard, extended)):
                    ok = False
                    break
        if ok:
            _join(rule, positions, builtins, idx + 1, delta_idx, extended, store, delta, out)


def _first_functor(pattern: Atom, binding: Mapping[Var, Term]) -> str | None:
    """Top functor of the pattern's first argument when known; compound
    patterns expose it directly, bound variables through the binding."""
    if not pattern.args:
        return None
    t = pattern.args[0]
    if isinstance(t, Var):
        t = binding.get(t)
    return t.functor if isinstance(t, Compound) else None


# ---------------------------------------------------------------------------
# Fixpoint loop


@dataclass(frozen=True)
class EvalBudget:
    max_iterations: int = 10_000
    max_derived_atoms: int = 1_000_000
    max_ground_term_size: int = 10_000
    wall_clock_ms: int = 30_000

    def __post_init__(self) -> None:
        for name in ("max_iterations", "max_derived_atoms", "max_ground_term_size", "wall_clock_ms"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


FIXPOINT = "FIXPOINT"
BUDGET_EXCEEDED = "BUDGET_EXCEEDED"


@dataclass(frozen=True)
class EvalOutcome:
    status: str
    model: FactStore
    iterations: int
    budget_hit: str | None = None  # iterations | atoms | term_size | wall_clock

    @property
    def reached_fixpoint(self) -> bool:
        return self.status == FIXPOINT


def fixpoint(p: Program, facts: FactStore | Iterable[Atom] = (), budget: EvalBudget = EvalBudget()) -> EvalOutcome:
    """Iterate the semi-naive step until no new atoms appear or a budget trips."""
    start = time.monotonic()
    store = FactStore()
    seed = []
    for rule in p.rules:
        if rule.is_fact:
            seed.append(rule.head)
        elif all(a.is_builtin for a in rule.body):
            # No non-builtin atom means no variables: a ground conditional
            # fact that the semi-naive step would never reach.
            if all(eval_builtin(a) for a in rule.body):
                seed.append(rule.head)
    for a in facts:
        seed.append(a)
    for a in seed:
        store.add(a)
    delta = FactStore(seed)

    iterations = 0
    while len(delta):
        if iterations >= budget.max_iterations:
            return EvalOutcome(BUDGET_EXCEEDED, store, iterations, "iterations")
        if (time.monotonic() - start) * 1000 > budget.wall_clock_ms:
            return EvalOutcome(BUDGET_EXCEEDED, store, iterations, "wall_clock")
        iterations += 1
        new = immediate_consequence(p, store, delta)
        for atom in new:
            if atom_ground_size(atom) > budget.max_ground_term_size:
                return EvalOutcome(BUDGET_EXCEEDED, store, iterations, "term_size")
        for atom in new:
            store.add(atom)
        if len(store) > budget.max_derived_atoms:
            return EvalOutcome(BUDGET_EXCEEDED, store, iterations, "atoms")
        delta = new
    return EvalOutcome(FIXPOINT, store, iterations)
