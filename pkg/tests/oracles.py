"""Independent reference implementations used only as test oracles.

These deliberately avoid the library's indexed/semi-naive code paths: the
naive evaluator re-derives everything from scratch each round with its own
matcher, and the fact generator builds random ground atoms from a program's
own symbols.
"""

from __future__ import annotations

import random
from itertools import count

from lpterm.evaluator import eval_builtin
from lpterm.terms import Atom, Compound, Pred, Program, Term, Var, vars_of


def _match(pattern: Term, ground: Term, env: dict) -> dict | None:
    if isinstance(pattern, Var):
        if pattern in env:
            return env if env[pattern] == ground else None
        out = dict(env)
        out[pattern] = ground
        return out
    if isinstance(ground, Var):
        return None
    if pattern.functor != ground.functor or len(pattern.args) != len(ground.args):
        return None
    for p, g in zip(pattern.args, ground.args):
        env = _match(p, g, env)
        if env is None:
            return None
    return env


def _subst(t: Term, env: dict) -> Term:
    if isinstance(t, Var):
        return env[t]
    if not t.args:
        return t
    return Compound(t.functor, tuple(_subst(a, env) for a in t.args))


def _all_matches(body: tuple[Atom, ...], model: set[Atom], env: dict):
    if not body:
        yield env
        return
    atom, rest = body[0], body[1:]
    if atom.is_builtin:
        if eval_builtin(Atom(atom.pred, tuple(_subst(t, env) for t in atom.args))):
            yield from _all_matches(rest, model, env)
        return
    for fact in model:
        if fact.pred != atom.pred or len(fact.args) != len(atom.args):
            continue
        extended = env
        for p, g in zip(atom.args, fact.args):
            extended = _match(p, g, extended)
            if extended is None:
                break
        if extended is not None:
            yield from _all_matches(rest, model, extended)


def reorder_ground_first(body: tuple[Atom, ...]) -> tuple[Atom, ...]:
    """Builtins last so their variables are bound by the time they run."""
    return tuple(a for a in body if not a.is_builtin) + tuple(
        a for a in body if a.is_builtin
    )


def naive_fixpoint(p: Program, facts, max_rounds: int = 10_000) -> set[Atom]:
    """Plain T_P iteration: match every rule body against the whole model."""
    model: set[Atom] = set(facts)
    for rule in p.rules:
        if rule.is_fact:
            model.add(rule.head)
        elif all(a.is_builtin for a in rule.body):
            if all(eval_builtin(a) for a in rule.body):
                model.add(rule.head)
    for _ in range(max_rounds):
        new: set[Atom] = set()
        for rule in p.rules:
            if rule.is_fact:
                continue
            for env in _all_matches(reorder_ground_first(rule.body), model, {}):
                head = Atom(rule.head.pred, tuple(_subst(t, env) for t in rule.head.args))
                if head not in model:
                    new.add(head)
        if not new:
            return model
        model |= new
    raise RuntimeError("naive evaluation did not converge within the round limit")


def all_rule_matches(rule, model: set[Atom]):
    """Expose the oracle matcher for model-closure spot checks."""
    yield from _all_matches(reorder_ground_first(rule.body), model, {})


# ---------------------------------------------------------------------------
# Random fact sets


def program_symbols(p: Program):
    functors: set[tuple[str, int]] = set()
    constants: set[str] = set()

    def walk(t: Term):
        if isinstance(t, Var):
            return
        if t.args:
            functors.add((t.functor, len(t.args)))
            for a in t.args:
                walk(a)
        else:
            constants.add(t.functor)

    preds: set[Pred] = set()
    for rule in p.rules:
        for atom in (rule.head, *rule.body):
            if atom.is_builtin:
                continue
            preds.add(atom.sig)
            for t in atom.args:
                walk(t)
    return sorted(preds), sorted(functors), sorted(constants)


def random_ground_term(rng: random.Random, functors, constants, budget: int) -> Term:
    """A ground term whose size (argument-slot count) stays within budget."""
    if budget <= 0 or not functors or rng.random() < 0.4:
        return Compound(rng.choice(constants))
    name, arity = rng.choice(functors)
    if arity > budget:
        return Compound(rng.choice(constants))
    per_arg = (budget - arity) // arity
    return Compound(
        name,
        tuple(random_ground_term(rng, functors, constants, per_arg) for _ in range(arity)),
    )


def random_fact_set(p: Program, rng: random.Random, max_atoms: int = 4,
                    max_term_size: int = 6) -> list[Atom]:
    preds, functors, constants = program_symbols(p)
    if not constants:
        constants = ["a", "b", "1", "2"]
    else:
        constants = sorted(set(constants) | {"a", "1"})
    facts = []
    for _ in range(rng.randint(1, max_atoms)):
        pred = rng.choice(preds)
        args = tuple(
            random_ground_term(rng, functors, constants, max_term_size)
            for _ in range(pred.arity)
        )
        facts.append(Atom(pred.name, args))
    return facts


# ---------------------------------------------------------------------------
# Structural equality modulo variable renaming


def canonical_program(p: Program) -> tuple:
    out = []
    for rule in p.rules:
        fresh = count()
        names: dict[Var, str] = {}

        def canon_term(t: Term):
            if isinstance(t, Var):
                if t not in names:
                    names[t] = f"v{next(fresh)}"
                return ("var", names[t])
            return ("fn", t.functor, tuple(canon_term(a) for a in t.args))

        def canon_atom(a: Atom):
            return (a.pred, tuple(canon_term(t) for t in a.args))

        out.append((canon_atom(rule.head), tuple(canon_atom(b) for b in rule.body)))
    return tuple(out)


def alpha_equal(p1: Program, p2: Program) -> bool:
    return canonical_program(p1) == canonical_program(p2)
