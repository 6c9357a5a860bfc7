"""Terms, atoms, rules, programs, and the substitution algebra.

Every value here is immutable after construction and every operation is a
pure function, so structures can be shared freely across threads.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

#: Comparison predicates evaluated by the bottom-up engine.  They only ever
#: appear in rule bodies and are ignored by all unification-based analysis.
BUILTIN_PREDS = frozenset({"<", "<=", ">", ">=", "=", "!="})


class Pred(NamedTuple):
    """A predicate symbol; arity is part of the identity (p/2 != p/3)."""

    name: str
    arity: int

    def __str__(self) -> str:
        return f"{self.name}/{self.arity}"


@dataclass(frozen=True)
class Var:
    """A logical variable."""

    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("variable name must be non-empty")

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Compound:
    """A function-symbol application; a zero-arity compound is a constant.

    Numeric constants are compounds whose functor is the decimal numeral.
    """

    functor: str
    args: tuple["Term", ...] = ()

    def __post_init__(self) -> None:
        if not self.functor:
            raise ValueError("functor name must be non-empty")

    def __repr__(self) -> str:
        if not self.args:
            return self.functor
        return f"{self.functor}({', '.join(map(repr, self.args))})"


Term = Union[Var, Compound]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not self.pred:
            raise ValueError("predicate name must be non-empty")
        if self.pred in BUILTIN_PREDS and len(self.args) != 2:
            raise ValueError(f"builtin atom {self.pred} requires arity 2")

    @property
    def is_builtin(self) -> bool:
        return self.pred in BUILTIN_PREDS

    @property
    def sig(self) -> Pred:
        return Pred(self.pred, len(self.args))

    def __repr__(self) -> str:
        if self.is_builtin:
            return f"{self.args[0]!r} {self.pred} {self.args[1]!r}"
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(map(repr, self.args))})"


@dataclass(frozen=True)
class Literal:
    """A body literal of a not-yet-normalized clause."""

    atom: Atom
    negated: bool = False


@dataclass(frozen=True)
class Clause:
    """A parsed clause in full generality: disjunctive head, negation in body."""

    heads: tuple[Atom, ...]
    body: tuple[Literal, ...] = ()

    def __post_init__(self) -> None:
        if not self.heads:
            raise ValueError("clause needs at least one head atom")


@dataclass(frozen=True)
class Rule:
    """A positive normal rule.  Facts are rules with an empty body."""

    head: Atom
    body: tuple[Atom, ...] = ()

    def __post_init__(self) -> None:
        if self.head.is_builtin:
            raise ValueError("rule head must not be a builtin atom")

    @property
    def is_fact(self) -> bool:
        return not self.body

    def __repr__(self) -> str:
        if self.is_fact:
            return f"{self.head!r}."
        return f"{self.head!r} :- {', '.join(map(repr, self.body))}."


@dataclass(frozen=True)
class Program:
    """A positive normal program.  Rule ids are the dense indices 0..n-1."""

    rules: tuple[Rule, ...]
    st_applied: bool = field(default=False, compare=False)

    @cached_property
    def predicate_table(self) -> dict[Pred, tuple[int, ...]]:
        """Defined predicate -> ids of the rules whose head uses it."""
        table: dict[Pred, list[int]] = {}
        for i, rule in enumerate(self.rules):
            table.setdefault(rule.head.sig, []).append(i)
        return {p: tuple(ids) for p, ids in table.items()}

    @property
    def defined_preds(self) -> frozenset[Pred]:
        return frozenset(self.predicate_table)

    def __len__(self) -> int:
        return len(self.rules)


# ---------------------------------------------------------------------------
# Variable utilities


def vars_of(x: Term | Atom | Rule | Clause) -> set[Var]:
    out: set[Var] = set()
    _collect_vars(x, out)
    return out


def _collect_vars(x, out: set[Var]) -> None:
    if isinstance(x, Var):
        out.add(x)
    elif isinstance(x, Compound):
        for a in x.args:
            _collect_vars(a, out)
    elif isinstance(x, Atom):
        for a in x.args:
            _collect_vars(a, out)
    elif isinstance(x, Rule):
        _collect_vars(x.head, out)
        for a in x.body:
            _collect_vars(a, out)
    elif isinstance(x, Clause):
        for h in x.heads:
            _collect_vars(h, out)
        for lit in x.body:
            _collect_vars(lit.atom, out)
    else:
        raise TypeError(f"cannot collect variables from {type(x).__name__}")


def is_ground(x: Term | Atom) -> bool:
    if isinstance(x, Var):
        return False
    if isinstance(x, Compound):
        return all(is_ground(a) for a in x.args)
    return all(is_ground(a) for a in x.args)


# ---------------------------------------------------------------------------
# Substitutions


class Substitution(Mapping):
    """A finite map from logical variables to terms.

    Identity bindings X/X are dropped on construction, so iterating a
    substitution never yields a variable bound to itself.
    """

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Mapping[Var, Term] | Iterable[tuple[Var, Term]] = ()):
        items = bindings.items() if isinstance(bindings, Mapping) else bindings
        self._bindings: dict[Var, Term] = {x: t for x, t in items if x != t}

    def __getitem__(self, key: Var) -> Term:
        return self._bindings[key]

    def __iter__(self) -> Iterator[Var]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __eq__(self, other) -> bool:
        if isinstance(other, Substitution):
            return self._bindings == other._bindings
        if isinstance(other, Mapping):
            return self._bindings == dict(other)
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{x!r}/{t!r}" for x, t in sorted(self._bindings.items(), key=lambda kv: kv[0].name)
        )
        return "{" + inner + "}"


def apply_substitution(x, s: Substitution):
    """Replace every free occurrence of a bound variable by its image."""
    if isinstance(x, Var):
        return s.get(x, x)
    if isinstance(x, Compound):
        if not x.args:
            return x
        return Compound(x.functor, tuple(apply_substitution(a, s) for a in x.args))
    if isinstance(x, Atom):
        if not x.args:
            return x
        return Atom(x.pred, tuple(apply_substitution(a, s) for a in x.args))
    if isinstance(x, Rule):
        return Rule(
            apply_substitution(x.head, s),
            tuple(apply_substitution(a, s) for a in x.body),
        )
    raise TypeError(f"cannot apply substitution to {type(x).__name__}")


def compose(s1: Substitution, s2: Substitution) -> Substitution:
    """Compose two substitutions: apply(x, compose(s1, s2)) == apply(apply(x, s1), s2).

    Identity bindings produced by the composition are removed, and bindings of
    s2 whose variable is already in s1's domain are shadowed.
    """
    out: dict[Var, Term] = {}
    for x, t in s1.items():
        out[x] = apply_substitution(t, s2)
    for y, u in s2.items():
        if y not in s1:
            out[y] = u
    return Substitution(out)


def occurs_in(v: Var, t: Term) -> bool:
    if isinstance(t, Var):
        return v == t
    return any(occurs_in(v, a) for a in t.args)


def mgu(a: Atom, b: Atom) -> Substitution | None:
    """Most general unifier of two atoms, or None if they do not unify.

    Callers must rename the atoms apart first.  The occurs check is on, so
    cyclic bindings are rejected.  When a variable meets another term the
    variable coming from the left atom is bound first, which makes the output
    deterministic: mgu(p(X,Y), p(W,Z)) is {X/W, Y/Z}.
    """
    if a.pred != b.pred or len(a.args) != len(b.args):
        return None
    sigma = Substitution()
    queue: deque[tuple[Term, Term]] = deque(zip(a.args, b.args))
    while queue:
        s, t = queue.popleft()
        s = apply_substitution(s, sigma)
        t = apply_substitution(t, sigma)
        if s == t:
            continue
        if isinstance(s, Var):
            if occurs_in(s, t):
                return None
            sigma = compose(sigma, Substitution({s: t}))
        elif isinstance(t, Var):
            if occurs_in(t, s):
                return None
            sigma = compose(sigma, Substitution({t: s}))
        else:
            if s.functor != t.functor or len(s.args) != len(t.args):
                return None
            queue.extend(zip(s.args, t.args))
    return sigma


def rename_apart(r: Rule, tag: int) -> Rule:
    """Rename every variable X of the rule to X_<tag>."""
    mapping = Substitution({v: Var(f"{v.name}_{tag}") for v in vars_of(r)})
    return apply_substitution(r, mapping)


# ---------------------------------------------------------------------------
# Normalization of general clauses


def st_transform(clauses: Sequence[Clause]) -> Program:
    """Turn a general program into its positive normal approximation.

    Each clause A1 | ... | Am :- body yields the m rules Ai :- body+ where
    body+ drops the negated literals.  Clause order and head order are kept.
    The result is a safe over-approximation: its minimal model contains every
    stable model of the original program, so proving it terminating bounds the
    original program's stable models as well.
    """
    rules: list[Rule] = []
    changed = False
    for clause in clauses:
        positive = tuple(lit.atom for lit in clause.body if not lit.negated)
        if len(clause.heads) > 1 or len(positive) != len(clause.body):
            changed = True
        for head in clause.heads:
            rules.append(Rule(head, positive))
    return Program(tuple(rules), st_applied=changed)


def rename_program_apart(p: Program) -> Program:
    """Give every rule its own variable namespace, tagging by rule id."""
    return Program(
        tuple(rename_apart(r, i) for i, r in enumerate(p.rules)),
        st_applied=p.st_applied,
    )
