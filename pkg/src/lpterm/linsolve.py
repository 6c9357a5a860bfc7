"""Exact decision procedures for the two constraint shapes the criteria need.

1.  "A bilinear inequality holds for every non-negative value of its natural
    variables": grouping by natural variable turns the inequality into
    gamma_1*x_1 + ... + gamma_n*x_n + gamma_0 >= 0 with alpha-linear gammas,
    and the for-all holds iff every gamma is >= 0 (each gamma becomes one
    linear constraint over the alpha variables).

2.  Satisfiability of systems of linear equalities and strict/non-strict
    inequalities over non-negative rationals, decided by Fourier-Motzkin
    elimination with a strictness flag per derived inequality.

All arithmetic is exact (ints and Fractions); no floating point anywhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Hashable, Iterable, Mapping, Sequence

from .sizes import SizeExpr, SizeVector
from .terms import Pred

# ---------------------------------------------------------------------------
# Linear expressions and constraints


class LinExpr:
    """An immutable linear expression over hashable variables with Fraction
    coefficients.  Used both for natural-variable systems (str keys) and for
    alpha systems (AlphaVar keys)."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: Mapping[Hashable, int | Fraction] | None = None,
                 const: int | Fraction = 0):
        self.coeffs: dict[Hashable, Fraction] = {
            v: Fraction(c) for v, c in (coeffs or {}).items() if c != 0
        }
        self.const = Fraction(const)

    @staticmethod
    def var(v: Hashable, coeff: int | Fraction = 1) -> "LinExpr":
        return LinExpr({v: coeff})

    @staticmethod
    def from_size(e: SizeExpr) -> "LinExpr":
        return LinExpr(dict(e.coeffs), e.const)

    def __add__(self, other: "LinExpr | int | Fraction") -> "LinExpr":
        if not isinstance(other, LinExpr):
            return LinExpr(self.coeffs, self.const + Fraction(other))
        merged = dict(self.coeffs)
        for v, c in other.coeffs.items():
            merged[v] = merged.get(v, Fraction(0)) + c
        return LinExpr(merged, self.const + other.const)

    def __sub__(self, other: "LinExpr | int | Fraction") -> "LinExpr":
        if not isinstance(other, LinExpr):
            return LinExpr(self.coeffs, self.const - Fraction(other))
        return self + other.scale(-1)

    def __neg__(self) -> "LinExpr":
        return self.scale(-1)

    def scale(self, k: int | Fraction) -> "LinExpr":
        k = Fraction(k)
        return LinExpr({v: c * k for v, c in self.coeffs.items()}, self.const * k)

    def substitute(self, v: Hashable, image: "LinExpr") -> "LinExpr":
        c = self.coeffs.get(v)
        if c is None:
            return self
        rest = LinExpr({u: k for u, k in self.coeffs.items() if u != v}, self.const)
        return rest + image.scale(c)

    def evaluate(self, env: Mapping[Hashable, int | Fraction]) -> Fraction:
        return self.const + sum(
            (c * Fraction(env[v]) for v, c in self.coeffs.items()), Fraction(0)
        )

    def variables(self) -> set[Hashable]:
        return set(self.coeffs)

    @property
    def is_const(self) -> bool:
        return not self.coeffs

    def key(self) -> tuple:
        return (tuple(sorted(((str(v), c) for v, c in self.coeffs.items()))), self.const)

    def __eq__(self, other) -> bool:
        return isinstance(other, LinExpr) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def render(self) -> str:
        # Scale to integer coefficients for display; dumps stay exact.
        mult = lcm(*(c.denominator for c in self.coeffs.values()), self.const.denominator) \
            if (self.coeffs or self.const) else 1
        parts: list[str] = []
        for v, c in sorted(self.coeffs.items(), key=lambda kv: str(kv[0])):
            ci = c * mult
            mag = abs(ci)
            piece = str(v) if mag == 1 else f"{mag}·{v}"
            if not parts:
                parts.append(piece if ci > 0 else f"-{piece}")
            else:
                parts.append(f"+ {piece}" if ci > 0 else f"- {piece}")
        k = self.const * mult
        if k != 0 or not parts:
            ki = f"{abs(k)}"
            if not parts:
                parts.append(str(k))
            else:
                parts.append(f"+ {ki}" if k > 0 else f"- {ki}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return self.render()


REL_EQ = "="
REL_GE = ">="
REL_GT = ">"


@dataclass(frozen=True)
class Constraint:
    """expr REL 0 over non-negative rational variables."""

    expr: LinExpr
    rel: str

    def render(self) -> str:
        return f"{self.expr.render()} {self.rel} 0"

    def holds(self, env: Mapping[Hashable, int | Fraction]) -> bool:
        val = self.expr.evaluate(env)
        if self.rel == REL_EQ:
            return val == 0
        if self.rel == REL_GE:
            return val >= 0
        return val > 0


def c_eq(e: LinExpr) -> Constraint:
    return Constraint(e, REL_EQ)


def c_ge(e: LinExpr) -> Constraint:
    return Constraint(e, REL_GE)


def c_gt(e: LinExpr) -> Constraint:
    return Constraint(e, REL_GT)


def render_system(constraints: Iterable[Constraint]) -> str:
    """Plain-text dump, one constraint per line, exact integer coefficients."""
    return "\n".join(c.render() for c in constraints)


def verify_assignment(constraints: Iterable[Constraint],
                      env: Mapping[Hashable, int | Fraction]) -> bool:
    return all(c.holds(env) for c in constraints)


# ---------------------------------------------------------------------------
# Satisfiability over non-negative rationals (Fourier-Motzkin)


def satisfiable_nonneg(constraints: Sequence[Constraint]) -> dict | None:
    """Decide the system over non-negative rationals; return a witness or None.

    Equalities are eliminated by exact Gaussian substitution (the eliminated
    variable's non-negativity is re-added as an inequality), then variables are
    eliminated one at a time by Fourier-Motzkin.  Each derived inequality
    carries a strictness flag; a contradiction is a constant c >= 0 with c < 0
    or c > 0 with c <= 0.
    """
    work = [(c.expr, c.rel) for c in constraints]
    bindings: list[tuple[Hashable, LinExpr]] = []

    # Equality elimination.
    while True:
        eq_idx = next((i for i, (e, r) in enumerate(work) if r == REL_EQ), None)
        if eq_idx is None:
            break
        expr, _ = work.pop(eq_idx)
        if expr.is_const:
            if expr.const != 0:
                return None
            continue
        v = min(expr.variables(), key=str)
        c = expr.coeffs[v]
        image = LinExpr({u: k for u, k in expr.coeffs.items() if u != v},
                        expr.const).scale(Fraction(-1, 1) / c)
        bindings.append((v, image))
        work = [(e.substitute(v, image), r) for e, r in work]
        work.append((image, REL_GE))  # the eliminated variable stays >= 0

    variables = sorted({v for e, _ in work for v in e.variables()}, key=str)
    for v in variables:
        work.append((LinExpr.var(v), REL_GE))

    # Fourier-Motzkin elimination; record bounds for witness extraction.
    records: list[tuple[Hashable, list, list]] = []
    remaining = list(variables)
    while remaining:
        v = min(
            remaining,
            key=lambda u: (sum(1 for e, _ in work if u in e.coeffs), str(u)),
        )
        remaining.remove(v)
        lowers, uppers, rest = [], [], []
        for e, r in work:
            c = e.coeffs.get(v)
            if not c:
                rest.append((e, r))
            elif c > 0:
                lowers.append((e, r, c))
            else:
                uppers.append((e, r, c))
        records.append((v, lowers, uppers))
        new = rest
        for (el, rl, cl), (eu, ru, cu) in itertools.product(lowers, uppers):
            combined = el.scale(-cu) + eu.scale(cl)
            rel = REL_GT if REL_GT in (rl, ru) else REL_GE
            if combined.is_const:
                if combined.const < 0 or (rel == REL_GT and combined.const == 0):
                    return None
                continue
            new.append((combined, rel))
        # Deduplicate to keep the blowup in check.
        seen: set = set()
        work = []
        for e, r in new:
            if e.is_const:
                if e.const < 0 or (r == REL_GT and e.const == 0):
                    return None
                continue
            k = (e.key(), r)
            if k not in seen:
                seen.add(k)
                work.append((e, r))

    for e, r in work:  # only constants can remain
        if e.const < 0 or (r == REL_GT and e.const == 0):
            return None

    # Back-substitute a witness.
    env: dict = {}
    for v, lowers, uppers in reversed(records):
        lo, lo_strict = Fraction(0), False
        for e, r, c in lowers:
            rest = LinExpr({u: k for u, k in e.coeffs.items() if u != v}, e.const)
            bound = -rest.evaluate(env) / c
            strict = r == REL_GT
            if bound > lo or (bound == lo and strict and not lo_strict):
                lo, lo_strict = bound, strict
        hi: Fraction | None = None
        hi_strict = False
        for e, r, c in uppers:
            rest = LinExpr({u: k for u, k in e.coeffs.items() if u != v}, e.const)
            bound = -rest.evaluate(env) / c
            strict = r == REL_GT
            if hi is None or bound < hi or (bound == hi and strict and not hi_strict):
                hi, hi_strict = bound, strict
        if hi is None:
            env[v] = lo + 1 if lo_strict else lo
        elif lo_strict or hi_strict:
            env[v] = (lo + hi) / 2 if lo != hi else lo
        else:
            env[v] = lo
    for v, image in reversed(bindings):
        env[v] = image.evaluate(env)

    assert verify_assignment(constraints, env), "internal: witness failed re-check"
    return env


# ---------------------------------------------------------------------------
# Alpha variables, bilinear inequalities, and the for-all reduction


@dataclass(frozen=True)
class AlphaVar:
    """The i-th weight of a predicate's vector (1-based index)."""

    pred: Pred
    index: int

    def __post_init__(self) -> None:
        if not 1 <= self.index <= self.pred.arity:
            raise ValueError(f"index {self.index} out of range for {self.pred}")

    def __str__(self) -> str:
        return f"α_{self.pred.name}[{self.index}]"

    def __repr__(self) -> str:
        return str(self)


def alpha_vector(pred: Pred) -> tuple[AlphaVar, ...]:
    return tuple(AlphaVar(pred, i) for i in range(1, pred.arity + 1))


#: Positive-integer weights, one per AlphaVar.
AlphaAssignment = dict[AlphaVar, int]


@dataclass(frozen=True)
class BilinearInequality:
    """alpha_pos . pos_vec - alpha_neg . neg_vec >= 0, quantified over all
    non-negative values of the natural variables in the size vectors."""

    pos_pred: Pred
    pos_vec: SizeVector
    neg_pred: Pred
    neg_vec: SizeVector

    def __post_init__(self) -> None:
        if len(self.pos_vec) != self.pos_pred.arity or len(self.neg_vec) != self.neg_pred.arity:
            raise ValueError("size vector length must match predicate arity")

    def evaluate(self, alpha: Mapping[AlphaVar, int], env: Mapping[str, int]) -> Fraction:
        total = Fraction(0)
        for vec, pred, sign in ((self.pos_vec, self.pos_pred, 1), (self.neg_vec, self.neg_pred, -1)):
            for i, se in enumerate(vec, start=1):
                total += sign * alpha[AlphaVar(pred, i)] * se.evaluate(env)
        return total


@dataclass(frozen=True)
class GroupedInequality:
    """The same inequality with terms grouped per natural variable:
    sum_x gamma_x * x + gamma_0 >= 0, each gamma alpha-linear."""

    groups: tuple[tuple[str, LinExpr], ...]  # sorted by natural variable
    const_group: LinExpr

    def group_map(self) -> dict[str, LinExpr]:
        return dict(self.groups)

    def evaluate(self, alpha: Mapping[AlphaVar, int], env: Mapping[str, int]) -> Fraction:
        total = self.const_group.evaluate(alpha)
        for x, gamma in self.groups:
            total += gamma.evaluate(alpha) * env[x]
        return total

    def render(self) -> str:
        parts = [f"({g.render()})·{x}" for x, g in self.groups]
        parts.append(f"({self.const_group.render()})")
        return " + ".join(parts) + " >= 0"


def group_by_variable(b: BilinearInequality) -> GroupedInequality:
    """Expand the two scalar products and collect per natural variable."""
    groups: dict[str, LinExpr] = {}
    const_group = LinExpr()
    for vec, pred, sign in ((b.pos_vec, b.pos_pred, 1), (b.neg_vec, b.neg_pred, -1)):
        for i, se in enumerate(vec, start=1):
            av = LinExpr.var(AlphaVar(pred, i), sign)
            if se.const:
                const_group = const_group + av.scale(se.const)
            for x, k in se.coeffs:
                groups[x] = groups.get(x, LinExpr()) + av.scale(k)
    groups = {x: g for x, g in groups.items() if g.coeffs or g.const}
    return GroupedInequality(tuple(sorted(groups.items())), const_group)


def forall_reduction(g: GroupedInequality) -> list[LinExpr]:
    """One constraint gamma >= 0 per group, constant group included.

    The conjunction is equivalent to the grouped inequality holding for every
    non-negative value of the natural variables.  Identically-zero groups and
    trivially true constant groups are dropped; a constant group that is
    negative stays (it makes the system infeasible).
    """
    out: list[LinExpr] = []
    for _, gamma in g.groups:
        if gamma.is_const and gamma.const >= 0:
            continue
        out.append(gamma)
    gamma0 = g.const_group
    if not (gamma0.is_const and gamma0.const >= 0):
        out.append(gamma0)
    return out


def feasible_alpha(constraints: Sequence[LinExpr],
                   alpha_vars: Iterable[AlphaVar] = ()) -> AlphaAssignment | None:
    """Find positive integers for the alpha variables satisfying every
    constraint (each read as expr >= 0), or None if there are none.

    The system is decided exactly over rationals with every alpha >= 1; a
    rational witness is scaled by the common denominator to integers.  The
    constraints produced by forall_reduction are homogeneous in the alphas, so
    scaling preserves them; a final exact verification guards the result.
    """
    avs = sorted(set(alpha_vars) | {v for e in constraints for v in e.variables()}, key=str)
    system = [c_ge(e) for e in constraints]
    system += [c_ge(LinExpr.var(v) - 1) for v in avs]
    sol = satisfiable_nonneg(system)
    if sol is None:
        return None
    mult = lcm(*(Fraction(sol[v]).denominator for v in avs)) if avs else 1
    assignment: AlphaAssignment = {v: int(Fraction(sol[v]) * mult) for v in avs}
    for e in constraints:
        if e.evaluate(assignment) < 0:
            raise ArithmeticError(
                "integer scaling failed; constraints are not homogeneous: "
                + e.render()
            )
    return assignment


def brute_force_alpha(constraints: Sequence[LinExpr], bound: int,
                      alpha_vars: Iterable[AlphaVar] = ()) -> AlphaAssignment | None:
    """Exhaustive search over {1..bound}^k; a test oracle, not a solver."""
    if bound < 1:
        raise ValueError("bound must be at least 1")
    avs = sorted(set(alpha_vars) | {v for e in constraints for v in e.variables()}, key=str)
    if len(avs) > 8:
        raise ValueError(f"brute force capped at 8 alpha variables, got {len(avs)}")
    for values in itertools.product(range(1, bound + 1), repeat=len(avs)):
        assignment = dict(zip(avs, values))
        if all(e.evaluate(assignment) >= 0 for e in constraints):
            return assignment
    return None
