"""Symbolic sizes of terms and atoms.

The size of a term is a linear expression over natural variables: a logical
variable X contributes one natural variable x, and f(t1,...,tm) contributes
m plus the sizes of its arguments.  Constants therefore have size 0, numeric
constants included.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .terms import Atom, Compound, Term, Var


def natural_name(v: Var) -> str:
    """Natural variable attached to a logical variable.

    Logical variables start with an upper-case letter or underscore, so
    lowering only the first character keeps the map injective while matching
    the usual convention (X_2 -> x_2, Cur -> cur).
    """
    return v.name[0].lower() + v.name[1:]


@dataclass(frozen=True)
class SizeExpr:
    """constant + sum of coeff * natural-variable, all non-negative."""

    const: int = 0
    coeffs: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        if self.const < 0:
            raise ValueError("size expressions have non-negative constants")
        if any(c <= 0 for _, c in self.coeffs):
            raise ValueError("size expressions store only positive coefficients")

    @staticmethod
    def of(const: int = 0, coeffs: Mapping[str, int] | None = None) -> "SizeExpr":
        items = tuple(sorted((v, c) for v, c in (coeffs or {}).items() if c != 0))
        return SizeExpr(const, items)

    @property
    def coeff_map(self) -> dict[str, int]:
        return dict(self.coeffs)

    def __add__(self, other: "SizeExpr | int") -> "SizeExpr":
        if isinstance(other, int):
            return SizeExpr.of(self.const + other, self.coeff_map)
        merged = self.coeff_map
        for v, c in other.coeffs:
            merged[v] = merged.get(v, 0) + c
        return SizeExpr.of(self.const + other.const, merged)

    __radd__ = __add__

    def evaluate(self, env: Mapping[str, int]) -> int:
        return self.const + sum(c * env[v] for v, c in self.coeffs)

    def variables(self) -> set[str]:
        return {v for v, _ in self.coeffs}

    def substitute(self, images: Mapping[str, "SizeExpr"]) -> "SizeExpr":
        """Replace natural variables by size expressions (stays non-negative)."""
        out = SizeExpr.of(self.const)
        for v, c in self.coeffs:
            img = images.get(v)
            if img is None:
                out = out + SizeExpr.of(0, {v: c})
            else:
                for _ in range(c):
                    out = out + img
        return out

    def render(self) -> str:
        parts: list[str] = []
        if self.const or not self.coeffs:
            parts.append(str(self.const))
        for v, c in self.coeffs:
            parts.append(v if c == 1 else f"{c}·{v}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return self.render()


#: One size expression per argument position of an atom.
SizeVector = tuple[SizeExpr, ...]


def term_size(t: Term) -> SizeExpr:
    if isinstance(t, Var):
        return SizeExpr.of(0, {natural_name(t): 1})
    acc = SizeExpr.of(len(t.args))
    for a in t.args:
        acc = acc + term_size(a)
    return acc


def atom_size_vector(a: Atom) -> SizeVector:
    if a.is_builtin:
        raise ValueError(f"builtin atom {a!r} has no size vector")
    return tuple(term_size(t) for t in a.args)


def atom_total_size(a: Atom) -> SizeExpr:
    if a.is_builtin:
        raise ValueError(f"builtin atom {a!r} has no total size")
    acc = SizeExpr.of(0)
    for t in a.args:
        acc = acc + term_size(t)
    return acc
