"""Firing graph, strongly connected components, and body classification.

The firing graph has one node per rule and an edge (r, r') whenever the head
of r unifies with some non-builtin body atom of r' after renaming the two
rules apart (also when r = r').  An edge records the body positions of r'
that witness it; those witnesses drive both the mutually-recursive-body
computation and the cyclic-path machinery.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .terms import Atom, Pred, Program, Rule, mgu, rename_apart, vars_of


@dataclass(frozen=True)
class FiringGraph:
    program: Program
    edges: dict[tuple[int, int], tuple[int, ...]]  # (src, dst) -> witness positions in dst

    @cached_property
    def successors(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {i: [] for i in range(len(self.program.rules))}
        for src, dst in sorted(self.edges):
            out[src].append(dst)
        return {k: tuple(v) for k, v in out.items()}

    @property
    def nodes(self) -> range:
        return range(len(self.program.rules))


def build_firing_graph(p: Program) -> FiringGraph:
    # Tags 0/1 keep the two sides variable-disjoint even when src == dst.
    heads = [rename_apart(r, 0).head for r in p.rules]
    bodies = [rename_apart(r, 1).body for r in p.rules]
    edges: dict[tuple[int, int], list[int]] = {}
    for dst, body in enumerate(bodies):
        for pos, atom in enumerate(body):
            if atom.is_builtin:
                continue
            for src, head in enumerate(heads):
                if head.pred != atom.pred or len(head.args) != len(atom.args):
                    continue
                if mgu(head, atom) is not None:
                    edges.setdefault((src, dst), []).append(pos)
    return FiringGraph(p, {e: tuple(sorted(set(ps))) for e, ps in edges.items()})


@dataclass(frozen=True)
class SccInfo:
    components: tuple[tuple[int, ...], ...]  # topological order, each sorted
    component_of: tuple[int, ...]  # rule id -> component index
    nontrivial: tuple[bool, ...]
    preds: tuple[frozenset[Pred], ...]  # pred(C): predicates defined inside C

    def nontrivial_components(self) -> list[int]:
        return [i for i, flag in enumerate(self.nontrivial) if flag]


def scc_info(g: FiringGraph) -> SccInfo:
    """Tarjan's algorithm, iterative; components come out in topological order
    (sources of the condensation first)."""
    n = len(g.program.rules)
    succ = g.successors
    index = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    counter = 0
    components: list[list[int]] = []

    for root in range(n):
        if index[root] != -1:
            continue
        work: list[tuple[int, int]] = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while pi < len(succ[v]):
                w = succ[v][pi]
                pi += 1
                if index[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(sorted(comp))

    # Tarjan emits a component only after everything reachable from it, i.e.
    # in reverse topological order of the condensation.
    components.reverse()
    comp_of = [0] * n
    for ci, comp in enumerate(components):
        for v in comp:
            comp_of[v] = ci
    nontrivial = [False] * len(components)
    for src, dst in g.edges:
        if comp_of[src] == comp_of[dst]:
            nontrivial[comp_of[src]] = True
    preds = [
        frozenset(g.program.rules[v].head.sig for v in comp) for comp in components
    ]
    return SccInfo(
        tuple(tuple(c) for c in components),
        tuple(comp_of),
        tuple(nontrivial),
        tuple(preds),
    )


@dataclass(frozen=True)
class BodyClassification:
    """Per-rule facts about body atoms, all as sets of body positions."""

    rbody: frozenset[int]  # mutually recursive with the head
    sbody: frozenset[int]  # non-builtin atoms containing every head variable
    srbody: frozenset[int]
    relevant: bool


def classify_bodies(p: Program, g: FiringGraph, s: SccInfo) -> tuple[BodyClassification, ...]:
    """rbody from the graph's edge witnesses, sbody from variable coverage.

    A rule is relevant when it is not a fact and its non-recursive, non-builtin
    body atoms do not cover all head variables.  Builtin guards never count as
    cover: any ground instantiation satisfies guards like X <= X, so they
    cannot bound the head.
    """
    out: list[BodyClassification] = []
    for rid, rule in enumerate(p.rules):
        comp = s.component_of[rid]
        rbody: set[int] = set()
        for src in s.components[comp]:
            rbody.update(g.edges.get((src, rid), ()))
        head_vars = vars_of(rule.head)
        sbody = {
            pos
            for pos, atom in enumerate(rule.body)
            if not atom.is_builtin and head_vars <= vars_of(atom)
        }
        nonrecursive_cover: set = set()
        for pos, atom in enumerate(rule.body):
            if pos not in rbody and not atom.is_builtin:
                nonrecursive_cover |= vars_of(atom)
        relevant = bool(rule.body) and not head_vars <= nonrecursive_cover
        out.append(
            BodyClassification(
                frozenset(rbody), frozenset(sbody), frozenset(rbody & sbody), relevant
            )
        )
    return tuple(out)
