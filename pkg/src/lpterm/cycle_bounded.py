"""The cycle-bounded criterion.

Instead of bounding each rule on its own, this criterion follows entire
cycles of the firing graph.  For a linear program (every rule keeps at most
one mutually recursive body atom), a basic cyclic path r_1 -> ... -> r_n -> r_1
induces size equalities eq(pi) from the unifiers along consecutive edges, and
the path is cycle-bounded when eq(pi) is satisfiable and some positive weight
vector makes the entry body atom of r_1 weigh at least the exit head of r_n on
every non-negative solution of eq(pi).

Deciding a path uses the complement procedure: with w_i the componentwise
difference size(rbody(r_1))[i] - size(head(r_n))[i], the path FAILS exactly
when eq(pi) plus {w_1 <= 0, ..., w_j < 0, ..., w_k <= 0} is satisfiable for
some j (for fixed w values, "sum alpha_i w_i < 0 for all positive alpha" holds
iff all w_i <= 0 with one strict).  Non-linear programs are handled by
checking every linear version: each rule with several mutually recursive body
atoms is split, keeping one of them per version.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

from .graph import BodyClassification, FiringGraph, build_firing_graph, classify_bodies, scc_info
from .linsolve import (
    AlphaAssignment,
    BilinearInequality,
    Constraint,
    LinExpr,
    alpha_vector,
    c_eq,
    c_ge,
    c_gt,
    feasible_alpha,
    forall_reduction,
    group_by_variable,
    render_system,
    satisfiable_nonneg,
)
from .sizes import SizeExpr, atom_size_vector, natural_name, term_size
from .terms import Program, Rule, mgu, rename_apart

DEFAULT_MAX_VERSIONS = 256
DEFAULT_MAX_PATHS = 10_000

CYCLE_BOUNDED = "CYCLE_BOUNDED"
NOT_CYCLE_BOUNDED = "NOT_CYCLE_BOUNDED"
UNKNOWN = "UNKNOWN"

PATH_CYCLE_BOUNDED = "CYCLE_BOUNDED"
FAIL_EQ_UNSAT = "FAIL_EQ_UNSAT"
FAIL_COMPLEMENT = "FAIL_COMPLEMENT"

VACUOUS_FAIL = "fail"
VACUOUS_BOUNDED = "bounded"


@dataclass(frozen=True)
class LinearVersion:
    """A linear version of a program: every rule with a non-empty rbody keeps
    exactly one of its mutually recursive body atoms (rules with empty rbody
    cannot lie on a cycle and are carried through unchanged)."""

    program: Program
    kept: tuple[int | None, ...]  # original body position kept per rule


def linear_versions(
    p: Program, classification: tuple[BodyClassification, ...]
) -> Iterator[LinearVersion]:
    """Lazily enumerate the cartesian product of rbody choices."""
    options: list[list[int | None]] = []
    for rid, rule in enumerate(p.rules):
        rbody = sorted(classification[rid].rbody)
        options.append(rbody if rbody else [None])
    for combo in itertools.product(*options):
        rules = []
        for rid, keep in enumerate(combo):
            rule = p.rules[rid]
            if keep is None:
                rules.append(rule)
            else:
                rules.append(Rule(rule.head, (rule.body[keep],)))
        yield LinearVersion(Program(tuple(rules)), tuple(combo))


def count_linear_versions(classification: tuple[BodyClassification, ...]) -> int:
    n = 1
    for info in classification:
        n *= max(1, len(info.rbody))
    return n


def basic_cyclic_paths(g: FiringGraph, cap: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Enumerate basic cyclic paths: closed edge sequences that reuse no edge.

    Paths are anchored at their starting edge, so rotations of the same cycle
    are enumerated as distinct paths.  Enumeration is depth-first over sorted
    edges and stops after `cap` paths (callers treat the cutoff as UNKNOWN).
    """
    edges = sorted(g.edges)
    out_edges: dict[int, list[tuple[int, int]]] = {}
    for e in edges:
        out_edges.setdefault(e[0], []).append(e)

    def extend(start: int, node: int, used: set, path: list) -> Iterator[tuple]:
        """Every edge-distinct continuation of `path` that closes at `start`,
        including ones that pass through `start` and close again later."""
        for e in out_edges.get(node, ()):
            if e in used:
                continue
            used.add(e)
            path.append(e)
            if e[1] == start:
                yield tuple(path)
            yield from extend(start, e[1], used, path)
            path.pop()
            used.remove(e)

    emitted = 0
    for first in edges:
        start = first[0]
        seed = [(first,)] if first[1] == start else []
        for path in itertools.chain(seed, extend(start, first[1], {first}, [first])):
            yield path
            emitted += 1
            if emitted >= cap:
                return


@dataclass(frozen=True)
class CyclicPath:
    """A basic cyclic path with one renamed-apart rule copy per position.

    The same rule may occur at several positions; each occurrence gets fresh
    variables.  thetas[i] is the unifier of head(copies[i]) with the recursive
    body atom of copies[i+1]; the closing edge back to position 0 contributes
    no unifier and no equality.
    """

    edges: tuple[tuple[int, int], ...]
    copies: tuple[Rule, ...]

    @property
    def entry_atom(self):
        return self.copies[0].body[0]

    @property
    def exit_head(self):
        return self.copies[-1].head


def build_path(version: Program, edge_seq: tuple[tuple[int, int], ...],
               tags: Iterator[int]) -> CyclicPath:
    copies = []
    for src, _dst in edge_seq:
        rule = version.rules[src]
        if len(rule.body) != 1:
            raise ValueError("only single-atom rules can lie on a cycle of a linear version")
        copies.append(rename_apart(rule, next(tags)))
    return CyclicPath(edge_seq, tuple(copies))


def path_equalities(path: CyclicPath) -> list[tuple[str, SizeExpr]]:
    """eq(pi): one equality x = size(t) per binding X/t of each unifier along
    the path, for edges 1..n-1 (the closing edge adds nothing)."""
    pairs: list[tuple[str, SizeExpr]] = []
    for i in range(len(path.copies) - 1):
        theta = mgu(path.copies[i].head, path.copies[i + 1].body[0])
        if theta is None:
            raise ValueError("firing-graph edge without a unifier")
        for x in sorted(theta, key=lambda v: v.name):
            pairs.append((natural_name(x), term_size(theta[x])))
    return pairs


def _equality_constraints(pairs: list[tuple[str, SizeExpr]]) -> list[Constraint]:
    return [c_eq(LinExpr.var(x) - LinExpr.from_size(e)) for x, e in pairs]


def _functional_substitution(
    pairs: list[tuple[str, SizeExpr]]
) -> dict[str, SizeExpr] | None:
    """Orient eq(pi) as an acyclic substitution x := size-expression if it has
    that shape.  Images are size expressions (non-negative coefficients), so
    substituting preserves the non-negative quantification domain.  Returns
    None when a variable is equated twice or occurs in its own image; the
    complement procedure still decides those paths."""
    subst: dict[str, SizeExpr] = {}
    for x, e in pairs:
        image = e.substitute(subst)
        if x in subst:
            if subst[x] == image:
                continue
            return None
        if x in image.variables():
            return None
        subst = {y: img.substitute({x: image}) for y, img in subst.items()}
        subst[x] = image
    return subst


@dataclass(frozen=True)
class PathVerdict:
    status: str  # CYCLE_BOUNDED | FAIL_EQ_UNSAT | FAIL_COMPLEMENT
    edges: tuple[tuple[int, int], ...]
    eq_pairs: tuple[tuple[str, SizeExpr], ...]
    w_exprs: tuple[LinExpr, ...]
    fail_index: int | None = None  # 1-based j of the satisfiable complement system
    witness: dict | None = None  # rational solution of the complement system
    alpha: AlphaAssignment | None = None  # direct witness, when extraction succeeded
    direct_attempted: bool = False
    direct_agrees: bool | None = None
    witness_integral: bool | None = None


def check_path(path: CyclicPath) -> PathVerdict:
    """Decide one relevant basic cyclic path.

    1. eq(pi) unsatisfiable -> FAIL_EQ_UNSAT (the criterion requires a
       fireable cycle witness).
    2. For each component j: if eq(pi) + {all w_i <= 0, w_j < 0} is
       satisfiable the path fails with that witness.
    3. Otherwise the path is cycle-bounded; additionally try to extract a
       direct weight-vector witness by substituting eq(pi) into the w's and
       solving the grouped system.  Whether the two routes agree is recorded
       as a diagnostic.
    """
    eq_pairs = path_equalities(path)
    eq_constraints = _equality_constraints(eq_pairs)

    entry_vec = atom_size_vector(path.entry_atom)
    exit_vec = atom_size_vector(path.exit_head)
    pred = path.exit_head.sig
    if path.entry_atom.sig != pred:
        raise ValueError("closing edge must connect atoms of one predicate")
    ws = tuple(
        LinExpr.from_size(b) - LinExpr.from_size(h) for b, h in zip(entry_vec, exit_vec)
    )

    if satisfiable_nonneg(eq_constraints) is None:
        return PathVerdict(FAIL_EQ_UNSAT, path.edges, tuple(eq_pairs), ws)

    for j in range(len(ws)):
        system = list(eq_constraints)
        for i, w in enumerate(ws):
            system.append(c_gt(-w) if i == j else c_ge(-w))
        witness = satisfiable_nonneg(system)
        if witness is not None:
            integral = all(Fraction(v).denominator == 1 for v in witness.values())
            return PathVerdict(
                FAIL_COMPLEMENT,
                path.edges,
                tuple(eq_pairs),
                ws,
                fail_index=j + 1,
                witness=witness,
                witness_integral=integral,
            )

    alpha = None
    attempted = False
    subst = _functional_substitution(eq_pairs)
    if subst is not None:
        attempted = True
        bil = BilinearInequality(
            pos_pred=pred,
            pos_vec=tuple(se.substitute(subst) for se in entry_vec),
            neg_pred=pred,
            neg_vec=tuple(se.substitute(subst) for se in exit_vec),
        )
        alpha = feasible_alpha(
            forall_reduction(group_by_variable(bil)), alpha_vector(pred)
        )
    agrees = (alpha is not None) if attempted else None
    return PathVerdict(
        PATH_CYCLE_BOUNDED,
        path.edges,
        tuple(eq_pairs),
        ws,
        alpha=alpha,
        direct_attempted=attempted,
        direct_agrees=agrees,
    )


@dataclass(frozen=True)
class PathFailure:
    version_kept: tuple[int | None, ...]
    verdict: PathVerdict


@dataclass(frozen=True)
class CycleBoundedResult:
    status: str  # CYCLE_BOUNDED | NOT_CYCLE_BOUNDED | UNKNOWN
    versions_checked: int
    paths_checked: int
    failure: PathFailure | None = None
    reason: str | None = None
    diagnostics: tuple[str, ...] = ()
    vacuous_paths: int = 0
    bounded_paths: tuple[tuple[tuple[int | None, ...], PathVerdict], ...] = ()


def check_program_cycle_bounded(
    p: Program,
    max_versions: int = DEFAULT_MAX_VERSIONS,
    max_paths: int = DEFAULT_MAX_PATHS,
    vacuous_cycles: str = VACUOUS_FAIL,
) -> CycleBoundedResult:
    """The program is cycle-bounded when every relevant basic cyclic path of
    every linear version is cycle-bounded.

    A failing path anywhere is definitive even when caps were hit elsewhere;
    exhausting a cap without a failure downgrades the verdict to UNKNOWN
    (never to a false CYCLE_BOUNDED).  With vacuous_cycles="bounded", paths
    whose eq(pi) is unsatisfiable (cycles that can never fire) are treated as
    bounded; that deviates from the strict reading of the criterion and is
    reported in the diagnostics.
    """
    base_graph = build_firing_graph(p)
    base_scc = scc_info(base_graph)
    base_cls = classify_bodies(p, base_graph, base_scc)

    total_versions = count_linear_versions(base_cls)
    capped = total_versions > max_versions
    tags = itertools.count(start=len(p.rules))

    versions_checked = 0
    paths_checked = 0
    vacuous = 0
    diagnostics: list[str] = []
    bounded_paths: list[tuple[tuple[int | None, ...], PathVerdict]] = []

    for version in itertools.islice(linear_versions(p, base_cls), max_versions):
        versions_checked += 1
        vg = build_firing_graph(version.program)
        vs = scc_info(vg)
        vc = classify_bodies(version.program, vg, vs)
        emitted = 0
        # One extra path distinguishes "exactly at the cap" from a truncation.
        for edge_seq in basic_cyclic_paths(vg, max_paths + 1):
            emitted += 1
            if not all(vc[src].relevant for src, _ in edge_seq):
                continue
            paths_checked += 1
            verdict = check_path(build_path(version.program, edge_seq, tags))
            if verdict.status == FAIL_EQ_UNSAT and vacuous_cycles == VACUOUS_BOUNDED:
                vacuous += 1
                diagnostics.append(
                    f"path {list(edge_seq)} has unsatisfiable eq(pi); treated as"
                    " bounded under --vacuous-cycles=bounded (deviation from the"
                    " strict criterion)"
                )
                continue
            if verdict.status != PATH_CYCLE_BOUNDED:
                if verdict.status == FAIL_COMPLEMENT and not verdict.witness_integral:
                    diagnostics.append(
                        f"path {list(edge_seq)}: complement witness is non-integral;"
                        " under an integer-only reading of eq(pi) solutions this"
                        " failure is unconfirmed"
                    )
                return CycleBoundedResult(
                    NOT_CYCLE_BOUNDED,
                    versions_checked,
                    paths_checked,
                    failure=PathFailure(version.kept, verdict),
                    diagnostics=tuple(diagnostics),
                    vacuous_paths=vacuous,
                )
            if verdict.direct_attempted and not verdict.direct_agrees:
                diagnostics.append(
                    f"path {list(edge_seq)}: complement check passed but no direct"
                    " weight-vector witness was found (quantifier-order gap)"
                )
            bounded_paths.append((version.kept, verdict))
        if emitted > max_paths:
            return CycleBoundedResult(
                UNKNOWN,
                versions_checked,
                paths_checked,
                reason=f"PATH_CAP_EXCEEDED({max_paths})",
                diagnostics=tuple(diagnostics),
                vacuous_paths=vacuous,
            )
    if capped:
        return CycleBoundedResult(
            UNKNOWN,
            versions_checked,
            paths_checked,
            reason=f"PRODUCT_CAP_EXCEEDED({total_versions}>{max_versions})",
            diagnostics=tuple(diagnostics),
            vacuous_paths=vacuous,
        )
    return CycleBoundedResult(
        CYCLE_BOUNDED,
        versions_checked,
        paths_checked,
        diagnostics=tuple(diagnostics),
        vacuous_paths=vacuous,
        bounded_paths=tuple(bounded_paths),
    )
