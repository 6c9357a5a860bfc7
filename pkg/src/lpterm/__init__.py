"""Static termination analysis for logic programs with function symbols.

Two sufficient criteria decide whether the bottom-up evaluation of a positive
normal program reaches a fixpoint on every finite fact set: the rule-bounded
check weighs every relevant rule of each recursive component, the
cycle-bounded check weighs entire cycles of the firing graph.  Both reduce to
exact linear-constraint feasibility over term sizes.  A budgeted semi-naive
evaluator doubles as an empirical soundness oracle.
"""

from .cycle_bounded import check_program_cycle_bounded
from .evaluator import EvalBudget, FactStore, fixpoint
from .graph import build_firing_graph, classify_bodies, scc_info
from .parser import ParseError, parse_ground_atoms, parse_program, render_program
from .rule_bounded import check_program_rule_bounded, check_size_bounded, expand_program
from .terms import Atom, Compound, Program, Rule, Substitution, Var, mgu

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "Compound",
    "EvalBudget",
    "FactStore",
    "ParseError",
    "Program",
    "Rule",
    "Substitution",
    "Var",
    "build_firing_graph",
    "check_program_cycle_bounded",
    "check_program_rule_bounded",
    "check_size_bounded",
    "classify_bodies",
    "expand_program",
    "fixpoint",
    "mgu",
    "parse_ground_atoms",
    "parse_program",
    "render_program",
    "scc_info",
]
