import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpterm.terms import (
    Atom,
    Clause,
    Compound,
    Literal,
    Rule,
    Substitution,
    Var,
    apply_substitution,
    compose,
    mgu,
    rename_apart,
    st_transform,
    vars_of,
)

X, Y, Z, W = Var("X"), Var("Y"), Var("Z"), Var("W")
a, b = Compound("a"), Compound("b")


def f(*args):
    return Compound("f", args)


def test_apply_replaces_bound_occurrences():
    s = Substitution({X: f(W)})
    assert apply_substitution(Atom("p", (X, Y)), s) == Atom("p", (f(W), Y))


def test_apply_no_occurrence():
    s = Substitution({X: b})
    assert apply_substitution(Atom("p", (a,)), s) == Atom("p", (a,))


def test_apply_simultaneous():
    s = Substitution({X: W, Y: Z})
    assert apply_substitution(Atom("q", (X, f(Y))), s) == Atom("q", (W, f(Z)))


def test_compose_chains():
    assert compose(Substitution({X: Y}), Substitution({Y: a})) == Substitution({X: a, Y: a})


def test_compose_shadowing():
    assert compose(Substitution({X: a}), Substitution({X: b})) == Substitution({X: a})


def test_compose_drops_identity():
    assert compose(Substitution({X: Y}), Substitution({Y: X})) == Substitution({Y: X})


def test_mgu_variable_pairs_bind_left_to_right():
    theta = mgu(Atom("p", (X, Y)), Atom("p", (W, Z)))
    assert theta == Substitution({X: W, Y: Z})


def test_mgu_mixed_directions():
    X2 = Var("X2")
    theta = mgu(Atom("q", (W, f(Z))), Atom("q", (f(X2), Y)))
    assert theta == Substitution({W: f(X2), Y: f(Z)})


def test_mgu_distinct_predicates():
    assert mgu(Atom("p", (f(X),)), Atom("q", (f(Y),))) is None


def test_mgu_occurs_check():
    assert mgu(Atom("p", (X,)), Atom("p", (f(X),))) is None


def test_rename_apart_tags_every_variable():
    r = Rule(Atom("p", (X,)), (Atom("q", (X,)),))
    renamed = rename_apart(r, 2)
    assert renamed == Rule(Atom("p", (Var("X_2"),)), (Atom("q", (Var("X_2"),)),))


def test_rename_apart_ground_fact_unchanged():
    r = Rule(Atom("p", (a,)))
    assert rename_apart(r, 7) == r


def test_rename_two_copies_disjoint():
    r = Rule(Atom("p", (X,)), (Atom("q", (X,)),))
    assert not vars_of(rename_apart(r, 1)) & vars_of(rename_apart(r, 2))


def test_st_transform_disjunction_and_negation():
    clause = Clause(
        heads=(Atom("a", (X,)), Atom("b", (X,))),
        body=(Literal(Atom("c", (X,))), Literal(Atom("d", (X,)), negated=True)),
    )
    p = st_transform([clause])
    assert [r for r in p.rules] == [
        Rule(Atom("a", (X,)), (Atom("c", (X,)),)),
        Rule(Atom("b", (X,)), (Atom("c", (X,)),)),
    ]
    assert p.st_applied


def test_st_transform_identity_on_positive_normal():
    clause = Clause(heads=(Atom("p", (X,)),), body=(Literal(Atom("q", (X,))),))
    p = st_transform([clause])
    assert p.rules == (Rule(Atom("p", (X,)), (Atom("q", (X,)),)),)
    assert not p.st_applied


def test_st_transform_drops_negative_literal():
    clause = Clause(
        heads=(Atom("p", (X,)),),
        body=(Literal(Atom("q", (X,))), Literal(Atom("p", (X,)), negated=True)),
    )
    p = st_transform([clause])
    assert p.rules == (Rule(Atom("p", (X,)), (Atom("q", (X,)),)),)


def test_st_transform_rule_count_is_sum_of_head_widths():
    clauses = [
        Clause(heads=tuple(Atom(f"h{i}", (X,)) for i in range(k)) or (Atom("h", (X,)),),
               body=(Literal(Atom("q", (X,))),))
        for k in (1, 2, 3)
    ]
    assert len(st_transform(clauses).rules) == 1 + 2 + 3


# ---------------------------------------------------------------------------
# Properties

_names = st.sampled_from(["X", "Y", "Z", "W"])
_functors = st.sampled_from(["f", "g", "a", "b"])


def _terms(depth: int):
    if depth == 0:
        return st.one_of(
            _names.map(Var),
            st.sampled_from(["a", "b"]).map(Compound),
        )
    sub = _terms(depth - 1)
    return st.one_of(
        _names.map(Var),
        st.sampled_from(["a", "b"]).map(Compound),
        st.tuples(st.sampled_from(["f", "g"]), st.lists(sub, min_size=1, max_size=2)).map(
            lambda t: Compound(t[0], tuple(t[1]))
        ),
    )


_atoms = st.tuples(st.just("p"), st.lists(_terms(2), min_size=1, max_size=3)).map(
    lambda t: Atom(t[0], tuple(t[1]))
)


def _rename_atom(atom: Atom, tag: int) -> Atom:
    s = Substitution({v: Var(f"{v.name}_{tag}") for v in vars_of(atom)})
    return apply_substitution(atom, s)


@settings(max_examples=300, deadline=None)
@given(_atoms, _atoms)
def test_mgu_unifies_and_is_idempotent(a1, a2):
    left, right = _rename_atom(a1, 1), _rename_atom(a2, 2)
    theta = mgu(left, right)
    if theta is None:
        return
    unified = apply_substitution(left, theta)
    assert unified == apply_substitution(right, theta)
    assert apply_substitution(unified, theta) == unified
    assert all(x != t for x, t in theta.items())
    bound = set(theta)
    for t in theta.values():
        assert not vars_of(t) & bound


def _subterms(atom: Atom) -> list:
    out = []

    def walk(t):
        out.append(t)
        if isinstance(t, Compound):
            for s in t.args:
                walk(s)

    for t in atom.args:
        walk(t)
    return out


@settings(max_examples=150, deadline=None)
@given(_atoms, _atoms)
def test_mgu_none_is_confirmed_by_small_instance_search(a1, a2):
    left, right = _rename_atom(a1, 1), _rename_atom(a2, 2)
    if mgu(left, right) is not None:
        return
    candidates = _subterms(left) + _subterms(right)
    free = sorted(vars_of(left) | vars_of(right), key=lambda v: v.name)
    if len(candidates) ** len(free) > 20_000:
        return
    for images in itertools.product(candidates, repeat=len(free)):
        theta = Substitution(dict(zip(free, images)))
        l1 = apply_substitution(apply_substitution(left, theta), theta)
        r1 = apply_substitution(apply_substitution(right, theta), theta)
        assert l1 != r1, f"unifier {theta} found although mgu returned NONE"


@settings(max_examples=200, deadline=None)
@given(_atoms, _atoms)
def test_rename_apart_preserves_mgu_existence(a1, a2):
    left, right = _rename_atom(a1, 1), _rename_atom(a2, 2)
    again = mgu(_rename_atom(left, 3), _rename_atom(right, 4))
    assert (mgu(left, right) is None) == (again is None)
