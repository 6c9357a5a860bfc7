"""Parser and printer for the `.lp` text format.

Grammar sketch:

    program   := statement*
    statement := head ( ":-" body )? "."
    head      := atom ( "|" atom )*          disjunctive heads are normalized away
    body      := literal ( "," literal )*
    literal   := "not" atom | atom | term CMP term
    atom      := NAME | NAME "(" term ("," term)* ")"
    term      := VAR | NUMBER | NAME ( "(" ... ")" )? | list
    list      := "[" "]" | "[" term ("," term)* ("|" term)? "]"
    CMP       := "<" | "<=" | ">" | ">=" | "=" | "!="

Variables match [A-Z_][A-Za-z0-9_]*, predicate and function symbols match
[a-z][A-Za-z0-9_]* or are quoted ('...') or numeric.  Comments run from "%"
to end of line.  List sugar: [] is the constant nil, [H|T] is lc(H,T), and
[a,b] is lc(a,lc(b,nil)); nil and lc may also be written directly.

Loading renames rules apart, normalizes disjunction/negation away and
validates range restriction: every variable of a rule must occur in some
non-builtin body atom, and facts must be ground.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .terms import (
    BUILTIN_PREDS,
    Atom,
    Clause,
    Compound,
    Literal,
    Pred,
    Program,
    Rule,
    Term,
    Var,
    rename_program_apart,
    st_transform,
    vars_of,
)

NIL = Compound("nil")
LIST_FUNCTOR = "lc"

_NAME_RE = re.compile(r"[a-z][A-Za-z0-9_]*")
_VAR_RE = re.compile(r"[A-Z_][A-Za-z0-9_]*")
_NUM_RE = re.compile(r"-?\d+")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    offset: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(Exception):
    """A syntax or validation error, always carrying a source span."""

    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, VAR, NUMBER, QUOTED, PUNCT, CMP, EOF
    text: str
    span: SourceSpan


_PUNCT = (":-", "(", ")", "[", "]", "|", ",", ".")
_CMP = ("<=", ">=", "!=", "<", ">", "=")


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def span() -> SourceSpan:
        return SourceSpan(line, col, i)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if ch == "'":
            start = span()
            j = text.find("'", i + 1)
            if j < 0 or "\n" in text[i + 1 : j]:
                raise ParseError("unterminated quoted name", start)
            name = text[i + 1 : j]
            if not name:
                raise ParseError("empty quoted name", start)
            tokens.append(Token("QUOTED", name, start))
            advance(j + 1 - i)
            continue
        m = _NUM_RE.match(text, i)
        if m and (ch.isdigit() or (ch == "-" and m.end() > i + 1)):
            tokens.append(Token("NUMBER", m.group(), span()))
            advance(m.end() - i)
            continue
        m = _VAR_RE.match(text, i)
        if m:
            tokens.append(Token("VAR", m.group(), span()))
            advance(m.end() - i)
            continue
        m = _NAME_RE.match(text, i)
        if m:
            tokens.append(Token("NAME", m.group(), span()))
            advance(m.end() - i)
            continue
        matched = False
        for op in _CMP:
            if text.startswith(op, i):
                tokens.append(Token("CMP", op, span()))
                advance(len(op))
                matched = True
                break
        if matched:
            continue
        for op in _PUNCT:
            if text.startswith(op, i):
                tokens.append(Token("PUNCT", op, span()))
                advance(len(op))
                matched = True
                break
        if matched:
            continue
        raise ParseError(f"unexpected character {ch!r}", span())
    tokens.append(Token("EOF", "", span()))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def eat(self, kind: str, text: str | None = None) -> Token:
        tok = self.cur
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise ParseError(f"expected {want!r}, found {tok.text or tok.kind!r}", tok.span)
        self.pos += 1
        return tok

    def at_punct(self, text: str) -> bool:
        return self.cur.kind == "PUNCT" and self.cur.text == text

    def parse_clauses(self) -> list[tuple[Clause, SourceSpan]]:
        clauses: list[tuple[Clause, SourceSpan]] = []
        while self.cur.kind != "EOF":
            start = self.cur.span
            heads = [self.parse_head_atom()]
            while self.at_punct("|"):
                self.eat("PUNCT", "|")
                heads.append(self.parse_head_atom())
            body: list[Literal] = []
            if self.cur.kind == "PUNCT" and self.cur.text == ":-":
                self.eat("PUNCT", ":-")
                body.append(self.parse_literal())
                while self.at_punct(","):
                    self.eat("PUNCT", ",")
                    body.append(self.parse_literal())
            self.eat("PUNCT", ".")
            clauses.append((Clause(tuple(heads), tuple(body)), start))
        return clauses

    def parse_head_atom(self) -> Atom:
        span = self.cur.span
        atom = self.parse_atom_or_builtin()
        if atom.is_builtin:
            raise ParseError("comparison atoms may not appear in rule heads", span)
        return atom

    def parse_literal(self) -> Literal:
        # "not" followed by a name starts a negative literal; not(X) is still
        # an ordinary atom of predicate not/1.
        if (
            self.cur.kind == "NAME"
            and self.cur.text == "not"
            and self.tokens[self.pos + 1].kind in ("NAME", "QUOTED")
        ):
            span = self.cur.span
            self.eat("NAME")
            atom = self.parse_atom_or_builtin()
            if atom.is_builtin:
                raise ParseError("cannot negate a comparison atom", span)
            return Literal(atom, negated=True)
        return Literal(self.parse_atom_or_builtin())

    def parse_atom_or_builtin(self) -> Atom:
        span = self.cur.span
        left = self.parse_term()
        if self.cur.kind == "CMP":
            op = self.eat("CMP").text
            right = self.parse_term()
            return Atom(op, (left, right))
        if isinstance(left, Var):
            raise ParseError(f"variable {left.name} cannot be used as an atom", span)
        if _NUM_RE.fullmatch(left.functor):
            raise ParseError(f"number {left.functor} cannot be used as a predicate", span)
        return Atom(left.functor, left.args)

    def parse_term(self) -> Term:
        tok = self.cur
        if tok.kind == "VAR":
            self.eat("VAR")
            return Var(tok.text)
        if tok.kind == "NUMBER":
            self.eat("NUMBER")
            return Compound(str(int(tok.text)))
        if tok.kind in ("NAME", "QUOTED"):
            self.eat(tok.kind)
            if self.at_punct("("):
                self.eat("PUNCT", "(")
                args = [self.parse_term()]
                while self.at_punct(","):
                    self.eat("PUNCT", ",")
                    args.append(self.parse_term())
                self.eat("PUNCT", ")")
                return Compound(tok.text, tuple(args))
            return Compound(tok.text)
        if tok.kind == "PUNCT" and tok.text == "[":
            return self.parse_list()
        raise ParseError(f"expected a term, found {tok.text or tok.kind!r}", tok.span)

    def parse_list(self) -> Term:
        self.eat("PUNCT", "[")
        if self.at_punct("]"):
            self.eat("PUNCT", "]")
            return NIL
        items = [self.parse_term()]
        while self.at_punct(","):
            self.eat("PUNCT", ",")
            items.append(self.parse_term())
        tail: Term = NIL
        if self.at_punct("|"):
            self.eat("PUNCT", "|")
            tail = self.parse_term()
        self.eat("PUNCT", "]")
        for item in reversed(items):
            tail = Compound(LIST_FUNCTOR, (item, tail))
        return tail


def _validate(program: Program, spans: list[SourceSpan]) -> None:
    arities: dict[str, tuple[int, SourceSpan]] = {}
    for rid, rule in enumerate(program.rules):
        span = spans[rid]
        for atom in (rule.head, *rule.body):
            if atom.is_builtin:
                continue
            seen = arities.get(atom.pred)
            if seen is None:
                arities[atom.pred] = (len(atom.args), span)
            elif seen[0] != len(atom.args):
                raise ParseError(
                    f"predicate {atom.pred} used with arity {len(atom.args)}"
                    f" but earlier with arity {seen[0]}",
                    span,
                )
        covered: set[Var] = set()
        for atom in rule.body:
            if not atom.is_builtin:
                covered |= vars_of(atom)
        missing = vars_of(rule) - covered
        if missing:
            name = sorted(v.name for v in missing)[0]
            if rule.is_fact:
                raise ParseError(
                    f"fact {rule.head!r} must be ground (variable {name})", span
                )
            raise ParseError(
                f"rule r{rid} is not range-restricted: variable {name}"
                " does not occur in any non-builtin body atom",
                span,
            )


def parse_program(text: str) -> Program:
    """Parse, normalize (st transform), rename apart, and validate."""
    pairs = _Parser(text).parse_clauses()
    clauses = [c for c, _ in pairs]
    spans = [s for c, s in pairs for _ in c.heads]
    program = rename_program_apart(st_transform(clauses))
    _validate(program, spans)
    return program


def parse_term(text: str) -> Term:
    """Parse a single term (used for facts files and tests)."""
    p = _Parser(text)
    t = p.parse_term()
    p.eat("EOF")
    return t


def parse_ground_atoms(text: str) -> list[Atom]:
    """Parse a facts file: ground atoms, one statement each."""
    pairs = _Parser(text).parse_clauses()
    atoms: list[Atom] = []
    for clause, span in pairs:
        if clause.body or len(clause.heads) != 1:
            raise ParseError("facts file may contain only ground facts", span)
        atom = clause.heads[0]
        if vars_of(atom):
            raise ParseError(f"fact {atom!r} must be ground", span)
        atoms.append(atom)
    return atoms


# ---------------------------------------------------------------------------
# Rendering


def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if t == NIL:
        return "[]"
    if t.functor == LIST_FUNCTOR and len(t.args) == 2:
        items, tail = _spine(t)
        if tail is None:
            return "[" + ", ".join(render_term(x) for x in items) + "]"
        return "[" + ", ".join(render_term(x) for x in items) + "|" + render_term(tail) + "]"
    name = _render_name(t.functor)
    if not t.args:
        return name
    return f"{name}({', '.join(render_term(a) for a in t.args)})"


def _spine(t: Compound) -> tuple[list[Term], Term | None]:
    """Walk an lc chain; tail None means the chain ends in nil."""
    items: list[Term] = []
    cur: Term = t
    while isinstance(cur, Compound) and cur.functor == LIST_FUNCTOR and len(cur.args) == 2:
        items.append(cur.args[0])
        cur = cur.args[1]
    if cur == NIL:
        return items, None
    return items, cur


def _render_name(name: str) -> str:
    if _NAME_RE.fullmatch(name) or _NUM_RE.fullmatch(name):
        return name
    return f"'{name}'"


def render_atom(a: Atom) -> str:
    if a.is_builtin:
        return f"{render_term(a.args[0])} {a.pred} {render_term(a.args[1])}"
    if not a.args:
        return _render_name(a.pred)
    return f"{_render_name(a.pred)}({', '.join(render_term(t) for t in a.args)})"


def render_rule(r: Rule) -> str:
    if r.is_fact:
        return f"{render_atom(r.head)}."
    return f"{render_atom(r.head)} :- {', '.join(render_atom(a) for a in r.body)}."


def render_program(p: Program) -> str:
    """Canonical text; reparsing yields the same program up to variable names."""
    return "\n".join(render_rule(r) for r in p.rules) + ("\n" if p.rules else "")
