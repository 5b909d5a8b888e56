"""Recursive-descent parser for the hybrid-program DSL and .hpm model files.

Concrete syntax (ASCII only; # starts a line comment):

    program  ::= seq ('++' seq)*                  right-associative choice
    seq      ::= item (';' item)* [';']           right-associative sequence
    item     ::= name ':=' '*'                    random assignment
               | name ':=' term (',' name ':=' term)*    simultaneous jump set
               | '?' formula                      test
               | '{' ode '}' ['*']                continuous flow
               | '{' program '}' ['*']            grouping / loop
    ode      ::= name \' '=' term (',' name \' '=' term)* ['&' formula]

    formula  ::= orF ['->' formula]               implication, right-assoc
    orF      ::= andF ('|' andF)*                 left-assoc
    andF     ::= unaryF ('&' unaryF)*             left-assoc
    unaryF   ::= '!' unaryF | 'forall' name unaryF | 'exists' name unaryF
               | '[' program ']' unaryF | '<' program '>' unaryF
               | 'true' | 'false' | '(' formula ')' | term rel term
    rel      ::= '<' | '<=' | '=' | '>=' | '>'

    term     ::= mul (('+'|'-') mul)*             left-assoc
    mul      ::= unary (('*'|'/') unary)*         left-assoc
    unary    ::= '-' unary | number | name
               | ('min'|'max') '(' term ',' term ')' | '(' term ')'

Model files are split into ordered sections first:

    model: <name>
    constants:   one "name in <interval>" per line
    variables:   one "name init <interval>" per line
    program:     a program block
    safety:      a formula

    interval ::= ('['|'(') number ',' number (']'|')')
"""

from __future__ import annotations

import re

from ..errors import ParseError, SemanticError
from . import ast as A

__all__ = ["parse_term", "parse_formula", "parse_program", "parse_model"]

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<num>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
    | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>:=|\+\+|->|<=|>=|[-+*/(){}\[\];,?&|!<>='])
    """,
    re.VERBOSE,
)

_RESERVED = {"true", "false", "forall", "exists", "min", "max", "in", "init"}


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Token({self.kind!r}, {self.text!r}, {self.line}:{self.col})"


def _tokenize(text: str, line_offset: int = 0) -> "list[_Token]":
    tokens: list[_Token] = []
    line = 1 + line_offset
    col = 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "ws" or kind == "comment":
            pass
        elif kind == "num":
            tokens.append(_Token("num", value, line, col))
        elif kind == "name":
            tokens.append(_Token("name", value, line, col))
        else:
            tokens.append(_Token(value, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: "list[_Token]"):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing

    def peek(self, ahead: int = 0) -> _Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def accept(self, kind: str) -> "_Token | None":
        if self.peek().kind == kind:
            return self.next()
        return None

    def expect(self, kind: str, what: "str | None" = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"unexpected {tok.text!r}" if tok.kind != "eof" else "unexpected end of input",
                tok.line,
                tok.col,
                expected=(what or kind,),
            )
        return self.next()

    def fail(self, message: str, expected: "tuple[str, ...]" = ()) -> "ParseError":
        tok = self.peek()
        return ParseError(message, tok.line, tok.col, expected=expected)

    def expect_name(self, what: str = "identifier") -> _Token:
        tok = self.peek()
        if tok.kind != "name" or tok.text in _RESERVED:
            raise self.fail(f"expected {what}", expected=(what,))
        return self.next()

    # -- terms

    def term(self) -> A.Term:
        node = self.term_mul()
        while self.peek().kind in ("+", "-"):
            op = self.next()
            rhs = self.term_mul()
            node = A.Apply(op.kind, (node, rhs), loc=(op.line, op.col))
        return node

    def term_mul(self) -> A.Term:
        node = self.term_unary()
        while self.peek().kind in ("*", "/"):
            op = self.next()
            rhs = self.term_unary()
            node = A.Apply(op.kind, (node, rhs), loc=(op.line, op.col))
        return node

    def term_unary(self) -> A.Term:
        tok = self.peek()
        if tok.kind == "-":
            self.next()
            return A.Apply("neg", (self.term_unary(),), loc=(tok.line, tok.col))
        if tok.kind == "num":
            self.next()
            return A.Num(float(tok.text), loc=(tok.line, tok.col))
        if tok.kind == "name":
            if tok.text in ("min", "max"):
                self.next()
                self.expect("(")
                a = self.term()
                self.expect(",")
                b = self.term()
                self.expect(")")
                return A.Apply(tok.text, (a, b), loc=(tok.line, tok.col))
            if tok.text in _RESERVED:
                raise self.fail(f"{tok.text!r} is reserved", expected=("term",))
            self.next()
            return A.Var(tok.text, loc=(tok.line, tok.col))
        if tok.kind == "(":
            self.next()
            inner = self.term()
            self.expect(")")
            return inner
        raise self.fail("expected a term", expected=("number", "identifier", "(", "-"))

    # -- formulas

    def formula(self) -> A.Formula:
        lhs = self.formula_or()
        if self.accept("->"):
            return A.Implies(lhs, self.formula())
        return lhs

    def formula_or(self) -> A.Formula:
        node = self.formula_and()
        while self.accept("|"):
            node = A.Or(node, self.formula_and())
        return node

    def formula_and(self) -> A.Formula:
        node = self.formula_unary()
        while self.accept("&"):
            node = A.And(node, self.formula_unary())
        return node

    def formula_unary(self) -> A.Formula:
        tok = self.peek()
        if tok.kind == "!":
            self.next()
            return A.Not(self.formula_unary())
        if tok.kind == "name" and tok.text == "forall":
            self.next()
            var = self.expect_name("quantified variable")
            return A.Forall(var.text, self.formula_unary())
        if tok.kind == "name" and tok.text == "exists":
            self.next()
            var = self.expect_name("quantified variable")
            return A.Exists(var.text, self.formula_unary())
        if tok.kind == "[":
            self.next()
            prog = self.program()
            self.expect("]")
            return A.Box(prog, self.formula_unary())
        if tok.kind == "<":
            self.next()
            prog = self.program()
            self.expect(">")
            return A.Diamond(prog, self.formula_unary())
        return self.formula_atom()

    def formula_atom(self) -> A.Formula:
        tok = self.peek()
        if tok.kind == "name" and tok.text in ("true", "false"):
            self.next()
            return A.BoolLit(tok.text == "true")
        if tok.kind == "(":
            # Either a parenthesized formula or a parenthesized term starting
            # a comparison; try the formula reading first and backtrack.
            saved = self.pos
            self.next()
            try:
                inner = self.formula()
                self.expect(")")
                return inner
            except ParseError:
                self.pos = saved
        lhs = self.term()
        rel = self.peek()
        if rel.kind not in ("<", "<=", "=", ">=", ">"):
            raise self.fail("expected a relation", expected=("<", "<=", "=", ">=", ">"))
        self.next()
        rhs = self.term()
        return A.Compare(rel.kind, lhs, rhs)

    # -- programs

    def program(self) -> A.Program:
        branches = [self.program_seq()]
        while self.accept("++"):
            branches.append(self.program_seq())
        node = branches[-1]
        for b in reversed(branches[:-1]):
            node = A.Choice(b, node)
        return node

    def program_seq(self) -> A.Program:
        items = [self.program_item()]
        while self.accept(";"):
            if self.peek().kind in ("eof", "++", "}", "]", ">", ")"):
                break  # trailing separator
            items.append(self.program_item())
        node = items[-1]
        for it in reversed(items[:-1]):
            node = A.Seq(it, node)
        return node

    def program_item(self) -> A.Program:
        tok = self.peek()
        if tok.kind == "?":
            self.next()
            return self._wrap_semantic(lambda: A.Test(self.formula()), tok)
        if tok.kind == "{":
            return self.braced()
        if tok.kind == "name":
            return self.assignment()
        raise self.fail("expected a program", expected=("assignment", "?", "{"))

    def assignment(self) -> A.Program:
        first = self.expect_name("assignment target")
        self.expect(":=")
        if self.accept("*"):
            if self.peek().kind == ",":
                tok = self.peek()
                raise ParseError(
                    "random assignment cannot be part of a jump set", tok.line, tok.col
                )
            return A.RandomAssign(first.text)
        targets = [(first.text, self.term())]
        while self.accept(","):
            name = self.expect_name("assignment target")
            self.expect(":=")
            if self.peek().kind == "*":
                tok = self.peek()
                raise ParseError(
                    "random assignment cannot be part of a jump set", tok.line, tok.col
                )
            targets.append((name.text, self.term()))
        return self._wrap_semantic(lambda: A.Assign(tuple(targets)), first)

    def braced(self) -> A.Program:
        open_tok = self.expect("{")
        if self.peek().kind == "name" and self.peek(1).kind == "'":
            inner: A.Program = self.ode_body(open_tok)
        else:
            inner = self.program()
        self.expect("}")
        if self.accept("*"):
            return A.Star(inner)
        return inner

    def ode_body(self, open_tok: _Token) -> A.Ode:
        derivs = [self.one_deriv()]
        while self.accept(","):
            derivs.append(self.one_deriv())
        domain: A.Formula = A.BoolLit(True)
        if self.accept("&"):
            domain = self.formula()
        return self._wrap_semantic(lambda: A.Ode(tuple(derivs), domain), open_tok)

    def one_deriv(self) -> "tuple[str, A.Term]":
        name = self.expect_name("differential variable")
        self.expect("'")
        self.expect("=")
        return (name.text, self.term())

    def _wrap_semantic(self, build, tok: _Token):
        try:
            return build()
        except SemanticError as exc:
            raise SemanticError(f"{exc} (near line {tok.line}, column {tok.col})") from exc

    def done(self) -> None:
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)


def _parse_with(text: str, production: str, line_offset: int = 0):
    parser = _Parser(_tokenize(text, line_offset))
    node = getattr(parser, production)()
    parser.done()
    return node


def parse_term(text: str) -> A.Term:
    return _parse_with(text, "term")


def parse_formula(text: str) -> A.Formula:
    return _parse_with(text, "formula")


def parse_program(text: str) -> A.Program:
    return _parse_with(text, "program")


# ---------------------------------------------------------------- model files

_SECTION_RE = re.compile(r"^\s*(model|constants|variables|program|safety)\s*:(.*)$")
_SECTION_ORDER = ("model", "constants", "variables", "program", "safety")
_NAME_RE = re.compile(r"^[A-Za-z_][-A-Za-z0-9_]*$")


def _split_sections(text: str) -> "dict[str, tuple[int, str]]":
    """Map section name to (starting line number, body text)."""
    sections: dict[str, tuple[int, list[str]]] = {}
    current: "str | None" = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0]
        m = _SECTION_RE.match(stripped)
        if m:
            name = m.group(1)
            if name in sections:
                raise ParseError(f"duplicate section {name!r}", lineno, 1)
            sections[name] = (lineno, [m.group(2)])
            current = name
        elif current is None:
            if stripped.strip():
                raise ParseError("content before the model: header", lineno, 1)
        else:
            sections[current][1].append(raw)
    missing = [s for s in _SECTION_ORDER if s not in sections]
    if missing:
        raise SemanticError(f"missing required section(s): {', '.join(s + ':' for s in missing)}")
    order = sorted(sections, key=lambda s: sections[s][0])
    if tuple(order) != _SECTION_ORDER:
        raise SemanticError(
            "sections must appear in order model:, constants:, variables:, program:, safety:"
        )
    return {name: (line, "\n".join(body)) for name, (line, body) in sections.items()}


def _parse_interval(parser: _Parser) -> A.Interval:
    open_tok = parser.peek()
    if parser.accept("["):
        lo_strict = False
    elif parser.accept("("):
        lo_strict = True
    else:
        raise parser.fail("expected an interval", expected=("[", "("))

    def signed_number() -> float:
        sign = 1.0
        if parser.accept("-"):
            sign = -1.0
        elif parser.accept("+"):
            pass
        tok = parser.expect("num", "number")
        return sign * float(tok.text)

    lo = signed_number()
    parser.expect(",")
    hi = signed_number()
    if parser.accept("]"):
        hi_strict = False
    elif parser.accept(")"):
        hi_strict = True
    else:
        raise parser.fail("expected ] or ) to close the interval", expected=("]", ")"))
    try:
        return A.Interval(lo, hi, lo_strict, hi_strict)
    except SemanticError as exc:
        raise SemanticError(f"{exc} (near line {open_tok.line})") from exc


def _parse_decl_section(body: str, line_offset: int, keyword: str):
    """Yield (name, interval) per declaration line."""
    decls: list[tuple[str, A.Interval]] = []
    parser = _Parser(_tokenize(body, line_offset))
    while parser.peek().kind != "eof":
        name = parser.expect_name("declaration name")
        kw = parser.peek()
        if not (kw.kind == "name" and kw.text == keyword):
            raise parser.fail(f"expected {keyword!r} after {name.text!r}", expected=(keyword,))
        parser.next()
        decls.append((name.text, _parse_interval(parser)))
    return decls


def parse_model(text: str) -> A.ModelFile:
    sections = _split_sections(text)

    name_line, name_body = sections["model"]
    name = name_body.strip()
    if not _NAME_RE.match(name):
        raise ParseError(f"invalid model name {name!r}", name_line, 1)

    const_line, const_body = sections["constants"]
    constants = tuple(
        A.ConstDecl(n, iv) for n, iv in _parse_decl_section(const_body, const_line - 1, "in")
    )
    var_line, var_body = sections["variables"]
    variables = tuple(
        A.VarDecl(n, iv) for n, iv in _parse_decl_section(var_body, var_line - 1, "init")
    )
    if not variables:
        raise SemanticError("a model must declare at least one variable")

    prog_line, prog_body = sections["program"]
    prog_parser = _Parser(_tokenize(prog_body, prog_line - 1))
    program = prog_parser.program()
    prog_parser.done()

    safety_line, safety_body = sections["safety"]
    safety_parser = _Parser(_tokenize(safety_body, safety_line - 1))
    safety = safety_parser.formula()
    safety_parser.done()

    declared = [c.name for c in constants] + [v.name for v in variables]
    dupes = sorted({n for n in declared if declared.count(n) > 1})
    if dupes:
        raise SemanticError(f"name(s) declared twice: {', '.join(dupes)}")

    declared_set = set(declared)
    undeclared = sorted((A.program_vars(program) | A.formula_vars(safety)) - declared_set)
    if undeclared:
        raise SemanticError(f"undeclared variable(s): {', '.join(undeclared)}")

    const_names = {c.name for c in constants}
    written_consts = sorted(A.assigned_vars(program) & const_names)
    if written_consts:
        raise SemanticError(f"program assigns to declared constant(s): {', '.join(written_consts)}")

    return A.ModelFile(
        name=name,
        constants=constants,
        variables=variables,
        program=program,
        safety=safety,
    )
