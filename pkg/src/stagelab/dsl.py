"""Textual network-description language (.sn files).

A document declares parameters, photon slots, stages with their detectors,
transition rule blocks, numeric constraints, and the source state:

    stagelab-network v1
    param a1 = 2^-0.5
    param a2 = 2^-0.5
    constraint a1^2 + a2^2 == 1
    spin slots 1 bases HV
    stage 0 { "1" }
    stage 1 { "1" "2" }
    transition 0 -> 1 {
      "1" -> a1 * "1" + a2 * "2";
    }
    source { 1 * H@"1" }

Grammar notes (hand-written recursive descent, single-token lookahead):

* identifiers are [A-Za-z][A-Za-z0-9_]*; detector labels with other
  characters (port names like "S+2") are written quoted;
* ``#`` comments to end of line; newlines are plain whitespace;
* rules are ``input-term -> coeff * term (+ coeff * term)* ;`` where a rule
  input without a spin label is spin-inert (applies to any polarization and
  carries it through);
* coefficients sit at unary/power precedence; anything with +, *, / inside
  must be parenthesized: ``(a/sqrt(2)) * H@"1"``;
* expressions know complex literals (``2i``), ``i``, sqrt, ^, * / + - and
  parentheses;
* ``i`` and the spin labels H V L R are reserved and cannot name parameters.

The parser is total: any input yields either a document or a positioned
``DslError``; ``elaborate`` substitutes numbers (plus overrides) and builds
a Network; ``serialize`` emits a numeric snapshot that round-trips to an
identical rate table.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable

from .errors import (
    ConstraintViolated,
    DslError,
    DslSyntaxError,
    DuplicateDeclaration,
    UndeclaredIdentifier,
    UnknownOverride,
)
from .labstate import BASES, LABEL_BASIS, LabState, SignalConfig
from .network import Network, Stage, StageTransition, TransitionRule

HEADER = "stagelab-network v1"

_KEYWORDS = {"param", "spin", "stage", "transition", "source", "constraint"}
_SPIN_LABELS = {"H", "V", "L", "R", "+", "-"}
_FUNCTIONS = {"sqrt"}
_RESERVED = {"i", "H", "V", "L", "R"} | _KEYWORDS
CONSTRAINT_TOL = 1e-9

Pos = tuple[int, int]


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_PUNCT = {
    "{": "LBRACE", "}": "RBRACE", "(": "LPAREN", ")": "RPAREN",
    "+": "PLUS", "*": "STAR", "/": "SLASH", "^": "CARET",
    "@": "AT", ",": "COMMA", ";": "SEMI",
}


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    line: int
    col: int

    @property
    def pos(self) -> Pos:
        return (self.line, self.col)


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i, n = 1, 1, 0, len(text)

    def err(msg: str, found: str = "") -> DslSyntaxError:
        return DslSyntaxError(line, col, msg, found)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == '"':
            j = i + 1
            while j < n and text[j] not in '"\n':
                j += 1
            if j >= n or text[j] != '"':
                raise DslSyntaxError(start_line, start_col, "closing quote")
            tokens.append(Token("STRING", text[i + 1 : j], start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            literal = text[i:j]
            try:
                value = float(literal)
            except ValueError:
                raise err("a numeric literal", literal)
            if not math.isfinite(value):
                raise err("a finite numeric literal", literal)
            kind = "NUMBER"
            if j < n and text[j] == "i" and (j + 1 >= n or not _is_ident_char(text[j + 1])):
                kind = "IMAG"
                j += 1
            tokens.append(Token(kind, value, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha():
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            tokens.append(Token("IDENT", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == "-":
            if i + 1 < n and text[i + 1] == ">":
                tokens.append(Token("ARROW", "->", start_line, start_col))
                i += 2
                col += 2
                continue
            tokens.append(Token("MINUS", "-", start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == "=":
            if i + 1 < n and text[i + 1] == "=":
                tokens.append(Token("EQEQ", "==", start_line, start_col))
                i += 2
                col += 2
                continue
            tokens.append(Token("EQ", "=", start_line, start_col))
            i += 1
            col += 1
            continue
        kind = _PUNCT.get(ch)
        if kind is None:
            raise err("a token", repr(ch))
        tokens.append(Token(kind, ch, start_line, start_col))
        i += 1
        col += 1
    tokens.append(Token("EOF", None, line, col))
    return tokens


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: complex
    pos: Pos


@dataclass(frozen=True)
class Name:
    name: str
    pos: Pos


@dataclass(frozen=True)
class Call:
    func: str
    arg: "ExprNode"
    pos: Pos


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "ExprNode"
    pos: Pos


@dataclass(frozen=True)
class Bin:
    op: str
    left: "ExprNode"
    right: "ExprNode"
    pos: Pos


ExprNode = Num | Name | Call | Unary | Bin


@dataclass(frozen=True)
class TermNode:
    spins: tuple[str, ...] | None
    labels: tuple[str, ...]
    label_positions: tuple[Pos, ...]
    pos: Pos


@dataclass(frozen=True)
class ParamDecl:
    name: str
    expr: ExprNode
    pos: Pos


@dataclass(frozen=True)
class SpinDecl:
    slots: int
    bases: tuple[str, ...] | None
    pos: Pos


@dataclass(frozen=True)
class StageDecl:
    index: int
    labels: tuple[str, ...]
    pos: Pos


@dataclass(frozen=True)
class RuleDecl:
    input: TermNode
    items: tuple[tuple[ExprNode, TermNode], ...]
    pos: Pos


@dataclass(frozen=True)
class TransitionDecl:
    from_index: int
    to_index: int
    rules: tuple[RuleDecl, ...]
    pos: Pos


@dataclass(frozen=True)
class SourceDecl:
    items: tuple[tuple[ExprNode, TermNode], ...]
    pos: Pos


@dataclass(frozen=True)
class ConstraintDecl:
    lhs: ExprNode
    rhs: ExprNode
    pos: Pos


@dataclass(frozen=True)
class NetworkDoc:
    params: tuple[ParamDecl, ...]
    spin: SpinDecl | None
    stages: tuple[StageDecl, ...]
    transitions: tuple[TransitionDecl, ...]
    source: SourceDecl
    constraints: tuple[ConstraintDecl, ...]

    @property
    def slots(self) -> int:
        return self.spin.slots if self.spin else 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.k = 0

    def peek(self) -> Token:
        return self.tokens[self.k]

    def next(self) -> Token:
        tok = self.tokens[self.k]
        if tok.kind != "EOF":
            self.k += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise DslSyntaxError(tok.line, tok.col, what, _show(tok))
        return self.next()

    # -- document ----------------------------------------------------------

    def document(self) -> NetworkDoc:
        self._header()
        params: list[ParamDecl] = []
        spin: SpinDecl | None = None
        stages: list[StageDecl] = []
        transitions: list[TransitionDecl] = []
        source: SourceDecl | None = None
        constraints: list[ConstraintDecl] = []
        saw_decl = False
        while self.peek().kind != "EOF":
            tok = self.peek()
            if tok.kind != "IDENT" or tok.value not in _KEYWORDS:
                raise DslSyntaxError(tok.line, tok.col, "a declaration", _show(tok))
            saw_decl = True
            kw = self.next()
            if kw.value == "param":
                params.append(self._param(kw.pos))
            elif kw.value == "spin":
                if spin is not None:
                    raise DuplicateDeclaration(kw.line, kw.col, "spin")
                spin = self._spin(kw.pos)
            elif kw.value == "stage":
                stages.append(self._stage(kw.pos))
            elif kw.value == "transition":
                transitions.append(self._transition(kw.pos))
            elif kw.value == "source":
                if source is not None:
                    raise DuplicateDeclaration(kw.line, kw.col, "source")
                source = self._source(kw.pos)
            else:
                constraints.append(self._constraint(kw.pos))
        eof = self.peek()
        if not saw_decl:
            raise DslSyntaxError(eof.line, eof.col, "a declaration")
        if not stages:
            raise DslSyntaxError(eof.line, eof.col, "at least one stage declaration")
        if source is None:
            raise DslSyntaxError(eof.line, eof.col, "a source declaration")
        doc = NetworkDoc(
            tuple(params), spin, tuple(stages), tuple(transitions), source,
            tuple(constraints),
        )
        _resolve(doc)
        return doc

    def _header(self) -> None:
        tok = self.peek()
        if tok.kind == "IDENT" and tok.value == "stagelab":
            self.next()
            self._expect_word("MINUS", "-")
            got = self.expect("IDENT", "'network'")
            if got.value != "network":
                raise DslSyntaxError(got.line, got.col, "'network'", str(got.value))
            ver = self.expect("IDENT", "version 'v1'")
            if ver.value != "v1":
                raise DslSyntaxError(ver.line, ver.col, "version 'v1'", str(ver.value))

    def _expect_word(self, kind: str, what: str) -> Token:
        return self.expect(kind, f"'{what}'")

    def _keyword(self, word: str) -> Token:
        tok = self.expect("IDENT", f"'{word}'")
        if tok.value != word:
            raise DslSyntaxError(tok.line, tok.col, f"'{word}'", str(tok.value))
        return tok

    # -- declarations ------------------------------------------------------

    def _param(self, pos: Pos) -> ParamDecl:
        name = self.expect("IDENT", "parameter name")
        if name.value in _RESERVED:
            raise DslSyntaxError(name.line, name.col, "a non-reserved parameter name",
                                 str(name.value))
        self.expect("EQ", "'='")
        return ParamDecl(str(name.value), self.expr(), pos)

    def _spin(self, pos: Pos) -> SpinDecl:
        self._keyword("slots")
        slots = self._int("slot count")
        if not 0 <= slots <= 2:
            raise DslSyntaxError(pos[0], pos[1], "0, 1 or 2 photon slots", str(slots))
        bases = None
        tok = self.peek()
        if tok.kind == "IDENT" and tok.value == "bases":
            self.next()
            names = []
            for _ in range(slots):
                b = self.expect("IDENT", "a basis name (HV, LR, DIAG)")
                if b.value not in BASES:
                    raise DslSyntaxError(b.line, b.col, "HV, LR or DIAG", str(b.value))
                names.append(str(b.value))
            bases = tuple(names)
        return SpinDecl(slots, bases, pos)

    def _stage(self, pos: Pos) -> StageDecl:
        index = self._int("stage index")
        self.expect("LBRACE", "'{'")
        labels: list[str] = []
        positions: list[Pos] = []
        while self.peek().kind in ("IDENT", "STRING"):
            tok = self.next()
            labels.append(str(tok.value))
            positions.append(tok.pos)
        self.expect("RBRACE", "'}' or a detector label")
        for lbl, p in zip(labels, positions):
            if not lbl or any(c in lbl for c in ',&"\n\t '):
                raise DslSyntaxError(p[0], p[1], "a label without spaces, commas or '&'",
                                     lbl)
        return StageDecl(index, tuple(labels), pos)

    def _transition(self, pos: Pos) -> TransitionDecl:
        a = self._int("stage index")
        self.expect("ARROW", "'->'")
        b = self._int("stage index")
        self.expect("LBRACE", "'{'")
        rules: list[RuleDecl] = []
        while self.peek().kind != "RBRACE":
            rules.append(self._rule())
        self.expect("RBRACE", "'}'")
        return TransitionDecl(a, b, tuple(rules), pos)

    def _rule(self) -> RuleDecl:
        term = self.term()
        self.expect("ARROW", "'->'")
        items = self._lincomb()
        self.expect("SEMI", "';'")
        return RuleDecl(term, items, term.pos)

    def _source(self, pos: Pos) -> SourceDecl:
        self.expect("LBRACE", "'{'")
        items = self._lincomb()
        self.expect("RBRACE", "'}'")
        return SourceDecl(items, pos)

    def _constraint(self, pos: Pos) -> ConstraintDecl:
        lhs = self.expr()
        self.expect("EQEQ", "'=='")
        return ConstraintDecl(lhs, self.expr(), pos)

    def _int(self, what: str) -> int:
        tok = self.expect("NUMBER", what)
        value = tok.value
        if value != int(value):
            raise DslSyntaxError(tok.line, tok.col, f"an integer {what}", repr(value))
        return int(value)

    # -- terms and linear combinations --------------------------------------

    def _lincomb(self) -> tuple[tuple[ExprNode, TermNode], ...]:
        items = [self._product()]
        while self.peek().kind in ("PLUS", "MINUS"):
            sep = self.next()
            coeff, term = self._product()
            if sep.kind == "MINUS":
                coeff = Unary("-", coeff, sep.pos)
            items.append((coeff, term))
        return tuple(items)

    def _product(self) -> tuple[ExprNode, TermNode]:
        coeff = self.coeff()
        self.expect("STAR", "'*' between coefficient and term")
        return (coeff, self.term())

    def term(self) -> TermNode:
        tok = self.peek()
        spins: tuple[str, ...] | None = None
        if tok.kind == "LPAREN":
            self.next()
            labels = [self._spin_label()]
            while self.peek().kind == "COMMA":
                self.next()
                labels.append(self._spin_label())
            self.expect("RPAREN", "')'")
            self.expect("AT", "'@'")
            spins = tuple(labels)
        elif tok.kind in ("PLUS", "MINUS"):
            spins = (self._spin_label(),)
            self.expect("AT", "'@'")
        elif tok.kind == "IDENT" and self.tokens[self.k + 1].kind == "AT":
            spins = (self._spin_label(),)
            self.expect("AT", "'@'")
        labels: list[str] = []
        positions: list[Pos] = []
        while self.peek().kind in ("IDENT", "STRING"):
            t = self.next()
            labels.append(str(t.value))
            positions.append(t.pos)
        if not labels:
            t = self.peek()
            raise DslSyntaxError(t.line, t.col, "a detector label", _show(t))
        return TermNode(spins, tuple(labels), tuple(positions), tok.pos)

    def _spin_label(self) -> str:
        tok = self.next()
        if tok.kind == "PLUS":
            return "+"
        if tok.kind == "MINUS":
            return "-"
        if tok.kind == "IDENT" and tok.value in _SPIN_LABELS:
            return str(tok.value)
        raise DslSyntaxError(tok.line, tok.col, "a spin label (H V L R + -)", _show(tok))

    # -- expressions ---------------------------------------------------------

    def expr(self) -> ExprNode:
        node = self._prod()
        while self.peek().kind in ("PLUS", "MINUS"):
            op = self.next()
            node = Bin("+" if op.kind == "PLUS" else "-", node, self._prod(), op.pos)
        return node

    def _prod(self) -> ExprNode:
        node = self.coeff()
        while self.peek().kind in ("STAR", "SLASH"):
            op = self.next()
            node = Bin("*" if op.kind == "STAR" else "/", node, self.coeff(), op.pos)
        return node

    def coeff(self) -> ExprNode:
        """Unary/power level; also the coefficient grammar inside lincombs."""
        tok = self.peek()
        if tok.kind == "MINUS":
            self.next()
            return Unary("-", self.coeff(), tok.pos)
        return self._power()

    def _power(self) -> ExprNode:
        base = self._atom()
        if self.peek().kind == "CARET":
            op = self.next()
            return Bin("^", base, self.coeff(), op.pos)  # right associative
        return base

    def _atom(self) -> ExprNode:
        tok = self.next()
        if tok.kind == "NUMBER":
            return Num(complex(tok.value), tok.pos)
        if tok.kind == "IMAG":
            return Num(complex(0.0, tok.value), tok.pos)
        if tok.kind == "IDENT":
            name = str(tok.value)
            if name == "i":
                return Num(1j, tok.pos)
            if self.peek().kind == "LPAREN":
                self.next()
                arg = self.expr()
                self.expect("RPAREN", "')'")
                return Call(name, arg, tok.pos)
            return Name(name, tok.pos)
        if tok.kind == "LPAREN":
            node = self.expr()
            self.expect("RPAREN", "')'")
            return node
        raise DslSyntaxError(tok.line, tok.col, "a number, parameter or '('", _show(tok))


def _show(tok: Token) -> str:
    return "end of input" if tok.kind == "EOF" else repr(str(tok.value))


# ---------------------------------------------------------------------------
# resolution: declarations, scopes, structural invariants
# ---------------------------------------------------------------------------


def _resolve(doc: NetworkDoc) -> None:
    declared: set[str] = set()
    for p in doc.params:
        if p.name in declared:
            raise DuplicateDeclaration(p.pos[0], p.pos[1], p.name)
        _check_expr(p.expr, declared)
        declared.add(p.name)

    by_index: dict[int, StageDecl] = {}
    for st in doc.stages:
        if st.index in by_index:
            raise DuplicateDeclaration(st.pos[0], st.pos[1], f"stage {st.index}")
        seen: set[str] = set()
        for lbl in st.labels:
            if lbl in seen:
                raise DuplicateDeclaration(st.pos[0], st.pos[1], lbl)
            seen.add(lbl)
        by_index[st.index] = st
    if sorted(by_index) != list(range(len(by_index))):
        st = doc.stages[-1]
        raise DslSyntaxError(st.pos[0], st.pos[1],
                             "stage indices contiguous from 0")

    slots = doc.slots
    seen_transitions: set[int] = set()
    for t in doc.transitions:
        if t.from_index in seen_transitions:
            raise DuplicateDeclaration(
                t.pos[0], t.pos[1], f"transition {t.from_index} -> {t.to_index}"
            )
        seen_transitions.add(t.from_index)
        if t.from_index not in by_index or t.to_index not in by_index:
            missing = t.from_index if t.from_index not in by_index else t.to_index
            raise UndeclaredIdentifier(t.pos[0], t.pos[1], f"stage {missing}")
        if t.to_index != t.from_index + 1:
            raise DslSyntaxError(t.pos[0], t.pos[1],
                                 "a transition between consecutive stages")
        if not t.rules:
            raise DslSyntaxError(t.pos[0], t.pos[1], "at least one rule")
        inert = t.rules[0].input.spins is None
        input_bases: tuple[str, ...] | None = None
        seen_inputs: set = set()
        for rule in t.rules:
            if (rule.input.spins is None) != inert:
                raise DslSyntaxError(
                    rule.pos[0], rule.pos[1],
                    "all rules of a transition to be spin-keyed or all spin-inert",
                )
            _check_term(rule.input, by_index[t.from_index], slots, declared,
                        spin_required=not inert)
            key = (rule.input.spins, frozenset(rule.input.labels))
            if key in seen_inputs:
                raise DuplicateDeclaration(rule.pos[0], rule.pos[1], "rule input")
            seen_inputs.add(key)
            if not inert:
                bases = tuple(LABEL_BASIS[s][0] for s in rule.input.spins)
                if input_bases is None:
                    input_bases = bases
                elif bases != input_bases:
                    raise DslSyntaxError(
                        rule.pos[0], rule.pos[1],
                        "rule inputs sharing one spin basis per slot",
                    )
            for coeff, out in rule.items:
                _check_expr(coeff, declared)
                _check_term(out, by_index[t.to_index], slots, declared,
                            spin_required=not inert, spin_forbidden=inert)

    for coeff, term in doc.source.items:
        _check_expr(coeff, declared)
        _check_term(term, by_index[0], slots, declared, spin_required=slots > 0)

    for c in doc.constraints:
        _check_expr(c.lhs, declared)
        _check_expr(c.rhs, declared)


def _check_term(
    term: TermNode,
    stage: StageDecl,
    slots: int,
    declared: set[str],
    spin_required: bool = False,
    spin_forbidden: bool = False,
) -> None:
    if term.spins is not None:
        if spin_forbidden:
            raise DslSyntaxError(term.pos[0], term.pos[1],
                                 "no spin label on a spin-inert rule output")
        if len(term.spins) != slots:
            raise DslSyntaxError(
                term.pos[0], term.pos[1],
                f"{slots} spin label(s) as declared by 'spin slots {slots}'",
            )
    elif spin_required and slots > 0:
        raise DslSyntaxError(term.pos[0], term.pos[1],
                             f"a spin term with {slots} label(s)")
    seen = set()
    for lbl, p in zip(term.labels, term.label_positions):
        if lbl not in stage.labels:
            raise UndeclaredIdentifier(p[0], p[1], lbl)
        if lbl in seen:
            raise DuplicateDeclaration(p[0], p[1], lbl)
        seen.add(lbl)


def _check_expr(node: ExprNode, declared: set[str]) -> None:
    if isinstance(node, Name):
        if node.name not in declared:
            raise UndeclaredIdentifier(node.pos[0], node.pos[1], node.name)
    elif isinstance(node, Call):
        if node.func not in _FUNCTIONS:
            raise UndeclaredIdentifier(node.pos[0], node.pos[1], node.func)
        _check_expr(node.arg, declared)
    elif isinstance(node, Unary):
        _check_expr(node.operand, declared)
    elif isinstance(node, Bin):
        _check_expr(node.left, declared)
        _check_expr(node.right, declared)


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------


def parse(text: str | bytes) -> NetworkDoc:
    """Parse a document; returns the AST or raises a positioned DslError."""
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8", errors="replace")
    return _Parser(_tokenize(text)).document()


def evaluate(node: ExprNode, env: dict[str, complex]) -> complex:
    """Evaluate an expression node; raises positioned DslError on bad math."""
    try:
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Name):
            return env[node.name]
        if isinstance(node, Call):
            arg = evaluate(node.arg, env)
            if arg.imag == 0:
                arg = complex(arg.real, 0.0)  # keep sqrt(-1) on the +i branch
            return cmath.sqrt(arg)
        if isinstance(node, Unary):
            return -evaluate(node.operand, env)
        if isinstance(node, Bin):
            a = evaluate(node.left, env)
            b = evaluate(node.right, env)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if node.op == "/":
                return a / b
            value = a**b
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise DslError("non-finite value", node.pos[0], node.pos[1])
            return value
    except DslError:
        raise
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise DslError(f"arithmetic error: {exc}", node.pos[0], node.pos[1]) from None
    raise TypeError(f"not an expression node: {node!r}")


def evaluate_text(text: str, env: dict[str, complex]) -> complex:
    """Parse and evaluate a standalone expression (CLI --set / --couple values)."""
    parser = _Parser(_tokenize(text))
    node = parser.expr()
    tail = parser.peek()
    if tail.kind != "EOF":
        raise DslSyntaxError(tail.line, tail.col, "end of expression", _show(tail))
    _check_expr(node, set(env))
    return evaluate(node, env)


def elaborate(doc: NetworkDoc, overrides: dict[str, object] | None = None) -> Network:
    """Substitute numbers, check constraints, and build the Network."""
    overrides = dict(overrides or {})
    declared = {p.name for p in doc.params}
    unknown = set(overrides) - declared
    if unknown:
        raise UnknownOverride(f"overrides for undeclared parameter(s): {sorted(unknown)}")

    env: dict[str, complex] = {}
    deferred: list[tuple[ParamDecl, str]] = []
    for p in doc.params:
        if p.name in overrides:
            value = overrides[p.name]
            if isinstance(value, str):
                deferred.append((p, value))
                env[p.name] = evaluate(p.expr, env)
            else:
                env[p.name] = complex(value)
        else:
            env[p.name] = evaluate(p.expr, env)
    # expression overrides see the final numeric values of every parameter
    for p, text in deferred:
        env[p.name] = evaluate_text(text, env)

    for c in doc.constraints:
        lhs = evaluate(c.lhs, env)
        rhs = evaluate(c.rhs, env)
        if abs(lhs - rhs) > CONSTRAINT_TOL:
            raise ConstraintViolated(
                f"{c.pos[0]}:{c.pos[1]}: constraint violated: "
                f"{_cfmt(lhs)} != {_cfmt(rhs)}"
            )

    stages = tuple(
        Stage(st.index, st.labels) for st in sorted(doc.stages, key=lambda s: s.index)
    )

    def build_state(stage_index: int, items, spinless: bool) -> LabState:
        state: LabState | None = None
        for coeff, term in items:
            value = evaluate(coeff, env)
            config = SignalConfig.of(stage_index, term.labels)
            if spinless or term.spins is None:
                single = LabState.from_terms(stage_index, (), [((), config, value)])
            else:
                single = LabState.single(stage_index, term.spins, config, value)
            state = single if state is None else state + single
        assert state is not None
        return state

    transitions = []
    for t in sorted(doc.transitions, key=lambda t: t.from_index):
        rules = []
        for rd in t.rules:
            inert = rd.input.spins is None
            output = build_state(t.to_index, rd.items, spinless=inert)
            rules.append(
                TransitionRule(
                    rd.input.spins,
                    SignalConfig.of(t.from_index, rd.input.labels),
                    output,
                )
            )
        transitions.append(StageTransition(t.from_index, t.to_index, tuple(rules)))

    source = build_state(0, doc.source.items, spinless=doc.slots == 0)
    return Network(
        slots=doc.slots,
        stages=stages,
        transitions=tuple(transitions),
        source=source,
        params=dict(env),
        meta={"experiment": "dsl"},
    )


def load(path: str, overrides: dict[str, object] | None = None) -> Network:
    with open(path, "rb") as fh:
        return elaborate(parse(fh.read()), overrides)


# ---------------------------------------------------------------------------
# serializer
# ---------------------------------------------------------------------------


def serialize(net: Network) -> str:
    """Deterministic numeric snapshot; round-trips to identical rate tables."""
    lines = [HEADER, ""]
    slots = net.slots
    if slots and net.source.slot_bases:
        lines.append(f"spin slots {slots} bases {' '.join(net.source.slot_bases)}")
    else:
        lines.append(f"spin slots {slots}")
    lines.append("")
    for st in net.stages:
        labels = " ".join(f'"{lbl}"' for lbl in st.detectors)
        lines.append(f"stage {st.index} {{ {labels} }}".replace("{  }", "{ }"))
    for t in net.transitions:
        lines.append("")
        lines.append(f"transition {t.from_stage} -> {t.to_stage} {{")
        order_in = {lbl: k for k, lbl in enumerate(net.stage(t.from_stage).detectors)}
        order_out = {lbl: k for k, lbl in enumerate(net.stage(t.to_stage).detectors)}
        for rule in sorted(
            t.rules,
            key=lambda r: (
                sorted(order_in[l] for l in r.config.labels),
                r.spins or (),
            ),
        ):
            input_txt = _term_text(rule.spins, rule.config.labels, order_in)
            out_txt = " + ".join(
                f"{_cfmt(c)} * {_term_text(spins or None, cfg.labels, order_out)}"
                for (spins, cfg), c in _sorted_terms(rule.output, order_out)
            )
            lines.append(f"  {input_txt} -> {out_txt};")
        lines.append("}")
    lines.append("")
    order0 = {lbl: k for k, lbl in enumerate(net.stages[0].detectors)}
    src_txt = " + ".join(
        f"{_cfmt(c)} * {_term_text(spins or None, cfg.labels, order0)}"
        for (spins, cfg), c in _sorted_terms(net.source, order0)
    )
    lines.append(f"source {{ {src_txt} }}")
    lines.append("")
    return "\n".join(lines)


def _sorted_terms(state: LabState, order: dict[str, int]):
    return sorted(
        state.items(),
        key=lambda kv: (sorted(order[l] for l in kv[0][1].labels), kv[0][0]),
    )


def _term_text(
    spins: tuple[str, ...] | None, labels: Iterable[str], order: dict[str, int]
) -> str:
    txt = " ".join(f'"{lbl}"' for lbl in sorted(labels, key=order.__getitem__))
    if spins is None or spins == ():
        return txt
    if len(spins) == 1:
        return f"{spins[0]}@{txt}"
    return f"({','.join(spins)})@{txt}"


def _cfmt(z: complex) -> str:
    z = complex(z)
    sign = "+" if z.imag >= 0 else "-"
    return f"({z.real!r}{sign}{abs(z.imag)!r}i)"
