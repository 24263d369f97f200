"""Line-oriented script language: lexer, parser, pretty-printer.

The language is deliberately tiny: seven statement forms, keyword
arguments everywhere, ``#`` comments, and rational-pi angle literals
(``pi/8``, ``-3*pi/4``).  Statements normally end at the newline, but a
line with open brackets continues onto the next.

``parse_script(pretty_print(parse_script(text)))`` returns a tree equal
to ``parse_script(text)``: the printer is a normal form, not a
transcript.
"""

from __future__ import annotations

import math
import re

from ..errors import ParseError
from .ast import (
    CMP_OPS,
    RUN_KINDS,
    AssertDecl,
    Ctor,
    EmitDecl,
    ListV,
    MeasureDecl,
    Num,
    Ref,
    RunDecl,
    Script,
    StateDecl,
    Str,
    SystemDecl,
    TransformDecl,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<cmp>==|!=|<=|>=|<|>)
  | (?P<punct>[=,(){}\[\].*/+-])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"system", "state", "measure", "transform", "run", "assert", "emit",
             "on", "as", "tol", "pi", "product"}


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"_Token({self.kind!r}, {self.text!r}, {self.line}, {self.col})"


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    pos = 0
    depth = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "ws" or kind == "comment":
            pass
        elif kind == "newline":
            if depth == 0:
                if tokens and tokens[-1].kind != "newline":
                    tokens.append(_Token("newline", "\n", line, col))
            line += 1
            col = 0
        else:
            if kind == "punct" and tok in "([{":
                depth += 1
            elif kind == "punct" and tok in ")]}":
                depth = max(0, depth - 1)
            tokens.append(_Token(kind, tok, line, col))
        col += len(tok)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    # -- primitives ----------------------------------------------------
    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _advance(self) -> _Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def _error(self, expected: str):
        t = self.tok
        got = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"expected {expected}, got {got}", t.line, t.col)

    def _eat(self, kind: str, text: str = None) -> _Token:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            self._error(text if text is not None else kind)
        return self._advance()

    def _skip_newlines(self):
        while self.tok.kind == "newline":
            self._advance()

    def _at(self, kind: str, text: str = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    # -- values ---------------------------------------------------------
    def _number(self) -> float:
        """number ::= ["-"] (NUM ["*" "pi" ["/" NUM]] | "pi" ["/" NUM])"""
        sign = 1.0
        if self._at("punct", "-"):
            self._advance()
            sign = -1.0
        if self._at("id", "pi"):
            self._advance()
            value = math.pi
            if self._at("punct", "/"):
                self._advance()
                value /= float(self._eat("number").text)
            return sign * value
        num = float(self._eat("number").text)
        if self._at("punct", "*"):
            save = self.i
            self._advance()
            if self._at("id", "pi"):
                self._advance()
                num *= math.pi
                if self._at("punct", "/"):
                    self._advance()
                    num /= float(self._eat("number").text)
            else:
                self.i = save
        return sign * num

    def _value(self):
        t = self.tok
        if t.kind == "string":
            self._advance()
            return Str(_unquote(t.text))
        if t.kind == "punct" and t.text == "[":
            self._advance()
            items = []
            if not self._at("punct", "]"):
                items.append(self._value())
                while self._at("punct", ","):
                    self._advance()
                    items.append(self._value())
            self._eat("punct", "]")
            return ListV(tuple(items))
        if t.kind == "id" and t.text != "pi":
            self._advance()
            return Ref(t.text)
        if t.kind == "number" or (t.kind == "punct" and t.text == "-") or (
            t.kind == "id" and t.text == "pi"
        ):
            return Num(self._number())
        self._error("a value (number, string, identifier, or list)")

    def _kvlist(self, close: str) -> tuple:
        args = []
        if not self._at("punct", close):
            while True:
                key = self._eat("id").text
                self._eat("punct", "=")
                args.append((key, self._value()))
                if self._at("punct", ","):
                    self._advance()
                    continue
                break
        self._eat("punct", close)
        return tuple(args)

    def _ctor(self) -> Ctor:
        name = self._eat("id").text
        self._eat("punct", "(")
        return Ctor(name, self._kvlist(")"))

    def _ident(self, what="an identifier") -> str:
        t = self.tok
        if t.kind != "id" or t.text in _KEYWORDS:
            self._error(what)
        return self._advance().text

    # -- statements -----------------------------------------------------
    def parse(self) -> Script:
        stmts = []
        self._skip_newlines()
        while self.tok.kind != "eof":
            stmts.append(self._statement())
            if self.tok.kind not in ("newline", "eof"):
                self._error("end of statement")
            self._skip_newlines()
        return Script(tuple(stmts))

    def _statement(self):
        t = self.tok
        if t.kind != "id":
            self._error("a statement keyword")
        line = t.line
        word = t.text
        if word == "system":
            self._advance()
            name = self._ident("a system name")
            self._eat("punct", "=")
            self._eat("id", "composite")
            self._eat("punct", "(")
            return SystemDecl(name, self._kvlist(")"), line=line)
        if word == "state":
            self._advance()
            name = self._ident("a state name")
            self._eat("punct", "=")
            if self._at("id", "product"):
                self._advance()
                self._eat("punct", "(")
                left = self._ident("a state name")
                self._eat("punct", ",")
                right = self._ident("a state name")
                self._eat("punct", ")")
                return StateDecl(name, product=(left, right), line=line)
            ctor = self._ctor()
            self._eat("id", "on")
            system = self._ident("a system name")
            return StateDecl(name, ctor=ctor, system=system, line=line)
        if word == "measure":
            self._advance()
            name = self._ident("a measurement name")
            self._eat("punct", "=")
            ctor = self._ctor()
            self._eat("id", "on")
            system = self._ident("a system name")
            return MeasureDecl(name, ctor=ctor, system=system, line=line)
        if word == "transform":
            self._advance()
            name = self._ident("a transform name")
            self._eat("punct", "=")
            return TransformDecl(name, ctor=self._ctor(), line=line)
        if word == "run":
            self._advance()
            kind = self._eat("id").text
            if kind not in RUN_KINDS:
                raise ParseError(
                    f"unknown run kind {kind!r}, expected one of {', '.join(RUN_KINDS)}",
                    t.line, t.col)
            self._eat("punct", "{")
            args = self._kvlist("}")
            result = None
            if self._at("id", "as"):
                self._advance()
                result = self._ident("a result name")
            return RunDecl(kind, args, result=result, line=line)
        if word == "assert":
            self._advance()
            first = self._ident("a result name")
            path = [first]
            while self._at("punct", "."):
                self._advance()
                path.append(self._eat("id").text)
            if self.tok.kind != "cmp":
                self._error("a comparison operator")
            op = self._advance().text
            value = self._number()
            tol = None
            if self._at("id", "tol"):
                self._advance()
                tol = self._number()
            return AssertDecl(tuple(path), op, value, tol=tol, line=line)
        if word == "emit":
            self._advance()
            fmt = self._eat("id").text
            if fmt not in ("csv", "json"):
                raise ParseError(f"emit format must be csv or json, got {fmt!r}",
                                 t.line, t.col)
            path = _unquote(self._eat("string").text)
            return EmitDecl(fmt, path, line=line)
        self._error("a statement keyword (system/state/measure/transform/run/assert/emit)")


def _unquote(text: str) -> str:
    body = text[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _check(script: Script):
    """Static checks: definition before use, single emit."""
    defined = set()
    emits = 0
    for st in script.statements:
        if isinstance(st, SystemDecl):
            _check_refs(st.args, defined, st.line)
            defined.add(st.name)
        elif isinstance(st, StateDecl):
            if st.product is not None:
                for ref in st.product:
                    _require(ref, defined, st.line)
            else:
                _check_refs(st.ctor.args, defined, st.line)
                _require(st.system, defined, st.line)
            defined.add(st.name)
        elif isinstance(st, MeasureDecl):
            _check_refs(st.ctor.args, defined, st.line)
            _require(st.system, defined, st.line)
            defined.add(st.name)
        elif isinstance(st, TransformDecl):
            _check_refs(st.ctor.args, defined, st.line)
            defined.add(st.name)
        elif isinstance(st, RunDecl):
            _check_refs(st.args, defined, st.line)
            if st.result is not None:
                defined.add(st.result)
        elif isinstance(st, AssertDecl):
            _require(st.target[0], defined, st.line)
        elif isinstance(st, EmitDecl):
            emits += 1
            if emits > 1:
                raise ParseError("at most one emit statement per script", st.line, 1)


def _require(name: str, defined: set, line: int):
    if name not in defined:
        raise ParseError(f"identifier {name!r} used before definition", line, 1)


def _check_refs(args: tuple, defined: set, line: int):
    for _, value in args:
        if isinstance(value, Ref):
            _require(value.name, defined, line)
        elif isinstance(value, ListV):
            for item in value.items:
                if isinstance(item, Ref):
                    _require(item.name, defined, line)


def parse_script(text: str) -> Script:
    """Parse script text to an AST, with static well-formedness checks."""
    script = _Parser(text).parse()
    _check(script)
    return script


def _fmt_num(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _fmt_value(v) -> str:
    if isinstance(v, Num):
        return _fmt_num(v.value)
    if isinstance(v, Str):
        return _quote(v.value)
    if isinstance(v, Ref):
        return v.name
    if isinstance(v, ListV):
        return "[" + ", ".join(_fmt_value(x) for x in v.items) + "]"
    raise TypeError(f"not a value node: {v!r}")


def _fmt_args(args: tuple) -> str:
    return ", ".join(f"{k}={_fmt_value(v)}" for k, v in args)


def pretty_print(script: Script) -> str:
    """Canonical text for a script; reparses to an equal AST."""
    out = []
    for st in script.statements:
        if isinstance(st, SystemDecl):
            out.append(f"system {st.name} = composite({_fmt_args(st.args)})")
        elif isinstance(st, StateDecl):
            if st.product is not None:
                out.append(f"state {st.name} = product({st.product[0]}, {st.product[1]})")
            else:
                out.append(
                    f"state {st.name} = {st.ctor.name}({_fmt_args(st.ctor.args)}) on {st.system}"
                )
        elif isinstance(st, MeasureDecl):
            out.append(
                f"measure {st.name} = {st.ctor.name}({_fmt_args(st.ctor.args)}) on {st.system}"
            )
        elif isinstance(st, TransformDecl):
            out.append(f"transform {st.name} = {st.ctor.name}({_fmt_args(st.ctor.args)})")
        elif isinstance(st, RunDecl):
            text = f"run {st.kind} {{ {_fmt_args(st.args)} }}" if st.args else (
                f"run {st.kind} {{ }}")
            if st.result is not None:
                text += f" as {st.result}"
            out.append(text)
        elif isinstance(st, AssertDecl):
            text = f"assert {'.'.join(st.target)} {st.op} {_fmt_num(st.value)}"
            if st.tol is not None:
                text += f" tol {_fmt_num(st.tol)}"
            out.append(text)
        elif isinstance(st, EmitDecl):
            out.append(f"emit {st.fmt} {_quote(st.path)}")
        else:
            raise TypeError(f"not a statement node: {st!r}")
    return "\n".join(out) + ("\n" if out else "")
