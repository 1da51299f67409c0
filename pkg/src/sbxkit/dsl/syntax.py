"""Lexer and raw block parser for the `.sbx` configuration syntax.

The surface syntax is a small declarative language: named, brace-delimited
blocks containing `key: value` entries and nested blocks.  Values are typed
literals: double-quoted strings, integers, decimals, booleans (`true` /
`false`), bare enum identifiers and `[...]` lists.  `#` starts a line
comment.  Files are UTF-8.

This module knows nothing about the configuration schema; it produces a raw
block tree with source positions.  Schema-aware binding lives in
:mod:`sbxkit.dsl.binding`.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Pos:
    """1-based line/column of the first character of a node."""

    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class ParseError(Exception):
    """Raised on malformed input; carries position and expected tokens."""

    def __init__(self, message: str, pos: Pos, expected: tuple[str, ...] = ()):
        super().__init__(message)
        self.message = message
        self.pos = pos
        self.expected = expected

    def __str__(self) -> str:
        base = f"{self.pos}: {self.message}"
        if self.expected:
            base += " (expected " + " | ".join(self.expected) + ")"
        return base


_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789-")

IDENT_RE_HELP = "identifier ([A-Za-z_][A-Za-z0-9_-]*)"


def is_identifier(text: str) -> bool:
    if not text or text[0] not in _IDENT_START:
        return False
    return all(ch in _IDENT_CONT for ch in text[1:])


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT STRING INT DECIMAL LBRACE RBRACE LBRACKET RBRACKET COLON COMMA EOF
    text: str
    value: object
    pos: Pos


_PUNCT = {
    "{": "LBRACE",
    "}": "RBRACE",
    "[": "LBRACKET",
    "]": "RBRACKET",
    ":": "COLON",
    ",": "COMMA",
}

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r", "/": "/"}


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
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
            while i < n and source[i] != "\n":
                i += 1
            continue
        pos = Pos(line, col)
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, ch, pos))
            i += 1
            col += 1
            continue
        if ch == '"':
            text, value, consumed = _lex_string(source, i, pos)
            tokens.append(Token("STRING", text, value, pos))
            i += consumed
            col += consumed
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and source[i + 1].isdigit()):
            text, kind, value, consumed = _lex_number(source, i, pos)
            tokens.append(Token(kind, text, value, pos))
            i += consumed
            col += consumed
            continue
        if ch in _IDENT_START:
            j = i + 1
            while j < n and source[j] in _IDENT_CONT:
                j += 1
            text = source[i:j]
            tokens.append(Token("IDENT", text, text, pos))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", pos,
                         expected=("identifier", "string", "number", "{", "}", "[", "]"))
    tokens.append(Token("EOF", "", None, Pos(line, col)))
    return tokens


def _lex_string(source: str, start: int, pos: Pos) -> tuple[str, str, int]:
    i = start + 1
    n = len(source)
    out: list[str] = []
    while i < n:
        ch = source[i]
        if ch == '"':
            text = source[start : i + 1]
            return text, "".join(out), i + 1 - start
        if ch == "\n":
            break
        if ch == "\\":
            if i + 1 >= n:
                break
            esc = source[i + 1]
            if esc in _ESCAPES:
                out.append(_ESCAPES[esc])
                i += 2
                continue
            if esc == "u" and i + 5 < n:
                hexpart = source[i + 2 : i + 6]
                try:
                    out.append(chr(int(hexpart, 16)))
                except ValueError:
                    raise ParseError(f"invalid unicode escape \\u{hexpart}", pos) from None
                i += 6
                continue
            raise ParseError(f"invalid escape sequence \\{esc}", pos)
        out.append(ch)
        i += 1
    raise ParseError("unterminated string literal", pos, expected=('"',))


def _lex_number(source: str, start: int, pos: Pos) -> tuple[str, str, object, int]:
    i = start
    n = len(source)
    if source[i] == "-":
        i += 1
    while i < n and source[i].isdigit():
        i += 1
    is_decimal = False
    if i < n and source[i] == "." and i + 1 < n and source[i + 1].isdigit():
        is_decimal = True
        i += 1
        while i < n and source[i].isdigit():
            i += 1
    if i < n and source[i] in "eE":
        j = i + 1
        if j < n and source[j] in "+-":
            j += 1
        if j < n and source[j].isdigit():
            is_decimal = True
            i = j
            while i < n and source[i].isdigit():
                i += 1
    text = source[start:i]
    if is_decimal:
        return text, "DECIMAL", float(text), i - start
    return text, "INT", int(text), i - start


# --- raw tree -------------------------------------------------------------

# RawValue.kind is one of: string, int, decimal, bool, enum, list
@dataclass
class RawValue:
    kind: str
    value: object
    pos: Pos


@dataclass
class RawEntry:
    key: str
    value: RawValue
    pos: Pos


@dataclass
class RawBlock:
    keyword: str
    label: str | None
    label_is_string: bool
    pos: Pos
    entries: list[RawEntry] = field(default_factory=list)
    blocks: list["RawBlock"] = field(default_factory=list)

    def header(self) -> str:
        return self.keyword if self.label is None else f"{self.keyword} {self.label}"


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def take(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"unexpected {_describe(tok)}", tok.pos, expected=(what,))
        self.i += 1
        return tok

    def parse_document(self) -> list[RawBlock]:
        blocks: list[RawBlock] = []
        while self.peek().kind != "EOF":
            blocks.append(self.parse_block())
        return blocks

    def parse_block(self) -> RawBlock:
        kw = self.take("IDENT", "block keyword")
        label: str | None = None
        label_is_string = False
        tok = self.peek()
        if tok.kind == "IDENT":
            label = tok.text
            self.i += 1
        elif tok.kind == "STRING":
            label = str(tok.value)
            label_is_string = True
            self.i += 1
        self.take("LBRACE", "{")
        block = RawBlock(kw.text, label, label_is_string, kw.pos)
        seen_keys: dict[str, Pos] = {}
        while True:
            tok = self.peek()
            if tok.kind == "RBRACE":
                self.i += 1
                return block
            if tok.kind == "EOF":
                raise ParseError(f"unclosed block '{block.header()}' opened at {block.pos}",
                                 tok.pos, expected=("}",))
            if tok.kind != "IDENT":
                raise ParseError(f"unexpected {_describe(tok)} in block '{block.header()}'",
                                 tok.pos, expected=("key", "block", "}"))
            nxt = self.peek(1)
            if nxt.kind == "COLON":
                entry = self.parse_entry()
                if entry.key in seen_keys:
                    raise ParseError(
                        f"duplicate key '{entry.key}' (first at {seen_keys[entry.key]}, "
                        f"again at {entry.pos})",
                        entry.pos,
                    )
                seen_keys[entry.key] = entry.pos
                block.entries.append(entry)
            else:
                block.blocks.append(self.parse_block())

    def parse_entry(self) -> RawEntry:
        key = self.take("IDENT", "key")
        self.take("COLON", ":")
        value = self.parse_value()
        return RawEntry(key.text, value, key.pos)

    def parse_value(self) -> RawValue:
        tok = self.peek()
        if tok.kind == "STRING":
            self.i += 1
            return RawValue("string", tok.value, tok.pos)
        if tok.kind == "INT":
            self.i += 1
            return RawValue("int", tok.value, tok.pos)
        if tok.kind == "DECIMAL":
            self.i += 1
            return RawValue("decimal", tok.value, tok.pos)
        if tok.kind == "IDENT":
            self.i += 1
            if tok.text == "true":
                return RawValue("bool", True, tok.pos)
            if tok.text == "false":
                return RawValue("bool", False, tok.pos)
            return RawValue("enum", tok.text, tok.pos)
        if tok.kind == "LBRACKET":
            return self.parse_list()
        raise ParseError(f"unexpected {_describe(tok)}", tok.pos,
                         expected=("string", "number", "boolean", "identifier", "["))

    def parse_list(self) -> RawValue:
        open_tok = self.take("LBRACKET", "[")
        items: list[RawValue] = []
        if self.peek().kind == "RBRACKET":
            self.i += 1
            return RawValue("list", items, open_tok.pos)
        while True:
            items.append(self.parse_value())
            tok = self.peek()
            if tok.kind == "COMMA":
                self.i += 1
                if self.peek().kind == "RBRACKET":  # trailing comma
                    self.i += 1
                    return RawValue("list", items, open_tok.pos)
                continue
            if tok.kind == "RBRACKET":
                self.i += 1
                return RawValue("list", items, open_tok.pos)
            raise ParseError(f"unexpected {_describe(tok)} in list", tok.pos,
                             expected=(",", "]"))


def _describe(tok: Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    return f"token {tok.text!r}"


def parse_raw(source: str) -> list[RawBlock]:
    """Parse UTF-8 text into a list of top-level raw blocks."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    return _Parser(tokenize(source)).parse_document()
