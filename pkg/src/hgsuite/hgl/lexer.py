"""Tokenizer for HGL source text.

UTF-8 text, ``//`` line comments.  Strings are double-quoted with
``\\"``, ``\\\\``, ``\\n`` and ``\\t`` escapes.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import HglSyntaxError

KEYWORDS = frozenset(
    {
        "app",
        "input",
        "title",
        "device",
        "number",
        "string",
        "bool",
        "enum",
        "def",
        "subscribe",
        "runIn",
        "runEvery",
        "if",
        "else",
        "switch",
        "case",
        "default",
        "true",
        "false",
    }
)

_PUNCT = (
    "==",
    "!=",
    "<=",
    ">=",
    "&&",
    "||",
    "(",
    ")",
    "{",
    "}",
    ":",
    ",",
    ".",
    "=",
    "<",
    ">",
    "!",
    "+",
    "-",
    "*",
    "?",
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # IDENT, INT, STRING, keyword text, punctuation text, EOF
    text: str
    value: object
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def error(msg: str) -> HglSyntaxError:
        return HglSyntaxError("SyntaxError", msg, line=line, col=col)

    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c == '"':
            j = i + 1
            buf: list[str] = []
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    raise error("newline in string literal")
                if source[j] == "\\":
                    if j + 1 >= n:
                        raise error("unterminated string literal")
                    esc = source[j + 1]
                    if esc == "n":
                        buf.append("\n")
                    elif esc == "t":
                        buf.append("\t")
                    elif esc in ('"', "\\"):
                        buf.append(esc)
                    else:
                        raise error(f"unknown escape \\{esc}")
                    j += 2
                else:
                    buf.append(source[j])
                    j += 1
            if j >= n:
                raise error("unterminated string literal")
            text = source[i : j + 1]
            tokens.append(Token("STRING", text, "".join(buf), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            text = source[i:j]
            tokens.append(Token("INT", text, int(text), start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = text if text in KEYWORDS else "IDENT"
            tokens.append(Token(kind, text, text, start_line, start_col))
            col += j - i
            i = j
            continue
        for punct in _PUNCT:
            if source.startswith(punct, i):
                tokens.append(Token(punct, punct, punct, start_line, start_col))
                i += len(punct)
                col += len(punct)
                break
        else:
            raise error(f"unexpected character {c!r}")
    tokens.append(Token("EOF", "", None, line, col))
    return tokens
