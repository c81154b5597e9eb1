"""Hand-written lexer for `.sl` sources.

Tokens carry 1-based line/column spans. `--` starts a line comment.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, Span

KEYWORDS = {
    "module", "import", "concept", "model", "fn", "type", "data",
    "where", "match", "let", "if", "else", "true", "false",
}

PUNCT = [
    "==", "=>", "->", "(", ")", "[", "]", "{", "}", ",", ";", ":", ".", "=", "_",
]


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "float" | "string" | keyword | punctuation | "eof"
    text: str
    span: Span
    value: object = None


class LexError(Exception):
    def __init__(self, diag: Diagnostic):
        self.diagnostic = diag
        super().__init__(diag.message)


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(text: str, file: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)

    def here() -> tuple[int, int]:
        return (line, col)

    def advance(k: int = 1):
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    def fail(msg: str, start: tuple[int, int]):
        raise LexError(
            Diagnostic("E-PARSE", msg, Span(file, start, here() if here() >= start else start))
        )

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance()
            continue
        if c == "-" and text[i : i + 2] == "--":
            while i < n and text[i] != "\n":
                advance()
            continue
        start = here()
        if c == '"':
            advance()
            buf = []
            while i < n and text[i] != '"':
                ch = text[i]
                if ch == "\n":
                    fail("unterminated string literal", start)
                if ch == "\\":
                    advance()
                    if i >= n:
                        fail("unterminated string escape", start)
                    esc = text[i]
                    mapped = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc)
                    if mapped is None:
                        fail(f"unknown string escape '\\{esc}'", start)
                    buf.append(mapped)
                    advance()
                else:
                    buf.append(ch)
                    advance()
            if i >= n:
                fail("unterminated string literal", start)
            advance()  # closing quote
            end = (line, col - 1)
            tokens.append(Token("string", "".join(buf), Span(file, start, end), "".join(buf)))
            continue
        if c.isdigit():
            j = i
            if text[i : i + 2] in ("0x", "0X"):
                advance(2)
                if i >= n or text[i] not in "0123456789abcdefABCDEF":
                    fail("malformed hexadecimal literal", start)
                while i < n and text[i] in "0123456789abcdefABCDEF":
                    advance()
                lexeme = text[j:i]
                tokens.append(Token("int", lexeme, Span(file, start, (line, col - 1)), int(lexeme, 16)))
                continue
            while i < n and text[i].isdigit():
                advance()
            if i < n and text[i] == "." and i + 1 < n and text[i + 1].isdigit():
                advance()
                while i < n and text[i].isdigit():
                    advance()
                lexeme = text[j:i]
                tokens.append(Token("float", lexeme, Span(file, start, (line, col - 1)), lexeme))
                continue
            lexeme = text[j:i]
            tokens.append(Token("int", lexeme, Span(file, start, (line, col - 1)), int(lexeme)))
            continue
        if _is_ident_start(c):
            j = i
            while i < n and _is_ident(text[i]):
                advance()
            word = text[j:i]
            span = Span(file, start, (line, col - 1))
            if word == "_":
                tokens.append(Token("_", word, span))
            elif word in KEYWORDS:
                tokens.append(Token(word, word, span))
            else:
                tokens.append(Token("ident", word, span))
            continue
        matched = None
        for p in PUNCT:
            if text.startswith(p, i):
                matched = p
                break
        if matched is None:
            fail(f"unexpected character {c!r}", start)
        advance(len(matched))
        tokens.append(Token(matched, matched, Span(file, start, (line, col - 1))))

    tokens.append(Token("eof", "", Span(file, here(), here())))
    return tokens
