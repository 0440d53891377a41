import re
from typing import NamedTuple

from .errors import DomainSyntaxError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|\+=|-=|<=|>=|!=|=|<|>|@|\(|\)|\[|\]|\{|\}|,|;|\+|-|:)
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    text: str
    col: int


def tokenize(text, line=None, offset=0):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DomainSyntaxError(f"unexpected character {text[pos]!r}", line, offset + pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), offset + pos + 1))
        pos = m.end()
    return tokens


class TokenStream:
    """Cursor over a token list with the handful of helpers the parsers need."""

    def __init__(self, tokens, line=None):
        self.tokens = tokens
        self.pos = 0
        self.line = line

    def peek(self, ahead=0):
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, *texts):
        tok = self.peek()
        return tok is not None and tok.text in texts

    def next(self):
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, text):
        tok = self.next()
        if tok.text != text:
            raise DomainSyntaxError(f"expected {text!r}, found {tok.text!r}", self.line, tok.col)
        return tok

    def accept(self, text):
        if self.at(text):
            return self.next()
        return None

    def done(self):
        return self.pos >= len(self.tokens)

    def error(self, message):
        tok = self.peek()
        col = tok.col if tok is not None else None
        return DomainSyntaxError(message, self.line, col)
