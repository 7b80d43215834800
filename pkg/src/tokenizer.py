"""
Tokenizer for Sysmel source text.
Turns UTF-8 text into a list of tokens ending in an END token.
"""

import re
import bisect
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Any

from .data_structures import SourcePosition
from .errors import ParseError
from .object_model import Immediate, ImmediateTag, intern_symbol


class TokenKind(Enum):
    INTEGER = "integer"
    FLOAT = "float"
    SYMBOL = "symbol"
    STRING = "string"
    CHARACTER = "character"
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    BINARY_OPERATOR = "binary-operator"
    LOW_PRECEDENCE_OPERATOR = "low-precedence-operator"
    ASSIGNMENT = "assignment"
    PERIOD = "period"
    SEMICOLON = "semicolon"
    COMMA = "comma"
    COLON = "colon"
    COLON_COLON = "colon-colon"
    LEFT_PAREN = "left-paren"
    RIGHT_PAREN = "right-paren"
    LEFT_BRACE = "left-brace"
    RIGHT_BRACE = "right-brace"
    LEFT_BRACKET = "left-bracket"
    RIGHT_BRACKET = "right-bracket"
    DICTIONARY_OPEN = "dictionary-open"
    BYTE_ARRAY_OPEN = "byte-array-open"
    LITERAL_ARRAY_OPEN = "literal-array-open"
    QUOTE = "quote"
    QUASI_QUOTE = "quasi-quote"
    UNQUOTE = "unquote"
    SPLICE = "splice"
    END = "end"


@dataclass(frozen=True)
class Token:
    """A lexical token; value holds the pre-parsed literal payload"""
    kind: TokenKind
    text: str
    value: Any
    position: SourcePosition
    suffix: Optional[str] = None
    space_before: bool = False
    newline_before: bool = False


NUMBER_SUFFIXES = ("i8", "i16", "i32", "i64", "u8", "u16", "u32", "u64", "sz", "f32", "f64")
OPERATOR_CHARACTERS = "+-*/\\<>=~&|@%!?^"
ESCAPES = {'n': '\n', 'r': '\r', 't': '\t', '0': '\0', '\\': '\\', '"': '"', "'": "'", 'e': '\x1b'}

# Tokens after which a '-' immediately followed by a digit is a binary operator, not a sign.
OPERAND_ENDING_KINDS = {
    TokenKind.INTEGER, TokenKind.FLOAT, TokenKind.IDENTIFIER, TokenKind.STRING, TokenKind.CHARACTER,
    TokenKind.SYMBOL, TokenKind.RIGHT_PAREN, TokenKind.RIGHT_BRACKET, TokenKind.RIGHT_BRACE,
}

_SYMBOL_RE = re.compile(r'(?:[A-Za-z_]\w*:)+|[A-Za-z_]\w*(?:::[A-Za-z_]\w*)*')
_SUFFIX_RE = re.compile(r'(i8|i16|i32|i64|u8|u16|u32|u64|sz|f32|f64)(?![\w])')


def _is_identifier_start(char: str) -> bool:
    return char.isalpha() or char == '_'


def _is_identifier_char(char: str) -> bool:
    return char.isalnum() or char == '_'


class Tokenizer:
    """Scans one source text"""

    def __init__(self, source: str, file_name: str = "<input>"):
        self.source = source
        self.file_name = file_name
        self.index = 0
        self.tokens: List[Token] = []
        self.logger = logging.getLogger("SysmelKernel")
        self._line_starts = [0] + [m.end() for m in re.finditer('\n', source)]

    # --- positions ---
    def position(self, start: int, end: int) -> SourcePosition:
        line_index = bisect.bisect_right(self._line_starts, start) - 1
        return SourcePosition(self.file_name, start, end, line_index + 1, start - self._line_starts[line_index] + 1)

    def error(self, message: str, start: int, kind: str) -> ParseError:
        return ParseError(message, self.position(start, max(start, min(self.index, len(self.source)))), kind)

    def peek(self, offset: int = 0) -> str:
        index = self.index + offset
        return self.source[index] if index < len(self.source) else ''

    # --- main loop ---
    def tokenize(self) -> List[Token]:
        while True:
            space_before, newline_before = self._skip_blanks()
            start = self.index
            if self.index >= len(self.source):
                self.tokens.append(Token(TokenKind.END, "", None, self.position(start, start),
                                         space_before=space_before, newline_before=newline_before))
                break
            kind, value, suffix = self._scan_token()
            self.tokens.append(Token(kind, self.source[start:self.index], value, self.position(start, self.index),
                                     suffix, space_before, newline_before))
        self.logger.debug(f"Tokenized {self.file_name}: {len(self.tokens)} tokens")
        return self.tokens

    def _skip_blanks(self):
        space_before = self.index == 0
        newline_before = self.index == 0
        while self.index < len(self.source):
            char = self.source[self.index]
            if char.isspace():
                space_before = True
                newline_before = newline_before or char == '\n'
                self.index += 1
            elif char == '#' and self.peek(1) == '#':
                space_before = True
                while self.index < len(self.source) and self.source[self.index] != '\n':
                    self.index += 1
            else:
                break
        return space_before, newline_before

    def _previous_kind(self) -> Optional[TokenKind]:
        return self.tokens[-1].kind if self.tokens else None

    def _scan_token(self):
        char = self.peek()
        start = self.index

        if char.isdigit():
            return self._scan_number(start, negative=False)
        if char == '-' and self.peek(1).isdigit() and self._previous_kind() not in OPERAND_ENDING_KINDS:
            self.index += 1
            return self._scan_number(start, negative=True)
        if _is_identifier_start(char):
            return self._scan_identifier(start)
        if char == '"':
            return TokenKind.STRING, self._scan_quoted('"', start, "unterminated-string"), None
        if char == "'":
            return self._scan_character(start)
        if char == '#':
            return self._scan_hash(start)
        if char == '`':
            return self._scan_backquote(start)
        if char == ':':
            return self._scan_colon(start)
        if char in OPERATOR_CHARACTERS:
            while self.peek() and self.peek() in OPERATOR_CHARACTERS:
                self.index += 1
            return TokenKind.BINARY_OPERATOR, self.source[start:self.index], None

        simple = {
            '.': TokenKind.PERIOD, ';': TokenKind.SEMICOLON, ',': TokenKind.COMMA,
            '(': TokenKind.LEFT_PAREN, ')': TokenKind.RIGHT_PAREN,
            '{': TokenKind.LEFT_BRACE, '}': TokenKind.RIGHT_BRACE,
            '[': TokenKind.LEFT_BRACKET, ']': TokenKind.RIGHT_BRACKET,
        }
        if char in simple:
            self.index += 1
            return simple[char], None, None
        self.index += 1
        raise self.error(f"unknown character {char!r}", start, "unknown-character")

    # --- numbers ---
    def _scan_digits(self, valid) -> str:
        begin = self.index
        while self.peek() and (valid(self.peek()) or self.peek() == '_'):
            self.index += 1
        return self.source[begin:self.index]

    def _scan_suffix(self) -> Optional[str]:
        match = _SUFFIX_RE.match(self.source, self.index)
        if match:
            self.index = match.end()
            return match.group(1)
        return None

    def _scan_number(self, start: int, negative: bool):
        digits = self._scan_digits(str.isdigit)
        sign = -1 if negative else 1

        # Radix literal NrDIGITS
        if self.peek() == 'r' and _is_identifier_char(self.peek(1)):
            radix = int(digits.replace('_', ''))
            if not 2 <= radix <= 36:
                raise self.error(f"radix {radix} is outside 2..36", start, "invalid-digit")
            self.index += 1
            body_start = self.index
            body = self._scan_digits(str.isalnum)
            suffix = None
            for candidate in NUMBER_SUFFIXES:
                prefix = body[:-len(candidate)]
                if body.endswith(candidate) and prefix and all(
                        c == '_' or int(c, 36) < radix for c in prefix):
                    suffix, body = candidate, prefix
                    break
            for offset, digit in enumerate(body):
                if digit != '_' and int(digit, 36) >= radix:
                    self.index = body_start + offset + 1
                    raise self.error(f"digit {digit!r} is not valid in radix {radix}", body_start + offset,
                                     "invalid-digit")
            cleaned = body.replace('_', '')
            if not cleaned:
                raise self.error("radix literal without digits", start, "invalid-digit")
            return TokenKind.INTEGER, sign * int(cleaned, radix), suffix

        is_float = False
        if self.peek() == '.' and self.peek(1).isdigit():
            is_float = True
            self.index += 1
            self._scan_digits(str.isdigit)
        if self.peek() in ('e', 'E') and (self.peek(1).isdigit() or
                                          (self.peek(1) in '+-' and self.peek(2).isdigit())):
            is_float = True
            self.index += 2
            self._scan_digits(str.isdigit)
        text = self.source[start:self.index].replace('_', '')
        suffix = self._scan_suffix()
        if is_float:
            return TokenKind.FLOAT, float(text), suffix
        return TokenKind.INTEGER, int(text), suffix

    # --- identifiers and keywords ---
    def _scan_name(self):
        while _is_identifier_char(self.peek()):
            self.index += 1

    def _colon_starts_keyword(self) -> bool:
        return self.peek() == ':' and self.peek(1) not in ('=', ':')

    def _scan_identifier(self, start: int):
        self._scan_name()
        is_path = False
        while self.peek() == ':' and self.peek(1) == ':' and _is_identifier_start(self.peek(2)):
            is_path = True
            self.index += 2
            self._scan_name()
        if is_path:
            # RawTuple::slotAt:put: is one namespaced identifier
            while self._colon_starts_keyword():
                self.index += 1
                if _is_identifier_start(self.peek()):
                    self._scan_name()
                else:
                    break
            return TokenKind.IDENTIFIER, self.source[start:self.index], None
        if self._colon_starts_keyword():
            self.index += 1
            return TokenKind.KEYWORD, self.source[start:self.index], None
        return TokenKind.IDENTIFIER, self.source[start:self.index], None

    def _scan_colon(self, start: int):
        if self.peek(1) == '=':
            self.index += 2
            return TokenKind.ASSIGNMENT, None, None
        if self.peek(1) == ':':
            self.index += 2
            if self.peek() and self.peek() in OPERATOR_CHARACTERS:
                while self.peek() and self.peek() in OPERATOR_CHARACTERS:
                    self.index += 1
                return TokenKind.LOW_PRECEDENCE_OPERATOR, self.source[start:self.index], None
            return TokenKind.COLON_COLON, None, None
        self.index += 1
        return TokenKind.COLON, None, None

    # --- strings, characters, symbols ---
    def _scan_quoted(self, delimiter: str, start: int, error_kind: str) -> str:
        self.index += 1
        chars = []
        while True:
            if self.index >= len(self.source):
                raise self.error("unterminated literal", start, error_kind)
            char = self.source[self.index]
            if char == delimiter:
                self.index += 1
                return ''.join(chars)
            if char == '\\':
                if self.index + 1 >= len(self.source):
                    raise self.error("unterminated literal", start, error_kind)
                escaped = self.source[self.index + 1]
                chars.append(ESCAPES.get(escaped, escaped))
                self.index += 2
            else:
                chars.append(char)
                self.index += 1

    def _scan_character(self, start: int):
        text = self._scan_quoted("'", start, "unterminated-character")
        if len(text) != 1:
            raise self.error("character literal must contain exactly one character", start,
                             "unterminated-character")
        return TokenKind.CHARACTER, Immediate(ord(text), ImmediateTag.CHARACTER), None

    def _scan_hash(self, start: int):
        following = self.peek(1)
        openers = {'(': TokenKind.LITERAL_ARRAY_OPEN, '[': TokenKind.BYTE_ARRAY_OPEN,
                   '{': TokenKind.DICTIONARY_OPEN}
        if following in openers:
            self.index += 2
            return openers[following], None, None
        if following == '"':
            self.index += 1
            text = self._scan_quoted('"', start, "unterminated-string")
            return TokenKind.SYMBOL, intern_symbol(text), None
        match = _SYMBOL_RE.match(self.source, self.index + 1)
        if match:
            self.index = match.end()
            return TokenKind.SYMBOL, intern_symbol(match.group(0)), None
        if following and following in OPERATOR_CHARACTERS:
            self.index += 1
            while self.peek() and self.peek() in OPERATOR_CHARACTERS:
                self.index += 1
            return TokenKind.SYMBOL, intern_symbol(self.source[start + 1:self.index]), None
        self.index += 1
        raise self.error("'#' must start a symbol, comment or literal collection", start, "unknown-character")

    def _scan_backquote(self, start: int):
        kinds = {"'": TokenKind.QUOTE, '`': TokenKind.QUASI_QUOTE, ',': TokenKind.UNQUOTE, '@': TokenKind.SPLICE}
        following = self.peek(1)
        if following in kinds:
            self.index += 2
            return kinds[following], None, None
        self.index += 1
        raise self.error("'`' must be followed by one of ' ` , @", start, "unknown-character")


def tokenize(source: str, file_name: str = "<input>") -> List[Token]:
    """Tokenize source text; the result always ends with an END token"""
    return Tokenizer(source, file_name).tokenize()
