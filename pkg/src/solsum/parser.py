"""Declaration-level parsing of Solidity source.

Covers a pragmatic subset of the language: contracts, libraries and
interfaces with their inheritance lists, state variables, and functions
(including constructor/fallback/receive forms). Function bodies are kept
as verbatim text and scanned lexically for call sites and local variable
declarations; statement-level parsing is deliberately not attempted, and
unknown constructs inside bodies are tolerated.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional


class ParseError(Exception):
    """Raised on structurally broken input (unbalanced braces, truncation)."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class SegmentError(Exception):
    """Raised when a top-level declaration's brace depth never closes."""


@dataclass(frozen=True)
class CallSite:
    callee_name: str
    receiver: Optional[str]
    arg_count: int
    offset: int


@dataclass(frozen=True)
class StateVarDecl:
    name: str
    type_name: str
    visibility: str
    source_span: tuple[int, int]


@dataclass(frozen=True)
class FunctionDecl:
    name: str  # "" for constructor and fallback declarations
    params: tuple[tuple[str, str], ...]
    modifiers: tuple[str, ...]
    visibility: str
    mutability: str
    body_text: str
    doc_comment: Optional[str]
    call_sites: tuple[CallSite, ...]
    local_vars: tuple[tuple[str, str], ...]
    source_span: tuple[int, int]


@dataclass(frozen=True)
class ContractDecl:
    name: str
    kind: str  # contract | library | interface
    bases: tuple[str, ...]
    state_vars: tuple[StateVarDecl, ...]
    functions: tuple[FunctionDecl, ...]
    source_span: tuple[int, int]


@dataclass(frozen=True)
class SourceUnit:
    path: str
    pragma: Optional[str]
    contracts: tuple[ContractDecl, ...]


# ---------------------------------------------------------------------------
# Lexical scanning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str  # comment | string | ident | number | punct
    text: str
    start: int
    end: int


_TOKEN_RE = re.compile(
    r"""
      (?P<comment>//[^\n]*|/\*.*?\*/|/\*.*\Z)
    | (?P<string>"(?:\\.|[^"\\\n])*"?|'(?:\\.|[^'\\\n])*'?)
    | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
    | (?P<number>[0-9][0-9a-zA-Z_.]*)
    | (?P<punct>\S)
    """,
    re.DOTALL | re.VERBOSE,
)


def _scan(text: str) -> list[_Token]:
    toks = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup or "punct"
        toks.append(_Token(kind, m.group(), m.start(), m.end()))
    return toks


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


_ELEMENTARY_TYPES = (
    {"address", "bool", "string", "byte", "bytes", "var", "uint", "int", "fixed", "ufixed"}
    | {f"uint{n}" for n in range(8, 257, 8)}
    | {f"int{n}" for n in range(8, 257, 8)}
    | {f"bytes{n}" for n in range(1, 33)}
)

_VISIBILITY_KWS = {"public", "internal", "private", "external"}
_MUTABILITY_KWS = {"pure", "view", "payable"}
_DATA_LOCATION_KWS = {"memory", "storage", "calldata"}

# Identifiers that look like calls but carry no intra-contract control flow.
_BUILTIN_CALLS = {
    "require", "assert", "revert", "keccak256", "sha256", "sha3", "ripemd160",
    "ecrecover", "selfdestruct", "suicide", "addmod", "mulmod", "blockhash",
    "gasleft", "type",
}

_KEYWORDS_NOT_CALLS = {
    "if", "else", "for", "while", "do", "return", "returns", "break", "continue",
    "new", "delete", "emit", "throw", "try", "catch", "assembly", "unchecked",
    "using", "pragma", "import", "is", "constructor", "function", "modifier",
    "event", "error", "struct", "enum", "mapping", "contract", "library",
    "interface", "receive", "fallback", "constant", "immutable", "virtual",
    "override", "indexed", "anonymous",
} | _VISIBILITY_KWS | _MUTABILITY_KWS | _DATA_LOCATION_KWS

_SKIP_RECEIVER_ROOTS = {"abi", "msg", "block", "tx"}


@dataclass
class _FnDraft:
    name: str
    params: list[tuple[str, str]]
    modifiers: list[str]
    visibility: str
    mutability: str
    doc_comment: Optional[str]
    span: tuple[int, int]
    body_range: tuple[int, int]  # sig-index range of body tokens, empty if no body


@dataclass
class _ContractDraft:
    name: str
    kind: str
    bases: list[str]
    state_vars: list[StateVarDecl]
    fns: list[_FnDraft]
    span: tuple[int, int]


class _Parser:
    def __init__(self, text: str, path: str):
        self.text = text
        self.path = path
        self.toks = _scan(text)
        self.sig = [i for i, t in enumerate(self.toks) if t.kind != "comment"]
        self.pos = 0
        self.type_names: set[str] = set()  # struct/enum names seen anywhere

    # -- token stream helpers -------------------------------------------------

    def _tok(self, pos: int) -> Optional[_Token]:
        if 0 <= pos < len(self.sig):
            return self.toks[self.sig[pos]]
        return None

    def _peek(self, off: int = 0) -> Optional[_Token]:
        return self._tok(self.pos + off)

    def _next(self) -> _Token:
        t = self._peek()
        if t is None:
            line, col = _line_col(self.text, len(self.text))
            raise ParseError("unexpected end of input", line, col)
        self.pos += 1
        return t

    def _error(self, message: str, offset: int) -> ParseError:
        line, col = _line_col(self.text, offset)
        return ParseError(message, line, col)

    def _skip_past(self, punct: str) -> None:
        while True:
            t = self._peek()
            if t is None:
                return
            self.pos += 1
            if t.kind == "punct" and t.text == punct:
                return

    def _match_group(self, open_ch: str, close_ch: str) -> int:
        """Consume a balanced group starting at the current token; return
        the sig index of the closing token."""
        opener = self._peek()
        assert opener is not None and opener.text == open_ch
        depth = 0
        while True:
            t = self._peek()
            if t is None:
                raise self._error("unbalanced braces" if open_ch == "{" else
                                  f"unbalanced '{open_ch}'", opener.start)
            self.pos += 1
            if t.kind != "punct":
                continue
            if t.text == open_ch:
                depth += 1
            elif t.text == close_ch:
                depth -= 1
                if depth == 0:
                    return self.pos - 1

    # -- unit level -----------------------------------------------------------

    def parse_unit(self) -> SourceUnit:
        pragma = None
        drafts: list[_ContractDraft] = []
        while True:
            t = self._peek()
            if t is None:
                break
            if t.kind == "ident" and t.text == "pragma":
                start = self.pos
                self._skip_past(";")
                if pragma is None:
                    first = self._tok(start + 1)
                    semi = self._tok(self.pos - 1)
                    if first is not None and semi is not None and first.start < semi.start:
                        pragma = self.text[first.start:semi.start].strip()
            elif t.kind == "ident" and t.text == "import":
                self._skip_past(";")
            elif t.kind == "ident" and t.text == "abstract":
                self.pos += 1
            elif t.kind == "ident" and t.text in ("struct", "enum"):
                self._skip_type_decl()
            elif t.kind == "ident" and t.text in ("contract", "library", "interface"):
                drafts.append(self._parse_contract())
            else:
                self.pos += 1

        not_calls = {d.name for d in drafts} | self.type_names
        contracts = tuple(self._freeze_contract(d, not_calls) for d in drafts)
        return SourceUnit(self.path, pragma, contracts)

    def _skip_type_decl(self) -> None:
        self.pos += 1  # 'struct' or 'enum'
        if (nt := self._peek()) is not None and nt.kind == "ident":
            self.type_names.add(nt.text)
            self.pos += 1
        if (nt := self._peek()) is not None and nt.text == "{":
            self._match_group("{", "}")

    def _parse_contract(self) -> _ContractDraft:
        kw = self._next()
        name_tok = self._peek()
        if name_tok is None or name_tok.kind != "ident":
            raise self._error(f"expected name after '{kw.text}'", kw.start)
        self.pos += 1
        bases: list[str] = []
        t = self._peek()
        if t is not None and t.kind == "ident" and t.text == "is":
            self.pos += 1
            bases = self._parse_base_list()
        t = self._peek()
        if t is None or t.text != "{":
            raise self._error(f"expected '{{' in declaration of '{name_tok.text}'", kw.start)
        open_pos = self.pos
        close_pos = self._match_group("{", "}")
        draft = _ContractDraft(name_tok.text, kw.text, bases, [], [],
                               (kw.start, self.toks[self.sig[close_pos]].end))
        saved = self.pos
        self.pos = open_pos + 1
        self._parse_members(draft, close_pos)
        self.pos = saved
        return draft

    def _parse_base_list(self) -> list[str]:
        bases = []
        while True:
            t = self._peek()
            if t is None or t.text == "{":
                return bases
            if t.kind == "ident":
                name = t.text
                self.pos += 1
                while (nt := self._peek()) is not None and nt.text == ".":
                    self.pos += 1
                    seg = self._peek()
                    if seg is not None and seg.kind == "ident":
                        name = seg.text
                        self.pos += 1
                if (nt := self._peek()) is not None and nt.text == "(":
                    self._match_group("(", ")")
                bases.append(name)
            elif t.text == ",":
                self.pos += 1
            else:
                self.pos += 1

    # -- contract members -----------------------------------------------------

    def _parse_members(self, draft: _ContractDraft, close_pos: int) -> None:
        while self.pos < close_pos:
            t = self._peek()
            if t is None:
                return
            if t.kind == "ident" and t.text in ("function", "constructor"):
                draft.fns.append(self._parse_function(t.text))
            elif t.kind == "ident" and t.text in ("fallback", "receive") and \
                    (nt := self._peek(1)) is not None and nt.text == "(":
                draft.fns.append(self._parse_function(t.text))
            elif t.kind == "ident" and t.text == "modifier":
                self._skip_modifier_decl()
            elif t.kind == "ident" and t.text in ("event", "error"):
                self._skip_past(";")
            elif t.kind == "ident" and t.text in ("struct", "enum"):
                self._skip_type_decl()
            elif t.kind == "ident" and t.text == "using":
                self._skip_past(";")
            elif t.kind == "ident" or (t.kind == "punct" and t.text == "("):
                var = self._parse_state_var(close_pos)
                if var is not None:
                    draft.state_vars.append(var)
            else:
                self.pos += 1

    def _skip_modifier_decl(self) -> None:
        self.pos += 1  # 'modifier'
        if (t := self._peek()) is not None and t.kind == "ident":
            self.pos += 1
        if (t := self._peek()) is not None and t.text == "(":
            self._match_group("(", ")")
        while (t := self._peek()) is not None:
            if t.text == "{":
                self._match_group("{", "}")
                return
            if t.text == ";":
                self.pos += 1
                return
            self.pos += 1

    def _parse_type_tokens(self) -> Optional[tuple[int, int]]:
        """Consume a type at the current position; return its (start, end)
        text offsets, or None if the current tokens do not open a type."""
        t = self._peek()
        if t is None or t.kind != "ident":
            return None
        start = t.start
        end = t.end
        if t.text == "mapping":
            self.pos += 1
            if (nt := self._peek()) is None or nt.text != "(":
                return None
            close = self._match_group("(", ")")
            end = self.toks[self.sig[close]].end
        elif t.text == "function":
            return None
        else:
            self.pos += 1
            if t.text == "address" and (nt := self._peek()) is not None and nt.text == "payable":
                end = nt.end
                self.pos += 1
            while (nt := self._peek()) is not None and nt.text == ".":
                seg = self._peek(1)
                if seg is None or seg.kind != "ident":
                    break
                end = seg.end
                self.pos += 2
        while (nt := self._peek()) is not None and nt.text == "[":
            close = self._match_group("[", "]")
            end = self.toks[self.sig[close]].end
        return (start, end)

    def _parse_state_var(self, close_pos: int) -> Optional[StateVarDecl]:
        start_pos = self.pos
        start_tok = self._peek()
        assert start_tok is not None
        span = self._parse_type_tokens()
        if span is None:
            self.pos = start_pos
            self._skip_past(";")
            return None
        visibility = "default"
        while (t := self._peek()) is not None and t.kind == "ident":
            if t.text in _VISIBILITY_KWS:
                visibility = t.text
                self.pos += 1
            elif t.text in ("constant", "immutable", "payable"):
                self.pos += 1
            elif t.text == "override":
                self.pos += 1
                if (nt := self._peek()) is not None and nt.text == "(":
                    self._match_group("(", ")")
            else:
                break
        name_tok = self._peek()
        if name_tok is None or name_tok.kind != "ident":
            self.pos = start_pos + 1
            self._skip_past(";")
            return None
        self.pos += 1
        # Skip an initializer, balanced through nested parens/brackets.
        depth = 0
        end = name_tok.end
        while (t := self._peek()) is not None and self.pos < close_pos:
            if t.kind == "punct":
                if t.text in "([{":
                    depth += 1
                elif t.text in ")]}":
                    depth -= 1
                elif t.text == ";" and depth <= 0:
                    end = t.end
                    self.pos += 1
                    break
            self.pos += 1
        return StateVarDecl(name_tok.text, self.text[span[0]:span[1]], visibility,
                            (start_tok.start, end))

    def _parse_function(self, kw: str) -> _FnDraft:
        kw_tok = self._next()
        doc = self._doc_before(self.sig[self.pos - 1])
        if kw == "function":
            name_tok = self._peek()
            if name_tok is not None and name_tok.kind == "ident":
                name = name_tok.text
                self.pos += 1
            else:
                name = ""  # pre-0.6 unnamed fallback: `function () ...`
        elif kw == "receive":
            name = "receive"
        else:
            name = ""  # constructor and fallback
        params: list[tuple[str, str]] = []
        if (t := self._peek()) is not None and t.text == "(":
            params = self._parse_params()
        visibility = "default"
        mutability = "nonpayable"
        modifiers: list[str] = []
        body_range = (0, 0)
        end = kw_tok.end
        while True:
            t = self._peek()
            if t is None:
                raise self._error("truncated function declaration", kw_tok.start)
            if t.text == "{":
                open_pos = self.pos
                close_pos = self._match_group("{", "}")
                body_range = (open_pos + 1, close_pos)
                end = self.toks[self.sig[close_pos]].end
                break
            if t.text == ";":
                self.pos += 1
                end = t.end
                break
            if t.kind == "ident" and t.text in _VISIBILITY_KWS:
                visibility = t.text
                self.pos += 1
            elif t.kind == "ident" and t.text in _MUTABILITY_KWS:
                mutability = t.text
                self.pos += 1
            elif t.kind == "ident" and t.text == "constant":
                mutability = "view"
                self.pos += 1
            elif t.kind == "ident" and t.text == "virtual":
                self.pos += 1
            elif t.kind == "ident" and t.text == "override":
                self.pos += 1
                if (nt := self._peek()) is not None and nt.text == "(":
                    self._match_group("(", ")")
            elif t.kind == "ident" and t.text == "returns":
                self.pos += 1
                if (nt := self._peek()) is not None and nt.text == "(":
                    self._match_group("(", ")")
            elif t.kind == "ident":
                mod = t.text
                self.pos += 1
                while (nt := self._peek()) is not None and nt.text == ".":
                    seg = self._peek(1)
                    if seg is None or seg.kind != "ident":
                        break
                    mod = seg.text
                    self.pos += 2
                if (nt := self._peek()) is not None and nt.text == "(":
                    self._match_group("(", ")")
                modifiers.append(mod)
            else:
                self.pos += 1
        return _FnDraft(name, params, modifiers, visibility, mutability, doc,
                        (kw_tok.start, end), body_range)

    def _parse_params(self) -> list[tuple[str, str]]:
        open_pos = self.pos
        close_pos = self._match_group("(", ")")
        params: list[tuple[str, str]] = []
        saved = self.pos
        self.pos = open_pos + 1
        while self.pos < close_pos:
            span = self._parse_type_tokens()
            if span is None:
                self.pos += 1
                continue
            while (t := self._peek()) is not None and t.kind == "ident" and \
                    t.text in _DATA_LOCATION_KWS and self.pos < close_pos:
                self.pos += 1
            name = ""
            t = self._peek()
            if t is not None and t.kind == "ident" and self.pos < close_pos:
                name = t.text
                self.pos += 1
            params.append((name, self.text[span[0]:span[1]]))
            while self.pos < close_pos and (t := self._peek()) is not None and t.text != ",":
                if t.text in "([":
                    self._match_group(t.text, ")" if t.text == "(" else "]")
                else:
                    self.pos += 1
            if self.pos < close_pos:
                self.pos += 1  # comma
        self.pos = saved
        return params

    # -- doc comments -----------------------------------------------------------

    def _doc_before(self, full_idx: int) -> Optional[str]:
        parts: list[str] = []
        j = full_idx - 1
        while j >= 0 and self.toks[j].kind == "comment":
            tok = self.toks[j]
            line_start = self.text.rfind("\n", 0, tok.start) + 1
            if self.text[line_start:tok.start].strip():
                break  # trailing comment on a code line, not a doc block
            parts.append(tok.text)
            j -= 1
        if not parts:
            return None
        return "\n".join(reversed(parts))

    # -- second pass: call sites and locals ------------------------------------

    def _freeze_contract(self, draft: _ContractDraft, not_call_names: set[str]) -> ContractDecl:
        fns = []
        for fd in draft.fns:
            sites = self._scan_call_sites(fd.body_range, not_call_names)
            locals_ = self._scan_locals(fd.body_range)
            fns.append(FunctionDecl(
                name=fd.name,
                params=tuple(fd.params),
                modifiers=tuple(fd.modifiers),
                visibility=fd.visibility,
                mutability=fd.mutability,
                body_text=self.text[fd.span[0]:fd.span[1]],
                doc_comment=fd.doc_comment,
                call_sites=sites,
                local_vars=locals_,
                source_span=fd.span,
            ))
        return ContractDecl(draft.name, draft.kind, tuple(draft.bases),
                            tuple(draft.state_vars), tuple(fns), draft.span)

    def _scan_call_sites(self, body_range: tuple[int, int],
                         not_call_names: set[str]) -> tuple[CallSite, ...]:
        lo, hi = body_range
        sites = []
        for k in range(lo, hi):
            t = self._tok(k)
            if t is None or t.kind != "ident":
                continue
            nxt = self._tok(k + 1)
            if nxt is None or nxt.text != "(":
                continue
            name = t.text
            if name in _KEYWORDS_NOT_CALLS or name in _BUILTIN_CALLS or \
                    name in _ELEMENTARY_TYPES or name in not_call_names:
                continue
            prev = self._tok(k - 1) if k > lo else None
            if prev is not None and prev.kind == "ident" and \
                    prev.text in ("new", "emit", "function"):
                continue
            receiver = None
            if prev is not None and prev.text == ".":
                chain = self._receiver_chain(k)
                if chain:
                    if chain[0] in _SKIP_RECEIVER_ROOTS:
                        continue
                    receiver = ".".join(chain)
            arg_count = self._count_args(k + 1, hi)
            sites.append(CallSite(name, receiver, arg_count, t.start))
        return tuple(sites)

    def _receiver_chain(self, k: int) -> list[str]:
        chain: list[str] = []
        j = k - 1
        while j >= 1:
            dot = self._tok(j)
            if dot is None or dot.text != ".":
                break
            seg = self._tok(j - 1)
            if seg is None or seg.kind != "ident":
                return []  # e.g. `f(x).g()` or `arr[i].g()`: not an identifier chain
            chain.append(seg.text)
            j -= 2
        chain.reverse()
        return chain

    def _count_args(self, open_k: int, hi: int) -> int:
        depth = 0
        commas = 0
        saw_content = False
        k = open_k
        while k < hi + 1:
            t = self._tok(k)
            if t is None:
                break
            if t.kind == "punct":
                if t.text in "([{":
                    depth += 1
                elif t.text in ")]}":
                    depth -= 1
                    if depth == 0:
                        break
                elif t.text == "," and depth == 1:
                    commas += 1
                elif depth >= 1:
                    saw_content = True
            elif depth >= 1:
                saw_content = True
            k += 1
        if not saw_content and commas == 0:
            return 0
        return commas + 1

    def _scan_locals(self, body_range: tuple[int, int]) -> tuple[tuple[str, str], ...]:
        lo, hi = body_range
        found: list[tuple[str, str]] = []
        seen: set[str] = set()
        k = lo
        while k < hi:
            t = self._tok(k)
            if t is None or t.kind != "ident":
                k += 1
                continue
            prev = self._tok(k - 1) if k > lo else None
            prev2 = self._tok(k - 2) if k - 1 > lo else None
            stmt_start = (
                k == lo
                or (prev is not None and prev.text in (";", "{", "}"))
                or (prev is not None and prev.text == "(" and
                    prev2 is not None and prev2.text == "for")
            )
            is_elementary = t.text in _ELEMENTARY_TYPES or t.text == "mapping"
            if not is_elementary and not stmt_start:
                k += 1
                continue
            if t.text in _KEYWORDS_NOT_CALLS and not is_elementary:
                k += 1
                continue
            saved = self.pos
            self.pos = k
            span = self._parse_type_tokens()
            if span is None:
                self.pos = saved
                k += 1
                continue
            while (nt := self._peek()) is not None and nt.kind == "ident" and \
                    nt.text in _DATA_LOCATION_KWS:
                self.pos += 1
            name_tok = self._peek()
            follow = self._peek(1)
            if (name_tok is not None and name_tok.kind == "ident"
                    and name_tok.text not in _KEYWORDS_NOT_CALLS
                    and name_tok.text not in _ELEMENTARY_TYPES
                    and follow is not None and follow.text in ("=", ";", ",", ")")):
                if name_tok.text not in seen:
                    seen.add(name_tok.text)
                    found.append((name_tok.text, self.text[span[0]:span[1]]))
                k = self.pos + 1
            else:
                k += 1
            self.pos = saved
        return tuple(found)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def parse_source(text: str, path: str = "<string>") -> SourceUnit:
    """Parse Solidity source text into a SourceUnit."""
    return _Parser(text, path).parse_unit()


def segment_contracts(text: str) -> list[tuple[str, str]]:
    """Slice raw source into top-level (name, source_slice) pairs for each
    contract, library, or interface, matching braces outside strings and
    comments. Slices appear in source order and never overlap."""
    toks = [t for t in _scan(text) if t.kind != "comment"]
    out: list[tuple[str, str]] = []
    depth = 0
    i = 0
    while i < len(toks):
        t = toks[i]
        if depth == 0 and t.kind == "ident" and t.text in ("contract", "library", "interface"):
            name = ""
            if i + 1 < len(toks) and toks[i + 1].kind == "ident":
                name = toks[i + 1].text
            j = i + 1
            while j < len(toks) and toks[j].text != "{":
                j += 1
            if j == len(toks):
                raise SegmentError(f"no body found for '{name}'")
            d = 0
            while j < len(toks):
                if toks[j].kind == "punct":
                    if toks[j].text == "{":
                        d += 1
                    elif toks[j].text == "}":
                        d -= 1
                        if d == 0:
                            break
                j += 1
            if j == len(toks):
                raise SegmentError(f"brace depth never returns to zero in '{name}'")
            out.append((name, text[t.start:toks[j].end]))
            i = j + 1
            continue
        if t.kind == "punct":
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth = max(0, depth - 1)
        i += 1
    return out


def clean_comment(raw: str) -> str:
    """Strip comment markers and collapse whitespace to a single line.
    `@param`/`@return` tags are kept as plain text."""
    pieces = []
    for line in raw.split("\n"):
        s = line.strip()
        if s.startswith("///"):
            s = s[3:]
        elif s.startswith("//"):
            s = s[2:]
        elif s.startswith("/**"):
            s = s[3:]
        elif s.startswith("/*"):
            s = s[2:]
        if s.endswith("*/"):
            s = s[:-2]
        stripped = s.strip()
        if stripped.startswith("*"):
            s = stripped[1:]
        pieces.append(s)
    return " ".join(" ".join(pieces).split())


def iter_documented_functions(unit: SourceUnit) -> Iterator[tuple[ContractDecl, FunctionDecl, str]]:
    """Yield (contract, function, cleaned_comment) for every function that
    carries a nonempty doc comment."""
    for contract in unit.contracts:
        for fn in contract.functions:
            if fn.doc_comment is None:
                continue
            comment = clean_comment(fn.doc_comment)
            if comment:
                yield contract, fn, comment


def extract_method_comment_pairs(unit: SourceUnit) -> list[tuple[FunctionDecl, str]]:
    """Return (function, comment_text) pairs for documented functions only."""
    return [(fn, comment) for _, fn, comment in iter_documented_functions(unit)]
