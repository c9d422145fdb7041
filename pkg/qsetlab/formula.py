"""
A sorted first-order language over quasi-set entities.

Concrete syntax (ASCII, with UTF-8 aliases in brackets)::

    forall x . phi     [∀]        phi -> psi   [→ ⇒]
    exists x:MICRO . phi  [∃]     phi <-> psi  [↔ ⇔]
    !phi               [¬]        phi & psi    [∧]
    phi | psi          [∨]        x ~ y        [≡]
    x = y                         x in y       [∈]
    m(x)  MM(x)  Q(x)             pair(x, y) in f
    @name  (constant)

Precedence from tightest: ! & | -> <->. Implication is right-associative,
the rest left-associative, and a quantifier body extends as far right as
possible. ``MM`` spells the M-atom predicate; the tree stores it as ``M``.

``=`` between terms that may denote m-atoms is not well formed;
``check_wff`` enforces this, ``evaluate`` refuses ill-formed input.
"""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Mapping, Optional, Set, Union

from .core import (
    Handle,
    Sort,
    Universe,
    extensionally_equal,
    indistinguishable,
    member_of,
)
from .errors import FormulaSyntaxError, IllFormedFormula, UnsortedVariable
from .relations import OrderedPair, QRelation

logger = logging.getLogger(__name__)


class TermSort(str, Enum):
    MICRO = "MICRO"
    MACRO = "MACRO"
    QSET = "QSET"
    UNKNOWN = "UNKNOWN"

    @classmethod
    def of(cls, value: Union[str, Sort, "TermSort", None]) -> "TermSort":
        if value is None:
            return cls.UNKNOWN
        if isinstance(value, Enum):
            value = value.value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"unknown sort {value!r}; expected MICRO, MACRO or QSET") from None


@dataclass(frozen=True)
class Position:
    offset: int
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column} (offset {self.offset})"


@dataclass(frozen=True)
class Diagnostic:
    position: Optional[Position]
    code: str
    message: str

    def __str__(self) -> str:
        where = f"{self.position}: " if self.position else ""
        return f"{where}{self.code}: {self.message}"


# -- abstract syntax --------------------------------------------------------

@dataclass(frozen=True)
class Term:
    kind: str            # "variable" | "constant"
    name: str
    pos: Optional[Position] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PairTerm:
    first: Term
    second: Term
    pos: Optional[Position] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Predicate:
    name: str            # "m" | "M" | "Q"
    term: Term


@dataclass(frozen=True)
class Relation:
    op: str              # "~" | "=" | "in"
    left: Union[Term, PairTerm]
    right: Term
    pos: Optional[Position] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class Binary:
    op: str              # "&" | "|" | "->" | "<->"
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Quantified:
    kind: str            # "forall" | "exists"
    var: str
    sort: Optional[Sort]
    body: "Formula"


Formula = Union[Predicate, Relation, Not, Binary, Quantified]


# -- tokenizer ----------------------------------------------------------------

ALIASES = {
    "∀": "forall", "∃": "exists", "¬": "!", "∧": "&", "∨": "|",
    "→": "->", "⇒": "->", "↔": "<->", "⇔": "<->", "≡": "~", "∈": "in",
}
KEYWORDS = {"forall", "exists", "in", "pair"}
PREDICATES = {"m": "m", "MM": "M", "Q": "Q"}
SURFACE = {"m": "m", "M": "MM", "Q": "Q"}

TOKEN_RE = re.compile(
    r"(?P<space>\s+)"
    r"|(?P<op><->|->|[&|!~=(),.:])"
    r"|(?P<const>@[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
)


@dataclass(frozen=True)
class Token:
    kind: str            # "op" | "ident" | "const" | "eof"
    text: str
    index: int           # character index into the source


def tokenize(source: str) -> Iterator[Token]:
    index = 0
    while index < len(source):
        char = source[index]
        if char in ALIASES:
            alias = ALIASES[char]
            yield Token("ident" if alias.isalpha() else "op", alias, index)
            index += 1
            continue
        match = TOKEN_RE.match(source, index)
        if not match:
            raise FormulaSyntaxError(
                Diagnostic(_position(source, index), "syntax", f"unexpected character {char!r}")
            )
        kind = match.lastgroup
        if kind != "space":
            text = match.group()
            yield Token(kind, text[1:] if kind == "const" else text, index)
        index = match.end()
    yield Token("eof", "", len(source))


def _position(source: str, index: int) -> Position:
    prefix = source[:index]
    line = prefix.count("\n") + 1
    column = index - (prefix.rfind("\n") + 1) + 1
    return Position(len(prefix.encode("utf-8")), line, column)


# -- parser -------------------------------------------------------------------

class Parser:
    def __init__(self, source: str) -> None:
        self.source = source
        self.tokens = list(tokenize(source))
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.current
        self.index = min(self.index + 1, len(self.tokens) - 1)
        return token

    def at(self, *texts: str) -> bool:
        return self.current.kind in ("op", "ident") and self.current.text in texts

    def error(self, message: str, token: Optional[Token] = None) -> FormulaSyntaxError:
        token = token or self.current
        return FormulaSyntaxError(Diagnostic(self.position(token), "syntax", message))

    def position(self, token: Token) -> Position:
        return _position(self.source, token.index)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.current.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def parse(self) -> Formula:
        formula = self.parse_iff()
        if self.current.kind != "eof":
            raise self.error(f"unexpected {self.current.text!r}")
        return formula

    def parse_iff(self) -> Formula:
        left = self.parse_implication()
        while self.at("<->"):
            self.advance()
            left = Binary("<->", left, self.parse_implication())
        return left

    def parse_implication(self) -> Formula:
        left = self.parse_or()
        if self.at("->"):
            self.advance()
            return Binary("->", left, self.parse_implication())
        return left

    def parse_or(self) -> Formula:
        left = self.parse_and()
        while self.at("|"):
            self.advance()
            left = Binary("|", left, self.parse_and())
        return left

    def parse_and(self) -> Formula:
        left = self.parse_unary()
        while self.at("&"):
            self.advance()
            left = Binary("&", left, self.parse_unary())
        return left

    def parse_unary(self) -> Formula:
        if self.at("!"):
            self.advance()
            return Not(self.parse_unary())
        if self.current.kind == "ident" and self.current.text in ("forall", "exists"):
            return self.parse_quantifier()
        return self.parse_atom()

    def parse_quantifier(self) -> Formula:
        kind = self.advance().text
        token = self.current
        if token.kind != "ident" or token.text in KEYWORDS:
            raise self.error("expected a variable after the quantifier")
        self.advance()
        sort = None
        if self.at(":"):
            self.advance()
            sort_token = self.advance()
            try:
                sort = Sort(sort_token.text.upper())
            except ValueError:
                raise self.error(f"unknown sort {sort_token.text!r}", sort_token) from None
        self.expect(".")
        return Quantified(kind, token.text, sort, self.parse_iff())

    def parse_atom(self) -> Formula:
        if self.at("("):
            self.advance()
            formula = self.parse_iff()
            self.expect(")")
            return formula
        token = self.current
        if token.kind == "ident" and token.text in PREDICATES and self.peek().text == "(":
            self.advance()
            self.expect("(")
            term = self.parse_term()
            self.expect(")")
            return Predicate(PREDICATES[token.text], term)
        left = self.parse_term(allow_pair=True)
        op_token = self.current
        if not self.at("~", "=", "in"):
            found = op_token.text or "end of input"
            raise self.error(f"expected '~', '=' or 'in', found {found!r}")
        self.advance()
        if isinstance(left, PairTerm) and op_token.text != "in":
            raise self.error("pair(...) may only appear on the left of 'in'", token)
        right = self.parse_term()
        return Relation(op_token.text, left, right, self.position(op_token))

    def parse_term(self, allow_pair: bool = False) -> Union[Term, PairTerm]:
        token = self.current
        if token.kind == "const":
            self.advance()
            return Term("constant", token.text, pos=self.position(token))
        if token.kind == "ident" and token.text == "pair" and allow_pair:
            self.advance()
            self.expect("(")
            first = self.parse_term()
            self.expect(",")
            second = self.parse_term()
            self.expect(")")
            return PairTerm(first, second, self.position(token))
        if token.kind == "ident" and token.text not in KEYWORDS:
            self.advance()
            return Term("variable", token.text, pos=self.position(token))
        found = token.text or "end of input"
        raise self.error(f"expected a term, found {found!r}")


def parse(source: str) -> Formula:
    return Parser(source).parse()


# -- printing -----------------------------------------------------------------

def _term_text(term: Union[Term, PairTerm]) -> str:
    if isinstance(term, PairTerm):
        return f"pair({_term_text(term.first)}, {_term_text(term.second)})"
    return f"@{term.name}" if term.kind == "constant" else term.name


def to_text(f: Formula) -> str:
    if isinstance(f, Predicate):
        return f"{SURFACE[f.name]}({_term_text(f.term)})"
    if isinstance(f, Relation):
        return f"{_term_text(f.left)} {f.op} {_term_text(f.right)}"
    if isinstance(f, Not):
        return f"!{to_text(f.body)}"
    if isinstance(f, Binary):
        return f"({to_text(f.left)} {f.op} {to_text(f.right)})"
    annotation = f":{f.sort.value}" if f.sort else ""
    return f"({f.kind} {f.var}{annotation} . {to_text(f.body)})"


def free_variables(f: Formula, bound: frozenset = frozenset()) -> Set[str]:
    if isinstance(f, Predicate):
        return _term_variables(f.term) - bound
    if isinstance(f, Relation):
        return (_term_variables(f.left) | _term_variables(f.right)) - bound
    if isinstance(f, Not):
        return free_variables(f.body, bound)
    if isinstance(f, Binary):
        return free_variables(f.left, bound) | free_variables(f.right, bound)
    return free_variables(f.body, bound | {f.var})


def _term_variables(term: Union[Term, PairTerm]) -> Set[str]:
    if isinstance(term, PairTerm):
        return _term_variables(term.first) | _term_variables(term.second)
    return {term.name} if term.kind == "variable" else set()


# -- well-formedness --------------------------------------------------------

@dataclass
class WffResult:
    ok: bool
    diagnostics: List[Diagnostic] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


SortContext = Mapping[str, Union[str, Sort, TermSort]]


def check_wff(f: Formula, ctx: Optional[SortContext] = None,
              constants: Optional[SortContext] = None) -> WffResult:
    """
    Reject every ``=`` whose operands may denote m-atoms. Variables bound
    without a sort range over the whole universe and so may be m-atoms.
    """
    ctx = {name: TermSort.of(s) for name, s in (ctx or {}).items()}
    constants = {name: TermSort.of(s) for name, s in (constants or {}).items()}
    diagnostics: List[Diagnostic] = []

    def operand_sort(term: Union[Term, PairTerm], scope: Dict[str, TermSort]) -> Optional[TermSort]:
        if isinstance(term, PairTerm):
            diagnostics.append(Diagnostic(term.pos, "pair-identity",
                                          "ordered pairs have no identity in formulas"))
            return None
        if term.kind == "constant":
            if term.name not in constants:
                diagnostics.append(Diagnostic(term.pos, "unsorted-variable",
                                              f"constant @{term.name} has no declared sort"))
                return None
            return constants[term.name]
        if term.name in scope:
            return scope[term.name]
        if term.name in ctx:
            return ctx[term.name]
        diagnostics.append(Diagnostic(term.pos, "unsorted-variable",
                                      f"free variable {term.name} has no sort"))
        return None

    def walk(node: Formula, scope: Dict[str, TermSort]) -> None:
        if isinstance(node, Relation):
            if node.op != "=":
                return
            for term in (node.left, node.right):
                sort = operand_sort(term, scope)
                if sort is TermSort.MICRO:
                    diagnostics.append(Diagnostic(
                        node.pos, "micro-identity",
                        f"'{to_text(node)}' is not well formed: {_term_text(term)} denotes an m-atom",
                    ))
                elif sort is TermSort.UNKNOWN:
                    diagnostics.append(Diagnostic(
                        node.pos, "possibly-micro",
                        f"'{to_text(node)}' is not well formed: {_term_text(term)} ranges over "
                        f"the whole universe and may denote an m-atom",
                    ))
        elif isinstance(node, Not):
            walk(node.body, scope)
        elif isinstance(node, Binary):
            walk(node.left, scope)
            walk(node.right, scope)
        elif isinstance(node, Quantified):
            walk(node.body, {**scope, node.var: TermSort.of(node.sort)})

    walk(f, {})
    return WffResult(not diagnostics, diagnostics)


# -- finite-model evaluation ------------------------------------------------

Value = Union[Handle, QRelation]


def _sort_of(u: Universe, value: Value) -> Optional[Sort]:
    if isinstance(value, QRelation):
        return None
    return u.entity(value).sort


def evaluate(f: Formula, u: Universe, assignment: Optional[Mapping[str, Value]] = None,
             constants: Optional[Mapping[str, Value]] = None) -> bool:
    """
    Tarskian truth over the finite universe. Quantifiers range over every
    registered entity, or over one sort when the variable is annotated.
    """
    assignment = dict(assignment or {})
    constants = dict(constants or {})
    missing = sorted(free_variables(f) - set(assignment))
    if missing:
        raise UnsortedVariable(f"free variables without a value: {', '.join(missing)}")
    ctx = {k: s for k, v in assignment.items() if (s := _sort_of(u, v)) is not None}
    const_sorts = {k: s for k, v in constants.items() if (s := _sort_of(u, v)) is not None}
    verdict = check_wff(f, ctx, const_sorts)
    if not verdict:
        raise IllFormedFormula(verdict.diagnostics)

    domains = {
        sort: [h for h in u.handles() if u.entity(h).sort is sort] for sort in Sort
    }
    everything = u.handles()

    def value(term: Term, env: Mapping[str, Value]) -> Value:
        if term.kind == "constant":
            if term.name not in constants:
                raise UnsortedVariable(f"constant @{term.name} is not defined")
            return constants[term.name]
        return env[term.name]

    def holds(node: Formula, env: Dict[str, Value]) -> bool:
        if isinstance(node, Predicate):
            sort = _sort_of(u, value(node.term, env))
            return sort is {"m": Sort.MICRO, "M": Sort.MACRO, "Q": Sort.QSET}[node.name]
        if isinstance(node, Relation):
            right = value(node.right, env)
            if isinstance(node.left, PairTerm):
                pair = OrderedPair(value(node.left.first, env), value(node.left.second, env))
                return isinstance(right, QRelation) and pair in right.pairs
            left = value(node.left, env)
            if isinstance(left, QRelation) or isinstance(right, QRelation):
                return False
            if node.op == "~":
                return indistinguishable(u, left, right)
            if node.op == "=":
                return extensionally_equal(u, left, right)
            return u.entity(right).sort is Sort.QSET and member_of(u, left, right)
        if isinstance(node, Not):
            return not holds(node.body, env)
        if isinstance(node, Binary):
            if node.op == "&":
                return holds(node.left, env) and holds(node.right, env)
            if node.op == "|":
                return holds(node.left, env) or holds(node.right, env)
            if node.op == "->":
                return not holds(node.left, env) or holds(node.right, env)
            return holds(node.left, env) == holds(node.right, env)
        domain = domains[node.sort] if node.sort else everything
        test = all if node.kind == "forall" else any
        return test(holds(node.body, {**env, node.var: h}) for h in domain)

    return holds(f, assignment)
