"""S-expression syntax for general (not yet normalized) class axioms.

Axiom heads: subclassof, equivalent, subrole, rolechain.  Concept heads:
and, some, one; the symbols top and bot denote the universal and the empty
concept.  A nominal ``(one a)`` is read as the atomic class ``{a}``.
"""

from __future__ import annotations

from dataclasses import dataclass

RESERVED_PREFIX = "_N"   # reserved for classes introduced by the normalizer

_AXIOM_HEADS = ("subclassof", "equivalent", "subrole", "rolechain")
_CONCEPT_HEADS = ("and", "some", "one", "top", "bot")


class SexprError(Exception):
    """Positioned syntax error (1-based line and column)."""

    def __init__(self, reason: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {reason}")
        self.reason = reason
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Concept:
    """Concept expression tree: atom | top | bot | and(parts) | some(relation, parts[0])."""

    kind: str
    name: str = ""
    relation: str = ""
    parts: tuple["Concept", ...] = ()

    def is_atomic(self) -> bool:
        return self.kind in ("atom", "top", "bot")


TOP_CONCEPT = Concept("top")
BOT_CONCEPT = Concept("bot")


def atom(name: str) -> Concept:
    return Concept("atom", name=name)


def conj(parts) -> Concept:
    parts = tuple(parts)
    if len(parts) < 2:
        raise ValueError("conjunction needs at least 2 parts")
    return Concept("and", parts=parts)


def some(relation: str, filler: Concept) -> Concept:
    return Concept("some", relation=relation, parts=(filler,))


@dataclass(frozen=True)
class GeneralAxiom:
    kind: str                      # subclassof | equivalent | subrole | rolechain
    left: Concept | None = None
    right: Concept | None = None
    roles: tuple[str, ...] = ()    # subrole: (r, s); rolechain: (r1, r2, s)


def subclassof(left: Concept, right: Concept) -> GeneralAxiom:
    return GeneralAxiom("subclassof", left=left, right=right)


def equivalent(left: Concept, right: Concept) -> GeneralAxiom:
    return GeneralAxiom("equivalent", left=left, right=right)


def subrole(r: str, s: str) -> GeneralAxiom:
    return GeneralAxiom("subrole", roles=(r, s))


def rolechain(r1: str, r2: str, s: str) -> GeneralAxiom:
    return GeneralAxiom("rolechain", roles=(r1, r2, s))


# --- reader -----------------------------------------------------------------

@dataclass(frozen=True)
class _Node:
    """Raw s-expression node before translation."""
    sym: str | None
    children: tuple["_Node", ...]
    line: int
    col: int


def _read_nodes(text: str) -> list[_Node]:
    nodes: list[_Node] = []
    stack: list[tuple[list[_Node], int, int]] = []
    items = nodes
    line, col = 1, 1
    i = 0
    tok_start = None
    tok_line = tok_col = 0

    def flush(end: int):
        nonlocal tok_start
        if tok_start is not None:
            items.append(_Node(text[tok_start:end], (), tok_line, tok_col))
            tok_start = None

    while i < len(text):
        ch = text[i]
        if ch == "(":
            flush(i)
            stack.append((items, line, col))
            items = []
        elif ch == ")":
            flush(i)
            if not stack:
                raise SexprError("unbalanced ')'", line, col)
            children = items
            items, oline, ocol = stack.pop()
            items.append(_Node(None, tuple(children), oline, ocol))
        elif ch.isspace():
            flush(i)
        else:
            if tok_start is None:
                tok_start = i
                tok_line, tok_col = line, col
        if ch == "\n":
            line += 1
            col = 1
        else:
            col += 1
        i += 1
    flush(len(text))
    if stack:
        _, oline, ocol = stack[-1]
        raise SexprError("unbalanced '('", oline, ocol)
    return nodes


def _check_identifier(name: str, node: _Node):
    if name.startswith(RESERVED_PREFIX):
        raise SexprError(
            f"identifier {name!r} uses the reserved prefix {RESERVED_PREFIX!r}",
            node.line, node.col)


def _to_concept(node: _Node) -> Concept:
    if node.sym is not None:
        if node.sym == "top":
            return TOP_CONCEPT
        if node.sym == "bot":
            return BOT_CONCEPT
        if node.sym in _AXIOM_HEADS or node.sym in ("and", "some", "one"):
            raise SexprError(f"{node.sym!r} cannot be used as a class name",
                             node.line, node.col)
        _check_identifier(node.sym, node)
        return atom(node.sym)
    if not node.children or node.children[0].sym is None:
        raise SexprError("expected a head symbol", node.line, node.col)
    head = node.children[0].sym
    args = node.children[1:]
    if head == "and":
        if len(args) < 2:
            raise SexprError("'and' needs at least 2 arguments", node.line, node.col)
        return conj(_to_concept(a) for a in args)
    if head == "some":
        if len(args) != 2:
            raise SexprError("'some' needs exactly 2 arguments", node.line, node.col)
        rel = args[0]
        if rel.sym is None:
            raise SexprError("relation name must be a symbol", rel.line, rel.col)
        return some(rel.sym, _to_concept(args[1]))
    if head == "one":
        if len(args) != 1 or args[0].sym is None:
            raise SexprError("'one' needs exactly 1 individual name", node.line, node.col)
        _check_identifier(args[0].sym, args[0])
        return atom("{" + args[0].sym + "}")
    if head in ("top", "bot"):
        if args:
            raise SexprError(f"'{head}' takes no arguments", node.line, node.col)
        return TOP_CONCEPT if head == "top" else BOT_CONCEPT
    raise SexprError(f"unknown head symbol: {head}", node.line, node.col)


def _role_name(node: _Node) -> str:
    if node.sym is None:
        raise SexprError("relation name must be a symbol", node.line, node.col)
    return node.sym


def _to_axiom(node: _Node) -> GeneralAxiom:
    if node.sym is not None:
        raise SexprError(f"expected an axiom, got symbol {node.sym!r}",
                         node.line, node.col)
    if not node.children or node.children[0].sym is None:
        raise SexprError("expected an axiom head symbol", node.line, node.col)
    head = node.children[0].sym
    args = node.children[1:]
    if head in ("subclassof", "equivalent"):
        if len(args) != 2:
            raise SexprError(f"'{head}' needs exactly 2 arguments", node.line, node.col)
        left, right = _to_concept(args[0]), _to_concept(args[1])
        return subclassof(left, right) if head == "subclassof" else equivalent(left, right)
    if head == "subrole":
        if len(args) != 2:
            raise SexprError("'subrole' needs exactly 2 relation names", node.line, node.col)
        return subrole(_role_name(args[0]), _role_name(args[1]))
    if head == "rolechain":
        if len(args) != 3:
            raise SexprError("'rolechain' needs exactly 3 relation names", node.line, node.col)
        return rolechain(*(_role_name(a) for a in args))
    raise SexprError(f"unknown head symbol: {head}", node.line, node.col)


def parse_general(text: str) -> list[GeneralAxiom]:
    """Parse an s-expression document into a list of general axioms."""
    return [_to_axiom(node) for node in _read_nodes(text)]
