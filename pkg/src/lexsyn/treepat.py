"""Penn Treebank bracketed-tree reading and relational tree patterns.

The pattern language is deliberately small: a label matcher (exact,
alternation with ``|``, or prefix wildcard ``VB*``) plus four relational
constraints over descendants:

    <    immediately dominates
    <<   dominates (proper descendant, any depth)
    <,   has leftmost child
    !<<  lacks descendant

Patterns live in versioned text files shipped with the package so that
every structure count is auditable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .errors import PatternError, TreeParseError

IMMEDIATELY_DOMINATES = "<"
DOMINATES = "<<"
HAS_LEFTMOST_CHILD = "<,"
LACKS_DESCENDANT = "!<<"

_RELATIONS = (LACKS_DESCENDANT, DOMINATES, HAS_LEFTMOST_CHILD, IMMEDIATELY_DOMINATES)


@dataclass(frozen=True)
class Tree:
    """A constituency tree node; leaves carry a surface form and no children."""

    label: str
    children: tuple["Tree", ...] = ()
    leaf_form: str | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def preorder(self) -> Iterator["Tree"]:
        yield self
        for child in self.children:
            yield from child.preorder()

    def descendants(self) -> Iterator["Tree"]:
        for child in self.children:
            yield from child.preorder()

    def leaves(self) -> list["Tree"]:
        return [n for n in self.preorder() if n.is_leaf]

    def leaf_forms(self) -> list[str]:
        return [n.leaf_form if n.leaf_form is not None else n.label for n in self.leaves()]

    def __str__(self) -> str:
        return render(self)


def render(tree: Tree) -> str:
    """Canonical single-space bracketed rendering."""
    if tree.is_leaf:
        if tree.leaf_form is None:
            return f"({tree.label})"
        return f"({tree.label} {tree.leaf_form})"
    inner = " ".join(render(c) for c in tree.children)
    return f"({tree.label} {inner})"


def _tokenize_sexpr(s: str) -> list[tuple[str, int]]:
    tokens = []
    i, n = 0, len(s)
    while i < n:
        ch = s[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append((ch, i))
            i += 1
        else:
            j = i
            while j < n and not s[j].isspace() and s[j] not in "()":
                j += 1
            tokens.append((s[i:j], i))
            i = j
    return tokens


def _parse_node(tokens: list[tuple[str, int]], pos: int, source: str) -> tuple[Tree, int]:
    tok, off = tokens[pos]
    if tok != "(":
        raise TreeParseError(f"expected '(' at offset {off}", offset=off)
    pos += 1
    if pos >= len(tokens):
        raise TreeParseError(f"unbalanced brackets at offset {len(source)}", offset=len(source))
    # PTB files may wrap a sentence in a label-less node: "( (S ...))"
    label = ""
    if tokens[pos][0] not in "()":
        label = tokens[pos][0]
        pos += 1
    items: list[tuple[str, Tree | str]] = []
    while True:
        if pos >= len(tokens):
            raise TreeParseError(f"unbalanced brackets at offset {len(source)}", offset=len(source))
        tok, off = tokens[pos]
        if tok == ")":
            pos += 1
            break
        if tok == "(":
            child, pos = _parse_node(tokens, pos, source)
            items.append(("node", child))
        else:
            items.append(("atom", tok))
            pos += 1
    if not items:
        raise TreeParseError(f"empty brackets at offset {off}", offset=off)
    if len(items) == 1 and items[0][0] == "atom":
        return Tree(label=label, leaf_form=items[0][1]), pos
    children = tuple(
        item if kind == "node" else Tree(label=item, leaf_form=item)  # bare atom: degenerate leaf
        for kind, item in items
    )
    return Tree(label=label, children=children), pos


def parse_ptb(s: str) -> Tree:
    """Parse one bracketed tree; raises TreeParseError with the failing offset."""
    tokens = _tokenize_sexpr(s)
    if not tokens:
        raise TreeParseError("empty input", offset=0)
    tree, pos = _parse_node(tokens, 0, s)
    if pos != len(tokens):
        off = tokens[pos][1]
        raise TreeParseError(f"trailing content at offset {off}", offset=off)
    return tree


def parse_ptb_forest(s: str) -> list[Tree]:
    """Parse zero or more top-level trees from one string."""
    tokens = _tokenize_sexpr(s)
    trees, pos = [], 0
    while pos < len(tokens):
        tree, pos = _parse_node(tokens, pos, s)
        trees.append(tree)
    return trees


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True)
class Pattern:
    """Label matcher plus ANDed relational constraints on the matched node.

    Constraint targets are PatternSets, so a relation may point at a union
    (any member matching satisfies the constraint).
    """

    label: str
    constraints: tuple[tuple[str, "PatternSet"], ...] = ()

    def __str__(self) -> str:
        parts = [self.label]
        for rel, target in self.constraints:
            parts.append(f"{rel} ({target})")
        return " ".join(parts)


@dataclass(frozen=True)
class PatternSet:
    """Union of patterns; a node is counted once per pattern set."""

    patterns: tuple[Pattern, ...]

    def __str__(self) -> str:
        return " + ".join(str(p) for p in self.patterns)


def _set_matches(target: "PatternSet", node: Tree) -> bool:
    return any(node_matches(p, node) for p in target.patterns)


def label_matches(matcher: str, label: str) -> bool:
    for alt in matcher.split("|"):
        if alt in ("*", "__"):
            return True
        if alt.endswith("*"):
            if label.startswith(alt[:-1]):
                return True
        elif alt == label:
            return True
    return False


def node_matches(pattern: Pattern, node: Tree) -> bool:
    if not label_matches(pattern.label, node.label):
        return False
    for rel, target in pattern.constraints:
        if rel == IMMEDIATELY_DOMINATES:
            if not any(_set_matches(target, c) for c in node.children):
                return False
        elif rel == DOMINATES:
            if not any(_set_matches(target, d) for d in node.descendants()):
                return False
        elif rel == HAS_LEFTMOST_CHILD:
            if not node.children or not _set_matches(target, node.children[0]):
                return False
        elif rel == LACKS_DESCENDANT:
            if any(_set_matches(target, d) for d in node.descendants()):
                return False
        else:  # pragma: no cover - constructors reject unknown relations
            raise PatternError(f"unknown relation {rel!r}")
    return True


def match_pattern(pattern: Pattern | PatternSet, tree: Tree) -> list[Tree]:
    """All nodes satisfying the pattern, in deterministic pre-order.

    For a PatternSet a node appears once even if several member patterns
    match it.
    """
    patterns = pattern.patterns if isinstance(pattern, PatternSet) else (pattern,)
    matched: list[Tree] = []
    seen: set[int] = set()
    for node in tree.preorder():
        if id(node) in seen:
            continue
        if any(node_matches(p, node) for p in patterns):
            matched.append(node)
            seen.add(id(node))
    return matched


# ---------------------------------------------------------------------------
# pattern expression language


def _tokenize_pattern(s: str) -> list[str]:
    tokens = []
    i, n = 0, len(s)
    while i < n:
        ch = s[i]
        if ch.isspace():
            i += 1
            continue
        if s.startswith(LACKS_DESCENDANT, i):
            tokens.append(LACKS_DESCENDANT)
            i += 3
        elif s.startswith(DOMINATES, i):
            tokens.append(DOMINATES)
            i += 2
        elif s.startswith(HAS_LEFTMOST_CHILD, i):
            tokens.append(HAS_LEFTMOST_CHILD)
            i += 2
        elif ch == "<":
            tokens.append(IMMEDIATELY_DOMINATES)
            i += 1
        elif ch in "()+@":
            tokens.append(ch)
            i += 1
        else:
            j = i
            while j < n and not s[j].isspace() and s[j] not in "()+@<!":
                j += 1
            if j == i:
                raise PatternError(f"unexpected character {ch!r} in pattern {s!r}")
            tokens.append(s[i:j])
            i = j
    return tokens


class _PatternParser:
    def __init__(self, tokens: list[str], refs: dict[str, PatternSet], source: str):
        self.tokens = tokens
        self.pos = 0
        self.refs = refs
        self.source = source

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        if self.pos >= len(self.tokens):
            raise PatternError(f"unexpected end of pattern: {self.source!r}")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse_union(self) -> PatternSet:
        patterns = list(self.parse_seq().patterns)
        while self.peek() == "+":
            self.take()
            patterns.extend(self.parse_seq().patterns)
        return PatternSet(tuple(patterns))

    def parse_seq(self) -> PatternSet:
        head = self.parse_atom()
        constraints = []
        while self.peek() in _RELATIONS:
            rel = self.take()
            constraints.append((rel, self.parse_atom()))
        if not constraints:
            return head
        if len(head.patterns) != 1:
            raise PatternError(f"constraints cannot apply to a union: {self.source!r}")
        base = head.patterns[0]
        return PatternSet((Pattern(base.label, base.constraints + tuple(constraints)),))

    def parse_atom(self) -> PatternSet:
        tok = self.take()
        if tok == "(":
            inner = self.parse_union()
            if self.take() != ")":
                raise PatternError(f"missing ')' in pattern: {self.source!r}")
            return inner
        if tok == "@":
            name = self.take()
            if name not in self.refs:
                raise PatternError(f"undefined pattern reference @{name} in {self.source!r}")
            return self.refs[name]
        if tok in _RELATIONS or tok in ")+":
            raise PatternError(f"unexpected token {tok!r} in pattern {self.source!r}")
        return PatternSet((Pattern(tok),))


def parse_pattern(expr: str, refs: dict[str, PatternSet] | None = None) -> PatternSet:
    """Parse one pattern expression, resolving @name references through refs."""
    parser = _PatternParser(_tokenize_pattern(expr), refs or {}, expr)
    result = parser.parse_union()
    if parser.peek() is not None:
        raise PatternError(f"trailing tokens in pattern {expr!r}")
    return result


def load_pattern_file(text: str) -> dict[str, PatternSet]:
    """Parse a ``NAME := expression`` pattern file; later entries may use @earlier."""
    refs: dict[str, PatternSet] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":=" not in line:
            raise PatternError(f"pattern file line {lineno}: expected 'NAME := expression'")
        name, expr = (part.strip() for part in line.split(":=", 1))
        if not name or not expr:
            raise PatternError(f"pattern file line {lineno}: empty name or expression")
        if name in refs:
            raise PatternError(f"pattern file line {lineno}: duplicate definition {name!r}")
        try:
            refs[name] = parse_pattern(expr, refs)
        except PatternError as exc:
            raise PatternError(f"pattern file line {lineno}: {exc}") from exc
    return refs
