"""Syntactic complexity features: production-unit counts, ratios, and sentence levels.

All structure definitions live in the shipped pattern files
(data/structure_patterns.txt, data/dlevel_rules.txt); this module only
applies them and assembles counts, so every number is auditable against
those files.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .corpus import Document
from .errors import PatternError, TreesRequiredError, ValidationError
from .lexfeat import FeatureVector
from .treepat import PatternSet, Tree, load_pattern_file, match_pattern, parse_pattern

SYNTACTIC_FEATURES = (
    "S",
    "VP",
    "C",
    "T",
    "DC",
    "CT",
    "CP",
    "CN",
    "MLS",
    "MLT",
    "MLC",
    "C/S",
    "VP/T",
    "C/T",
    "DC/C",
    "DC/T",
    "T/S",
    "CT/T",
    "CP/T",
    "CP/C",
    "CN/T",
    "CN/C",
    "dlevel_0",
    "dlevel_1_4",
    "dlevel_5_7",
)

_COUNT_NAMES = ("S", "VP", "C", "T", "DC", "CT", "CP", "CN")


def _read_data(filename: str) -> str:
    return resources.files("lexsyn.data").joinpath(filename).read_text("utf-8")


@lru_cache(maxsize=4)
def load_structure_patterns(path: str | None = None) -> dict[str, PatternSet]:
    text = _read_data("structure_patterns.txt") if path is None else Path(path).read_text("utf-8")
    patterns = load_pattern_file(text)
    for name in ("CLAUSE", "TUNIT_CLAUSE", "DC", "VP", "CP", "CN"):
        if name not in patterns:
            raise PatternError(f"structure pattern file is missing {name!r}")
    return patterns


@lru_cache(maxsize=4)
def load_dlevel_rules(path: str | None = None) -> tuple[tuple[int, PatternSet], ...]:
    """Ordered (level, pattern) rows; levels 7 and 0 are implicit in the classifier."""
    text = _read_data("dlevel_rules.txt") if path is None else Path(path).read_text("utf-8")
    refs = dict(load_structure_patterns())
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("level ") or ":=" not in line:
            raise PatternError(f"dlevel rules line {lineno}: expected 'level N := expression'")
        head, expr = line.split(":=", 1)
        try:
            level = int(head.removeprefix("level").strip())
        except ValueError as exc:
            raise PatternError(f"dlevel rules line {lineno}: bad level in {head!r}") from exc
        if not 1 <= level <= 6:
            raise PatternError(f"dlevel rules line {lineno}: explicit rules must use levels 1..6")
        rules.append((level, parse_pattern(expr.strip(), refs)))
    if not rules:
        raise PatternError("dlevel rules file defines no rules")
    return tuple(rules)


@dataclass(frozen=True)
class ProductionCounts:
    S: int
    VP: int
    C: int
    T: int
    DC: int
    CT: int
    CP: int
    CN: int

    def __post_init__(self):
        if min(self.S, self.VP, self.C, self.T, self.DC, self.CT, self.CP, self.CN) < 0:
            raise ValidationError("production counts must be non-negative")
        if self.T > self.S + self.C:
            raise ValidationError(f"T={self.T} exceeds S+C={self.S + self.C}")
        if self.DC > self.C:
            raise ValidationError(f"DC={self.DC} exceeds C={self.C}")
        if self.CT > self.T:
            raise ValidationError(f"CT={self.CT} exceeds T={self.T}")

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in _COUNT_NAMES}


def _effective_root(tree: Tree) -> Tree:
    # External parsers wrap sentences in ROOT/TOP or label-less nodes.
    node = tree
    while node.label in ("", "ROOT", "TOP") and len(node.children) == 1:
        node = node.children[0]
    return node


def _matches_any(patterns: PatternSet, node: Tree) -> bool:
    from .treepat import node_matches

    return any(node_matches(p, node) for p in patterns.patterns)


def t_unit_nodes(tree: Tree, patterns: dict[str, PatternSet] | None = None) -> list[Tree]:
    """T-unit anchors for one sentence tree.

    A sentence that coordinates two or more finite clauses directly under its
    root yields one T-unit per conjunct; any other sentence containing a
    finite clause yields one; fragments without a finite clause yield none.
    """
    patterns = patterns or load_structure_patterns()
    clause = patterns["TUNIT_CLAUSE"]
    root = _effective_root(tree)
    if root.label in ("S", "SINV"):
        conjuncts = [c for c in root.children if _matches_any(clause, c)]
        if len(conjuncts) >= 2:
            return conjuncts
    if match_pattern(clause, root):
        return [root]
    return []


def count_production_units(
    trees: list[Tree] | tuple[Tree, ...], patterns: dict[str, PatternSet] | None = None
) -> ProductionCounts:
    """The eight structure counts over a document's sentence trees."""
    patterns = patterns or load_structure_patterns()
    s = len(trees)
    vp = c = t = dc = ct = cp = cn = 0
    for tree in trees:
        vp += len(match_pattern(patterns["VP"], tree))
        c += len(match_pattern(patterns["CLAUSE"], tree))
        cp += len(match_pattern(patterns["CP"], tree))
        cn += len(match_pattern(patterns["CN"], tree))
        dc_nodes = match_pattern(patterns["DC"], tree)
        dc += len(dc_nodes)
        tunits = t_unit_nodes(tree, patterns)
        t += len(tunits)
        for unit in tunits:
            if any(node is d for node in dc_nodes for d in unit.descendants()):
                ct += 1
    return ProductionCounts(S=s, VP=vp, C=c, T=t, DC=dc, CT=ct, CP=cp, CN=cn)


def syntactic_ratios(counts: ProductionCounts, word_count: int) -> dict[str, float | None]:
    """The 14 length/complexity ratios; zero denominators yield absent values."""

    def ratio(num: float, den: float) -> float | None:
        return num / den if den else None

    return {
        "MLS": ratio(word_count, counts.S),
        "MLT": ratio(word_count, counts.T),
        "MLC": ratio(word_count, counts.C),
        "C/S": ratio(counts.C, counts.S),
        "VP/T": ratio(counts.VP, counts.T),
        "C/T": ratio(counts.C, counts.T),
        "DC/C": ratio(counts.DC, counts.C),
        "DC/T": ratio(counts.DC, counts.T),
        "T/S": ratio(counts.T, counts.S),
        "CT/T": ratio(counts.CT, counts.T),
        "CP/T": ratio(counts.CP, counts.T),
        "CP/C": ratio(counts.CP, counts.C),
        "CN/T": ratio(counts.CN, counts.T),
        "CN/C": ratio(counts.CN, counts.C),
    }


def dlevel_classify(
    tree: Tree, rules: tuple[tuple[int, PatternSet], ...] | None = None
) -> int:
    """Sentence complexity level 0..7.

    Distinct levels matched by two or more rules give 7; one matched level
    gives that level; no match gives 0. Total over all parseable trees.
    """
    rules = rules or load_dlevel_rules()
    matched = {level for level, pattern in rules if match_pattern(pattern, tree)}
    if len(matched) >= 2:
        return 7
    if matched:
        return matched.pop()
    return 0


def dlevel_distribution(
    trees: list[Tree] | tuple[Tree, ...],
    rules: tuple[tuple[int, PatternSet], ...] | None = None,
) -> tuple[float | None, float | None, float | None]:
    """Proportions of sentences at level 0, levels 1-4, and levels 5-7."""
    if not trees:
        return (None, None, None)
    levels = [dlevel_classify(tree, rules) for tree in trees]
    n = len(levels)
    p0 = sum(1 for v in levels if v == 0) / n
    p14 = sum(1 for v in levels if 1 <= v <= 4) / n
    p57 = sum(1 for v in levels if v >= 5) / n
    return (p0, p14, p57)


def tree_word_count(trees: list[Tree] | tuple[Tree, ...]) -> int:
    """Leaves carrying a word tag; punctuation leaves do not count."""
    from .lexfeat import is_word_tag

    return sum(1 for tree in trees for leaf in tree.leaves() if is_word_tag(leaf.label))


def extract_syntactic(doc: Document) -> FeatureVector:
    """8 counts, 14 ratios, and the 3 level proportions for one document."""
    if not doc.trees:
        raise TreesRequiredError(f"document {doc.id!r} has no parse trees")
    counts = count_production_units(doc.trees)
    values: dict[str, float | None] = {
        name: float(value) for name, value in counts.as_dict().items()
    }
    values.update(syntactic_ratios(counts, tree_word_count(doc.trees)))
    p0, p14, p57 = dlevel_distribution(doc.trees)
    values["dlevel_0"] = p0
    values["dlevel_1_4"] = p14
    values["dlevel_5_7"] = p57
    ordered = {name: values[name] for name in SYNTACTIC_FEATURES}
    return FeatureVector(values=ordered)
