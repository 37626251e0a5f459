"""Seeded word-deletion alterations with parse-tree projection or reparsing."""

from __future__ import annotations

import hashlib
import random
import subprocess
from dataclasses import dataclass, replace

from .corpus import Corpus, Document
from .errors import AlignmentError, ExternalToolError, ValidationError
from .treepat import Tree, parse_ptb

#: Alteration levels used when none are configured; 0 always means "original".
DEFAULT_LEVELS = (20, 40, 60, 80)


def validate_level(percent: int) -> int:
    if not isinstance(percent, int) or not 0 <= percent <= 100:
        raise ValidationError(f"alteration level must be an integer in [0, 100], got {percent!r}")
    return percent


@dataclass(frozen=True)
class PerturbationPlan:
    levels: tuple[int, ...] = DEFAULT_LEVELS
    seed: int = 0
    tree_strategy: str = "project"
    parser_command: str | None = None

    def __post_init__(self):
        for level in self.levels:
            validate_level(level)
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValidationError(f"levels must be strictly increasing, got {self.levels}")
        if self.tree_strategy not in ("project", "reparse"):
            raise ValidationError(f"unknown tree_strategy {self.tree_strategy!r}")
        if self.tree_strategy == "reparse" and not self.parser_command:
            raise ValidationError("tree_strategy 'reparse' requires a parser_command")


def deletion_count(n_tokens: int, percent: int) -> int:
    """Exact number of deletions: round-half-up of percent/100*n, capped at n-1."""
    return min((percent * n_tokens + 50) // 100, n_tokens - 1)


def _doc_rng(seed: int, doc_id: str, level: int) -> random.Random:
    # Per-document stream so corpus-level parallelism cannot reorder draws.
    digest = hashlib.sha256(f"{seed}|{doc_id}|{level}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def delete_words(doc: Document, level: int, seed: int) -> Document:
    """Delete a seeded uniform sample of token positions at the given level.

    Surviving tokens keep their original order; trees, when present, are
    projected onto the surviving leaves.
    """
    validate_level(level)
    if doc.alteration_level != 0:
        raise ValidationError(f"document {doc.id!r} is already altered")
    if not doc.tokens:
        raise ValidationError(f"document {doc.id!r} has no tokens")
    if level == 0:
        return doc
    n = len(doc.tokens)
    count = deletion_count(n, level)
    rng = _doc_rng(seed, doc.id, level)
    deleted = set(rng.sample(range(n), count))
    tokens = tuple(tok for i, tok in enumerate(doc.tokens) if i not in deleted)
    trees = doc.trees
    if trees is not None:
        total_leaves = sum(len(tree.leaves()) for tree in trees)
        if total_leaves != n:
            raise AlignmentError(
                f"document {doc.id!r}: {total_leaves} tree leaves vs {n} tokens; "
                "cannot project deletions"
            )
        projected = []
        offset = 0
        for tree in trees:
            n_leaves = len(tree.leaves())
            local = {i - offset for i in deleted if offset <= i < offset + n_leaves}
            offset += n_leaves
            pruned = project_tree_deletion(tree, local)
            if pruned is not None:
                projected.append(pruned)
        trees = tuple(projected)
    return replace(doc, tokens=tokens, trees=trees, alteration_level=level)


def project_tree_deletion(tree: Tree, deleted_leaf_indices: set[int]) -> Tree | None:
    """Remove the listed leaves and prune any node left without leaves.

    Unary chains survive untouched; returns None when every leaf is deleted.
    """
    n_leaves = len(tree.leaves())
    out_of_range = [i for i in deleted_leaf_indices if not 0 <= i < n_leaves]
    if out_of_range:
        raise ValidationError(
            f"leaf indices out of range for a {n_leaves}-leaf tree: {sorted(out_of_range)}"
        )
    counter = iter(range(n_leaves))

    def prune(node: Tree) -> Tree | None:
        if node.is_leaf:
            return None if next(counter) in deleted_leaf_indices else node
        kept = tuple(c for c in (prune(child) for child in node.children) if c is not None)
        if not kept:
            return None
        return Tree(label=node.label, children=kept)

    return prune(tree)


def reparse_external(
    text: str, parser_command: str, expected_tokens: list[str] | None = None
) -> list[Tree]:
    """Run an external constituency parser: text on stdin, one tree per line out."""
    try:
        proc = subprocess.run(
            parser_command, shell=True, input=text, text=True, capture_output=True, check=False
        )
    except OSError as exc:
        raise ExternalToolError(f"failed to run parser command: {exc}") from exc
    if proc.returncode != 0:
        raise ExternalToolError(
            f"parser command exited with status {proc.returncode}",
            output=proc.stdout + proc.stderr,
        )
    trees = []
    for line in proc.stdout.splitlines():
        if not line.strip():
            continue
        try:
            trees.append(parse_ptb(line))
        except ValidationError as exc:
            raise ExternalToolError(f"unparseable parser output: {exc}", output=line) from exc
    if expected_tokens is not None:
        leaf_forms = [form for tree in trees for form in tree.leaf_forms()]
        if leaf_forms != list(expected_tokens):
            raise AlignmentError(
                "parser output leaves do not match the altered token sequence "
                f"({len(leaf_forms)} leaves vs {len(expected_tokens)} tokens)"
            )
    return trees


def perturb_corpus(corpus: Corpus, plan: PerturbationPlan) -> dict[int, Corpus]:
    """One altered corpus per plan level; ids, subjects, and labels preserved."""
    for doc in corpus.documents:
        if doc.alteration_level != 0:
            raise ValidationError(f"corpus contains pre-altered document {doc.id!r}")
    result: dict[int, Corpus] = {}
    for level in plan.levels:
        docs = []
        for doc in corpus.documents:
            altered = delete_words(doc, level, plan.seed)
            if plan.tree_strategy == "reparse" and doc.trees is not None:
                forms = [t.form for t in altered.tokens]
                trees = reparse_external(" ".join(forms), plan.parser_command, forms)
                altered = replace(altered, trees=tuple(trees))
            docs.append(altered)
        result[level] = Corpus(name=f"{corpus.name}@{level}", documents=tuple(docs))
    return result
