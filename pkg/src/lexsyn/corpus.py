"""Corpus ingestion, validation, profiling, and subject-aware fold assignment."""

from __future__ import annotations

import csv
import json
import random
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    AlignmentError,
    ConfigurationError,
    CorpusParseError,
    SchemaError,
    ValidationError,
)
from .treepat import Tree, parse_ptb, render


@dataclass(frozen=True)
class Token:
    form: str
    pos: str | None = None


@dataclass(frozen=True)
class Document:
    """One labeled text sample, possibly with POS tags and per-sentence trees."""

    id: str
    subject_id: str
    label: str
    tokens: tuple[Token, ...]
    trees: tuple[Tree, ...] | None = None
    alteration_level: int = 0

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def has_pos(self) -> bool:
        return all(t.pos is not None for t in self.tokens)


@dataclass(frozen=True)
class Corpus:
    name: str
    documents: tuple[Document, ...]

    @property
    def labels(self) -> tuple[str, str]:
        distinct = sorted({d.label for d in self.documents})
        return tuple(distinct)  # type: ignore[return-value]

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)


# CHAT-style transcript markers: bracketed annotation groups are dropped,
# tokens beginning "&" (fillers like &uh) are kept.
_CHAT_GROUP_RE = re.compile(r"\[[^\]]*\]|<[^>]*>")
# Clitics split off as their own tokens, the convention of CHAT transcripts.
_CLITIC_RE = re.compile(r"(?<=\w)('s|'ve|'ll|'re|'d|'m|n't)\b")
_STRIP_CHARS = ".,!?;:\"()“”‘’"


def tokenize_text(text: str) -> list[str]:
    """Fallback tokenizer for raw text: lowercase, strip CHAT markers, split
    clitics off, split on whitespace, drop punctuation."""
    cleaned = _CHAT_GROUP_RE.sub(" ", text.lower())
    cleaned = _CLITIC_RE.sub(r" \1", cleaned)
    out = []
    for raw in cleaned.split():
        tok = raw.strip(_STRIP_CHARS)
        if not tok or tok.startswith("+"):
            continue
        if all(ch in _STRIP_CHARS or ch == "-" for ch in tok):
            continue
        out.append(tok)
    return out


def _check_tree_alignment(doc_id: str, tokens: tuple[Token, ...], trees: tuple[Tree, ...]) -> None:
    leaf_forms = [form for tree in trees for form in tree.leaf_forms()]
    token_forms = [t.form for t in tokens]
    if leaf_forms != token_forms:
        raise AlignmentError(
            f"document {doc_id!r}: tree leaves do not match tokens "
            f"({len(leaf_forms)} leaves vs {len(token_forms)} tokens)"
        )


def _build_document(rec: dict, lineno: int) -> Document:
    for key in ("id", "label"):
        if key not in rec or not isinstance(rec[key], str) or not rec[key]:
            raise SchemaError(f"line {lineno}: missing or empty field {key!r}")
    doc_id = rec["id"]
    subject_id = rec.get("subject_id") or doc_id
    if rec.get("tokens"):
        tokens = []
        for t in rec["tokens"]:
            form = t.get("form")
            if not form:
                raise SchemaError(f"line {lineno}: token with empty form in document {doc_id!r}")
            tokens.append(Token(form=form, pos=t.get("pos")))
        tokens = tuple(tokens)
    else:
        text = rec.get("text")
        if not isinstance(text, str):
            raise SchemaError(f"line {lineno}: document {doc_id!r} has neither tokens nor text")
        tokens = tuple(Token(form=f) for f in tokenize_text(text))
    if not tokens:
        raise SchemaError(f"line {lineno}: document {doc_id!r} has no tokens after validation")
    trees = None
    if rec.get("trees"):
        trees = tuple(parse_ptb(s) for s in rec["trees"])
        _check_tree_alignment(doc_id, tokens, trees)
    level = rec.get("alteration_level", 0)
    if not isinstance(level, int) or not 0 <= level <= 100:
        raise SchemaError(f"line {lineno}: bad alteration_level {level!r} in document {doc_id!r}")
    return Document(
        id=doc_id, subject_id=subject_id, label=rec["label"], tokens=tokens, trees=trees,
        alteration_level=level,
    )


def _validate_corpus(corpus: Corpus) -> Corpus:
    if not corpus.documents:
        raise SchemaError(f"corpus {corpus.name!r} has no documents")
    seen_ids = set()
    for doc in corpus.documents:
        if doc.id in seen_ids:
            raise SchemaError(f"duplicate document id {doc.id!r}")
        seen_ids.add(doc.id)
    labels = sorted({d.label for d in corpus.documents})
    if len(labels) != 2:
        raise SchemaError(
            f"corpus {corpus.name!r} must have exactly 2 labels, found {len(labels)}: {labels}"
        )
    return corpus


def load_corpus(path: str | Path, format: str = "jsonl", name: str | None = None) -> Corpus:
    """Load and validate a labeled corpus from a jsonl or csv file."""
    path = Path(path)
    if format not in ("jsonl", "csv"):
        raise ValidationError(f"unknown corpus format {format!r}")
    if not path.exists():
        raise ValidationError(f"corpus file not found: {path}")
    documents = []
    if format == "jsonl":
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusParseError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
                if not isinstance(rec, dict):
                    raise CorpusParseError(f"line {lineno}: expected an object")
                documents.append(_build_document(rec, lineno))
    else:
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"id", "subject_id", "label", "text"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise CorpusParseError(f"csv header must contain columns {sorted(required)}")
            for lineno, row in enumerate(reader, start=2):
                documents.append(_build_document(dict(row), lineno))
    corpus = Corpus(name=name or path.stem, documents=tuple(documents))
    return _validate_corpus(corpus)


def document_to_record(doc: Document) -> dict:
    rec: dict = {
        "id": doc.id,
        "subject_id": doc.subject_id,
        "label": doc.label,
        "tokens": [
            {"form": t.form} if t.pos is None else {"form": t.form, "pos": t.pos}
            for t in doc.tokens
        ],
    }
    if doc.trees is not None:
        rec["trees"] = [render(t) for t in doc.trees]
    if doc.alteration_level:
        rec["alteration_level"] = doc.alteration_level
    return rec


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus as jsonl; load_corpus on the result round-trips exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            fh.write(json.dumps(document_to_record(doc), sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# dataset profile

#: Row order of the dataset profile: lexical rows first, then syntactic.
PROFILE_ROWS = (
    "distinct_tokens_ratio",
    "distinct_bigrams_ratio",
    "distinct_trigrams_ratio",
    "entropy_1gram",
    "entropy_2gram",
    "entropy_3gram",
    "cond_entropy_2gram",
    "cond_entropy_3gram",
    "lexicon_complexity",
    "MLC",
    "MLS",
    "MLT",
    "C/S",
    "dlevel_0",
    "dlevel_1_4",
    "dlevel_5_7",
    "C/T",
    "CT/T",
    "DC/T",
    "DC/C",
    "CP/C",
    "CP/T",
    "T/S",
    "CN/C",
    "CN/T",
    "VP/T",
)


@dataclass(frozen=True)
class DatasetProfile:
    """Per-feature corpus means in fixed row order; None marks an absent row."""

    rows: tuple[tuple[str, float | None], ...]

    def as_dict(self) -> dict[str, float | None]:
        return dict(self.rows)

    def __getitem__(self, key: str) -> float | None:
        return self.as_dict()[key]


def mean_word_length(doc: Document) -> float:
    """Mean token length in characters; the profile's lexicon-complexity row."""
    return sum(len(t.form) for t in doc.tokens) / len(doc.tokens)


def profile_corpus(corpus: Corpus, config=None) -> DatasetProfile:
    """Mean feature values across documents, in profile row order.

    Rows a document cannot provide (too few tokens, no trees) are skipped for
    that document; rows no document provides are reported absent, not zero.
    """
    import math

    from .lexfeat import LexicalConfig, extract_lexical
    from .synfeat import extract_syntactic

    config = config or LexicalConfig()
    collected: dict[str, list[float]] = {row: [] for row in PROFILE_ROWS}

    def accumulate(name: str, value: float | None) -> None:
        if value is not None:
            collected[name].append(value)

    for doc in corpus.documents:
        lex = extract_lexical(doc, config, require_pos=False)
        for name in PROFILE_ROWS:
            if name in lex.values:
                accumulate(name, lex.values[name])
        accumulate("lexicon_complexity", mean_word_length(doc))
        if doc.trees:
            syn = extract_syntactic(doc)
            for name in PROFILE_ROWS:
                if name in syn.values:
                    accumulate(name, syn.values[name])

    # summing in sorted order makes the mean invariant to document order
    rows = tuple(
        (name, math.fsum(sorted(values)) / len(values) if values else None)
        for name, values in ((row, collected[row]) for row in PROFILE_ROWS)
    )
    return DatasetProfile(rows=rows)


# ---------------------------------------------------------------------------
# subject-aware folds


@dataclass(frozen=True)
class FoldAssignment:
    """Map of document id to fold index; all documents of a subject share a fold."""

    fold_of: dict[str, int]
    k: int

    def fold_ids(self, fold: int) -> list[str]:
        return [doc_id for doc_id, f in self.fold_of.items() if f == fold]


def group_folds(corpus: Corpus, k: int, seed: int) -> FoldAssignment:
    """Greedy subject-level fold assignment, balanced by document count and label.

    Subjects go to the currently lightest fold, alternating between the two
    classes so labels spread evenly. Deterministic for a fixed seed.
    """
    if k < 2:
        raise ConfigurationError(f"k must be >= 2, got {k}")
    subjects: dict[str, list[Document]] = {}
    for doc in corpus.documents:
        subjects.setdefault(doc.subject_id, []).append(doc)
    if len(subjects) < k:
        raise ConfigurationError(
            f"need at least k={k} subjects, corpus has {len(subjects)}"
        )
    label_a, label_b = corpus.labels
    per_class: dict[str, list[str]] = {label_a: [], label_b: []}
    for subject_id, docs in subjects.items():
        labels = [d.label for d in docs]
        majority = max(set(labels), key=lambda lb: (labels.count(lb), lb))
        per_class[majority].append(subject_id)

    rng = random.Random(seed)
    queues = {}
    for label, ids in per_class.items():
        ids = sorted(ids)
        rng.shuffle(ids)
        ids.sort(key=lambda s: -len(subjects[s]))  # stable: seed breaks ties
        queues[label] = ids

    order = sorted(per_class, key=lambda lb: (-len(per_class[lb]), lb))
    weights = [0] * k
    class_weights = {label: [0] * k for label in per_class}
    fold_of: dict[str, int] = {}
    turn = 0
    while any(queues.values()):
        label = order[turn % 2]
        turn += 1
        if not queues[label]:
            continue
        subject_id = queues[label].pop(0)
        # lightest fold for this class first, so labels spread across folds
        fold = min(range(k), key=lambda f: (class_weights[label][f], weights[f], f))
        weights[fold] += len(subjects[subject_id])
        class_weights[label][fold] += len(subjects[subject_id])
        for doc in subjects[subject_id]:
            fold_of[doc.id] = fold

    assignment = FoldAssignment(fold_of=fold_of, k=k)
    _validate_folds(assignment, corpus)
    return assignment


def _validate_folds(assignment: FoldAssignment, corpus: Corpus) -> None:
    docs_by_id = {d.id: d for d in corpus.documents}
    fold_subjects: dict[str, int] = {}
    for doc_id, fold in assignment.fold_of.items():
        subject = docs_by_id[doc_id].subject_id
        if subject in fold_subjects and fold_subjects[subject] != fold:
            raise ValidationError(f"subject {subject!r} spans folds")
        fold_subjects[subject] = fold
    for fold in range(assignment.k):
        if not any(f == fold for f in assignment.fold_of.values()):
            raise ValidationError(f"fold {fold} is empty")
        train_labels = {
            docs_by_id[doc_id].label
            for doc_id, f in assignment.fold_of.items()
            if f != fold
        }
        if len(train_labels) < 2:
            raise ConfigurationError(
                f"training split excluding fold {fold} has a single class; "
                "reduce k or rebalance subjects"
            )
