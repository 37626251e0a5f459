"""Synthetic two-class corpora with aligned tokens, POS tags, and trees.

Sentences are built from a small set of tree templates, so token/leaf
alignment holds by construction. Classes can differ in vocabulary, in
template mix, or both, which is what the robustness analyses need to
exercise lexical-vs-syntactic contrasts on demand.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .corpus import Corpus, Document, Token
from .treepat import Tree


def _leaf(tag: str, form: str) -> Tree:
    return Tree(label=tag, leaf_form=form)


def _node(label: str, *children: Tree) -> Tree:
    return Tree(label=label, children=tuple(children))


@dataclass(frozen=True)
class Vocabulary:
    nouns: tuple[str, ...]
    verbs_vbz: tuple[str, ...]  # third-person forms ("follows")
    verbs_vb: tuple[str, ...]  # base forms ("follow")
    adjectives: tuple[str, ...]


VOCAB_A = Vocabulary(
    nouns=("doctor", "garden", "window", "teacher", "river", "painting", "kitchen", "letter",
           "neighbor", "violin", "bakery", "lantern"),
    verbs_vbz=("watches", "paints", "cleans", "follows", "carries", "remembers", "visits",
               "describes"),
    verbs_vb=("watch", "paint", "clean", "follow", "carry", "remember", "visit", "describe"),
    adjectives=("quiet", "bright", "narrow", "gentle", "dusty", "warm"),
)

VOCAB_B = Vocabulary(
    nouns=("engine", "harbor", "mountain", "ticket", "signal", "factory", "pilot", "cargo",
           "voltage", "turbine", "compass", "anchor"),
    verbs_vbz=("repairs", "inspects", "measures", "signals", "loads", "rotates", "charges",
               "monitors"),
    verbs_vb=("repair", "inspect", "measure", "signal", "load", "rotate", "charge", "monitor"),
    adjectives=("heavy", "rusty", "loud", "rapid", "sharp", "cold"),
)


def _simple_svo(rng: random.Random, v: Vocabulary) -> Tree:
    n1, n2 = rng.sample(v.nouns, 2)
    return _node(
        "S",
        _node("NP", _leaf("DT", "the"), _leaf("NN", n1)),
        _node("VP", _leaf("VBZ", rng.choice(v.verbs_vbz)),
              _node("NP", _leaf("DT", "the"), _leaf("NN", n2))),
    )


def _adjective_sv(rng: random.Random, v: Vocabulary) -> Tree:
    return _node(
        "S",
        _node("NP", _leaf("DT", "the"), _leaf("JJ", rng.choice(v.adjectives)),
              _leaf("NN", rng.choice(v.nouns))),
        _node("VP", _leaf("VBZ", rng.choice(v.verbs_vbz))),
    )


def _subject_relative(rng: random.Random, v: Vocabulary) -> Tree:
    n1, n2 = rng.sample(v.nouns, 2)
    v1, v2 = rng.sample(v.verbs_vbz, 2)
    return _node(
        "S",
        _node(
            "NP",
            _node("NP", _leaf("DT", "the"), _leaf("NN", n1)),
            _node("SBAR", _node("WHNP", _leaf("WP", "who")),
                  _node("S", _node("VP", _leaf("VBZ", v1),
                                   _node("NP", _leaf("DT", "the"), _leaf("NN", n2))))),
        ),
        _node("VP", _leaf("VBZ", v2)),
    )


def _subordinate(rng: random.Random, v: Vocabulary) -> Tree:
    n1, n2 = rng.sample(v.nouns, 2)
    v1, v2 = rng.sample(v.verbs_vbz, 2)
    return _node(
        "S",
        _node("NP", _leaf("DT", "the"), _leaf("NN", n1)),
        _node("VP", _leaf("VBZ", v1),
              _node("SBAR", _leaf("IN", "because"),
                    _node("S", _node("NP", _leaf("DT", "the"), _leaf("NN", n2)),
                          _node("VP", _leaf("VBZ", v2))))),
    )


def _coordination(rng: random.Random, v: Vocabulary) -> Tree:
    n1, n2 = rng.sample(v.nouns, 2)
    v1, v2 = rng.sample(v.verbs_vbz, 2)
    return _node(
        "S",
        _node("S", _node("NP", _leaf("DT", "the"), _leaf("NN", n1)),
              _node("VP", _leaf("VBZ", v1))),
        _leaf("CC", "and"),
        _node("S", _node("NP", _leaf("DT", "the"), _leaf("NN", n2)),
              _node("VP", _leaf("VBZ", v2))),
    )


def _infinitive(rng: random.Random, v: Vocabulary) -> Tree:
    n1, n2 = rng.sample(v.nouns, 2)
    return _node(
        "S",
        _node("NP", _leaf("DT", "the"), _leaf("NN", n1)),
        _node("VP", _leaf("VBZ", "wants"),
              _node("S", _node("VP", _leaf("TO", "to"),
                               _node("VP", _leaf("VB", rng.choice(v.verbs_vb)),
                                     _node("NP", _leaf("DT", "the"), _leaf("NN", n2)))))),
    )


def _fragment(rng: random.Random, v: Vocabulary) -> Tree:
    return _node("FRAG", _node("NP", _leaf("DT", "the"), _leaf("NN", rng.choice(v.nouns))))


TEMPLATES = {
    "svo": _simple_svo,
    "adj": _adjective_sv,
    "relative": _subject_relative,
    "subordinate": _subordinate,
    "coordination": _coordination,
    "infinitive": _infinitive,
    "fragment": _fragment,
}

#: Equal syntactic mix for both classes: lexical contrast only.
BALANCED_MIX = {
    "svo": 4, "adj": 3, "relative": 2, "subordinate": 2, "coordination": 2,
    "infinitive": 2, "fragment": 1,
}

#: A flatter, simpler mix; pairing it with BALANCED_MIX makes classes
#: syntactically separable as well.
SIMPLE_MIX = {"svo": 6, "adj": 4, "fragment": 2, "coordination": 1, "infinitive": 1}

#: Per-document complexity profiles. Sampling one per document (same odds in
#: both classes) spreads the baseline of structural ratios without making
#: structure class-informative.
COMPLEXITY_PROFILES = (
    {"svo": 6, "adj": 4, "fragment": 2, "infinitive": 1, "coordination": 1},
    BALANCED_MIX,
    {"svo": 2, "adj": 1, "relative": 4, "subordinate": 4, "coordination": 3,
     "infinitive": 2},
)


@dataclass(frozen=True)
class SynthSpec:
    n_docs: int = 40
    docs_per_subject: int = 2
    sentences_range: tuple[int, int] = (4, 9)
    labels: tuple[str, str] = ("ctrl", "case")
    vocab: dict[str, Vocabulary] = field(
        default_factory=lambda: {"ctrl": VOCAB_A, "case": VOCAB_B}
    )
    template_mix: dict[str, dict[str, int]] = field(
        default_factory=lambda: {"ctrl": BALANCED_MIX, "case": BALANCED_MIX}
    )
    # Restricting each document to a small sampled vocabulary makes its text
    # repetitive (speech-like): n-gram statistics then react strongly to
    # deletions while per-sentence structure stays comparatively stable.
    doc_vocab_nouns: int | None = None
    doc_vocab_verbs: int | None = None
    # With profiles set, each document draws its template mix from this pool
    # instead of template_mix; with a token budget set, documents grow
    # sentence by sentence to a similar length instead of a sentence count.
    profiles: tuple[dict[str, int], ...] | None = None
    token_budget_range: tuple[int, int] | None = None
    seed: int = 0
    name: str = "synthetic"


def _restrict(vocab: Vocabulary, spec: SynthSpec, rng: random.Random) -> Vocabulary:
    nouns = vocab.nouns
    verbs_vbz, verbs_vb = vocab.verbs_vbz, vocab.verbs_vb
    if spec.doc_vocab_nouns is not None:
        nouns = tuple(rng.sample(nouns, min(spec.doc_vocab_nouns, len(nouns))))
    if spec.doc_vocab_verbs is not None:
        idx = rng.sample(range(len(verbs_vbz)), min(spec.doc_vocab_verbs, len(verbs_vbz)))
        verbs_vbz = tuple(vocab.verbs_vbz[i] for i in idx)
        verbs_vb = tuple(vocab.verbs_vb[i] for i in idx)
    return Vocabulary(nouns=nouns, verbs_vbz=verbs_vbz, verbs_vb=verbs_vb,
                      adjectives=vocab.adjectives)


def make_document(doc_id: str, subject_id: str, label: str, spec: SynthSpec,
                  rng: random.Random) -> Document:
    vocab = _restrict(spec.vocab[label], spec, rng)
    mix = rng.choice(spec.profiles) if spec.profiles else spec.template_mix[label]
    names = sorted(mix)
    weights = [mix[n] for n in names]

    def next_tree():
        return TEMPLATES[rng.choices(names, weights=weights)[0]](rng, vocab)

    trees = []
    if spec.token_budget_range is not None:
        budget = rng.randint(*spec.token_budget_range)
        total = 0
        while total < budget:
            tree = next_tree()
            trees.append(tree)
            total += len(tree.leaves())
    else:
        for _ in range(rng.randint(*spec.sentences_range)):
            trees.append(next_tree())
    trees = tuple(trees)
    tokens = tuple(
        Token(form=leaf.leaf_form, pos=leaf.label) for tree in trees for leaf in tree.leaves()
    )
    return Document(id=doc_id, subject_id=subject_id, label=label, tokens=tokens, trees=trees)


def make_corpus(spec: SynthSpec) -> Corpus:
    """Deterministic synthetic corpus; subjects never mix classes."""
    rng = random.Random(spec.seed)
    docs = []
    n_subjects = (spec.n_docs + spec.docs_per_subject - 1) // spec.docs_per_subject
    for i in range(spec.n_docs):
        subject = i // spec.docs_per_subject
        label = spec.labels[subject % 2]
        docs.append(
            make_document(f"doc_{i:03d}", f"subj_{subject:03d}", label, spec, rng)
        )
    assert n_subjects >= 2
    return Corpus(name=spec.name, documents=tuple(docs))
