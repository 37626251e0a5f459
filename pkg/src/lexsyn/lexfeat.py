"""Lexical richness features: n-gram stats, entropies, and density/sophistication/variation.

Feature names follow the fixed 37-entry lexical inventory; values that a text
cannot support (too few tokens, zero denominators) are carried as explicit
absent markers, never NaN.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .corpus import Document, Token
from .errors import TaggingRequiredError, ValidationError

LEXICAL_FEATURES = (
    "distinct_tokens",
    "distinct_tokens_ratio",
    "bigrams",
    "distinct_bigrams",
    "distinct_bigrams_ratio",
    "trigrams",
    "distinct_trigrams",
    "distinct_trigrams_ratio",
    "entropy_1gram",
    "entropy_2gram",
    "entropy_3gram",
    "cond_entropy_2gram",
    "cond_entropy_3gram",
    "wordtypes",
    "swordtypes",
    "lextypes",
    "slextypes",
    "wordtokens",
    "swordtokens",
    "lextokens",
    "slextokens",
    "ld",
    "ls1",
    "ls2",
    "vs1",
    "vs2",
    "cvs1",
    "ndw",
    "ndwz",
    "ndwerz",
    "ndwesz",
    "ttr",
    "msttr",
    "cttr",
    "rttr",
    "logttr",
    "uber",
)

#: POS-dependent subset; absent when a document carries no tags.
_POS_ONLY_FEATURES = frozenset(
    {"lextypes", "slextypes", "lextokens", "slextokens", "ld", "ls1", "vs1", "vs2", "cvs1"}
)

#: Verb forms that do not count as lexical verbs.
DEFAULT_AUXILIARIES = frozenset(
    """be am is are was were been being 's 'm 're
    have has had having 've 'd
    do does did doing done
    will would shall should can could may might must ought 'll
    """.split()
)


@dataclass(frozen=True)
class LexicalConfig:
    frequency_wordlist: str | Path | None = None  # None: packaged default list
    sophistication_cutoff: int = 2000
    lexical_tagset: tuple[str, ...] = ("NN", "VB", "JJ", "RB")
    verb_tagset: tuple[str, ...] = ("VB",)
    auxiliaries: frozenset[str] = DEFAULT_AUXILIARIES
    segment_size: int = 50
    random_samples: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.sophistication_cutoff < 1:
            raise ValidationError("sophistication_cutoff must be >= 1")
        if self.segment_size < 1:
            raise ValidationError("segment_size must be >= 1")
        if not self.lexical_tagset or not self.verb_tagset:
            raise ValidationError("tagsets must be non-empty")


@dataclass(frozen=True)
class FeatureVector:
    """Ordered feature name -> value map; None marks an absent value."""

    values: dict[str, float | None]

    def __post_init__(self):
        for name, value in self.values.items():
            if value is not None and math.isnan(value):
                raise ValidationError(f"feature {name!r} is NaN; use None for absent values")

    def defined(self) -> dict[str, float]:
        return {k: v for k, v in self.values.items() if v is not None}

    def __getitem__(self, name: str) -> float | None:
        return self.values[name]

    def merged_with(self, other: "FeatureVector") -> "FeatureVector":
        merged = dict(self.values)
        merged.update(other.values)
        return FeatureVector(values=merged)


def feature_group(name: str) -> str:
    from .synfeat import SYNTACTIC_FEATURES

    if name in LEXICAL_FEATURES:
        return "lexical"
    if name in SYNTACTIC_FEATURES:
        return "syntactic"
    raise ValidationError(f"unknown feature {name!r}")


def _forms(tokens: Sequence[Token] | Sequence[str]) -> list[str]:
    return [t.form if isinstance(t, Token) else t for t in tokens]


def ngrams(forms: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(forms[i : i + n]) for i in range(len(forms) - n + 1)]


class NgramStats(NamedTuple):
    distinct: int
    once: int
    once_ratio: float


def ngram_stats(tokens: Sequence[Token] | Sequence[str], n: int) -> NgramStats | None:
    """Distinct n-grams, hapax n-grams, and their ratio; None below n tokens."""
    forms = _forms(tokens)
    if len(forms) < n:
        return None
    counts = Counter(ngrams(forms, n))
    distinct = len(counts)
    once = sum(1 for c in counts.values() if c == 1)
    return NgramStats(distinct=distinct, once=once, once_ratio=once / distinct)


def shannon_entropy(tokens: Sequence[Token] | Sequence[str], n: int) -> float | None:
    """Entropy of the empirical n-gram distribution, in bits; None below n tokens."""
    forms = _forms(tokens)
    grams = ngrams(forms, n)
    if not grams:
        return None
    total = len(grams)
    h = -sum((c / total) * math.log2(c / total) for c in Counter(grams).values())
    return h + 0.0  # avoid -0.0


def conditional_entropy(tokens: Sequence[Token] | Sequence[str], n: int) -> float | None:
    """Next-word entropy given the n-1 preceding tokens; None below n tokens."""
    if n < 2:
        raise ValidationError("conditional entropy needs n >= 2")
    forms = _forms(tokens)
    grams = ngrams(forms, n)
    if not grams:
        return None
    total = len(grams)
    joint = Counter(grams)
    context: Counter = Counter(g[:-1] for g in grams)
    h = -sum((c / total) * math.log2(c / context[g[:-1]]) for g, c in joint.items())
    return h + 0.0


# ---------------------------------------------------------------------------
# density / sophistication / variation


def load_wordlist(path: str | Path | None = None) -> tuple[str, ...]:
    """Ranked common-word list, one word per line, most frequent first."""
    if path is None:
        text = resources.files("lexsyn.data").joinpath("common_words.txt").read_text("utf-8")
    else:
        path = Path(path)
        if not path.exists():
            raise ValidationError(f"frequency wordlist not found: {path}")
        text = path.read_text("utf-8")
    words = tuple(w.strip().lower() for w in text.splitlines() if w.strip())
    if not words:
        raise ValidationError("frequency wordlist is empty")
    return words


# cached per (path, cutoff): the list is read once per process, so edits to a
# wordlist file require a new path (or process) to take effect
@lru_cache(maxsize=8)
def _common_set_cached(path: str | None, cutoff: int) -> frozenset[str]:
    words = load_wordlist(path)
    return frozenset(words[:cutoff])


def _common_set(config: LexicalConfig) -> frozenset[str]:
    path = None if config.frequency_wordlist is None else str(config.frequency_wordlist)
    return _common_set_cached(path, config.sophistication_cutoff)


def _is_lexical(token: Token, config: LexicalConfig) -> bool:
    if token.pos is None:
        return False
    if token.pos.startswith("VB") and token.form.lower() in config.auxiliaries:
        return False
    return any(token.pos.startswith(prefix) for prefix in config.lexical_tagset)


def _is_verb(token: Token, config: LexicalConfig) -> bool:
    if token.pos is None:
        return False
    if token.form.lower() in config.auxiliaries:
        return False
    return any(token.pos.startswith(prefix) for prefix in config.verb_tagset)


def is_word_tag(pos: str) -> bool:
    # PTB word tags are uppercase letters with an optional trailing $ (PRP$, WP$).
    core = pos[:-1] if pos.endswith("$") else pos
    return bool(core) and core.isalpha() and core.isupper()


def _distinct(forms: Iterable[str]) -> int:
    return len(set(forms))


def _ttr_variation(word_forms: list[str], config: LexicalConfig) -> dict[str, float | None]:
    n_tokens = len(word_forms)
    n_types = _distinct(word_forms)
    out: dict[str, float | None] = {}
    out["ndw"] = float(n_types)
    out["ttr"] = n_types / n_tokens
    out["cttr"] = n_types / math.sqrt(2 * n_tokens)
    out["rttr"] = n_types / math.sqrt(n_tokens)
    out["logttr"] = math.log(n_types) / math.log(n_tokens) if n_tokens > 1 else None
    if n_tokens > 1 and n_types < n_tokens:
        log_n = math.log(n_tokens)
        out["uber"] = log_n * log_n / (log_n - math.log(n_types))
    else:
        out["uber"] = None

    size = config.segment_size
    segments = [word_forms[i : i + size] for i in range(0, n_tokens - size + 1, size)]
    if segments:
        out["msttr"] = sum(_distinct(seg) / len(seg) for seg in segments) / len(segments)
    else:
        out["msttr"] = out["ttr"]

    out["ndwz"] = float(_distinct(word_forms[:size]))
    rng = random.Random(config.seed)
    if n_tokens <= size:
        out["ndwerz"] = float(n_types)
        out["ndwesz"] = float(n_types)
    else:
        draws = [
            _distinct(rng.sample(word_forms, size)) for _ in range(config.random_samples)
        ]
        out["ndwerz"] = sum(draws) / len(draws)
        starts = [rng.randrange(n_tokens - size + 1) for _ in range(config.random_samples)]
        seqs = [_distinct(word_forms[s : s + size]) for s in starts]
        out["ndwesz"] = sum(seqs) / len(seqs)
    return out


def lca_features(tokens: Sequence[Token], config: LexicalConfig) -> dict[str, float | None]:
    """The 24 density/sophistication/variation metrics; requires POS on every token."""
    untagged = [t.form for t in tokens if t.pos is None]
    if untagged:
        raise TaggingRequiredError(
            f"lexical analysis needs POS tags; untagged: {untagged[:3]}..."
        )
    words = [t for t in tokens if is_word_tag(t.pos)]
    if not words:
        return {name: None for name in LEXICAL_FEATURES[13:]}
    common = _common_set(config)
    word_forms = [t.form.lower() for t in words]
    soph_forms = [f for f in word_forms if f not in common]
    lex_tokens = [t for t in words if _is_lexical(t, config)]
    lex_forms = [t.form.lower() for t in lex_tokens]
    slex_forms = [f for f in lex_forms if f not in common]
    verb_tokens = [t for t in words if _is_verb(t, config)]
    sverb_types = {t.form.lower() for t in verb_tokens if t.form.lower() not in common}

    out: dict[str, float | None] = {
        "wordtypes": float(_distinct(word_forms)),
        "swordtypes": float(_distinct(soph_forms)),
        "lextypes": float(_distinct(lex_forms)),
        "slextypes": float(_distinct(slex_forms)),
        "wordtokens": float(len(word_forms)),
        "swordtokens": float(len(soph_forms)),
        "lextokens": float(len(lex_forms)),
        "slextokens": float(len(slex_forms)),
        "ld": len(lex_forms) / len(word_forms),
        "ls1": len(slex_forms) / len(lex_forms) if lex_forms else None,
        "ls2": _distinct(soph_forms) / _distinct(word_forms),
    }
    if verb_tokens:
        n_verbs = len(verb_tokens)
        out["vs1"] = len(sverb_types) / n_verbs
        out["vs2"] = len(sverb_types) ** 2 / n_verbs
        out["cvs1"] = len(sverb_types) / math.sqrt(2 * n_verbs)
    else:
        out["vs1"] = out["vs2"] = out["cvs1"] = None
    out.update(_ttr_variation(word_forms, config))
    return out


def _form_only_lca(tokens: Sequence[Token], config: LexicalConfig) -> dict[str, float | None]:
    # Untagged fallback: every token counts as a word; POS-dependent metrics absent.
    word_forms = [t.form.lower() for t in tokens]
    common = _common_set(config)
    soph_forms = [f for f in word_forms if f not in common]
    out: dict[str, float | None] = {name: None for name in LEXICAL_FEATURES[13:]}
    out.update(
        {
            "wordtypes": float(_distinct(word_forms)),
            "swordtypes": float(_distinct(soph_forms)),
            "wordtokens": float(len(word_forms)),
            "swordtokens": float(len(soph_forms)),
            "ls2": _distinct(soph_forms) / _distinct(word_forms),
        }
    )
    out.update(_ttr_variation(word_forms, config))
    return out


def extract_lexical(
    doc: Document, config: LexicalConfig | None = None, require_pos: bool = True
) -> FeatureVector:
    """All 37 lexical features for one document, absent values included.

    With require_pos=False an untagged document yields the form-only subset
    instead of raising; POS-dependent features come back absent.
    """
    config = config or LexicalConfig()
    values: dict[str, float | None] = {}
    uni = ngram_stats(doc.tokens, 1)
    bi = ngram_stats(doc.tokens, 2)
    tri = ngram_stats(doc.tokens, 3)
    values["distinct_tokens"] = float(uni.distinct) if uni else None
    values["distinct_tokens_ratio"] = uni.once_ratio if uni else None
    values["bigrams"] = float(bi.distinct) if bi else None
    values["distinct_bigrams"] = float(bi.once) if bi else None
    values["distinct_bigrams_ratio"] = bi.once_ratio if bi else None
    values["trigrams"] = float(tri.distinct) if tri else None
    values["distinct_trigrams"] = float(tri.once) if tri else None
    values["distinct_trigrams_ratio"] = tri.once_ratio if tri else None
    values["entropy_1gram"] = shannon_entropy(doc.tokens, 1)
    values["entropy_2gram"] = shannon_entropy(doc.tokens, 2)
    values["entropy_3gram"] = shannon_entropy(doc.tokens, 3)
    values["cond_entropy_2gram"] = conditional_entropy(doc.tokens, 2)
    values["cond_entropy_3gram"] = conditional_entropy(doc.tokens, 3)
    if doc.has_pos:
        values.update(lca_features(doc.tokens, config))
    elif require_pos:
        raise TaggingRequiredError(f"document {doc.id!r} has untagged tokens")
    else:
        values.update(_form_only_lca(doc.tokens, config))
    ordered = {name: values[name] for name in LEXICAL_FEATURES}
    return FeatureVector(values=ordered)
