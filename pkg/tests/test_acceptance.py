"""Acceptance suite: one test per exit criterion, each printing a PASS line
with its runtime. Tolerances are fixed here, not configurable."""

import random
import shutil
import time

import numpy as np
import pytest
import yaml

from conftest import FIXTURES, load_golden_trees, load_transcripts
from lexsyn.corpus import Corpus, Document, Token, group_folds, tokenize_text
from lexsyn.lexfeat import (
    LEXICAL_FEATURES,
    LexicalConfig,
    conditional_entropy,
    extract_lexical,
    shannon_entropy,
)
from lexsyn.models import ModelSpec, cross_validate, macro_f1
from lexsyn.perturb import PerturbationPlan, delete_words, perturb_corpus
from lexsyn.pipeline import FEATURE_GROUPS, load_config, run_pipeline
from lexsyn.stats import (
    FeatureTable,
    GroupZ,
    feature_zscores,
    fit_importance,
    group_zscore,
    kruskal_wallis,
)
from lexsyn.synfeat import (
    SYNTACTIC_FEATURES,
    count_production_units,
    extract_syntactic,
    syntactic_ratios,
    tree_word_count,
)
from lexsyn.synth import COMPLEXITY_PROFILES, SynthSpec, make_corpus
from lexsyn.treepat import parse_ptb

from oracles import (
    oracle_conditional_entropy,
    oracle_deletion_count,
    oracle_shannon_entropy,
    random_token_sequence,
)

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


def _report(name: str, started: float, budget: float) -> None:
    elapsed = time.perf_counter() - started
    print(f"\nACCEPTANCE {name}: PASS ({elapsed:.1f}s, budget {budget:.0f}s)")
    assert elapsed < budget, f"{name} exceeded its runtime budget"


def test_c1_entropy_oracle():
    started = time.perf_counter()
    rng = random.Random(20240817)
    for _ in range(100):
        tokens = random_token_sequence(rng, rng.randint(5, 500), rng.randint(2, 50))
        for n in (1, 2, 3):
            expected = oracle_shannon_entropy(tokens, n)
            actual = shannon_entropy(tokens, n)
            assert abs(actual - expected) < 1e-9
        for n in (2, 3):
            expected = oracle_conditional_entropy(tokens, n)
            actual = conditional_entropy(tokens, n)
            assert abs(actual - expected) < 1e-9
    _report("c1 entropy-oracle", started, 5.0)


def test_c2_deletion_exactness():
    started = time.perf_counter()
    for n in range(1, 201):
        doc = Document(
            id=f"n{n}", subject_id="s", label="x",
            tokens=tuple(Token(form=f"w{i}") for i in range(n)),
        )
        for p in (20, 40, 60, 80):
            out = delete_words(doc, p, seed=7)
            deleted = n - len(out.tokens)
            assert deleted == oracle_deletion_count(n, p), (n, p)
            survivors = iter(doc.forms)
            assert all(form in survivors for form in out.forms), (n, p)
    _report("c2 deletion-exactness", started, 5.0)


def test_c3_syntactic_golden_counts():
    started = time.perf_counter()
    trees = load_golden_trees()
    counts = count_production_units(trees)
    assert counts.as_dict() == {
        "S": 25, "VP": 42, "C": 35, "T": 27, "DC": 8, "CT": 7, "CP": 2, "CN": 9,
    }
    words = tree_word_count(trees)
    assert words == 119
    ratios = syntactic_ratios(counts, words)
    hand = {
        "MLS": 119 / 25, "MLT": 119 / 27, "MLC": 119 / 35,
        "C/S": 35 / 25, "VP/T": 42 / 27, "C/T": 35 / 27, "DC/C": 8 / 35,
        "DC/T": 8 / 27, "T/S": 27 / 25, "CT/T": 7 / 27, "CP/T": 2 / 27,
        "CP/C": 2 / 35, "CN/T": 9 / 27, "CN/C": 9 / 35,
    }
    for name, expected in hand.items():
        assert abs(ratios[name] - expected) < 1e-12, name
    _report("c3 syntactic-golden-counts", started, 5.0)


def test_c4_statistical_kernels():
    started = time.perf_counter()
    h, p = kruskal_wallis([1, 2, 3], [4, 5, 6])
    assert abs(h - 3.857) <= 0.001
    assert abs(p - 0.0495) <= 0.001

    assert abs(macro_f1(list("AABB"), list("ABAB")) - 0.5) < 1e-12
    assert abs(macro_f1(list("AAAB"), list("AAAA")) - 3 / 7) < 1e-12

    z = {
        lv: GroupZ(level=lv, z_lexical=0.02 * lv + 1e-4 * lv * lv, z_syntactic=0.01 * lv,
                   n_lexical=37, n_syntactic=25, mode="absolute")
        for lv in (20, 40, 60, 80)
    }
    deltas = {lv: 2.0 * z[lv].z_syntactic + 1.0 * z[lv].z_lexical for lv in z}
    fit = fit_importance(deltas, z)
    assert abs(fit.alpha - 2.0) < 1e-9
    assert abs(fit.beta - 1.0) < 1e-9
    _report("c4 statistical-kernels", started, 5.0)


def _blob_corpus(rng, n_subjects=40, docs_per_subject=10, dims=5, sep=4.0):
    docs, rows = [], []
    for s in range(n_subjects):
        label = "pos" if s % 2 else "neg"
        center = sep if label == "pos" else 0.0
        for d in range(docs_per_subject):
            docs.append(Document(id=f"doc_{s}_{d}", subject_id=f"subj_{s}", label=label,
                                 tokens=(Token(form="x"),)))
            rows.append(rng.normal(center, 1.0, dims))
    return Corpus(name="blobs", documents=tuple(docs)), np.asarray(rows)


def test_c5_leakage_and_determinism(tmp_path):
    started = time.perf_counter()
    rng = np.random.default_rng(515)
    corpus, X = _blob_corpus(rng)
    ids = [d.id for d in corpus.documents]
    labels = [d.label for d in corpus.documents]
    folds = group_folds(corpus, 10, seed=3)
    for kind in ("gnb", "rf", "svm", "mlp"):
        result = cross_validate(X, labels, ids, folds, ModelSpec(kind, seed=1))
        assert result.mean_f1 >= 0.9, (kind, result.mean_f1)

    # chance level under label shuffling, subject-consistent
    subjects = sorted({d.subject_id for d in corpus.documents})
    for kind in ("gnb", "rf", "svm", "mlp"):
        seed_means = []
        for seed in range(10):
            shuffle_rng = np.random.default_rng(1000 + seed)
            shuffled = dict(zip(subjects, shuffle_rng.permutation(
                ["pos"] * 20 + ["neg"] * 20)))
            docs = tuple(
                Document(id=d.id, subject_id=d.subject_id,
                         label=shuffled[d.subject_id], tokens=d.tokens)
                for d in corpus.documents
            )
            shuffled_corpus = Corpus(name="shuffled", documents=docs)
            y = [d.label for d in docs]
            shuffled_folds = group_folds(shuffled_corpus, 10, seed=3)
            result = cross_validate(X, y, ids, shuffled_folds, ModelSpec(kind, seed=seed))
            seed_means.append(result.mean_f1)
        mean_over_seeds = sum(seed_means) / len(seed_means)
        assert 0.35 <= mean_over_seeds <= 0.65, (kind, mean_over_seeds, seed_means)

    # identical seeds give byte-identical bundles
    from lexsyn.corpus import save_corpus

    corpus_path = tmp_path / "mini.jsonl"
    save_corpus(make_corpus(SynthSpec(n_docs=16, docs_per_subject=2, seed=77)), corpus_path)
    config_path = tmp_path / "config.yaml"
    out_dir = tmp_path / "out"
    config_path.write_text(yaml.safe_dump({
        "corpus": {"path": str(corpus_path), "format": "jsonl"},
        "levels": [20, 40], "seed": 5, "folds": 4, "models": ["gnb"],
        "output_dir": str(out_dir),
    }))
    cfg = load_config(config_path)
    first_hash = run_pipeline(cfg).bundle_hash()
    first_bytes = {
        p.relative_to(out_dir): p.read_bytes() for p in out_dir.rglob("*") if p.is_file()
    }
    shutil.rmtree(out_dir)
    second_hash = run_pipeline(cfg).bundle_hash()
    second_bytes = {
        p.relative_to(out_dir): p.read_bytes() for p in out_dir.rglob("*") if p.is_file()
    }
    assert first_hash == second_hash
    assert first_bytes == second_bytes
    _report("c5 leakage-and-determinism", started, 180.0)


def _feature_tables(corpus, config):
    vectors = {}
    for doc in corpus.documents:
        vector = extract_lexical(doc, config, require_pos=False)
        if doc.trees:
            vector = vector.merged_with(extract_syntactic(doc))
        vectors[doc.id] = vector
    names = list(LEXICAL_FEATURES) + list(SYNTACTIC_FEATURES)
    return FeatureTable.from_vectors(vectors, names)


def test_c6_qualitative_trend():
    started = time.perf_counter()
    levels = (20, 40, 60, 80)
    successes = 0
    for seed in range(20):
        spec = SynthSpec(n_docs=40, docs_per_subject=2, seed=seed,
                         profiles=COMPLEXITY_PROFILES, token_budget_range=(55, 70))
        corpus = make_corpus(spec)
        config = LexicalConfig(seed=seed)
        baseline = _feature_tables(corpus, config)
        altered = perturb_corpus(corpus, PerturbationPlan(levels=levels, seed=seed))
        z_lex, z_syn = {0: 0.0}, {0: 0.0}
        for level in levels:
            table = _feature_tables(altered[level], config)
            summary = group_zscore(
                feature_zscores(baseline, table), FEATURE_GROUPS, level
            )
            z_lex[level], z_syn[level] = summary.z_lexical, summary.z_syntactic
        lex_dominates = all(z_lex[lv] > z_syn[lv] for lv in (40, 60, 80))
        lex_curve = [z_lex[lv] for lv in (0, *levels)]
        syn_curve = [z_syn[lv] for lv in (0, *levels)]
        nondecreasing = all(b >= a for a, b in zip(lex_curve, lex_curve[1:])) and all(
            b >= a for a, b in zip(syn_curve, syn_curve[1:])
        )
        successes += lex_dominates and nondecreasing
    assert successes >= 18, f"only {successes}/20 seeds reproduce the trend"
    _report("c6 qualitative-trend", started, 300.0)


def test_c7_reference_tolerances(tmp_path):
    started = time.perf_counter()
    transcripts = load_transcripts()

    # lexical tolerance: conditional trigram entropy on the reference
    # transcript, decreasing across its published altered rows
    values = []
    for key in ("original", "level20", "level40", "level60"):
        tokens = tokenize_text(transcripts["lexical"][key])
        values.append(conditional_entropy(tokens, 3))
    assert 0.15 <= values[0] <= 0.35, values[0]
    assert all(a > b for a, b in zip(values, values[1:])), values

    # syntactic tolerance: clauses per sentence on the annotated transcript
    trees = [
        parse_ptb(line.strip())
        for line in (FIXTURES / "cookie_theft_trees.txt").read_text().splitlines()
        if line.strip() and not line.startswith("#")
    ]
    leaf_forms = [form for tree in trees for form in tree.leaf_forms()]
    assert leaf_forms == tokenize_text(transcripts["syntactic"]["original"])
    counts = count_production_units(trees)
    ratios = syntactic_ratios(counts, tree_word_count(trees))
    assert abs(ratios["C/S"] - 1.1) <= 0.15, ratios["C/S"]

    # published reference values ship with every report bundle
    from lexsyn.corpus import save_corpus

    corpus_path = tmp_path / "mini.jsonl"
    save_corpus(make_corpus(SynthSpec(n_docs=12, docs_per_subject=2, seed=3)), corpus_path)
    config_path = tmp_path / "config.yaml"
    config_path.write_text(yaml.safe_dump({
        "corpus": {"path": str(corpus_path), "format": "jsonl"},
        "levels": [20, 40], "seed": 1, "folds": 3, "models": ["gnb"],
        "output_dir": str(tmp_path / "out"),
    }))
    run_pipeline(load_config(config_path))
    reference = (tmp_path / "out/report/reference_values.csv").read_text()
    assert "importance_ratio,DemB,rf,1.98" in reference
    assert "zscore,DemB,level80/lexical,1.85" in reference
    assert "profile,AphB,dlevel_0,0.74" in reference
    _report("c7 reference-tolerances", started, 60.0)
