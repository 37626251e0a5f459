import pytest
from hypothesis import given, settings, strategies as st

from lexsyn.corpus import Document, Token
from lexsyn.errors import AlignmentError, ExternalToolError, ValidationError
from lexsyn.perturb import (
    PerturbationPlan,
    delete_words,
    deletion_count,
    perturb_corpus,
    project_tree_deletion,
    reparse_external,
)
from lexsyn.synth import SynthSpec, make_corpus
from lexsyn.treepat import parse_ptb, render

from oracles import oracle_deletion_count


def _doc(n_tokens: int, doc_id: str = "d1") -> Document:
    return Document(
        id=doc_id,
        subject_id=doc_id,
        label="pos",
        tokens=tuple(Token(form=f"w{i}") for i in range(n_tokens)),
    )


class TestDeleteWords:
    def test_twenty_percent_of_ten(self):
        out = delete_words(_doc(10), 20, seed=0)
        assert len(out.tokens) == 8
        assert out.alteration_level == 20

    def test_zero_level_identity(self):
        doc = _doc(7)
        assert delete_words(doc, 0, seed=0) == doc

    def test_eighty_percent_of_five(self):
        out = delete_words(_doc(5), 80, seed=0)
        assert len(out.tokens) == 1  # round(4.0) = 4 deleted, cap untouched

    def test_cap_leaves_one_token(self):
        out = delete_words(_doc(2), 100, seed=0)
        assert len(out.tokens) == 1

    def test_out_of_range_level(self):
        with pytest.raises(ValidationError):
            delete_words(_doc(5), 150, seed=0)

    def test_already_altered_rejected(self):
        altered = delete_words(_doc(10), 20, seed=0)
        with pytest.raises(ValidationError):
            delete_words(altered, 20, seed=0)

    def test_deterministic_per_doc_seed(self):
        a = delete_words(_doc(50), 40, seed=9)
        b = delete_words(_doc(50), 40, seed=9)
        assert a == b
        c = delete_words(_doc(50), 40, seed=10)
        assert a != c

    def test_subsequence_property(self):
        doc = _doc(30)
        out = delete_words(doc, 60, seed=2)
        it = iter(doc.forms)
        assert all(form in it for form in out.forms)  # order-preserving subsequence

    @given(n=st.integers(1, 120), p=st.sampled_from([20, 40, 60, 80]), seed=st.integers(0, 5))
    @settings(max_examples=60, deadline=None)
    def test_exact_count_matches_oracle(self, n, p, seed):
        out = delete_words(_doc(n), p, seed=seed)
        assert len(out.tokens) == n - oracle_deletion_count(n, p)

    def test_monotone_in_level(self):
        doc = _doc(41)
        sizes = [len(delete_words(doc, p, seed=3).tokens) for p in (20, 40, 60, 80)]
        assert sizes == sorted(sizes, reverse=True)


class TestDeletionCount:
    @pytest.mark.parametrize("n,p,expected", [
        (10, 20, 2), (5, 80, 4), (3, 50, 2), (1, 80, 0), (2, 100, 1), (7, 0, 0),
    ])
    def test_cases(self, n, p, expected):
        assert deletion_count(n, p) == expected


CANONICAL = "(S (NP (DT the) (NN boy)) (VP (VBZ runs)))"


class TestTreeProjection:
    def test_identity(self):
        tree = parse_ptb(CANONICAL)
        assert project_tree_deletion(tree, set()) == tree

    def test_single_leaf_prune(self):
        tree = parse_ptb(CANONICAL)
        out = project_tree_deletion(tree, {0})
        assert render(out) == "(S (NP (NN boy)) (VP (VBZ runs)))"

    def test_empty_np_pruned(self):
        tree = parse_ptb(CANONICAL)
        out = project_tree_deletion(tree, {0, 1})
        assert render(out) == "(S (VP (VBZ runs)))"

    def test_all_leaves_deleted(self):
        tree = parse_ptb(CANONICAL)
        assert project_tree_deletion(tree, {0, 1, 2}) is None

    def test_out_of_range_index(self):
        tree = parse_ptb(CANONICAL)
        with pytest.raises(ValidationError):
            project_tree_deletion(tree, {5})

    def test_labels_and_order_preserved(self):
        tree = parse_ptb("(S (NP (DT the) (JJ big) (NN dog)) (VP (VBZ runs) (ADVP (RB fast))))")
        out = project_tree_deletion(tree, {1, 3})
        assert out.leaf_forms() == ["the", "dog", "fast"]
        survivors = {n.label for n in out.preorder()}
        assert survivors <= {n.label for n in tree.preorder()}

    def test_document_trees_stay_aligned(self):
        corpus = make_corpus(SynthSpec(n_docs=6, seed=11))
        for doc in corpus.documents:
            out = delete_words(doc, 60, seed=4)
            leaf_forms = [f for t in out.trees for f in t.leaf_forms()]
            assert leaf_forms == [t.form for t in out.tokens]

    def test_misaligned_trees_rejected(self):
        from dataclasses import replace

        doc = make_corpus(SynthSpec(n_docs=4, seed=1)).documents[0]
        broken = replace(doc, tokens=doc.tokens[:-1])  # one token short
        with pytest.raises(AlignmentError):
            delete_words(broken, 40, seed=0)


class TestPerturbCorpus:
    def test_cardinality_and_metadata(self):
        corpus = make_corpus(SynthSpec(n_docs=10, seed=0))
        plan = PerturbationPlan(levels=(20, 40, 60, 80), seed=5)
        altered = perturb_corpus(corpus, plan)
        assert sorted(altered) == [20, 40, 60, 80]
        for level, level_corpus in altered.items():
            assert len(level_corpus) == 10
            for orig, new in zip(corpus.documents, level_corpus.documents):
                assert (new.id, new.subject_id, new.label) == (orig.id, orig.subject_id, orig.label)
                assert new.alteration_level == level

    def test_deterministic(self):
        corpus = make_corpus(SynthSpec(n_docs=8, seed=1))
        plan = PerturbationPlan(levels=(20, 60), seed=7)
        assert perturb_corpus(corpus, plan) == perturb_corpus(corpus, plan)

    def test_per_document_count_rule(self):
        corpus = make_corpus(SynthSpec(n_docs=12, seed=3))
        altered = perturb_corpus(corpus, PerturbationPlan(levels=(20,), seed=2))[20]
        for orig, new in zip(corpus.documents, altered.documents):
            expected = oracle_deletion_count(len(orig.tokens), 20)
            assert len(orig.tokens) - len(new.tokens) == expected

    def test_plan_validation(self):
        with pytest.raises(ValidationError):
            PerturbationPlan(levels=(40, 20))
        with pytest.raises(ValidationError):
            PerturbationPlan(levels=(20, 120))
        with pytest.raises(ValidationError):
            PerturbationPlan(tree_strategy="reparse")  # no command given


class TestReparseExternal:
    def test_stub_round_trip(self):
        tree = reparse_external("ignored", f"echo '{CANONICAL}'")
        assert [render(t) for t in tree] == [CANONICAL]

    def test_nonzero_exit(self):
        with pytest.raises(ExternalToolError):
            reparse_external("text", "exit 1")

    def test_leaf_mismatch(self):
        with pytest.raises(AlignmentError):
            reparse_external("x", f"echo '{CANONICAL}'", expected_tokens=["the", "boy", "walks"])

    def test_garbage_output(self):
        with pytest.raises(ExternalToolError):
            reparse_external("x", "echo '((('")

    def test_perturb_with_reparse_stub(self):
        corpus = make_corpus(SynthSpec(n_docs=2, docs_per_subject=1, seed=0))
        # stub parser: wrap every whitespace token as (NN tok) under (S ...)
        command = (
            "python3 -c \"import sys; toks=sys.stdin.read().split(); "
            "print('(S ' + ' '.join('(NN %s)' % t for t in toks) + ')')\""
        )
        plan = PerturbationPlan(levels=(40,), seed=1, tree_strategy="reparse",
                                parser_command=command)
        altered = perturb_corpus(corpus, plan)[40]
        for doc in altered.documents:
            assert [f for t in doc.trees for f in t.leaf_forms()] == [t.form for t in doc.tokens]
