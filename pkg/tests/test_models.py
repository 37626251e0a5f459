import numpy as np
import pytest

from lexsyn.corpus import Corpus, Document, FoldAssignment, Token, group_folds
from lexsyn.errors import ValidationError
from lexsyn.models import (
    DEFAULT_HYPERPARAMETERS,
    ModelSpec,
    cross_validate,
    macro_f1,
    predict,
    smote_oversample,
    train,
)

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


def _blobs(rng, n_per_class=50, dims=2, sep=4.0):
    a = rng.normal(0.0, 1.0, (n_per_class, dims))
    b = rng.normal(sep, 1.0, (n_per_class, dims))
    X = np.vstack([a, b])
    y = ["neg"] * n_per_class + ["pos"] * n_per_class
    return X, y


class TestMacroF1:
    def test_perfect(self):
        assert macro_f1(list("AABB"), list("AABB")) == 1.0

    def test_half_case(self):
        assert macro_f1(list("AABB"), list("ABAB")) == pytest.approx(0.5, abs=1e-12)

    def test_majority_case(self):
        assert macro_f1(list("AAAB"), list("AAAA")) == pytest.approx(3 / 7, abs=1e-12)

    def test_configured_label_set(self):
        # class B never appears but is configured, so it contributes zero
        assert macro_f1(["A", "A"], ["A", "A"], labels=["A", "B"]) == 0.5

    def test_symmetric_under_relabeling(self):
        y_true, y_pred = list("AABBB"), list("ABABB")
        swap = {"A": "B", "B": "A"}
        swapped = macro_f1([swap[v] for v in y_true], [swap[v] for v in y_pred])
        assert macro_f1(y_true, y_pred) == pytest.approx(swapped, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            macro_f1(["A"], ["A", "B"])

    def test_empty(self):
        with pytest.raises(ValidationError):
            macro_f1([], [])


class TestSmote:
    def test_balanced_input_unchanged(self):
        X = np.arange(12.0).reshape(6, 2)
        y = ["a", "a", "a", "b", "b", "b"]
        Xo, yo = smote_oversample(X, y, seed=0)
        assert np.array_equal(Xo, X)
        assert list(yo) == y

    def test_segment_property_two_points(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 6.0], [7.0, 7.0]])
        y = ["min", "min", "maj", "maj", "maj"]
        Xo, yo = smote_oversample(X, y, seed=1)
        synth = Xo[5:]
        assert len(synth) == 1
        (x1, x2), = synth
        assert x1 == pytest.approx(x2)  # on the segment between (0,0) and (1,1)
        assert 0.0 <= x1 < 1.0

    def test_exact_balance_and_convexity(self):
        rng = np.random.default_rng(7)
        minority = rng.normal(0, 1, (10, 3))
        majority = rng.normal(8, 1, (30, 3))
        X = np.vstack([majority, minority])
        y = ["maj"] * 30 + ["min"] * 10
        Xo, yo = smote_oversample(X, y, k=5, seed=3)
        values, counts = np.unique(yo, return_counts=True)
        assert dict(zip(values, counts)) == {"maj": 30, "min": 30}
        synth = Xo[40:]
        assert len(synth) == 20
        # every synthetic point is a convex combination of two real minority rows
        for s in synth:
            ok = False
            for i in range(len(minority)):
                for j in range(len(minority)):
                    if i == j:
                        continue
                    d = minority[j] - minority[i]
                    denom = (d * d).sum()
                    if denom == 0:
                        continue
                    t = ((s - minority[i]) @ d) / denom
                    if -1e-9 <= t <= 1 + 1e-9 and np.allclose(minority[i] + t * d, s, atol=1e-9):
                        ok = True
                        break
                if ok:
                    break
            assert ok, f"synthetic point {s} is off every minority segment"

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(0, 1, (5, 2)), rng.normal(4, 1, (11, 2))])
        y = ["a"] * 5 + ["b"] * 11
        first = smote_oversample(X, y, seed=9)
        second = smote_oversample(X, y, seed=9)
        assert np.array_equal(first[0], second[0])

    def test_single_class_error(self):
        with pytest.raises(ValidationError):
            smote_oversample(np.zeros((3, 2)), ["a", "a", "a"], seed=0)

    def test_minority_of_one_duplicates(self):
        X = np.array([[0.0, 0.0], [5.0, 5.0], [6.0, 6.0], [7.0, 7.0]])
        y = ["min", "maj", "maj", "maj"]
        with pytest.warns(UserWarning, match="single sample"):
            Xo, yo = smote_oversample(X, y, seed=0)
        assert sum(1 for v in yo if v == "min") == 3
        assert np.array_equal(Xo[4], X[0]) and np.array_equal(Xo[5], X[0])


class TestTrainPredict:
    @pytest.mark.parametrize("kind", ["gnb", "rf", "svm", "mlp"])
    def test_separable_blobs_high_f1(self, kind):
        X, y = _blobs(np.random.default_rng(3))
        model = train(ModelSpec(kind, seed=0), X, y)
        assert macro_f1(y, predict(model, X)) >= 0.95

    @pytest.mark.parametrize("kind", ["gnb", "rf", "svm", "mlp"])
    def test_holdout_accuracy(self, kind):
        rng = np.random.default_rng(5)
        X, y = _blobs(rng)
        X_test, y_test = _blobs(np.random.default_rng(99))
        model = train(ModelSpec(kind, seed=1), X, y)
        pred = predict(model, X_test)
        accuracy = np.mean(pred == np.asarray(y_test))
        assert accuracy >= 0.9

    def test_gnb_equal_priors_ignore_imbalance(self):
        # symmetric likelihoods, 90/10 imbalance: equal priors keep the
        # boundary at the midpoint, so the minority test point is recovered
        rng = np.random.default_rng(11)
        X = np.vstack([rng.normal(0, 1, (90, 1)), rng.normal(4, 1, (10, 1))])
        y = ["a"] * 90 + ["b"] * 10
        model = train(ModelSpec("gnb", seed=0), X, y)
        boundary_pred = predict(model, np.array([[2.8]]))
        assert boundary_pred[0] == "b"

    @pytest.mark.parametrize("kind", ["gnb", "rf", "svm", "mlp"])
    def test_deterministic(self, kind):
        X, y = _blobs(np.random.default_rng(8), n_per_class=30)
        p1 = predict(train(ModelSpec(kind, seed=5), X, y), X)
        p2 = predict(train(ModelSpec(kind, seed=5), X, y), X)
        assert np.array_equal(p1, p2)

    def test_rf_depth_inspectable(self):
        X, y = _blobs(np.random.default_rng(2), n_per_class=40)
        model = train(ModelSpec("rf", seed=0), X, y)
        estimators = model.estimator.estimators_
        assert len(estimators) == DEFAULT_HYPERPARAMETERS["rf"]["trees"]
        assert all(t.get_depth() <= 5 for t in estimators)

    def test_rf_prediction_is_tree_majority(self):
        from collections import Counter

        # overlapping blobs so individual trees disagree
        X, y = _blobs(np.random.default_rng(9), n_per_class=40, sep=1.5)
        model = train(ModelSpec("rf", seed=0), X, y)
        transformed = model.preprocessor.transform(X)
        votes = np.stack(
            [t.predict(transformed).astype(int) for t in model.estimator.estimators_]
        )
        expected = []
        for column in votes.T:
            counts = Counter(column)
            winner = min(counts, key=lambda c: (-counts[c], c))  # tie: lowest index
            expected.append(model.estimator.classes_[winner])
        assert list(predict(model, X)) == expected

    def test_degenerate_column_dropped_and_recorded(self):
        X, y = _blobs(np.random.default_rng(4), n_per_class=20)
        X = np.hstack([X, np.full((len(X), 1), 3.14)])  # constant column
        with pytest.warns(UserWarning, match="degenerate"):
            model = train(ModelSpec("gnb", seed=0), X, y)
        assert model.metadata["dropped_columns"] == [2]
        assert macro_f1(y, predict(model, X)) >= 0.95

    def test_nan_values_imputed_with_train_means(self):
        X, y = _blobs(np.random.default_rng(6), n_per_class=20)
        X[0, 0] = np.nan
        model = train(ModelSpec("gnb", seed=0), X, y)
        assert len(predict(model, X)) == len(y)

    def test_dimension_mismatch(self):
        X, y = _blobs(np.random.default_rng(1), n_per_class=10)
        model = train(ModelSpec("gnb", seed=0), X, y)
        with pytest.raises(ValidationError):
            predict(model, np.zeros((2, 7)))

    def test_empty_matrix_predicts_empty(self):
        X, y = _blobs(np.random.default_rng(1), n_per_class=10)
        model = train(ModelSpec("svm", seed=0), X, y)
        assert len(predict(model, np.zeros((0, 2)))) == 0

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            ModelSpec("boost", seed=0)

    def test_too_few_per_class(self):
        with pytest.raises(ValidationError):
            train(ModelSpec("gnb", seed=0), np.zeros((3, 2)), ["a", "a", "b"])


def _blob_corpus_and_folds(rng, n_subjects=20, docs_per_subject=5, dims=3, sep=4.0, k=5):
    """Blob features aligned with a dummy corpus so folds group by subject."""
    docs, rows, labels = [], [], []
    for s in range(n_subjects):
        label = "pos" if s % 2 else "neg"
        center = sep if label == "pos" else 0.0
        for d in range(docs_per_subject):
            doc_id = f"doc_{s}_{d}"
            docs.append(Document(id=doc_id, subject_id=f"subj_{s}", label=label,
                                 tokens=(Token(form="x"),)))
            rows.append(rng.normal(center, 1.0, dims))
            labels.append(label)
    corpus = Corpus(name="blobs", documents=tuple(docs))
    folds = group_folds(corpus, k, seed=17)
    return corpus, np.asarray(rows), labels, folds


class TestCrossValidate:
    def test_separable_high_f1(self):
        corpus, X, y, folds = _blob_corpus_and_folds(np.random.default_rng(0))
        ids = [d.id for d in corpus.documents]
        result = cross_validate(X, y, ids, folds, ModelSpec("gnb", seed=0))
        assert result.mean_f1 >= 0.9
        assert len(result.fold_f1) == 5

    def test_deterministic(self):
        corpus, X, y, folds = _blob_corpus_and_folds(np.random.default_rng(0))
        ids = [d.id for d in corpus.documents]
        a = cross_validate(X, y, ids, folds, ModelSpec("rf", seed=3))
        b = cross_validate(X, y, ids, folds, ModelSpec("rf", seed=3))
        assert a.fold_f1 == b.fold_f1 and a.mean_f1 == b.mean_f1

    def test_no_leakage_scaler_stats_from_train_only(self):
        corpus, X, y, folds = _blob_corpus_and_folds(np.random.default_rng(1))
        ids = [d.id for d in corpus.documents]
        result = cross_validate(X, y, ids, folds, ModelSpec("svm", seed=0))
        for meta in result.fold_meta:
            fold = meta["fold"]
            train_rows = [i for i, doc_id in enumerate(ids) if folds.fold_of[doc_id] != fold]
            expected_mean = X[train_rows].mean(axis=0)
            assert meta["scale_mean"] == pytest.approx(list(expected_mean), abs=1e-12)

    def test_imbalanced_uses_smote_on_train_only(self):
        rng = np.random.default_rng(2)
        corpus, X, y, folds = _blob_corpus_and_folds(rng, n_subjects=20, docs_per_subject=3)
        # unbalance by dropping some positive docs
        keep = [i for i, lb in enumerate(y) if lb == "neg" or i % 3 == 0]
        ids = [corpus.documents[i].id for i in keep]
        result = cross_validate(X[keep], [y[i] for i in keep], ids, folds,
                                ModelSpec("gnb", seed=0))
        assert any(meta["smote_added"] > 0 for meta in result.fold_meta)
        for meta in result.fold_meta:
            assert meta["smote_added"] < meta["train_rows"]

    def test_skipped_single_class_fold_recorded(self):
        # training split for fold 2 sees only "neg" documents, so fold 2 is
        # skipped with a warning while folds 0 and 1 still evaluate
        rng = np.random.default_rng(3)
        labels = ["neg", "neg", "neg", "neg", "pos", "pos", "pos", "pos"]
        docs = [Document(id=f"d{i}", subject_id=f"s{i}", label=lb,
                         tokens=(Token(form="x"),)) for i, lb in enumerate(labels)]
        rows = [rng.normal(0 if lb == "neg" else 4, 1, 2) for lb in labels]
        fold_of = {"d0": 0, "d1": 0, "d2": 1, "d3": 1,
                   "d4": 2, "d5": 2, "d6": 2, "d7": 2}
        folds = FoldAssignment(fold_of=fold_of, k=3)
        with pytest.warns(UserWarning, match="single-class"):
            result = cross_validate(np.asarray(rows), labels, [d.id for d in docs],
                                    folds, ModelSpec("gnb", seed=0))
        assert result.skipped_folds == (2,)
        assert len(result.fold_f1) == 2

    def test_all_folds_skipped_raises(self):
        docs = [Document(id=f"d{s}", subject_id=f"s{s}", label="neg" if s < 3 else "pos",
                         tokens=(Token(form="x"),)) for s in range(6)]
        X = np.random.default_rng(0).normal(0, 1, (6, 2))
        labels = [d.label for d in docs]
        folds = FoldAssignment(fold_of={"d0": 0, "d1": 0, "d2": 0,
                                        "d3": 1, "d4": 1, "d5": 1}, k=2)
        with pytest.raises(ValidationError):
            cross_validate(X, labels, [d.id for d in docs], folds, ModelSpec("gnb", seed=0))

    def test_misaligned_inputs(self):
        corpus, X, y, folds = _blob_corpus_and_folds(np.random.default_rng(0))
        ids = [d.id for d in corpus.documents]
        with pytest.raises(ValidationError):
            cross_validate(X[:-1], y, ids, folds, ModelSpec("gnb", seed=0))

    def test_result_serializable(self):
        import json

        corpus, X, y, folds = _blob_corpus_and_folds(np.random.default_rng(0))
        ids = [d.id for d in corpus.documents]
        result = cross_validate(X, y, ids, folds, ModelSpec("mlp", seed=0),
                                alteration_level=20)
        payload = json.dumps(result.as_dict())
        assert "mlp" in payload and "20" in payload
