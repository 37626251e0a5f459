"""Binary classifiers, minority oversampling, grouped cross-validation, macro F1.

The four model kinds ship with fixed default hyperparameters; estimators come
from scikit-learn, while oversampling, scoring, and the fold protocol are
implemented here so their exact semantics are pinned by tests.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import FoldAssignment
from .errors import ValidationError
from .util import derive_seed

MODEL_KINDS = ("gnb", "rf", "svm", "mlp")

DEFAULT_HYPERPARAMETERS: dict[str, dict] = {
    "gnb": {"equal_priors": True},
    "rf": {"trees": 100, "max_depth": 5},
    "svm": {"kernel": "rbf", "C": 1.0, "kkt_tol": 1e-3},
    "mlp": {
        "layers": (10, 10),
        "activation": "relu",
        "epochs": 200,
        "optimizer": "adam",
        "learning_rate": 0.001,
        "beta_1": 0.9,
        "beta_2": 0.999,
        "epsilon": 1e-8,
    },
}

#: Kinds whose estimator is scale sensitive and receives standardized columns.
_SCALED_KINDS = frozenset({"svm", "mlp"})


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValidationError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")

    @property
    def hyperparameters(self) -> dict:
        return dict(DEFAULT_HYPERPARAMETERS[self.kind])


@dataclass
class Preprocessor:
    """Train-fold column statistics: imputation means, degenerate-column drop,
    and (for scale-sensitive models) standardization."""

    impute_means: np.ndarray
    kept_columns: np.ndarray
    dropped_columns: tuple[int, ...]
    scale_mean: np.ndarray | None
    scale_std: np.ndarray | None

    @classmethod
    def fit(cls, X: np.ndarray, kind: str) -> "Preprocessor":
        X = np.asarray(X, dtype=float)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN columns
            impute_means = np.nanmean(X, axis=0)
        all_nan = np.isnan(impute_means)
        impute_means = np.where(all_nan, 0.0, impute_means)
        filled = np.where(np.isnan(X), impute_means, X)
        variances = filled.var(axis=0)
        degenerate = all_nan | (variances == 0.0)
        kept = np.flatnonzero(~degenerate)
        if kept.size == 0:
            raise ValidationError("every feature column is degenerate in this training split")
        dropped = tuple(int(i) for i in np.flatnonzero(degenerate))
        if dropped:
            warnings.warn(f"dropping degenerate feature columns {dropped}", stacklevel=2)
        scale_mean = scale_std = None
        if kind in _SCALED_KINDS:
            scale_mean = filled[:, kept].mean(axis=0)
            scale_std = filled[:, kept].std(axis=0)
        return cls(
            impute_means=impute_means,
            kept_columns=kept,
            dropped_columns=dropped,
            scale_mean=scale_mean,
            scale_std=scale_std,
        )

    @property
    def n_features_in(self) -> int:
        return len(self.impute_means)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features_in:
            raise ValidationError(
                f"expected {self.n_features_in} feature columns, got {X.shape[1] if X.ndim == 2 else X.shape}"
            )
        filled = np.where(np.isnan(X), self.impute_means, X)
        out = filled[:, self.kept_columns]
        if self.scale_mean is not None:
            out = (out - self.scale_mean) / self.scale_std
        return out


@dataclass
class Model:
    spec: ModelSpec
    preprocessor: Preprocessor
    estimator: object
    classes: tuple[str, ...]

    @property
    def metadata(self) -> dict:
        return {
            "kind": self.spec.kind,
            "seed": self.spec.seed,
            "hyperparameters": _jsonable(self.spec.hyperparameters),
            "dropped_columns": list(self.preprocessor.dropped_columns),
            "classes": list(self.classes),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, tuple):
        return list(obj)
    return obj


def _build_estimator(spec: ModelSpec, X: np.ndarray):
    hp = spec.hyperparameters
    if spec.kind == "gnb":
        from sklearn.naive_bayes import GaussianNB

        return GaussianNB(priors=[0.5, 0.5])
    if spec.kind == "rf":
        from sklearn.ensemble import RandomForestClassifier

        return RandomForestClassifier(
            n_estimators=hp["trees"], max_depth=hp["max_depth"], random_state=spec.seed
        )
    if spec.kind == "svm":
        from sklearn.svm import SVC

        mean_var = float(X.var(axis=0).mean())
        gamma = 1.0 / (X.shape[1] * mean_var) if mean_var > 0 else 1.0 / X.shape[1]
        return SVC(
            kernel=hp["kernel"], C=hp["C"], gamma=gamma, tol=hp["kkt_tol"], random_state=spec.seed
        )
    from sklearn.neural_network import MLPClassifier

    return MLPClassifier(
        hidden_layer_sizes=hp["layers"],
        activation=hp["activation"],
        solver=hp["optimizer"],
        max_iter=hp["epochs"],
        batch_size=max(1, X.shape[0]),  # full batch
        learning_rate_init=hp["learning_rate"],
        beta_1=hp["beta_1"],
        beta_2=hp["beta_2"],
        epsilon=hp["epsilon"],
        early_stopping=False,
        n_iter_no_change=hp["epochs"],  # fixed epoch budget, no plateau stop
        random_state=spec.seed,
    )


def _check_two_class(y: np.ndarray) -> tuple[str, ...]:
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) != 2:
        raise ValidationError(f"expected 2 classes, got {len(classes)}: {list(classes)}")
    if counts.min() < 2:
        raise ValidationError("need at least 2 samples per class to train")
    return tuple(str(c) for c in classes)


def _fit_estimator(spec: ModelSpec, X: np.ndarray, y: np.ndarray):
    estimator = _build_estimator(spec, X)
    with warnings.catch_warnings():
        from sklearn.exceptions import ConvergenceWarning

        warnings.simplefilter("ignore", ConvergenceWarning)
        estimator.fit(X, y)
    return estimator


def train(spec: ModelSpec, features: np.ndarray, labels: Sequence[str]) -> Model:
    """Fit one model on a training matrix; preprocessing statistics come from
    this matrix alone and travel with the model."""
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ValidationError(f"feature matrix {X.shape} does not match {len(y)} labels")
    classes = _check_two_class(y)
    pre = Preprocessor.fit(X, spec.kind)
    estimator = _fit_estimator(spec, pre.transform(X), y)
    return Model(spec=spec, preprocessor=pre, estimator=estimator, classes=classes)


def _rf_majority_vote(estimator, X: np.ndarray) -> np.ndarray:
    # hard majority over the individual trees; ties break by class order
    votes = np.stack([tree.predict(X).astype(int) for tree in estimator.estimators_])
    n_classes = len(estimator.classes_)
    counts = np.stack([(votes == c).sum(axis=0) for c in range(n_classes)])
    return estimator.classes_[counts.argmax(axis=0)]


def predict(model: Model, features: np.ndarray) -> np.ndarray:
    """One label per row; the model's stored preprocessing is applied first.

    Random-forest predictions are the hard majority vote of the trees."""
    X = np.asarray(features, dtype=float)
    if X.size == 0:
        return np.asarray([], dtype=object)
    transformed = model.preprocessor.transform(X)
    if model.spec.kind == "rf":
        return _rf_majority_vote(model.estimator, transformed)
    return model.estimator.predict(transformed)


def macro_f1(
    y_true: Sequence, y_pred: Sequence, labels: Sequence[str] | None = None
) -> float:
    """Unweighted mean of per-class F1 over the configured label set."""
    y_true = [str(v) for v in y_true]
    y_pred = [str(v) for v in y_pred]
    if len(y_true) != len(y_pred):
        raise ValidationError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    if not y_true:
        raise ValidationError("macro_f1 needs at least one element")
    label_set = [str(lb) for lb in labels] if labels is not None else sorted(set(y_true) | set(y_pred))
    scores = []
    for label in label_set:
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == label and p == label)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != label and p == label)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == label and p != label)
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return sum(scores) / len(scores)


def smote_oversample(
    features: np.ndarray, labels: Sequence[str], k: int = 5, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Balance classes by interpolating minority samples toward their nearest
    minority neighbors; each synthetic row lies on a segment between two real
    minority rows. Deterministic under seed."""
    X = np.asarray(features, dtype=float)
    y = np.asarray([str(v) for v in labels])
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise ValidationError("oversampling needs both classes present")
    if counts[0] == counts[1]:
        return X, y
    minority = classes[np.argmin(counts)]
    minority_rows = X[y == minority]
    n_minority = len(minority_rows)
    n_needed = int(counts.max() - counts.min())
    rng = np.random.Generator(np.random.PCG64(seed))
    if n_minority == 1:
        warnings.warn("minority class has a single sample; duplicating it instead of SMOTE")
        synth = np.repeat(minority_rows, n_needed, axis=0)
    else:
        k_eff = min(k, n_minority - 1)
        diffs = minority_rows[:, None, :] - minority_rows[None, :, :]
        dists = np.sqrt((diffs**2).sum(axis=2))
        np.fill_diagonal(dists, np.inf)
        neighbor_idx = np.argsort(dists, axis=1, kind="stable")[:, :k_eff]
        rows = []
        for i in range(n_needed):
            base = i % n_minority
            nn = neighbor_idx[base, rng.integers(k_eff)]
            t = rng.random()
            rows.append(minority_rows[base] + t * (minority_rows[nn] - minority_rows[base]))
        synth = np.asarray(rows)
    X_out = np.vstack([X, synth])
    y_out = np.concatenate([y, np.full(n_needed, minority, dtype=y.dtype)])
    return X_out, y_out


@dataclass(frozen=True)
class CVResult:
    spec: ModelSpec
    fold_f1: tuple[float, ...]
    mean_f1: float
    skipped_folds: tuple[int, ...] = ()
    alteration_level: int | None = None
    fold_meta: tuple[dict, ...] = ()

    def as_dict(self) -> dict:
        return {
            "model": self.spec.kind,
            "seed": self.spec.seed,
            "hyperparameters": _jsonable(self.spec.hyperparameters),
            "alteration_level": self.alteration_level,
            "fold_f1": list(self.fold_f1),
            "mean_f1": self.mean_f1,
            "skipped_folds": list(self.skipped_folds),
        }


def cross_validate(
    features: np.ndarray,
    labels: Sequence[str],
    doc_ids: Sequence[str],
    folds: FoldAssignment,
    spec: ModelSpec,
    alteration_level: int | None = None,
    label_set: Sequence[str] | None = None,
) -> CVResult:
    """Grouped k-fold evaluation: per fold, preprocessing and oversampling are
    fitted on the training split only, then macro F1 is scored on the held-out
    fold. Folds whose training split collapses to one class are skipped and
    recorded."""
    X = np.asarray(features, dtype=float)
    y = np.asarray([str(v) for v in labels])
    ids = list(doc_ids)
    if not (len(ids) == len(y) == X.shape[0]):
        raise ValidationError("features, labels, and doc_ids must align")
    missing = [i for i in ids if i not in folds.fold_of]
    if missing:
        raise ValidationError(f"documents missing from fold assignment: {missing[:3]}...")
    fold_index = np.asarray([folds.fold_of[i] for i in ids])
    label_set = sorted(set(y)) if label_set is None else list(label_set)

    fold_scores: list[float] = []
    skipped: list[int] = []
    metas: list[dict] = []
    for fold in range(folds.k):
        test_mask = fold_index == fold
        train_mask = ~test_mask
        if not test_mask.any():
            continue
        if len(set(y[train_mask])) < 2:
            warnings.warn(f"fold {fold}: single-class training split, skipping")
            skipped.append(fold)
            continue
        pre = Preprocessor.fit(X[train_mask], spec.kind)
        X_train = pre.transform(X[train_mask])
        fold_seed = derive_seed(spec.seed, fold)
        X_bal, y_bal = smote_oversample(X_train, y[train_mask], seed=fold_seed)
        estimator = _fit_estimator(ModelSpec(spec.kind, fold_seed), X_bal, y_bal)
        X_test = pre.transform(X[test_mask])
        if spec.kind == "rf":
            y_hat = _rf_majority_vote(estimator, X_test)
        else:
            y_hat = estimator.predict(X_test)
        fold_scores.append(macro_f1(y[test_mask], y_hat, labels=label_set))
        metas.append(
            {
                "fold": fold,
                "train_rows": int(train_mask.sum()),
                "test_rows": int(test_mask.sum()),
                "smote_added": int(len(y_bal) - train_mask.sum()),
                "dropped_columns": list(pre.dropped_columns),
                "impute_means": None if pre.impute_means is None else pre.impute_means.tolist(),
                "scale_mean": None if pre.scale_mean is None else pre.scale_mean.tolist(),
                "scale_std": None if pre.scale_std is None else pre.scale_std.tolist(),
            }
        )
    if not fold_scores:
        raise ValidationError("every fold was skipped; cannot report a mean F1")
    return CVResult(
        spec=spec,
        fold_f1=tuple(fold_scores),
        mean_f1=sum(fold_scores) / len(fold_scores),
        skipped_folds=tuple(skipped),
        alteration_level=alteration_level,
        fold_meta=tuple(metas),
    )
