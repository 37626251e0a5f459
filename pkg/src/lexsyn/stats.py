"""Vulnerability analytics: z-scored feature change, F1 deltas, importance
regression, and rank-based significance analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateFitError, ValidationError
from .lexfeat import FeatureVector


@dataclass(frozen=True)
class FeatureTable:
    """Documents-by-features matrix with NaN standing in for absent values."""

    doc_ids: tuple[str, ...]
    names: tuple[str, ...]
    matrix: np.ndarray

    @classmethod
    def from_vectors(
        cls, vectors: Mapping[str, FeatureVector], names: Sequence[str] | None = None
    ) -> "FeatureTable":
        doc_ids = tuple(vectors.keys())
        if names is None:
            names = tuple(next(iter(vectors.values())).values.keys())
        names = tuple(names)
        matrix = np.full((len(doc_ids), len(names)), np.nan)
        for i, doc_id in enumerate(doc_ids):
            values = vectors[doc_id].values
            for j, name in enumerate(names):
                value = values.get(name)
                if value is not None:
                    matrix[i, j] = value
        return cls(doc_ids=doc_ids, names=names, matrix=matrix)

    def column(self, name: str) -> np.ndarray:
        return self.matrix[:, self.names.index(name)]


@dataclass(frozen=True)
class ZScores:
    """Per-document, per-feature standardized change against the unaltered corpus."""

    doc_ids: tuple[str, ...]
    names: tuple[str, ...]
    matrix: np.ndarray  # NaN where the feature is absent for a document
    excluded: tuple[str, ...]  # zero-variance or never-defined baseline features


def feature_zscores(baseline: FeatureTable, altered: FeatureTable) -> ZScores:
    """z = (altered - baseline_mean) / baseline_std, population statistics over
    the entire unaltered corpus; zero-variance features are excluded and listed."""
    if baseline.doc_ids != altered.doc_ids:
        raise ValidationError("baseline and altered tables cover different documents")
    if baseline.names != altered.names:
        raise ValidationError("baseline and altered tables cover different features")
    mu = np.full(len(baseline.names), np.nan)
    sigma = np.full(len(baseline.names), np.nan)
    for j in range(len(baseline.names)):
        col = baseline.matrix[:, j]
        defined = col[~np.isnan(col)]
        if defined.size:
            mu[j] = defined.mean()
            sigma[j] = defined.std()  # population
    keep = ~np.isnan(sigma) & (sigma > 0)
    excluded = tuple(name for j, name in enumerate(baseline.names) if not keep[j])
    names = tuple(name for j, name in enumerate(baseline.names) if keep[j])
    z = (altered.matrix[:, keep] - mu[keep]) / sigma[keep]
    return ZScores(doc_ids=baseline.doc_ids, names=names, matrix=z, excluded=excluded)


@dataclass(frozen=True)
class GroupZ:
    """Group-averaged feature change for one alteration level."""

    level: int
    z_lexical: float | None
    z_syntactic: float | None
    n_lexical: int
    n_syntactic: int
    mode: str  # "absolute" or "signed"


def group_zscore(
    zscores: ZScores,
    groups: Mapping[str, str],
    level: int,
    mode: str = "absolute",
    require: tuple[str, ...] = ("lexical", "syntactic"),
) -> GroupZ:
    """Average z per feature group: mean over a document's group features,
    then mean over documents. Absolute mode (the default) averages |z| so the
    summary reads as a change magnitude; signed mode averages raw z.

    A group listed in require must have surviving features; others come back
    absent when empty (a corpus without trees has no syntactic columns).
    """
    if mode not in ("absolute", "signed"):
        raise ValidationError(f"unknown aggregation mode {mode!r}")
    group_cols: dict[str, list[int]] = {"lexical": [], "syntactic": []}
    for j, name in enumerate(zscores.names):
        group = groups.get(name)
        if group not in group_cols:
            raise ValidationError(f"feature {name!r} has no group assignment")
        group_cols[group].append(j)
    out: dict[str, float | None] = {}
    for group, cols in group_cols.items():
        if not cols:
            if group in require:
                raise ValidationError(f"feature group {group!r} is empty after exclusions")
            out[group] = None
            continue
        z = zscores.matrix[:, cols]
        if mode == "absolute":
            z = np.abs(z)
        with np.errstate(invalid="ignore"):
            per_doc = np.nanmean(z, axis=1)
        per_doc = per_doc[~np.isnan(per_doc)]
        if per_doc.size == 0:
            raise ValidationError(f"no document has defined {group} features")
        out[group] = float(per_doc.mean())
    return GroupZ(
        level=level,
        z_lexical=out["lexical"],
        z_syntactic=out["syntactic"],
        n_lexical=len(group_cols["lexical"]),
        n_syntactic=len(group_cols["syntactic"]),
        mode=mode,
    )


def f1_delta(f1_altered: float, f1_baseline: float) -> float:
    """Change in macro F1 against the unaltered baseline."""
    for value in (f1_altered, f1_baseline):
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"F1 must be in [0, 1], got {value}")
    return f1_altered - f1_baseline


@dataclass(frozen=True)
class ImportanceFit:
    """No-intercept least squares of F1 deltas on group z-scores."""

    alpha: float  # syntactic coefficient
    beta: float  # lexical coefficient
    ratio: float  # alpha / beta
    residuals: tuple[float, ...]
    levels: tuple[int, ...]
    sign_disagreement: bool


def fit_importance(
    deltas: Mapping[int, float], zsummary: Mapping[int, GroupZ]
) -> ImportanceFit:
    """Fit delta_F1 = alpha * Z_syntactic + beta * Z_lexical over the altered levels."""
    levels = sorted(level for level in deltas if level != 0)
    if len(levels) < 2:
        raise DegenerateFitError(f"need at least 2 altered levels, got {levels}")
    missing = [level for level in levels if level not in zsummary]
    if missing:
        raise ValidationError(f"no z summary for levels {missing}")
    for lv in levels:
        if zsummary[lv].z_syntactic is None or zsummary[lv].z_lexical is None:
            raise DegenerateFitError(
                f"level {lv} lacks a z-score for one feature group; cannot fit"
            )
    X = np.array([[zsummary[lv].z_syntactic, zsummary[lv].z_lexical] for lv in levels])
    y = np.array([deltas[lv] for lv in levels])
    if np.linalg.matrix_rank(X) < 2:
        raise DegenerateFitError(
            "design matrix is rank deficient (collinear or constant z columns); no ratio emitted"
        )
    gram = X.T @ X
    try:
        coef = np.linalg.solve(gram, X.T @ y)
    except np.linalg.LinAlgError:
        coef = np.linalg.pinv(X) @ y
    alpha, beta = float(coef[0]), float(coef[1])
    if beta == 0.0:
        raise DegenerateFitError("lexical coefficient is exactly zero; ratio undefined")
    residuals = tuple(float(r) for r in (y - X @ coef))
    return ImportanceFit(
        alpha=alpha,
        beta=beta,
        ratio=alpha / beta,
        residuals=residuals,
        levels=tuple(levels),
        sign_disagreement=(alpha * beta) < 0,
    )


# ---------------------------------------------------------------------------
# rank-based significance


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1  # average rank, 1-based
        i = j + 1
    return ranks


def kruskal_wallis(group_a: Sequence[float], group_b: Sequence[float]) -> tuple[float, float]:
    """Two-sample rank test with tie correction; p from chi-square, 1 dof."""
    a = np.asarray(list(group_a), dtype=float)
    b = np.asarray(list(group_b), dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValidationError("both groups must be non-empty")
    pooled = np.concatenate([a, b])
    n = pooled.size
    ranks = _average_ranks(pooled)
    n_a, n_b = a.size, b.size
    r_a = ranks[:n_a].sum()
    r_b = ranks[n_a:].sum()
    h = 12.0 / (n * (n + 1)) * (r_a**2 / n_a + r_b**2 / n_b) - 3.0 * (n + 1)
    _, tie_counts = np.unique(pooled, return_counts=True)
    correction = 1.0 - float(((tie_counts**3 - tie_counts).sum())) / (n**3 - n)
    if correction == 0.0:  # every pooled value identical
        return 0.0, 1.0
    h = h / correction
    h = max(h, 0.0)
    p = math.erfc(math.sqrt(h / 2.0))  # chi-square survival, 1 dof
    return float(h), float(p)


@dataclass(frozen=True)
class RankEntry:
    name: str
    p_value: float
    h_statistic: float
    rank: int
    significant: bool


@dataclass(frozen=True)
class RankTable:
    entries: tuple[RankEntry, ...]
    alpha_threshold: float

    def entry(self, name: str) -> RankEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries)


def rank_features(
    table: FeatureTable, labels: Sequence[str], alpha_threshold: float = 0.05
) -> RankTable:
    """Per-feature two-class rank test; rank 1 has the smallest p-value, ties
    break by feature name. Constant or untestable features get p = 1."""
    y = np.asarray([str(v) for v in labels])
    if len(y) != len(table.doc_ids):
        raise ValidationError("labels do not align with the feature table")
    classes = sorted(set(y))
    if len(classes) != 2:
        raise ValidationError(f"expected 2 classes, got {classes}")
    if min((y == c).sum() for c in classes) < 2:
        raise ValidationError("need at least 2 documents per class to rank features")
    results = []
    for j, name in enumerate(table.names):
        col = table.matrix[:, j]
        a = col[(y == classes[0]) & ~np.isnan(col)]
        b = col[(y == classes[1]) & ~np.isnan(col)]
        if a.size == 0 or b.size == 0:
            results.append((name, 1.0, 0.0))
            continue
        h, p = kruskal_wallis(a, b)
        results.append((name, p, h))
    results.sort(key=lambda r: (r[1], r[0]))
    entries = tuple(
        RankEntry(
            name=name,
            p_value=p,
            h_statistic=h,
            rank=rank,
            significant=p < alpha_threshold,
        )
        for rank, (name, p, h) in enumerate(results, start=1)
    )
    return RankTable(entries=entries, alpha_threshold=alpha_threshold)


@dataclass(frozen=True)
class RankDelta:
    name: str
    delta: int  # baseline rank - altered rank; positive = moved up
    baseline_significant: bool
    became_insignificant: bool


@dataclass(frozen=True)
class RankDeltas:
    deltas: tuple[RankDelta, ...]
    max_increase: dict[str, int]
    insignificant_fraction: dict[str, float]

    def delta(self, name: str) -> RankDelta:
        for d in self.deltas:
            if d.name == name:
                return d
        raise KeyError(name)


def rank_deltas(
    baseline: RankTable,
    altered: RankTable,
    groups: Mapping[str, str] | None = None,
) -> RankDeltas:
    """Per-feature rank movement between the unaltered and an altered run.

    Features insignificant at baseline are flagged (blank cells in the rank
    heatmap). The summary reports, per group, the largest rank increase and
    the fraction of baseline-significant features that lost significance.
    """
    if set(baseline.names) != set(altered.names):
        raise ValidationError("rank tables cover different feature sets")
    altered_by_name = {e.name: e for e in altered.entries}
    deltas = []
    for entry in baseline.entries:
        after = altered_by_name[entry.name]
        deltas.append(
            RankDelta(
                name=entry.name,
                delta=entry.rank - after.rank,
                baseline_significant=entry.significant,
                became_insignificant=entry.significant and not after.significant,
            )
        )
    group_of = groups or {}
    max_increase: dict[str, int] = {}
    insig_fraction: dict[str, float] = {}
    for group in sorted(set(group_of.values())):
        members = [d for d in deltas if group_of.get(d.name) == group]
        if not members:
            continue
        max_increase[group] = max(d.delta for d in members)
        signif = [d for d in members if d.baseline_significant]
        insig_fraction[group] = (
            sum(1 for d in signif if d.became_insignificant) / len(signif) if signif else 0.0
        )
    return RankDeltas(
        deltas=tuple(deltas), max_increase=max_increase, insignificant_fraction=insig_fraction
    )
