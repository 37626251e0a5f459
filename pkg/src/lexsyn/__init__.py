"""lexsyn: how lexical and syntactic text features endure word deletions,
and what that does to downstream binary classification."""

__version__ = "0.1.0"

from .corpus import Corpus, DatasetProfile, Document, FoldAssignment, Token, group_folds, load_corpus, profile_corpus, save_corpus
from .lexfeat import FeatureVector, LexicalConfig, conditional_entropy, extract_lexical, ngram_stats, shannon_entropy
from .models import CVResult, ModelSpec, cross_validate, macro_f1, predict, smote_oversample, train
from .perturb import DEFAULT_LEVELS, PerturbationPlan, delete_words, perturb_corpus, project_tree_deletion, reparse_external
from .stats import FeatureTable, ImportanceFit, RankTable, f1_delta, feature_zscores, fit_importance, group_zscore, kruskal_wallis, rank_deltas, rank_features
from .synfeat import ProductionCounts, count_production_units, dlevel_classify, dlevel_distribution, extract_syntactic, syntactic_ratios
from .treepat import Pattern, PatternSet, Tree, match_pattern, parse_pattern, parse_ptb, render

__all__ = [
    "__version__",
    "Corpus", "DatasetProfile", "Document", "FoldAssignment", "Token",
    "group_folds", "load_corpus", "profile_corpus", "save_corpus",
    "FeatureVector", "LexicalConfig", "conditional_entropy", "extract_lexical",
    "ngram_stats", "shannon_entropy",
    "CVResult", "ModelSpec", "cross_validate", "macro_f1", "predict",
    "smote_oversample", "train",
    "DEFAULT_LEVELS", "PerturbationPlan", "delete_words", "perturb_corpus",
    "project_tree_deletion", "reparse_external",
    "FeatureTable", "ImportanceFit", "RankTable", "f1_delta", "feature_zscores",
    "fit_importance", "group_zscore", "kruskal_wallis", "rank_deltas", "rank_features",
    "ProductionCounts", "count_production_units", "dlevel_classify",
    "dlevel_distribution", "extract_syntactic", "syntactic_ratios",
    "Pattern", "PatternSet", "Tree", "match_pattern", "parse_pattern", "parse_ptb", "render",
]
