"""The end-to-end experiment: ingest, perturb, extract, evaluate, analyze, report.

Every stage reads and writes content-hashed artifacts under the output
directory, recorded in manifest.json, so stages can run standalone and any
out-of-date input is detected rather than silently reused. Reruns with the
same configuration and seed produce byte-identical artifacts.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import __version__
from .corpus import Corpus, PROFILE_ROWS, group_folds, load_corpus, mean_word_length, save_corpus
from .errors import (
    DegenerateFitError,
    PipelineError,
    StalenessError,
    ValidationError,
)
from .lexfeat import LEXICAL_FEATURES, LexicalConfig, extract_lexical
from .models import MODEL_KINDS, ModelSpec, cross_validate
from .perturb import PerturbationPlan, perturb_corpus
from .stats import (
    FeatureTable,
    GroupZ,
    f1_delta,
    feature_zscores,
    fit_importance,
    group_zscore,
    rank_deltas,
    rank_features,
)
from .synfeat import SYNTACTIC_FEATURES, extract_syntactic
from .util import derive_seed, sha256_file, stable_json, write_json

STAGES = ("ingest", "perturb", "extract", "evaluate", "analyze", "report")

FEATURE_GROUPS: dict[str, str] = {
    **{name: "lexical" for name in LEXICAL_FEATURES},
    **{name: "syntactic" for name in SYNTACTIC_FEATURES},
}


@dataclass(frozen=True)
class PipelineConfig:
    corpus_path: Path
    corpus_format: str = "jsonl"
    levels: tuple[int, ...] = (20, 40, 60, 80)
    seed: int = 0
    folds: int = 10
    models: tuple[str, ...] = ("gnb", "rf", "svm", "mlp")
    tree_strategy: str = "project"
    parser_command: str | None = None
    significance_threshold: float = 0.05
    z_aggregation: str = "absolute"
    output_dir: Path = Path("out")
    wordlist: Path | None = None
    sophistication_cutoff: int = 2000
    segment_size: int = 50
    random_samples: int = 10
    jobs: int = 1

    def lexical_config(self) -> LexicalConfig:
        return LexicalConfig(
            frequency_wordlist=self.wordlist,
            sophistication_cutoff=self.sophistication_cutoff,
            segment_size=self.segment_size,
            random_samples=self.random_samples,
            seed=derive_seed(self.seed, "lexfeat"),
        )

    def as_dict(self) -> dict:
        return {
            "corpus_path": str(self.corpus_path),
            "corpus_format": self.corpus_format,
            "levels": list(self.levels),
            "seed": self.seed,
            "folds": self.folds,
            "models": list(self.models),
            "tree_strategy": self.tree_strategy,
            "parser_command": self.parser_command,
            "significance_threshold": self.significance_threshold,
            "z_aggregation": self.z_aggregation,
            "output_dir": str(self.output_dir),
            "wordlist": None if self.wordlist is None else str(self.wordlist),
            "sophistication_cutoff": self.sophistication_cutoff,
            "segment_size": self.segment_size,
            "random_samples": self.random_samples,
            "jobs": self.jobs,
        }


def load_config(
    path: str | Path,
    seed: int | None = None,
    jobs: int | None = None,
    out: str | Path | None = None,
    levels: tuple[int, ...] | None = None,
    models: tuple[str, ...] | None = None,
) -> PipelineConfig:
    """Read and validate a YAML config; CLI flags override file values."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text("utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ValidationError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("config must be a mapping")
    known = {
        "corpus", "levels", "seed", "folds", "models", "tree_strategy", "parser_command",
        "significance_threshold", "z_aggregation", "output_dir", "lexical", "jobs",
    }
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")

    corpus = raw.get("corpus") or {}
    if "path" not in corpus:
        raise ValidationError("config needs corpus.path")
    lexical = raw.get("lexical") or {}
    wordlist = os.environ.get("LEXSYN_WORDLIST") or lexical.get("wordlist")

    cfg = PipelineConfig(
        corpus_path=Path(corpus["path"]),
        corpus_format=corpus.get("format", "jsonl"),
        levels=tuple(levels if levels is not None else raw.get("levels", (20, 40, 60, 80))),
        seed=int(seed if seed is not None else raw.get("seed", 0)),
        folds=int(raw.get("folds", 10)),
        models=tuple(models if models is not None else raw.get("models", MODEL_KINDS)),
        tree_strategy=raw.get("tree_strategy", "project"),
        parser_command=raw.get("parser_command"),
        significance_threshold=float(raw.get("significance_threshold", 0.05)),
        z_aggregation=raw.get("z_aggregation", "absolute"),
        output_dir=Path(out if out is not None else raw.get("output_dir", "out")),
        wordlist=None if wordlist is None else Path(wordlist),
        sophistication_cutoff=int(lexical.get("sophistication_cutoff", 2000)),
        segment_size=int(lexical.get("segment_size", 50)),
        random_samples=int(lexical.get("random_samples", 10)),
        jobs=int(jobs if jobs is not None else raw.get("jobs", 1)),
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: PipelineConfig) -> None:
    if not cfg.corpus_path.exists():
        raise ValidationError(f"corpus file not found: {cfg.corpus_path}")
    if cfg.corpus_format not in ("jsonl", "csv"):
        raise ValidationError(f"unknown corpus format {cfg.corpus_format!r}")
    if cfg.wordlist is not None and not cfg.wordlist.exists():
        raise ValidationError(f"frequency wordlist not found: {cfg.wordlist}")
    if cfg.folds < 2:
        raise ValidationError("folds must be >= 2")
    if cfg.jobs < 1:
        raise ValidationError("jobs must be >= 1")
    if not 0 < cfg.significance_threshold < 1:
        raise ValidationError("significance_threshold must be in (0, 1)")
    if cfg.z_aggregation not in ("absolute", "signed"):
        raise ValidationError(f"unknown z_aggregation {cfg.z_aggregation!r}")
    unknown_models = [m for m in cfg.models if m not in MODEL_KINDS]
    if unknown_models:
        raise ValidationError(f"unknown models: {unknown_models}")
    if not cfg.models:
        raise ValidationError("at least one model is required")
    # PerturbationPlan re-validates levels; construct it for the side effect.
    _plan_for(cfg)


def _plan_for(cfg: PipelineConfig) -> PerturbationPlan:
    return PerturbationPlan(
        levels=cfg.levels,
        seed=derive_seed(cfg.seed, "perturb"),
        tree_strategy=cfg.tree_strategy,
        parser_command=cfg.parser_command,
    )


# ---------------------------------------------------------------------------
# manifest


class Manifest:
    """Content hashes and run metadata for every artifact under the out dir."""

    def __init__(self, out_dir: Path, data: dict | None = None):
        self.out_dir = Path(out_dir)
        self.data = data or {"version": __version__, "artifacts": {}, "stages": []}

    @property
    def path(self) -> Path:
        return self.out_dir / "manifest.json"

    @classmethod
    def load(cls, out_dir: Path) -> "Manifest":
        path = Path(out_dir) / "manifest.json"
        if not path.exists():
            raise StalenessError(f"no manifest at {path}; run earlier stages first")
        try:
            return cls(out_dir, json.loads(path.read_text("utf-8")))
        except json.JSONDecodeError as exc:
            raise StalenessError(f"manifest at {path} is corrupt: {exc}") from exc

    def attach_config(self, cfg: PipelineConfig) -> None:
        self.data["config"] = cfg.as_dict()
        self.data["seed"] = cfg.seed
        self.data["decisions"] = {
            "sigma_convention": "population standard deviation over the unaltered corpus",
            "z_aggregation": cfg.z_aggregation,
            "svm_gamma": "1 / (n_features * mean feature variance) on the matrix the kernel sees",
            "mlp_batch": "full batch, fixed epoch budget",
            "tokenizer": "lowercase, strip CHAT marker groups, split clitics, keep &-prefixed fillers",
            "tree_strategy": cfg.tree_strategy,
        }

    def record(self, relpath: str) -> None:
        self.data["artifacts"][relpath] = sha256_file(self.out_dir / relpath)

    def record_stage(self, stage: str) -> None:
        if stage not in self.data["stages"]:
            self.data["stages"].append(stage)

    def verify(self, relpath: str) -> None:
        expected = self.data["artifacts"].get(relpath)
        full = self.out_dir / relpath
        if expected is None or not full.exists():
            raise StalenessError(f"missing upstream artifact {relpath}; rerun earlier stages")
        actual = sha256_file(full)
        if actual != expected:
            raise StalenessError(
                f"artifact {relpath} does not match the manifest hash; rerun earlier stages"
            )

    def require_stage(self, stage: str) -> None:
        if stage not in self.data["stages"]:
            raise StalenessError(f"stage {stage!r} has not run; run it first")

    def save(self) -> None:
        write_json(self.path, self.data)

    def bundle_hash(self) -> str:
        from .util import sha256_bytes

        return sha256_bytes(stable_json(self.data["artifacts"]).encode("utf-8"))


def _write_and_record(manifest: Manifest, relpath: str, writer) -> None:
    full = manifest.out_dir / relpath
    full.parent.mkdir(parents=True, exist_ok=True)
    writer(full)
    manifest.record(relpath)


# ---------------------------------------------------------------------------
# stages


def _level_name(level: int) -> str:
    return f"level_{level:03d}"


def _corpus_relpath() -> str:
    return "corpus/corpus.jsonl"


def stage_ingest(cfg: PipelineConfig) -> Manifest:
    """Validate, normalize, and store the corpus; starts a fresh manifest."""
    corpus = load_corpus(cfg.corpus_path, cfg.corpus_format)
    manifest = Manifest(cfg.output_dir)
    manifest.attach_config(cfg)
    _write_and_record(manifest, _corpus_relpath(), lambda p: save_corpus(corpus, p))
    manifest.record_stage("ingest")
    manifest.save()
    return manifest


def _load_corpus_artifact(manifest: Manifest) -> Corpus:
    manifest.verify(_corpus_relpath())
    return load_corpus(manifest.out_dir / _corpus_relpath(), "jsonl")


def stage_perturb(cfg: PipelineConfig) -> Manifest:
    manifest = Manifest.load(cfg.output_dir)
    manifest.require_stage("ingest")
    corpus = _load_corpus_artifact(manifest)
    altered = perturb_corpus(corpus, _plan_for(cfg))
    for level, level_corpus in altered.items():
        relpath = f"perturbed/{_level_name(level)}.jsonl"
        _write_and_record(manifest, relpath, lambda p, c=level_corpus: save_corpus(c, p))
    manifest.record_stage("perturb")
    manifest.save()
    return manifest


def _extract_corpus(corpus: Corpus, cfg: PipelineConfig) -> dict:
    lexical_config = cfg.lexical_config()
    names = list(LEXICAL_FEATURES) + list(SYNTACTIC_FEATURES)

    def one(doc):
        vector = extract_lexical(doc, lexical_config, require_pos=False).values
        if doc.trees:
            vector = {**vector, **extract_syntactic(doc).values}
        else:
            vector = {**vector, **{name: None for name in SYNTACTIC_FEATURES}}
        return [vector[name] for name in names]

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(one, corpus.documents))
    else:
        rows = [one(doc) for doc in corpus.documents]
    return {
        "names": names,
        "docs": {doc.id: row for doc, row in zip(corpus.documents, rows)},
    }


def stage_extract(cfg: PipelineConfig) -> Manifest:
    manifest = Manifest.load(cfg.output_dir)
    manifest.require_stage("perturb")
    corpus = _load_corpus_artifact(manifest)
    per_level = {0: corpus}
    for level in cfg.levels:
        relpath = f"perturbed/{_level_name(level)}.jsonl"
        manifest.verify(relpath)
        per_level[level] = load_corpus(manifest.out_dir / relpath, "jsonl")
    for level, level_corpus in per_level.items():
        payload = {"level": level, **_extract_corpus(level_corpus, cfg)}
        relpath = f"features/{_level_name(level)}.json"
        _write_and_record(manifest, relpath, lambda p, d=payload: write_json(p, d))
    manifest.record_stage("extract")
    manifest.save()
    return manifest


def _load_feature_table(manifest: Manifest, level: int, doc_order: list[str]) -> FeatureTable:
    relpath = f"features/{_level_name(level)}.json"
    manifest.verify(relpath)
    payload = json.loads((manifest.out_dir / relpath).read_text("utf-8"))
    names = tuple(payload["names"])
    import numpy as np

    matrix = np.full((len(doc_order), len(names)), np.nan)
    for i, doc_id in enumerate(doc_order):
        row = payload["docs"][doc_id]
        for j, value in enumerate(row):
            if value is not None:
                matrix[i, j] = value
    return FeatureTable(doc_ids=tuple(doc_order), names=names, matrix=matrix)


def stage_evaluate(cfg: PipelineConfig) -> Manifest:
    manifest = Manifest.load(cfg.output_dir)
    manifest.require_stage("extract")
    corpus = _load_corpus_artifact(manifest)
    doc_order = [d.id for d in corpus.documents]
    labels = [d.label for d in corpus.documents]
    folds = group_folds(corpus, cfg.folds, derive_seed(cfg.seed, "folds"))
    results = []
    for kind in cfg.models:
        spec = ModelSpec(kind=kind, seed=derive_seed(cfg.seed, "model", kind))
        for level in (0, *cfg.levels):
            table = _load_feature_table(manifest, level, doc_order)
            cv = cross_validate(
                table.matrix, labels, doc_order, folds, spec,
                alteration_level=level, label_set=corpus.labels,
            )
            results.append(cv.as_dict())
    _write_and_record(
        manifest, "eval/folds.json", lambda p: write_json(p, {"k": folds.k, "fold_of": folds.fold_of})
    )
    _write_and_record(
        manifest, "eval/cv_results.json", lambda p: write_json(p, {"results": results})
    )
    manifest.record_stage("evaluate")
    manifest.save()
    return manifest


def stage_analyze(cfg: PipelineConfig) -> Manifest:
    import numpy as np

    manifest = Manifest.load(cfg.output_dir)
    manifest.require_stage("evaluate")
    corpus = _load_corpus_artifact(manifest)
    doc_order = [d.id for d in corpus.documents]
    labels = [d.label for d in corpus.documents]
    baseline = _load_feature_table(manifest, 0, doc_order)

    # dataset profile (means at level 0, plus mean word length)
    profile_rows = []
    for name in PROFILE_ROWS:
        if name == "lexicon_complexity":
            profile_rows.append((name, sum(mean_word_length(d) for d in corpus.documents) / len(corpus.documents)))
        elif name in baseline.names:
            col = baseline.column(name)
            defined = col[~np.isnan(col)]
            profile_rows.append((name, float(defined.mean()) if defined.size else None))
        else:
            profile_rows.append((name, None))
    _write_and_record(
        manifest, "analysis/profile.json",
        lambda p: write_json(p, {"rows": [[k, v] for k, v in profile_rows]}),
    )

    # z-score summaries per level; no alteration means no change, so the
    # level-0 summary is zero by definition (the audit file still carries the
    # raw baseline z spread). A corpus without trees has no syntactic group;
    # its summary stays absent rather than zero.
    z_levels = []
    excluded: tuple[str, ...] = ()

    def _anchor(value: float | None, level: int) -> float | None:
        if value is None:
            return None
        return 0.0 if level == 0 else value

    for level in (0, *cfg.levels):
        table = _load_feature_table(manifest, level, doc_order)
        z = feature_zscores(baseline, table)
        excluded = z.excluded
        summary = group_zscore(
            z, FEATURE_GROUPS, level, mode=cfg.z_aggregation, require=("lexical",)
        )
        z_levels.append(
            {
                "level": level,
                "z_lexical": _anchor(summary.z_lexical, level),
                "z_syntactic": _anchor(summary.z_syntactic, level),
                "n_lexical": summary.n_lexical,
                "n_syntactic": summary.n_syntactic,
            }
        )
        audit = {
            "level": level,
            "names": list(z.names),
            "docs": {
                doc_id: [None if np.isnan(v) else float(v) for v in z.matrix[i]]
                for i, doc_id in enumerate(z.doc_ids)
            },
        }
        _write_and_record(
            manifest, f"analysis/zscores_{_level_name(level)}.json",
            lambda p, d=audit: write_json(p, d),
        )
    z_summary = {
        "mode": cfg.z_aggregation,
        "excluded_features": list(excluded),
        "levels": z_levels,
    }
    _write_and_record(
        manifest, "analysis/z_summary.json", lambda p: write_json(p, z_summary)
    )

    # F1 deltas and importance fits
    manifest.verify("eval/cv_results.json")
    cv_payload = json.loads((manifest.out_dir / "eval/cv_results.json").read_text("utf-8"))
    mean_f1: dict[tuple[str, int], float] = {
        (r["model"], r["alteration_level"]): r["mean_f1"] for r in cv_payload["results"]
    }
    groupz = {
        row["level"]: GroupZ(
            level=row["level"], z_lexical=row["z_lexical"], z_syntactic=row["z_syntactic"],
            n_lexical=row["n_lexical"], n_syntactic=row["n_syntactic"], mode=cfg.z_aggregation,
        )
        for row in z_levels
    }
    deltas_out = []
    importance_out = []
    for kind in cfg.models:
        deltas = {
            level: f1_delta(mean_f1[(kind, level)], mean_f1[(kind, 0)]) for level in cfg.levels
        }
        for level in cfg.levels:
            deltas_out.append({"model": kind, "level": level, "delta_f1": deltas[level]})
        try:
            fit = fit_importance(deltas, groupz)
            importance_out.append(
                {
                    "model": kind,
                    "alpha_syntactic": fit.alpha,
                    "beta_lexical": fit.beta,
                    "ratio": fit.ratio,
                    "sign_disagreement": fit.sign_disagreement,
                    "residuals": list(fit.residuals),
                }
            )
        except DegenerateFitError as exc:
            importance_out.append({"model": kind, "error": str(exc)})
    _write_and_record(
        manifest, "analysis/f1_deltas.json", lambda p: write_json(p, {"deltas": deltas_out})
    )
    _write_and_record(
        manifest, "analysis/importance.json", lambda p: write_json(p, {"fits": importance_out})
    )

    # feature significance ranks and their movement under alteration
    base_ranks = rank_features(baseline, labels, cfg.significance_threshold)
    rank_payload = {
        "threshold": cfg.significance_threshold,
        "baseline": [
            {
                "name": e.name, "p_value": e.p_value, "h": e.h_statistic,
                "rank": e.rank, "significant": e.significant,
            }
            for e in base_ranks.entries
        ],
        "levels": {},
        "summaries": {},
    }
    for level in cfg.levels:
        table = _load_feature_table(manifest, level, doc_order)
        level_ranks = rank_features(table, labels, cfg.significance_threshold)
        movement = rank_deltas(base_ranks, level_ranks, FEATURE_GROUPS)
        rank_payload["levels"][str(level)] = [
            {
                "name": d.name,
                "delta": d.delta,
                "baseline_significant": d.baseline_significant,
                "became_insignificant": d.became_insignificant,
            }
            for d in movement.deltas
        ]
        rank_payload["summaries"][str(level)] = {
            "max_rank_increase": movement.max_increase,
            "insignificant_fraction": movement.insignificant_fraction,
        }
    _write_and_record(
        manifest, "analysis/ranks.json", lambda p: write_json(p, rank_payload)
    )
    manifest.record_stage("analyze")
    manifest.save()
    return manifest


def stage_report(cfg: PipelineConfig) -> "ReportBundle":
    from .report import write_report_tables

    manifest = Manifest.load(cfg.output_dir)
    manifest.require_stage("analyze")
    bundle = build_bundle(cfg, manifest)
    write_report_tables(bundle, manifest)

    from .plots import emit_plots

    plot_paths = emit_plots(bundle, manifest.out_dir / "plots")
    for path in plot_paths:
        manifest.record(str(path.relative_to(manifest.out_dir)))
    manifest.record_stage("report")
    manifest.save()
    bundle.manifest = manifest.data
    return bundle


@dataclass
class ReportBundle:
    """Everything the report and plot emitters need, loaded from artifacts."""

    out_dir: Path
    profile: list[tuple[str, float | None]]
    z_summary: dict
    cv_results: list[dict]
    f1_deltas: list[dict]
    importance: list[dict]
    ranks: dict
    manifest: dict = field(default_factory=dict)

    def bundle_hash(self) -> str:
        from .util import sha256_bytes

        return sha256_bytes(stable_json(self.manifest.get("artifacts", {})).encode("utf-8"))


def build_bundle(cfg: PipelineConfig, manifest: Manifest) -> ReportBundle:
    def load(relpath: str) -> dict:
        manifest.verify(relpath)
        return json.loads((manifest.out_dir / relpath).read_text("utf-8"))

    profile = [(row[0], row[1]) for row in load("analysis/profile.json")["rows"]]
    return ReportBundle(
        out_dir=manifest.out_dir,
        profile=profile,
        z_summary=load("analysis/z_summary.json"),
        cv_results=load("eval/cv_results.json")["results"],
        f1_deltas=load("analysis/f1_deltas.json")["deltas"],
        importance=load("analysis/importance.json")["fits"],
        ranks=load("analysis/ranks.json"),
        manifest=manifest.data,
    )


def run_pipeline(cfg: PipelineConfig) -> ReportBundle:
    """Execute every stage in order; halts on the first failing stage with the
    stage named, keeping whatever artifacts it already produced."""
    validate_config(cfg)
    stage_fns = {
        "ingest": stage_ingest,
        "perturb": stage_perturb,
        "extract": stage_extract,
        "evaluate": stage_evaluate,
        "analyze": stage_analyze,
        "report": stage_report,
    }
    result = None
    for stage in STAGES:
        try:
            result = stage_fns[stage](cfg)
        except (StalenessError, ValidationError):
            raise
        except Exception as exc:
            raise PipelineError(f"stage {stage!r} failed: {exc}") from exc
    return result
