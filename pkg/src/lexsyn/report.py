"""CSV report tables: profile, z summary, CV results, deltas, importance, ranks.

The bundle also ships a copy of the published reference values for the three
original corpora (which are access-restricted or sampled, so this toolkit
cannot recompute them); those rows are annotations for comparison only.
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

REPORT_TABLES = (
    "report/profile.csv",
    "report/z_table.csv",
    "report/cv_results.csv",
    "report/f1_deltas.csv",
    "report/importance.csv",
    "report/rank_changes.csv",
)


def _fmt(value) -> str:
    if value is None:
        return "absent"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_report_tables(bundle, manifest) -> None:
    out = Path(bundle.out_dir)

    _write_csv(
        out / "report/profile.csv",
        ["row", "mean_value"],
        [[name, value] for name, value in bundle.profile],
    )

    _write_csv(
        out / "report/z_table.csv",
        ["level", "z_lexical", "z_syntactic", "n_lexical", "n_syntactic", "mode"],
        [
            [r["level"], r["z_lexical"], r["z_syntactic"], r["n_lexical"], r["n_syntactic"],
             bundle.z_summary["mode"]]
            for r in bundle.z_summary["levels"]
        ],
    )

    _write_csv(
        out / "report/cv_results.csv",
        ["model", "level", "mean_f1", "n_folds", "skipped_folds", "fold_f1"],
        [
            [r["model"], r["alteration_level"], r["mean_f1"], len(r["fold_f1"]),
             ";".join(str(s) for s in r["skipped_folds"]),
             ";".join(f"{v:.6g}" for v in r["fold_f1"])]
            for r in bundle.cv_results
        ],
    )

    _write_csv(
        out / "report/f1_deltas.csv",
        ["model", "level", "delta_f1"],
        [[r["model"], r["level"], r["delta_f1"]] for r in bundle.f1_deltas],
    )

    importance_rows = []
    for r in bundle.importance:
        if "error" in r:
            importance_rows.append([r["model"], "absent", "absent", "absent", "absent", r["error"]])
        else:
            importance_rows.append(
                [r["model"], r["alpha_syntactic"], r["beta_lexical"], r["ratio"],
                 r["sign_disagreement"], ""]
            )
    _write_csv(
        out / "report/importance.csv",
        ["model", "alpha_syntactic", "beta_lexical", "ratio_syn_over_lex",
         "sign_disagreement", "note"],
        importance_rows,
    )

    levels = sorted(int(level) for level in bundle.ranks["levels"])
    baseline = {e["name"]: e for e in bundle.ranks["baseline"]}
    deltas_by_level = {
        level: {d["name"]: d for d in bundle.ranks["levels"][str(level)]} for level in levels
    }
    from .pipeline import FEATURE_GROUPS

    rank_rows = []
    for entry in bundle.ranks["baseline"]:
        name = entry["name"]
        row = [
            name,
            FEATURE_GROUPS.get(name, "unknown"),
            entry["rank"],
            entry["p_value"],
            entry["significant"],
        ]
        for level in levels:
            row.append(deltas_by_level[level][name]["delta"])
        rank_rows.append(row)
    _write_csv(
        out / "report/rank_changes.csv",
        ["feature", "group", "baseline_rank", "baseline_p", "baseline_significant"]
        + [f"delta_at_{level}" for level in levels],
        rank_rows,
    )

    reference = resources.files("lexsyn.data").joinpath("reference_values.csv").read_text("utf-8")
    ref_path = out / "report/reference_values.csv"
    ref_path.parent.mkdir(parents=True, exist_ok=True)
    ref_path.write_text(reference, encoding="utf-8")

    for relpath in REPORT_TABLES:
        manifest.record(relpath)
    manifest.record("report/reference_values.csv")
