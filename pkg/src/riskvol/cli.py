"""Command-line interface: ingest, labels, evaluate, drift, sectors.

All behavior is driven by a flat key = value config file; flags only
pick the config, the command, and scalar overrides. Identical inputs
and config produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import evaluation, features, filings, lexicon as lexicon_mod, market
from .embeddings import load_embeddings
from .errors import ConfigError, RiskvolError
from .evaluation import (
    EngineOptions,
    EvalReport,
    ExperimentSpec,
    SplitSpec,
    drift_matrix,
    run_experiment_on_tables,
    sector_coefficient_report,
    yearly_feature_matrices,
)
from .features import WeightingSpec
from .market import MarketFeatures, VolatilityLabels, sector_onehot

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class Config:
    """Flat dotted-key configuration with typed access."""

    def __init__(self, values: dict):
        self.values = dict(values)

    @classmethod
    def from_file(cls, path) -> "Config":
        values = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"line {lineno}: expected key = value")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
        return cls(values)

    def set(self, key: str, value: str) -> None:
        self.values[key] = value

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def require(self, key: str) -> str:
        if key not in self.values:
            raise ConfigError(f"missing required config key {key!r}")
        return self.values[key]

    def get_int(self, key: str, default=None) -> int:
        raw = self.values.get(key)
        if raw is None:
            if default is None:
                raise ConfigError(f"missing required integer key {key!r}")
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"key {key!r} must be an integer, got {raw!r}") from None

    def get_float(self, key: str, default: float) -> float:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"key {key!r} must be a number, got {raw!r}") from None

    def get_bool(self, key: str, default: bool) -> bool:
        raw = self.values.get(key)
        if raw is None:
            return default
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigError(f"key {key!r} must be a boolean, got {raw!r}")

    def get_list(self, key: str, default=()) -> tuple:
        raw = self.values.get(key)
        if raw is None:
            return tuple(default)
        return tuple(part.strip() for part in raw.split(",") if part.strip())

    def path(self, key: str) -> Path:
        p = Path(self.require(key))
        if not p.exists():
            raise ConfigError(f"path for {key!r} does not exist: {p}")
        return p

    def seeds(self) -> dict:
        # all randomness flows from explicit config seeds
        return {
            name: self.get_int(f"seeds.{name}")
            for name in ("cv", "stacking", "sampling")
        }

    def out_dir(self) -> Path:
        out = Path(self.require("paths.out_dir"))
        out.mkdir(parents=True, exist_ok=True)
        return out


def _weighting_spec(config: Config) -> WeightingSpec:
    return WeightingSpec(
        scheme=config.get("experiment.scheme", "BM25"),
        extended=config.get_bool("experiment.extended", False),
        k=config.get_float("engine.bm25_k", features.DEFAULT_BM25_K),
        b=config.get_float("engine.bm25_b", features.DEFAULT_BM25_B),
        similarity_threshold=config.get_float("engine.similarity_threshold", 0.70),
        idf_literal=config.get_bool("engine.idf_literal", False),
    )


def _split_spec(config: Config, seeds: dict) -> SplitSpec:
    kind = config.get("experiment.split", "kfold")
    return SplitSpec(
        kind=kind,
        k=config.get_int("experiment.folds", 5),
        seed=seeds["cv"],
        test_year=(
            config.get_int("experiment.test_year") if kind == "temporal" else None
        ),
        sector=config.get("experiment.sector") if kind.startswith("sector") else None,
        sampling_seed=seeds["sampling"],
    )


def _experiment_spec(config: Config, seeds: dict) -> ExperimentSpec:
    horizons = tuple(int(h) for h in config.get_list("experiment.horizons", ("1", "2", "3", "4")))
    return ExperimentSpec(
        scheme=_weighting_spec(config),
        lexicon_mode=config.get("experiment.lexicon_mode", "Lex"),
        pca_dims=config.get_int("experiment.pca_dims", features.DEFAULT_PCA_DIMS),
        fusion=config.get("experiment.fusion", "text_only"),
        horizons=horizons,
        split=_split_spec(config, seeds),
    )


def _engine_options(config: Config, seeds: dict) -> EngineOptions:
    return EngineOptions(
        svr_c=config.get_float("engine.svr_c", 1.0),
        svr_epsilon=config.get_float("engine.svr_epsilon", 0.1),
        unaveraged_loss=config.get_bool("engine.unaveraged_loss", False),
        outlier_scope=config.get("engine.outlier_scope", "global"),
        expansion_k=config.get_int("engine.expansion_k", lexicon_mod.DEFAULT_EXPANSION_K),
        min_garch_obs=config.get_int("engine.min_garch_obs", market.DEFAULT_MIN_GARCH_OBS),
        stacking_seed=seeds["stacking"],
    )


def _load_lexicon(config: Config):
    cats = config.get_list("lexicon.categories", ("positive", "negative", "uncertainty"))
    return lexicon_mod.load_lexicon(config.path("paths.lexicon"), categories=cats)


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def cmd_ingest(config: Config) -> int:
    manifest_path = config.path("paths.manifest")
    out = config.out_dir()
    min_tokens = config.get_int("engine.min_section_tokens", filings.DEFAULT_MIN_SECTION_TOKENS)
    rows = filings.read_manifest(manifest_path)
    base = manifest_path.parent
    docs = []
    drops = []
    for row in rows:
        try:
            raw = filings.load_raw_filing(base, row)
            docs.append(filings.process_filing(row.doc_id, raw, min_tokens=min_tokens))
        except (RiskvolError, OSError, ValueError) as exc:
            drops.append((row.doc_id, f"{type(exc).__name__}: {exc}"))
    filings.write_corpus(docs, out / "corpus.jsonl")
    lines = [
        f"manifest rows: {len(rows)}",
        f"documents written: {len(docs)}",
        f"documents dropped: {len(drops)}",
    ]
    for doc_id, reason in sorted(drops):
        lines.append(f"drop {doc_id}: {reason}")
    _write_text(out / "ingest_log.txt", "\n".join(lines) + "\n")
    return 0


_LABEL_COLUMNS = (
    ["doc_id", "sector"]
    + [f"y{k}" for k in range(1, market.N_QUARTERS + 1)]
    + ["first_year", "current_volatility", "garch_forecast"]
)


def cmd_labels(config: Config) -> int:
    out = config.out_dir()
    corpus = filings.read_corpus(out / "corpus.jsonl")
    prices_dir = config.path("paths.prices_dir")
    min_garch = config.get_int("engine.min_garch_obs", market.DEFAULT_MIN_GARCH_OBS)
    prices = {}
    for doc in corpus:
        if doc.company_id in prices:
            continue
        for suffix in (".csv", ".tsv", ".txt"):
            candidate = prices_dir / f"{doc.company_id}{suffix}"
            if candidate.exists():
                prices[doc.company_id] = market.load_price_series(
                    candidate, ticker=doc.company_id
                )
                break
    labels, feats, drops = evaluation.compute_market_table(
        corpus, prices, min_garch_obs=min_garch
    )
    rows = []
    for doc in sorted(corpus, key=lambda d: d.doc_id):
        lab = labels.get(doc.doc_id)
        if lab is None:
            continue
        mf = feats[doc.doc_id]
        ys = ["" if v is None else repr(v) for v in lab.y]
        first = "" if lab.first_year is None else repr(lab.first_year)
        rows.append(
            [doc.doc_id, doc.sector]
            + ys
            + [first, repr(mf.current_volatility), repr(mf.garch_forecast)]
        )
    body = "\t".join(_LABEL_COLUMNS) + "\n"
    body += "".join("\t".join(row) + "\n" for row in rows)
    _write_text(out / "labels.tsv", body)
    lines = [
        f"documents: {len(corpus)}",
        f"labeled: {len(rows)}",
        f"dropped: {len(drops)}",
    ]
    for doc_id, reason in sorted(drops.items()):
        lines.append(f"drop {doc_id}: {reason}")
    missing = {
        doc_id: lab.missing for doc_id, lab in sorted(labels.items()) if lab.missing
    }
    for doc_id, quarters in missing.items():
        lines.append(f"missing-horizons {doc_id}: {','.join(map(str, quarters))}")
    _write_text(out / "labels_log.txt", "\n".join(lines) + "\n")
    return 0


def read_labels_file(path):
    """Load the labels.tsv written by cmd_labels into label/market tables."""
    labels = {}
    feats = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != _LABEL_COLUMNS:
            raise ConfigError(f"unexpected labels file header in {path}")
        for line in fh:
            if not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            doc_id, sector = cols[0], cols[1]
            ys = tuple(None if v == "" else float(v) for v in cols[2:10])
            missing = tuple(k + 1 for k, v in enumerate(ys) if v is None)
            labels[doc_id] = VolatilityLabels(doc_id=doc_id, y=ys, missing=missing)
            feats[doc_id] = MarketFeatures(
                current_volatility=float(cols[11]),
                garch_forecast=float(cols[12]),
                sector_onehot=sector_onehot(sector),
            )
    return labels, feats


def _load_eval_inputs(config: Config):
    out = config.out_dir()
    corpus = filings.read_corpus(out / "corpus.jsonl")
    labels, feats = read_labels_file(out / "labels.tsv")
    lex = _load_lexicon(config)
    table = None
    if "paths.embeddings" in config.values:
        table = load_embeddings(config.path("paths.embeddings"))
    return corpus, labels, feats, lex, table


_GRID_ROWS = (
    ("BM25", True), ("BM25", False),
    ("TC", True), ("TC", False),
    ("TFIDF", True), ("TFIDF", False),
    ("TF", True), ("TF", False),
)


def cmd_evaluate(config: Config) -> int:
    seeds = config.seeds()
    corpus, labels, feats, lex, table = _load_eval_inputs(config)
    options = _engine_options(config, seeds)
    out = config.out_dir()
    if not config.get_bool("experiment.grid", False):
        spec = _experiment_spec(config, seeds)
        report = run_experiment_on_tables(
            spec, corpus, labels, feats, lex, table, options
        )
        _write_json(out / f"eval_{spec.name}.json", report.to_dict())
        _write_text(out / f"eval_{spec.name}.txt", report.format_table())
        return 0

    base = _experiment_spec(config, seeds)
    summary = {}
    for scheme, extended in _GRID_ROWS:
        row_name = ("ext-" if extended else "") + scheme
        summary[row_name] = {}
        for fusion_name, column in (("text_only", "text"), ("stacking", "text+market")):
            spec = ExperimentSpec(
                scheme=WeightingSpec(
                    scheme=scheme,
                    extended=extended,
                    k=base.scheme.k,
                    b=base.scheme.b,
                    similarity_threshold=base.scheme.similarity_threshold,
                    idf_literal=base.scheme.idf_literal,
                ),
                lexicon_mode=base.lexicon_mode,
                pca_dims=base.pca_dims,
                fusion=fusion_name,
                horizons=base.horizons,
                split=base.split,
            )
            try:
                report = run_experiment_on_tables(
                    spec, corpus, labels, feats, lex, table, options
                )
            except RiskvolError as exc:
                summary[row_name][column] = {"error": f"{type(exc).__name__}: {exc}"}
                continue
            _write_json(out / f"eval_{spec.name}.json", report.to_dict())
            _write_text(out / f"eval_{spec.name}.txt", report.format_table())
            r2 = report.first_year_r2
            ms = report.first_year_mse
            if r2 is None:
                used = [report.per_horizon[k] for k in report.horizons]
                vals = [u for u in used if u["r2"] is not None]
                r2 = float(np.mean([u["r2"] for u in vals])) if vals else None
                ms = float(np.mean([u["mse"] for u in vals])) if vals else None
            summary[row_name][column] = {"r2": r2, "mse": ms}
    _write_json(out / "eval_summary.json", summary)
    lines = [f"{'scheme':>10} {'text r2':>10} {'text mse':>10} {'t+m r2':>10} {'t+m mse':>10}"]
    for row_name, _ in ((("ext-" if e else "") + s, None) for s, e in _GRID_ROWS):
        cells = []
        for column in ("text", "text+market"):
            cell = summary[row_name][column]
            if "error" in cell or cell["r2"] is None:
                cells += ["failed", "failed"]
            else:
                cells += [f"{cell['r2']:.4f}", f"{cell['mse']:.4f}"]
        lines.append(
            f"{row_name:>10} {cells[0]:>10} {cells[1]:>10} {cells[2]:>10} {cells[3]:>10}"
        )
    _write_text(out / "eval_summary.txt", "\n".join(lines) + "\n")
    return 0


def cmd_drift(config: Config) -> int:
    seeds = config.seeds()
    out = config.out_dir()
    corpus = filings.read_corpus(out / "corpus.jsonl")
    lex = _load_lexicon(config)
    table = None
    if "paths.embeddings" in config.values:
        table = load_embeddings(config.path("paths.embeddings"))
    spec = _experiment_spec(config, seeds)
    lex_eff = evaluation.effective_lexicon(
        lex, spec.lexicon_mode, table, config.get_int("engine.expansion_k", 20)
    )
    yearly = yearly_feature_matrices(corpus, lex_eff, spec.scheme, table)
    years, matrix = drift_matrix(yearly)
    lines = ["year\t" + "\t".join(str(y) for y in years)]
    for i, year in enumerate(years):
        lines.append(str(year) + "\t" + "\t".join(repr(float(v)) for v in matrix[i]))
    _write_text(out / "drift.tsv", "\n".join(lines) + "\n")
    return 0


def cmd_sectors(config: Config) -> int:
    seeds = config.seeds()
    corpus, labels, feats, lex, table = _load_eval_inputs(config)
    options = _engine_options(config, seeds)
    out = config.out_dir()
    base = _experiment_spec(config, seeds)
    min_docs = config.get_int("engine.min_sector_docs", 2 * base.split.k)
    top_n = config.get_int("engine.coefficient_top_n", 10)

    def aggregate(report: EvalReport):
        if report.first_year_r2 is not None:
            return report.first_year_r2, report.first_year_mse
        vals = [report.per_horizon[k] for k in report.horizons]
        vals = [v for v in vals if v["r2"] is not None]
        if not vals:
            return None, None
        return (
            float(np.mean([v["r2"] for v in vals])),
            float(np.mean([v["mse"] for v in vals])),
        )

    general_spec = ExperimentSpec(
        scheme=base.scheme,
        lexicon_mode=base.lexicon_mode,
        pca_dims=base.pca_dims,
        fusion=base.fusion,
        horizons=base.horizons,
        split=SplitSpec(kind="kfold", k=base.split.k, seed=seeds["cv"]),
    )
    general = run_experiment_on_tables(
        general_spec, corpus, labels, feats, lex, table, options, track_sectors=True
    )

    sectors = sorted({d.sector for d in corpus if d.sector})
    lex_eff = evaluation.effective_lexicon(
        lex, base.lexicon_mode, table, options.expansion_k
    )
    results = {}
    skipped = []
    for sector in sectors:
        n_docs = sum(
            1 for d in corpus if d.sector == sector and d.doc_id in labels
        )
        if n_docs < min_docs:
            skipped.append((sector, n_docs))
            continue
        entry = {"n_docs": n_docs}
        gen = (general.per_sector or {}).get(sector)
        if gen and "first_year_r2" in gen:
            entry["general"] = {"r2": gen["first_year_r2"], "mse": gen["first_year_mse"]}
        elif gen:
            r2s = [v["r2"] for k, v in gen.items() if k.isdigit()]
            mses = [v["mse"] for k, v in gen.items() if k.isdigit()]
            entry["general"] = {
                "r2": float(np.mean(r2s)) if r2s else None,
                "mse": float(np.mean(mses)) if mses else None,
            }
        else:
            entry["general"] = {"r2": None, "mse": None}
        for kind in ("sector_specific", "sector_agnostic"):
            spec = ExperimentSpec(
                scheme=base.scheme,
                lexicon_mode=base.lexicon_mode,
                pca_dims=base.pca_dims,
                fusion=base.fusion,
                horizons=base.horizons,
                split=SplitSpec(
                    kind=kind,
                    k=base.split.k,
                    seed=seeds["cv"],
                    sector=sector,
                    sampling_seed=seeds["sampling"],
                ),
            )
            try:
                report = run_experiment_on_tables(
                    spec, corpus, labels, feats, lex, table, options
                )
                r2, ms = aggregate(report)
                entry[kind] = {"r2": r2, "mse": ms}
            except RiskvolError as exc:
                entry[kind] = {"error": f"{type(exc).__name__}: {exc}"}
        try:
            ranked = sector_coefficient_report(
                corpus, labels, lex_eff, sector, WeightingSpec(scheme="TC"), table
            )
            entry["top_terms"] = [
                {"term": t, "coefficient": c} for t, c in ranked[:top_n]
            ]
        except RiskvolError as exc:
            entry["top_terms"] = []
            entry["coefficients_error"] = f"{type(exc).__name__}: {exc}"
        results[sector] = entry

    payload = {
        "sectors": results,
        "skipped": [
            {"sector": s, "n_docs": n, "reason": f"fewer than {min_docs} documents"}
            for s, n in skipped
        ],
    }
    _write_json(out / "sectors.json", payload)

    def fmt(cell):
        if not cell or cell.get("r2") is None or "error" in cell:
            return "failed"
        return f"{cell['r2']:.4f}"

    lines = [f"{'sector':>8} {'docs':>6} {'general':>10} {'specific':>10} {'agnostic':>10}"]
    for sector, entry in sorted(results.items()):
        lines.append(
            f"{sector:>8} {entry['n_docs']:>6} {fmt(entry.get('general')):>10} "
            f"{fmt(entry.get('sector_specific')):>10} {fmt(entry.get('sector_agnostic')):>10}"
        )
    for sector, n in skipped:
        lines.append(f"{sector:>8} {n:>6} {'skipped':>10}")
    _write_text(out / "sectors.txt", "\n".join(lines) + "\n")

    coef_lines = ["sector\trank\tterm\tcoefficient"]
    for sector, entry in sorted(results.items()):
        for rank, item in enumerate(entry.get("top_terms", []), start=1):
            coef_lines.append(
                f"{sector}\t{rank}\t{item['term']}\t{item['coefficient']!r}"
            )
    _write_text(out / "coefficients.tsv", "\n".join(coef_lines) + "\n")
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "labels": cmd_labels,
    "evaluate": cmd_evaluate,
    "drift": cmd_drift,
    "sectors": cmd_sectors,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskvol",
        description="Volatility forecasting from Risk Factors text",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the run config file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a scalar config key (repeatable)",
    )
    parser.add_argument("--out", help="override paths.out_dir")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = Config.from_file(args.config)
        for item in args.overrides:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            key, _, value = item.partition("=")
            config.set(key.strip(), value.strip())
        if args.out:
            config.set("paths.out_dir", args.out)
        config.seeds()
        return _COMMANDS[args.command](config)
    except (RiskvolError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
