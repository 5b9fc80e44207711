"""Batch command-line front end for the detection pipeline.

Subcommands mirror the pipeline stages and exchange artifacts through a run
directory, so each stage reads and writes only its declared files::

    data.jsonl                      synth
    corpus_{view}.jsonl             textualize
    emb_{view}.emb                  embed       (cache file = matrix artifact)
    model_{view}.aem                train
    scores_{view}_{detector}.csv    score / baselines
    report/                         eval / tsne

``pipeline`` chains everything in-process from one JSON config plus a master
seed.  Per-stage seeds derive from the master via a stage-name split, so any
stage can be reproduced in isolation; with the hashing backend the whole run
— report bytes included — is deterministic.  Flags override config fields,
which override built-in defaults.

Exit codes: 0 success, 1 structured pipeline error (the message names the
error class), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import autoencoder, embedding, evaluation, ingest, synth, textualize, tsne
from .errors import ProvDetectError
from .records import View
from .rng import Xoshiro256StarStar, derive_seed

logger = logging.getLogger(__name__)

ENV_EMBED_URL = "PROVDETECT_EMBED_URL"

VIEW_NAMES = tuple(v.value for v in View)

DEFAULT_CONFIG: dict = {
    "dataset_id": "synthetic",
    "seed": 0,
    "out_dir": "run",
    "views": ["PA"],
    "synth": {
        "n_processes": 1000,
        "contamination": 0.01,
        "benign_profiles": list(synth.PROFILES),
    },
    "split": {"val_fraction": 0.15, "test_fraction": 0.25},
    "backend": {"kind": "hash", "dim": 768, "url": None},
    "train": {"epochs": 15, "batch_size": 128, "val_fraction": 0.1},
    "threshold": {"strategy": "benign_quantile", "q": 0.99},
    "tsne": {"view": None, "perplexity": 30, "iters": 500, "max_points": 200},
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path: Optional[str], args: argparse.Namespace) -> dict:
    """Defaults ← config file ← flags, in increasing precedence."""
    cfg = DEFAULT_CONFIG
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = _merge(cfg, json.load(fh))
    if getattr(args, "seed", None) is not None:
        cfg = _merge(cfg, {"seed": args.seed})
    if getattr(args, "view", None):
        cfg = _merge(cfg, {"views": [args.view]})
    if getattr(args, "backend", None):
        cfg = _merge(cfg, {"backend": {"kind": args.backend}})
    url = getattr(args, "url", None) or os.environ.get(ENV_EMBED_URL)
    if url:
        cfg = _merge(cfg, {"backend": {"url": url}})
    if getattr(args, "out", None):
        cfg = _merge(cfg, {"out_dir": args.out})
    return cfg


def _synth_config(cfg: dict) -> synth.SynthConfig:
    s = cfg["synth"]
    campaign = synth.CampaignConfig(
        **{k: tuple(v) for k, v in s.get("campaign", {}).items()}
    )
    return synth.SynthConfig(
        n_processes=s["n_processes"],
        contamination=s["contamination"],
        benign_profiles=tuple(s["benign_profiles"]),
        seed=s.get("seed", derive_seed(cfg["seed"], "synth")),
        campaign=campaign,
    )


def _paths(cfg: dict) -> dict:
    out = cfg["out_dir"]
    return {
        "out": out,
        "data": os.path.join(out, "data.jsonl"),
        "corpus": lambda view: os.path.join(out, f"corpus_{view}.jsonl"),
        "emb": lambda view: os.path.join(out, f"emb_{view}.emb"),
        "model": lambda view: os.path.join(out, f"model_{view}.aem"),
        "scores": lambda view, det: os.path.join(out, f"scores_{view}_{det}.csv"),
        "report": os.path.join(out, "report"),
    }


def _make_backend(cfg: dict) -> embedding.EmbeddingBackend:
    b = cfg["backend"]
    if b["kind"] == "hash":
        return embedding.HashingBackend(dim=b.get("dim", embedding.DEFAULT_DIM))
    if b["kind"] == "remote":
        url = b.get("url")
        if not url:
            raise UsageError("remote backend needs --url, backend.url, or "
                             f"${ENV_EMBED_URL}")
        return embedding.RemoteBackend(url, dim=b.get("dim", embedding.DEFAULT_DIM))
    raise UsageError(f"unknown backend kind {b['kind']!r}")


class UsageError(Exception):
    """Bad invocation — reported on stderr with exit code 2."""


def _load_records(path: str):
    with open(path, "rb") as fh:
        return ingest.parse_jsonl(fh)


def _split_indices(cfg: dict, labels: list[int]):
    return ingest.split_indices(
        labels,
        cfg["split"]["val_fraction"],
        cfg["split"]["test_fraction"],
        derive_seed(cfg["seed"], "split"),
    )


def _write_scores(path: str, scores: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("record_index,score\n")
        for i, s in enumerate(scores):
            fh.write(f"{i},{repr(float(s))}\n")


def _read_scores(path: str, n: int) -> np.ndarray:
    out = np.full(n, np.nan)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if header.strip() != "record_index,score":
            raise ValueError(f"{path}: unexpected scores header {header!r}")
        for line in fh:
            idx, val = line.strip().split(",")
            out[int(idx)] = float(val)
    if np.isnan(out).any():
        raise ValueError(f"{path}: scores missing for some records")
    return out


# ---------------------------------------------------------------- stages


def stage_synth(cfg: dict) -> str:
    paths = _paths(cfg)
    os.makedirs(paths["out"], exist_ok=True)
    records = synth.generate_dataset(_synth_config(cfg))
    ingest.write_jsonl(records, paths["data"])
    logger.info("synth: wrote %d records to %s", len(records), paths["data"])
    return paths["data"]


def stage_textualize(cfg: dict, view: str) -> str:
    paths = _paths(cfg)
    records = _load_records(paths["data"])
    docs = textualize.render_corpus(records, View(view))
    out = paths["corpus"](view)
    textualize.write_corpus(docs, out)
    logger.info("textualize: %d sentences (%s) to %s", len(docs), view, out)
    return out


def stage_embed(cfg: dict, view: str) -> embedding.EmbeddingMatrix:
    paths = _paths(cfg)
    docs = textualize.read_corpus(paths["corpus"](view))
    backend = _make_backend(cfg)
    matrix = embedding.embed_corpus(docs, backend, cache_path=paths["emb"](view))
    logger.info("embed: %d × %d (%s) via %s", matrix.manifest["count"],
                matrix.manifest["dim"], view, matrix.manifest["backend_id"])
    return matrix


def stage_train(cfg: dict, view: str) -> autoencoder.AutoEncoder:
    paths = _paths(cfg)
    records = _load_records(paths["data"])
    train_idx, _, _ = _split_indices(cfg, [r.label for r in records])
    matrix = embedding.load_cache(paths["emb"](view))
    dim = matrix.manifest["dim"]
    model = autoencoder.AutoEncoder(
        widths=(dim, 512, 128, 512, dim),
        seed=derive_seed(cfg["seed"], f"ae-init-{view}"),
    )
    config = autoencoder.TrainConfig(
        epochs=cfg["train"]["epochs"],
        batch_size=cfg["train"]["batch_size"],
        seed=derive_seed(cfg["seed"], f"ae-shuffle-{view}"),
        val_fraction=cfg["train"]["val_fraction"],
    )
    history = model.fit(matrix.rows[list(train_idx)], config)
    model.save(paths["model"](view))
    logger.info("train(%s): %d benign rows, final mse %.3e",
                view, len(train_idx), history.train_mse[-1])
    return model


def stage_score(cfg: dict, view: str) -> np.ndarray:
    paths = _paths(cfg)
    model = autoencoder.AutoEncoder.load(paths["model"](view))
    matrix = embedding.load_cache(paths["emb"](view))
    scores = model.score(matrix.rows)
    _write_scores(paths["scores"](view, "MPNet-AE"), scores)
    return scores


def stage_baselines(cfg: dict, view: str) -> None:
    from . import baselines

    paths = _paths(cfg)
    records = _load_records(paths["data"])
    train_idx, _, _ = _split_indices(cfg, [r.label for r in records])
    matrix = embedding.load_cache(paths["emb"](view))
    train_rows = matrix.rows[list(train_idx)].astype(np.float64)
    all_rows = matrix.rows.astype(np.float64)

    forest = baselines.iforest_fit(train_rows, seed=derive_seed(cfg["seed"], f"iforest-{view}"))
    _write_scores(paths["scores"](view, "IForest"), forest.score(all_rows))

    svm = baselines.ocsvm_fit(train_rows)
    _write_scores(paths["scores"](view, "OC-SVM"), svm.score(all_rows))

    pca = baselines.pca_fit(train_rows)
    _write_scores(paths["scores"](view, "PCA"), pca.score(all_rows))
    logger.info("baselines(%s): IForest, OC-SVM, PCA scored", view)


def stage_eval(cfg: dict) -> dict:
    paths = _paths(cfg)
    records = _load_records(paths["data"])
    labels = np.array([r.label for r in records])
    _, val_idx, test_idx = _split_indices(cfg, [int(x) for x in labels])
    val_idx = list(val_idx)
    test_idx = list(test_idx)
    rule = evaluation.ThresholdRule(
        strategy=cfg["threshold"]["strategy"], q=cfg["threshold"].get("q", 0.99)
    )
    cells = []
    for view in cfg["views"]:
        for detector in evaluation.DETECTOR_COLUMNS:
            scores = _read_scores(paths["scores"](view, detector), len(records))
            threshold = evaluation.select_threshold(scores[val_idx], labels[val_idx], rule)
            cells.append(evaluation.ReportCell(
                dataset=cfg["dataset_id"],
                view=view,
                detector=detector,
                scores=scores[test_idx],
                labels=labels[test_idx],
                threshold=threshold,
            ))
    summary = evaluation.emit_report(cells, paths["report"])
    logger.info("eval: %d cells to %s", len(cells), paths["report"])
    return summary


def stage_tsne(cfg: dict) -> str:
    paths = _paths(cfg)
    view = cfg["tsne"]["view"] or cfg["views"][0]
    records = _load_records(paths["data"])
    labels = np.array([r.label for r in records])
    _, _, test_idx = _split_indices(cfg, [int(x) for x in labels])
    test_idx = list(test_idx)
    matrix = embedding.load_cache(paths["emb"](view))
    max_points = cfg["tsne"]["max_points"]
    if len(test_idx) > max_points:
        rng = Xoshiro256StarStar(derive_seed(cfg["seed"], f"tsne-sample-{view}"))
        chosen = [test_idx[i] for i in rng.sample_indices(len(test_idx), max_points)]
    else:
        chosen = test_idx
    coords = tsne.tsne(
        matrix.rows[chosen].astype(np.float64),
        perplexity=cfg["tsne"]["perplexity"],
        iters=cfg["tsne"]["iters"],
        seed=derive_seed(cfg["seed"], f"tsne-{view}"),
    )
    os.makedirs(paths["report"], exist_ok=True)
    out = os.path.join(paths["report"], "tsne.csv")
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,y,label\n")
        for (x, y), lab in zip(coords, labels[chosen]):
            fh.write(f"{repr(float(x))},{repr(float(y))},{int(lab)}\n")
    logger.info("tsne: %d points (%s) to %s", len(chosen), view, out)
    return out


def run_pipeline(cfg: dict) -> None:
    stage_synth(cfg)
    for view in cfg["views"]:
        stage_textualize(cfg, view)
        stage_embed(cfg, view)
        stage_train(cfg, view)
        stage_score(cfg, view)
        stage_baselines(cfg, view)
    stage_eval(cfg)
    stage_tsne(cfg)


# ---------------------------------------------------------------- entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="provdetect",
        description="Provenance-log anomaly detection via sentence embeddings "
                    "and autoencoder reconstruction error.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("synth", "generate a synthetic labeled corpus (data.jsonl)"),
        ("textualize", "render records into per-view sentences"),
        ("embed", "embed a sentence corpus into the cache file"),
        ("train", "fit the autoencoder on the benign train split"),
        ("score", "write autoencoder reconstruction-error scores"),
        ("baselines", "fit and score IForest, OC-SVM, and PCA"),
        ("eval", "emit the report directory (heatmap, ROC, summary)"),
        ("tsne", "project test embeddings to 2-D (report/tsne.csv)"),
        ("pipeline", "run every stage end-to-end from one config"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", help="JSON config file")
        p.add_argument("--seed", type=int, metavar="U64", help="master seed override")
        p.add_argument("--view", choices=VIEW_NAMES, help="context view override")
        p.add_argument("--backend", choices=("hash", "remote"), help="embedding backend")
        p.add_argument("--url", metavar="URL",
                       help=f"remote backend URL (or ${ENV_EMBED_URL})")
        p.add_argument("--out", metavar="PATH", help="run directory override")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args)
        views = cfg["views"]
        if args.command == "synth":
            stage_synth(cfg)
        elif args.command == "textualize":
            for view in views:
                stage_textualize(cfg, view)
        elif args.command == "embed":
            for view in views:
                stage_embed(cfg, view)
        elif args.command == "train":
            for view in views:
                stage_train(cfg, view)
        elif args.command == "score":
            for view in views:
                stage_score(cfg, view)
        elif args.command == "baselines":
            for view in views:
                stage_baselines(cfg, view)
        elif args.command == "eval":
            stage_eval(cfg)
        elif args.command == "tsne":
            stage_tsne(cfg)
        elif args.command == "pipeline":
            run_pipeline(cfg)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except (ProvDetectError, ValueError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
