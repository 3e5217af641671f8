"""Batch command-line interface.

Subcommands: ingest, train, tune, eval, augment, predict. Settings come from
a flat ``key = value`` config file overridden by CLI flags; every run writes
its resolved settings and seed next to its outputs. Exit codes: 0 success,
2 input/integrity error, 3 training or evaluation contract error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt
from .augment import (
    adapt_arc,
    balanced_class_weights,
    load_arc_csv,
    load_wordnet,
    ngram_lm,
    parse_conllu,
    synthesize_flipped_samples,
)
from .data import (
    StanceLabel,
    class_distribution,
    headline_split,
    load_bodies_csv,
    load_stances_csv,
    write_stances_csv,
)
from .errors import BaitError, ContractError, NumericalError
from .features import EmbeddingBundle, PairDataset
from .hpo import SearchSpace, tune
from .metrics import evaluate
from .pipeline import BaitModel, bait_predict_batch
from .relatednet import RelatedNetConfig, train_relatednet
from .stage2 import AgreemNetConfig, TopKNetConfig, train_stage2
from .store import load_embedding_store, read_sidecar
from .training import TrainingConfig

log = logging.getLogger("bait")

EXIT_INPUT = 2
EXIT_CONTRACT = 3

DEFAULTS = {
    "sim_dim": 384,
    "nli_dim": 768,
    "body_len": 50,
    "model": "topknet",
    "epochs": 30,
    "batch_size": None,  # model-specific default
    "lr": None,
    "patience": 5,
    "validation_fraction": 0.3,
    "threshold": 0.5,
    "seed": 0,
    "budget": 16,
    "trial_epochs": 10,
}

MODEL_DEFAULTS = {  # batch size and learning rate per model kind
    "relatednet": (32, 1e-4),
    "topknet": (64, 1e-3),
    "agreemnet": (128, 1e-3),
}

_PATH_KEYS = ("stances", "bodies", "sidecar", "sim_head_store",
              "nli_head_store", "sim_body_store", "nli_body_store",
              "parses", "wn_index", "wn_data", "synthetic", "arc",
              "relatednet_ckpt", "stage2_ckpt", "input", "space")


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def read_config_file(path) -> dict:
    """Flat UTF-8 ``key = value`` lines; '#' starts a comment."""
    settings = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(),
                                  start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CommandError(f"{path}:{line_no}: expected key = value", EXIT_INPUT)
        key, value = (part.strip() for part in line.split("=", 1))
        settings[key] = value
    return settings


def _coerce(key: str, value):
    if value is None or not isinstance(value, str):
        return value
    if key in _PATH_KEYS or key in ("model", "out_dir"):
        return value
    lowered = value.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def resolve_settings(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        for key, value in read_config_file(args.config).items():
            settings[key] = _coerce(key, value)
    for key, value in vars(args).items():
        if key in ("command", "config", "func") or value is None:
            continue
        settings[key] = _coerce(key, value)
    batch, lr = MODEL_DEFAULTS.get(settings.get("model", "topknet"), (64, 1e-3))
    if settings.get("batch_size") is None:
        settings["batch_size"] = batch
    if settings.get("lr") is None:
        settings["lr"] = lr
    return settings


def write_resolved_config(settings: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"{key} = {settings[key]}" for key in sorted(settings)
             if settings[key] is not None]
    (out_dir / "run_config.txt").write_text("\n".join(lines) + "\n",
                                            encoding="utf-8")


def _require(settings: dict, *keys: str) -> None:
    missing = [k for k in keys if not settings.get(k)]
    if missing:
        raise CommandError(f"missing required setting(s): {', '.join(missing)}",
                           EXIT_INPUT)


def _load_dataset(settings: dict):
    """stances + sidecar + four stores -> (samples, headlines, dataset)."""
    _require(settings, "stances", "sim_head_store", "nli_head_store",
             "sim_body_store", "nli_body_store")
    headline_table = None
    if settings.get("sidecar"):
        headline_table = read_sidecar(settings["sidecar"])
    samples, headlines = load_stances_csv(settings["stances"], headline_table)
    bundle = EmbeddingBundle(
        sim_head=load_embedding_store(settings["sim_head_store"]),
        nli_head=load_embedding_store(settings["nli_head_store"]),
        sim_body=load_embedding_store(settings["sim_body_store"]),
        nli_body=load_embedding_store(settings["nli_body_store"]),
    )
    for name, store, expected in (
        ("SIM", bundle.sim_head, settings["sim_dim"]),
        ("NLI", bundle.nli_head, settings["nli_dim"]),
    ):
        if store.dim != expected:
            raise CommandError(
                f"{name} store dim {store.dim} != configured {expected}",
                EXIT_INPUT)
    dataset = PairDataset(samples, bundle, body_len=int(settings["body_len"]))
    return samples, headlines, dataset


def cmd_ingest(settings: dict) -> int:
    samples, headlines, dataset = _load_dataset(settings)
    if settings.get("bodies"):
        bodies = load_bodies_csv(settings["bodies"])
        missing = {s.body_id for s in samples} - set(bodies)
        if missing:
            raise CommandError(
                f"{len(missing)} body id(s) missing from bodies CSV", EXIT_INPUT)
        print(f"bodies: {len(bodies)}")
    dist = class_distribution(samples)
    print(f"samples: {dist.total}")
    print(f"headlines: {len(headlines)}")
    for label in StanceLabel:
        print(f"  {label.text:>10}: {dist.counts[label]:>7} "
              f"({100 * dist.proportions[label]:.1f}%)")
    print(f"dataset rows usable: {len(dataset)}")
    return 0


def _merge_extra_samples(settings, samples, headlines, dataset, split):
    """Append synthetic/adapted samples to the train split only."""
    extra = []
    val_ids = split.validation_headline_ids
    for key in ("synthetic", "arc"):
        path = settings.get(key)
        if not path:
            continue
        extra_samples, new_headlines = load_stances_csv(path, headlines)
        if len(new_headlines) > len(headlines):
            raise CommandError(
                f"{path}: {len(new_headlines) - len(headlines)} headline(s) "
                "not present in the sidecar/stores; run the extraction tool "
                "on the augmented corpus first", EXIT_INPUT)
        kept = [s for s in extra_samples if s.headline_id not in val_ids]
        log.info("%s: merged %d samples (%d dropped to keep the validation "
                 "split headline-disjoint)", key, len(kept),
                 len(extra_samples) - len(kept))
        extra.extend(kept)
    return extra


def cmd_train(settings: dict) -> int:
    _require(settings, "out_dir", "model")
    out_dir = Path(settings["out_dir"])
    samples, headlines, dataset = _load_dataset(settings)
    kind = settings["model"]
    if kind not in MODEL_DEFAULTS:
        raise CommandError(f"unknown model {kind!r}", EXIT_INPUT)
    split = headline_split(samples, float(settings["validation_fraction"]),
                           int(settings["seed"]))
    train_samples = split.train + _merge_extra_samples(
        settings, samples, headlines, dataset, split)
    train_ds = PairDataset(train_samples, dataset.bundle, dataset.body_len)
    val_ds = dataset.subset_from(split.validation)

    if kind == "relatednet":
        train_labels = (train_ds.labels() != int(StanceLabel.UNR)).astype(int)
        n_classes = 2
        config = RelatedNetConfig(sim_dim=int(settings["sim_dim"]))
    else:
        related = [s for s in train_ds.samples if s.stance != StanceLabel.UNR]
        train_ds = train_ds.subset_from(related)
        val_related = [s for s in val_ds.samples if s.stance != StanceLabel.UNR]
        val_ds = val_ds.subset_from(val_related)
        train_labels = train_ds.labels()
        n_classes = 3
        config = (TopKNetConfig(nli_dim=int(settings["nli_dim"]))
                  if kind == "topknet"
                  else AgreemNetConfig(sim_dim=int(settings["sim_dim"]),
                                       nli_dim=int(settings["nli_dim"])))

    class_weight = None
    if settings.get("weighted_loss"):
        counts = np.bincount(train_labels, minlength=n_classes)
        class_weight = balanced_class_weights(counts)
        identity = float(np.dot(counts, class_weight))
        log.info("weighted loss: weights=%s (sum n_c*w_c = %.6f = N = %d)",
                 np.round(class_weight, 4).tolist(), identity, counts.sum())

    tcfg = TrainingConfig(
        epochs=int(settings["epochs"]), batch_size=int(settings["batch_size"]),
        lr=float(settings["lr"]), patience=int(settings["patience"]),
        seed=int(settings["seed"]), class_weight=class_weight,
    )
    if kind == "relatednet":
        result = train_relatednet(train_ds, val_ds, config, tcfg)
    else:
        result = train_stage2(kind, train_ds, val_ds, config, tcfg)

    write_resolved_config(settings, out_dir)
    ckpt_path = out_dir / f"{kind}.ckpt"
    ckpt.save_checkpoint(ckpt_path, config, result.params)
    history_payload = {
        "model": kind,
        "seed": int(settings["seed"]),
        "parameter_count": result.params.count(),
        "best_epoch": result.best_epoch,
        "class_weight": None if class_weight is None else class_weight.tolist(),
        "epochs": result.history,
    }
    (out_dir / f"{kind}_history.json").write_text(
        json.dumps(history_payload, indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    print(f"checkpoint: {ckpt_path} ({result.params.count()} parameters)")
    if result.history and "val_uaca" in result.history[-1]:
        best = max(h["val_uaca"] for h in result.history if "val_uaca" in h)
        print(f"best validation class-balanced accuracy: {best:.4f}")
    return 0


def cmd_eval(settings: dict) -> int:
    _require(settings, "relatednet_ckpt", "stage2_ckpt", "out_dir")
    _, _, dataset = _load_dataset(settings)
    rn_kind, rn_config, rn_params = ckpt.load_checkpoint(settings["relatednet_ckpt"])
    s2_kind, s2_config, s2_params = ckpt.load_checkpoint(settings["stage2_ckpt"])
    if rn_kind != "relatednet":
        raise CommandError(f"{settings['relatednet_ckpt']} is a {rn_kind} "
                           "checkpoint", EXIT_CONTRACT)
    if s2_kind not in ("topknet", "agreemnet"):
        raise CommandError(f"{settings['stage2_ckpt']} is a {s2_kind} "
                           "checkpoint", EXIT_CONTRACT)
    model = BaitModel(rn_config, rn_params, s2_kind, s2_config, s2_params,
                      threshold=float(settings["threshold"]))
    predictions = bait_predict_batch(model, dataset)
    report = evaluate(predictions, dataset.labels())
    out_dir = Path(settings["out_dir"])
    write_resolved_config(settings, out_dir)
    (out_dir / "report.json").write_text(report.to_json(indent=2) + "\n",
                                         encoding="utf-8")
    print(report.render_confusion())
    for label in StanceLabel:
        print(f"{label.text:>10} accuracy: "
              f"{100 * report.per_class_accuracy[label]:.1f}%")
    print(f"overall accuracy: {100 * report.overall_accuracy:.1f}%")
    print(f"weighted score: {report.fnc_score_percent:.1f}%")
    return 0


def cmd_augment(settings: dict) -> int:
    _require(settings, "out_dir")
    out_dir = Path(settings["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    wrote_anything = False

    if settings.get("parses"):
        _require(settings, "stances", "wn_index", "wn_data")
        samples, headlines = load_stances_csv(
            settings["stances"],
            read_sidecar(settings["sidecar"]) if settings.get("sidecar") else None)
        wn = load_wordnet(settings["wn_index"], settings["wn_data"])
        parses = {p.headline_id: p for p in parse_conllu(settings["parses"])}
        lm = ngram_lm(headlines)
        directions = (StanceLabel.AGR, StanceLabel.DSG) \
            if settings.get("flip_both") else (StanceLabel.AGR,)
        result = synthesize_flipped_samples(samples, parses, wn, lm,
                                            id_base=len(headlines),
                                            directions=directions)
        all_headlines = headlines + result.headlines
        write_stances_csv(out_dir / "synthetic_stances.csv", result.samples,
                          all_headlines)
        with open(out_dir / "synthesis_log.jsonl", "w", encoding="utf-8") as fh:
            for entry in result.log:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
        with open(out_dir / "synthetic_headlines.txt", "w", encoding="utf-8") as fh:
            for text in result.headlines:
                fh.write(text + "\n")
        print(f"synthesized {len(result.samples)} flipped sample(s); methods: "
              f"{dict(sorted(result.method_counts.items()))}")
        wrote_anything = True

    if settings.get("arc"):
        corpus = adapt_arc(load_arc_csv(settings["arc"]),
                           seed=int(settings["seed"]))
        write_stances_csv(out_dir / "arc_stances.csv", corpus.samples,
                          corpus.headlines)
        with open(out_dir / "arc_bodies.csv", "w", encoding="utf-8", newline="") as fh:
            import csv as _csv

            writer = _csv.writer(fh)
            writer.writerow(["Body ID", "articleBody"])
            for body_id in sorted(corpus.bodies):
                writer.writerow([body_id, corpus.bodies[body_id]])
        with open(out_dir / "arc_headlines.txt", "w", encoding="utf-8") as fh:
            for text in corpus.headlines:
                fh.write(text + "\n")
        dist = class_distribution(corpus.samples)
        print(f"adapted {dist.total} samples "
              f"(unrelated {100 * dist.proportions[StanceLabel.UNR]:.1f}%)")
        wrote_anything = True

    if not wrote_anything:
        raise CommandError("augment needs --parses (negation synthesis) "
                           "and/or --arc", EXIT_INPUT)
    write_resolved_config(settings, out_dir)
    return 0


def cmd_tune(settings: dict) -> int:
    _require(settings, "out_dir", "model")
    kind = settings["model"]
    if kind not in MODEL_DEFAULTS:
        raise CommandError(f"unknown model {kind!r}", EXIT_INPUT)
    space = None
    if settings.get("space"):
        try:
            space = SearchSpace.from_json(Path(settings["space"]).read_text())
        except (KeyError, ValueError, BaitError) as exc:
            raise CommandError(f"invalid space file: {exc}", EXIT_INPUT) from exc
    samples, _, dataset = _load_dataset(settings)
    split = headline_split(samples, float(settings["validation_fraction"]),
                           int(settings["seed"]))
    train_ds = dataset.subset_from(split.train)
    val_ds = dataset.subset_from(split.validation)
    if kind != "relatednet":
        train_ds = train_ds.subset_from(
            [s for s in train_ds.samples if s.stance != StanceLabel.UNR])
        val_ds = val_ds.subset_from(
            [s for s in val_ds.samples if s.stance != StanceLabel.UNR])
    out_dir = Path(settings["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    write_resolved_config(settings, out_dir)
    best, history = tune(kind, train_ds, val_ds, space,
                         budget=int(settings["budget"]),
                         seed=int(settings["seed"]),
                         epochs=int(settings["trial_epochs"]),
                         history_path=out_dir / "tune_history.jsonl")
    print(f"trials: {len(history)}")
    print(f"best objective: {best.objective:.4f}")
    print(f"best config: {json.dumps(best.config, sort_keys=True)}")
    return 0


def cmd_predict(settings: dict) -> int:
    _require(settings, "input", "relatednet_ckpt", "stage2_ckpt", "sidecar",
             "out_dir")
    import csv as _csv

    sidecar = read_sidecar(settings["sidecar"])
    text_to_id = {t: i for i, t in enumerate(sidecar)}
    rows = []
    with open(settings["input"], encoding="utf-8", newline="") as fh:
        reader = _csv.DictReader(fh)
        if not reader.fieldnames or "Headline" not in reader.fieldnames \
                or "Body ID" not in reader.fieldnames:
            raise CommandError("input CSV needs Headline and Body ID columns",
                               EXIT_INPUT)
        for row in reader:
            rows.append((row["Headline"], int(row["Body ID"])))

    from .data import SamplePair, normalize_headline

    samples = []
    for headline, body_id in rows:
        text = normalize_headline(headline)
        if text not in text_to_id:
            raise CommandError(f"headline not in sidecar: {text!r}", EXIT_INPUT)
        samples.append(SamplePair(text_to_id[text], body_id, StanceLabel.UNR))

    settings = dict(settings)
    bundle = EmbeddingBundle(
        sim_head=load_embedding_store(settings["sim_head_store"]),
        nli_head=load_embedding_store(settings["nli_head_store"]),
        sim_body=load_embedding_store(settings["sim_body_store"]),
        nli_body=load_embedding_store(settings["nli_body_store"]),
    )
    dataset = PairDataset(samples, bundle, body_len=int(settings["body_len"]))
    rn_kind, rn_config, rn_params = ckpt.load_checkpoint(settings["relatednet_ckpt"])
    s2_kind, s2_config, s2_params = ckpt.load_checkpoint(settings["stage2_ckpt"])
    model = BaitModel(rn_config, rn_params, s2_kind, s2_config, s2_params,
                      threshold=float(settings["threshold"]))
    predictions = bait_predict_batch(model, dataset)
    out_dir = Path(settings["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "predictions.csv"
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["Headline", "Body ID", "Stance"])
        for (headline, body_id), label in zip(rows, predictions):
            writer.writerow([headline, body_id, StanceLabel(int(label)).text])
    print(f"wrote {out_path} ({len(rows)} predictions)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bait", description="Hierarchical stance detection over frozen "
                                 "sentence embeddings")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value settings file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--stances")
        p.add_argument("--bodies")
        p.add_argument("--sidecar")
        p.add_argument("--sim-head-store", dest="sim_head_store")
        p.add_argument("--nli-head-store", dest="nli_head_store")
        p.add_argument("--sim-body-store", dest="sim_body_store")
        p.add_argument("--nli-body-store", dest="nli_body_store")
        p.add_argument("--sim-dim", dest="sim_dim", type=int)
        p.add_argument("--nli-dim", dest="nli_dim", type=int)
        p.add_argument("--body-len", dest="body_len", type=int)

    p = sub.add_parser("ingest", help="validate data files and print totals")
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train one model stage")
    common(p)
    p.add_argument("--model", choices=list(MODEL_DEFAULTS))
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--patience", type=int)
    p.add_argument("--validation-fraction", dest="validation_fraction", type=float)
    p.add_argument("--weighted-loss", dest="weighted_loss", action="store_const",
                   const=True)
    p.add_argument("--synthetic", help="stances CSV of synthesized samples")
    p.add_argument("--arc", help="stances CSV of adapted external samples")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tune", help="Bayesian hyperparameter search")
    common(p)
    p.add_argument("--model", choices=list(MODEL_DEFAULTS))
    p.add_argument("--space", help="JSON search-space file")
    p.add_argument("--budget", type=int)
    p.add_argument("--trial-epochs", dest="trial_epochs", type=int)
    p.add_argument("--validation-fraction", dest="validation_fraction", type=float)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("eval", help="hierarchical evaluation on a test set")
    common(p)
    p.add_argument("--relatednet", dest="relatednet_ckpt")
    p.add_argument("--stage2", dest="stage2_ckpt")
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("augment", help="synthesize flipped samples / adapt ARC")
    common(p)
    p.add_argument("--parses", help="CoNLL-U parses of the headlines")
    p.add_argument("--wn-index", dest="wn_index")
    p.add_argument("--wn-data", dest="wn_data")
    p.add_argument("--flip-both", dest="flip_both", action="store_const",
                   const=True)
    p.add_argument("--arc", help="raw ARC CSV to adapt")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("predict", help="label a headline/body-id CSV")
    common(p)
    p.add_argument("--input")
    p.add_argument("--relatednet", dest="relatednet_ckpt")
    p.add_argument("--stage2", dest="stage2_ckpt")
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_predict)

    return parser


_INPUT_ERRORS = (FileNotFoundError, BaitError)
_CONTRACT_ERRORS = (ContractError, NumericalError)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        settings = resolve_settings(args)
        log.info("seed: %s", settings.get("seed"))
        return args.func(settings)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except _CONTRACT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
