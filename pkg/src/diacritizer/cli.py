"""Command-line entry point.

Subcommands: stats, train, predict, experiment, synth.  Every run is
reproducible from its config plus seed; configs are copied into the
output directory.  Exit codes: 0 success, 2 input error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import neural
from .brown import brown_cluster
from .corpus import (
    Corpus,
    compute_stats,
    cross_dialect_overlap,
    load_corpus,
    make_folds,
    overlap_stats,
    save_corpus,
)
from .crf import crf_decode, crf_train, load_crf, save_crf
from .errors import (
    CorpusParseError,
    DiacritizerError,
    DuplicateVerseId,
    InvalidConfig,
    NonFiniteLoss,
    NonFiniteObjective,
)
from .experiments import ExperimentSpec, run_experiment, split_train_validation
from .evaluation import confusion
from .lookup import LookupTable, build_lookup, load_lookup, lookup_diacritize, save_lookup
from .script import DIACRITICS, TaggedWord, induce_tagset, transliterate
from .seeds import sub_seed
from .serialize import load_container
from .synth import SynthConfig, synth_generate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

_NEURAL_KEYS = set(neural.NeuralConfig.__dataclass_fields__)
_CRF_KEYS = {"c", "max_iter", "tol", "use_brown_clusters", "brown_k"}
_SYNTH_KEYS = set(SynthConfig.__dataclass_fields__)
_CORPUS_KEYS = {"path", "encoding", "label"}
_TOP_KEYS = {"seed", "k", "model", "regime", "corpora", "neural", "crf", "synth", "jobs"}


@dataclass
class RunConfig:
    seed: int = 0
    k: int = 5
    model: str = "dnn"
    regime: str = "uni"
    corpora: List[dict] = field(default_factory=list)
    neural: Dict = field(default_factory=dict)
    crf: Dict = field(default_factory=dict)
    synth: Optional[Dict] = None
    jobs: int = 1
    raw: Dict = field(default_factory=dict)


def _reject_unknown(mapping: dict, allowed: set, context: str) -> None:
    for key in mapping:
        if key not in allowed:
            raise InvalidConfig(f"unknown key {key!r} in {context}")


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    _reject_unknown(raw, _TOP_KEYS, "config")
    _reject_unknown(raw.get("neural", {}), _NEURAL_KEYS, "config.neural")
    _reject_unknown(raw.get("crf", {}), _CRF_KEYS, "config.crf")
    if raw.get("synth") is not None:
        _reject_unknown(raw["synth"], _SYNTH_KEYS, "config.synth")
    for i, entry in enumerate(raw.get("corpora", [])):
        _reject_unknown(entry, _CORPUS_KEYS, f"config.corpora[{i}]")
    cfg = RunConfig(
        seed=raw.get("seed", 0),
        k=raw.get("k", 5),
        model=raw.get("model", "dnn"),
        regime=raw.get("regime", "uni"),
        corpora=raw.get("corpora", []),
        neural=raw.get("neural", {}),
        crf=raw.get("crf", {}),
        synth=raw.get("synth"),
        jobs=raw.get("jobs", 1),
        raw=raw,
    )
    return cfg


def _load_corpora(cfg: RunConfig) -> List[Corpus]:
    corpora = []
    for entry in cfg.corpora:
        corpora.append(
            load_corpus(
                entry["path"],
                entry.get("encoding", "buckwalter"),
                entry.get("label", os.path.basename(entry["path"])),
            )
        )
    if cfg.synth is not None:
        pair = synth_generate(SynthConfig(**cfg.synth), sub_seed(cfg.seed, "synth"))
        corpora.extend([pair.corpus_a, pair.corpus_b])
    if not corpora:
        raise InvalidConfig("config names no corpora (need 'corpora' or 'synth')")
    return corpora


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _copy_config(cfg: RunConfig, out: str) -> None:
    _atomic_write(
        os.path.join(out, "config.json"),
        json.dumps(cfg.raw, indent=2, sort_keys=True) + "\n",
    )


def cmd_stats(args) -> int:
    corpora = [
        load_corpus(path, args.encoding, os.path.basename(path))
        for path in args.corpus
    ]
    lines: List[str] = []
    for corpus in corpora:
        label = corpus.dialect_label
        stats = compute_stats(corpus.words())
        lines.append(f"{label}.word_count\t{corpus.word_count()}")
        lines.append(f"{label}.verse_count\t{len(corpus.verses)}")
        lines.extend(f"{label}.{line}" for line in stats.report_lines())
        if len(corpus.verses) >= args.k:
            folds = make_folds(corpus, args.k, sub_seed(args.seed, f"split:{label}"))
            seen_vals, cover_vals = [], []
            for fold in folds:
                train = fold.select(corpus, "train") + fold.select(corpus, "validation")
                seen, cover = overlap_stats(train, fold.select(corpus, "test"))
                seen_vals.append(seen)
                cover_vals.append(cover)
            lines.append(f"{label}.test_seen_fraction\t{sum(seen_vals)/len(seen_vals):.4f}")
            lines.append(f"{label}.test_lookup_coverage\t{sum(cover_vals)/len(cover_vals):.4f}")
    if len(corpora) == 2:
        a, b = corpora
        vocab, agree = cross_dialect_overlap(a, b)
        lines.append(f"cross.vocab_overlap\t{vocab:.4f}")
        lines.append(f"cross.form_agreement\t{agree:.4f}")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if args.out:
        _atomic_write(os.path.join(args.out, "stats.tsv"), report)
    return EXIT_OK


def _train_pools(cfg: RunConfig, corpora: List[Corpus]) -> Tuple[List[TaggedWord], List[TaggedWord]]:
    train: List[TaggedWord] = []
    validation: List[TaggedWord] = []
    for corpus in corpora:
        t, v = split_train_validation(
            corpus, sub_seed(cfg.seed, f"trainval:{corpus.dialect_label}")
        )
        train.extend(t)
        validation.extend(v)
    return train, validation


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.raw["seed"] = args.seed
    out = args.out
    corpora = _load_corpora(cfg)
    train_words, validation_words = _train_pools(cfg, corpora)
    _copy_config(cfg, out)
    lookup_table = build_lookup(train_words + validation_words)
    save_lookup(lookup_table, os.path.join(out, "lookup.tsv"))
    if cfg.model == "lookup":
        pass  # the lookup table above is the whole model
    elif cfg.model == "crf":
        crf_opts = dict(cfg.crf)
        clusters = None
        if crf_opts.pop("use_brown_clusters", False):
            verses = tuple(
                tuple(w.base for w in v.tokens) for c in corpora for v in c.verses
            )
            clusters = brown_cluster(verses, crf_opts.pop("brown_k", 32))
        else:
            crf_opts.pop("brown_k", None)
        all_words = train_words + validation_words
        model = crf_train(all_words, induce_tagset(all_words), clusters=clusters, **crf_opts)
        save_crf(model, os.path.join(out, "model.diac"))
    elif cfg.model in ("dnn", "hybrid"):
        config = neural.NeuralConfig(**cfg.neural)
        model, history = neural.train(config, train_words, validation_words, cfg.seed)
        neural.save_neural(model, os.path.join(out, "model.diac"))
        _atomic_write(
            os.path.join(out, "history.tsv"), "\n".join(history.report_lines()) + "\n"
        )
    else:
        raise InvalidConfig(f"unknown model kind {cfg.model!r}")
    return EXIT_OK


def _load_any_model(path: str):
    kind, _, _ = load_container(path)
    if kind == "neural":
        return kind, neural.load_neural(path)
    if kind == "crf":
        return kind, load_crf(path)
    raise InvalidConfig(f"{path}: unsupported model kind {kind!r}")


def cmd_predict(args) -> int:
    kind, model = _load_any_model(args.model)
    table: Optional[LookupTable] = load_lookup(args.hybrid) if args.hybrid else None
    warned: set = set()

    def tag_word(base: str) -> TaggedWord:
        if table is not None:
            hit = lookup_diacritize(base, table)
            if hit is not None:
                return hit
        if kind == "neural":
            for ch in base:
                if ch not in model.char_to_id and ch not in warned:
                    warned.add(ch)
                    sys.stderr.write(f"warning: unknown character {ch!r} mapped to UNK\n")
            return neural.decode(model, base)
        return crf_decode(base, model)

    out_lines = []
    with open(args.input, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if args.encoding == "arabic" and line:
                line = transliterate(line, "to_buckwalter")
            tokens = []
            for idx, token in enumerate(line.split(" ")):
                if not token:
                    tokens.append(token)
                    continue
                if any(c in DIACRITICS for c in token):
                    raise CorpusParseError(0, idx, f"token {token!r} already diacritized")
                tokens.append(tag_word(token).render())
            rendered = " ".join(tokens)
            if args.encoding == "arabic" and rendered:
                rendered = transliterate(rendered, "to_arabic")
            out_lines.append(rendered)
    text = "\n".join(out_lines)
    if out_lines:
        text += "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.raw["seed"] = args.seed
    out = args.out
    corpora = _load_corpora(cfg)
    crf_opts = dict(cfg.crf)
    spec = ExperimentSpec(
        corpora=tuple(corpora),
        model=cfg.model,
        regime=cfg.regime,
        k=cfg.k,
        seed=cfg.seed,
        neural_config=neural.NeuralConfig(**cfg.neural),
        crf_c=crf_opts.get("c", 10.0),
        crf_max_iter=crf_opts.get("max_iter", 200),
        crf_tol=crf_opts.get("tol", 1e-4),
        use_brown_clusters=crf_opts.get("use_brown_clusters", False),
        brown_k=crf_opts.get("brown_k", 32),
        jobs=args.jobs if args.jobs is not None else cfg.jobs,
    )
    _copy_config(cfg, out)
    result = run_experiment(spec)
    _atomic_write(
        os.path.join(out, "results.tsv"), "\n".join(result.table_lines()) + "\n"
    )
    for cell in result.cells:
        tagset = induce_tagset(list(cell.gold) + list(cell.predicted))
        matrix = confusion(list(cell.gold), list(cell.predicted), tagset)
        name = f"confusion.{spec.model}.{spec.regime}.{cell.train_label}.{cell.test_label}.{cell.fold}"
        _atomic_write(
            os.path.join(out, name + ".tsv"), "\n".join(matrix.grid_lines()) + "\n"
        )
        if args.heatmaps:
            matrix.render_heatmap(os.path.join(out, name + ".png"))
    return EXIT_OK


def cmd_synth(args) -> int:
    overrides = {}
    if args.config:
        cfg = load_config(args.config)
        overrides = cfg.synth or {}
        seed = cfg.seed
    else:
        seed = 0
    if args.seed is not None:
        seed = args.seed
    pair = synth_generate(SynthConfig(**overrides), sub_seed(seed, "synth"))
    os.makedirs(args.out, exist_ok=True)
    save_corpus(pair.corpus_a, os.path.join(args.out, "syn_a.tsv"))
    save_corpus(pair.corpus_b, os.path.join(args.out, "syn_b.tsv"))
    for name, lex in (("syn_a", pair.lexicon_a), ("syn_b", pair.lexicon_b)):
        lines = []
        for base in sorted(lex):
            dominant, secondary = lex[base]
            lines.append(
                f"{base}\t{dominant.render()}\t{secondary.render() if secondary else ''}"
            )
        _atomic_write(os.path.join(args.out, f"{name}.lexicon.tsv"), "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diacritizer",
        description="Dialectal Arabic diacritization toolkit (Buckwalter I/O).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_stats = sub.add_parser("stats", help="corpus statistics report")
    p_stats.add_argument("corpus", nargs="+", help="corpus file(s), 1 or 2")
    p_stats.add_argument("--encoding", choices=["buckwalter", "arabic"], default="buckwalter")
    p_stats.add_argument("--seed", type=int, default=0)
    p_stats.add_argument("--k", type=int, default=5)
    p_stats.add_argument("--out", default=None)
    p_stats.set_defaults(func=cmd_stats)

    p_train = sub.add_parser("train", help="train one model from a config")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--seed", type=int, default=None, help="override config seed")
    p_train.add_argument("--out", required=True)
    p_train.set_defaults(func=cmd_train)

    p_predict = sub.add_parser("predict", help="diacritize undiacritized text")
    p_predict.add_argument("--model", required=True, help="model file from train")
    p_predict.add_argument("input", help="undiacritized text file")
    p_predict.add_argument("--hybrid", default=None, help="lookup table for seen words")
    p_predict.add_argument("--encoding", choices=["buckwalter", "arabic"], default="buckwalter")
    p_predict.add_argument("--out", default=None)
    p_predict.set_defaults(func=cmd_predict)

    p_exp = sub.add_parser("experiment", help="uni/cross/joint experiment grid")
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--seed", type=int, default=None, help="override config seed")
    p_exp.add_argument("--jobs", type=int, default=None)
    p_exp.add_argument("--out", required=True)
    p_exp.add_argument("--heatmaps", action="store_true", help="render confusion PNGs")
    p_exp.set_defaults(func=cmd_experiment)

    p_synth = sub.add_parser("synth", help="generate a synthetic dialect pair")
    p_synth.add_argument("--config", default=None)
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=cmd_synth)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NonFiniteLoss, NonFiniteObjective) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERIC
    except (
        InvalidConfig,
        CorpusParseError,
        DuplicateVerseId,
        DiacritizerError,
        FileNotFoundError,
        json.JSONDecodeError,
        KeyError,
        TypeError,
        ValueError,
    ) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
