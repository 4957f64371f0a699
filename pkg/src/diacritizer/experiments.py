"""Uni-, cross-, and joint-dialect experiment harness.

Cells that share a training set (all test folds of a cross direction, both
dialects of a joint fold) are grouped so the model is trained once per
group.  Groups are independent, run in a fixed order (optionally in
parallel processes), and every group derives its own sub-seed so results
are reproducible per (spec, seed).
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from . import neural
from .brown import brown_cluster
from .corpus import Corpus, FoldSplit, make_folds
from .crf import crf_decode, crf_train
from .errors import InvalidConfig
from .evaluation import EvalReport, mean_report, score
from .lookup import build_lookup, hybrid_diacritize, identity_fallback, lookup_diacritize
from .script import TaggedWord, induce_tagset
from .seeds import sub_seed

MODEL_KINDS = ("lookup", "crf", "dnn", "hybrid")
REGIMES = ("uni", "cross", "joint")


@dataclass(frozen=True)
class ExperimentSpec:
    corpora: Tuple[Corpus, ...]
    model: str
    regime: str
    k: int = 5
    seed: int = 0
    neural_config: neural.NeuralConfig = field(default_factory=neural.NeuralConfig)
    crf_c: float = 10.0
    crf_max_iter: int = 200
    crf_tol: float = 1e-4
    use_brown_clusters: bool = False
    brown_k: int = 32
    jobs: int = 1

    def validate(self) -> None:
        if self.model not in MODEL_KINDS:
            raise InvalidConfig(f"unknown model kind {self.model!r}")
        if self.regime not in REGIMES:
            raise InvalidConfig(f"unknown regime {self.regime!r}")
        if self.regime in ("cross", "joint") and len(self.corpora) != 2:
            raise InvalidConfig(f"regime {self.regime!r} needs exactly two corpora")
        if not self.corpora:
            raise InvalidConfig("no corpora given")


@dataclass(frozen=True)
class CellResult:
    train_label: str
    test_label: str
    fold: int
    report: EvalReport
    gold: Tuple[TaggedWord, ...] = ()
    predicted: Tuple[TaggedWord, ...] = ()


@dataclass(frozen=True)
class ExperimentResult:
    spec_model: str
    spec_regime: str
    cells: Tuple[CellResult, ...]

    def means(self) -> Dict[Tuple[str, str], EvalReport]:
        groups: Dict[Tuple[str, str], List[EvalReport]] = {}
        for cell in self.cells:
            groups.setdefault((cell.train_label, cell.test_label), []).append(cell.report)
        return {key: mean_report(reports) for key, reports in groups.items()}

    def table_lines(self) -> List[str]:
        lines = ["model\tregime\ttrain\ttest\tfold\tcer\twer\ttokens"]
        for cell in self.cells:
            r = cell.report
            lines.append(
                f"{self.spec_model}\t{self.spec_regime}\t{cell.train_label}"
                f"\t{cell.test_label}\t{cell.fold}\t{r.cer:.4f}\t{r.wer:.4f}\t{r.token_count}"
            )
        for (train, test), r in sorted(self.means().items()):
            lines.append(
                f"{self.spec_model}\t{self.spec_regime}\t{train}\t{test}"
                f"\tmean\t{r.cer:.4f}\t{r.wer:.4f}\t{r.token_count}"
            )
        return lines


@dataclass(frozen=True)
class _GroupTask:
    train_label: str
    train_words: Tuple[TaggedWord, ...]
    validation_words: Tuple[TaggedWord, ...]
    # (test_label, fold, test_words) cells scored with the one trained model
    tests: Tuple[Tuple[str, int, Tuple[TaggedWord, ...]], ...]
    train_verses: Tuple[Tuple[str, ...], ...]  # base-string contexts for Brown
    seed: int


def split_train_validation(corpus: Corpus, seed: int) -> Tuple[List[TaggedWord], List[TaggedWord]]:
    """Whole-corpus 7:1 train/validation split (used by the cross regime)."""
    order = list(corpus.verses)
    random.Random(seed).shuffle(order)
    train: List[TaggedWord] = []
    validation: List[TaggedWord] = []
    train_tok = val_tok = 0
    for verse in order:
        if val_tok * 7 < train_tok:
            validation.extend(verse.tokens)
            val_tok += len(verse.tokens)
        else:
            train.extend(verse.tokens)
            train_tok += len(verse.tokens)
    return train, validation


def _verse_bases(corpus: Corpus, ids) -> Tuple[Tuple[str, ...], ...]:
    return tuple(
        tuple(w.base for w in v.tokens) for v in corpus.verses if v.id in ids
    )


def _build_tasks(spec: ExperimentSpec) -> List[_GroupTask]:
    folds: Dict[str, List[FoldSplit]] = {
        c.dialect_label: make_folds(c, spec.k, sub_seed(spec.seed, f"split:{c.dialect_label}"))
        for c in spec.corpora
    }
    by_label = {c.dialect_label: c for c in spec.corpora}
    tasks = []

    if spec.regime == "uni":
        for corpus in spec.corpora:
            label = corpus.dialect_label
            for fold in folds[label]:
                tasks.append(
                    _GroupTask(
                        train_label=label,
                        train_words=tuple(fold.select(corpus, "train")),
                        validation_words=tuple(fold.select(corpus, "validation")),
                        tests=(
                            (label, fold.fold_index, tuple(fold.select(corpus, "test"))),
                        ),
                        train_verses=_verse_bases(corpus, fold.train | fold.validation),
                        seed=sub_seed(spec.seed, f"cell:{label}:{label}:{fold.fold_index}"),
                    )
                )
    elif spec.regime == "cross":
        for train_corpus in spec.corpora:
            test_corpus = next(c for c in spec.corpora if c is not train_corpus)
            tl, sl = train_corpus.dialect_label, test_corpus.dialect_label
            train_words, val_words = split_train_validation(
                train_corpus, sub_seed(spec.seed, f"crossval:{tl}")
            )
            all_ids = frozenset(v.id for v in train_corpus.verses)
            tasks.append(
                _GroupTask(
                    train_label=tl,
                    train_words=tuple(train_words),
                    validation_words=tuple(val_words),
                    tests=tuple(
                        (sl, fold.fold_index, tuple(fold.select(test_corpus, "test")))
                        for fold in folds[sl]
                    ),
                    train_verses=_verse_bases(train_corpus, all_ids),
                    seed=sub_seed(spec.seed, f"cell:{tl}:{sl}"),
                )
            )
    else:  # joint
        labels = [c.dialect_label for c in spec.corpora]
        joint_label = "+".join(labels)
        for fold_index in range(spec.k):
            train_words: List[TaggedWord] = []
            val_words: List[TaggedWord] = []
            verses: List[Tuple[str, ...]] = []
            for label in labels:
                corpus = by_label[label]
                fold = folds[label][fold_index]
                train_words.extend(fold.select(corpus, "train"))
                val_words.extend(fold.select(corpus, "validation"))
                verses.extend(_verse_bases(corpus, fold.train | fold.validation))
            tasks.append(
                _GroupTask(
                    train_label=joint_label,
                    train_words=tuple(train_words),
                    validation_words=tuple(val_words),
                    tests=tuple(
                        (
                            label,
                            fold_index,
                            tuple(folds[label][fold_index].select(by_label[label], "test")),
                        )
                        for label in labels
                    ),
                    train_verses=tuple(verses),
                    seed=sub_seed(spec.seed, f"cell:{joint_label}:{fold_index}"),
                )
            )
    return tasks


def _run_group(task: _GroupTask, spec: ExperimentSpec) -> List[CellResult]:
    table = None
    crf_model = None
    dnn_model = None
    if spec.model in ("lookup", "hybrid"):
        table = build_lookup(list(task.train_words) + list(task.validation_words))
    if spec.model == "crf":
        train_words = list(task.train_words) + list(task.validation_words)
        clusters = None
        if spec.use_brown_clusters:
            clusters = brown_cluster(task.train_verses, spec.brown_k)
        crf_model = crf_train(
            train_words,
            induce_tagset(train_words),
            c=spec.crf_c,
            max_iter=spec.crf_max_iter,
            tol=spec.crf_tol,
            clusters=clusters,
        )
    if spec.model in ("dnn", "hybrid"):
        dnn_model, _ = neural.train(
            spec.neural_config,
            list(task.train_words),
            list(task.validation_words),
            task.seed,
        )

    cells = []
    for test_label, fold, test_words in task.tests:
        gold = list(test_words)
        bases = [w.base for w in gold]
        if spec.model == "lookup":
            predicted = [hybrid_diacritize(b, table, identity_fallback) for b in bases]
        elif spec.model == "crf":
            predicted = [crf_decode(b, crf_model) for b in bases]
        else:
            decoded = neural.decode_many(dnn_model, bases)
            if spec.model == "hybrid":
                predicted = [
                    hit if (hit := lookup_diacritize(b, table)) is not None else d
                    for b, d in zip(bases, decoded)
                ]
            else:
                predicted = decoded
        cells.append(
            CellResult(
                train_label=task.train_label,
                test_label=test_label,
                fold=fold,
                report=score(gold, predicted),
                gold=tuple(gold),
                predicted=tuple(predicted),
            )
        )
    return cells


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run every cell of the requested regime; deterministic per seed."""
    spec.validate()
    tasks = _build_tasks(spec)
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            groups = list(pool.map(_run_group, tasks, [spec] * len(tasks)))
    else:
        groups = [_run_group(task, spec) for task in tasks]
    cells = [cell for group in groups for cell in group]
    return ExperimentResult(
        spec_model=spec.model, spec_regime=spec.regime, cells=tuple(cells)
    )
