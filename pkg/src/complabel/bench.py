"""Desk-scale experiment protocols and their result tables."""
from __future__ import annotations

import csv
import io
import json
import logging
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .comp_losses import LossSpec, Scheme
from .data import (
    LabeledDataset,
    load_csv,
    select_classes,
    split_ol_cl,
    split_train_val,
    standardize_apply,
    standardize_fit,
    subsample_per_class,
    synth_gaussian,
    to_complementary,
)
from .exceptions import InvalidInputError
from .models import init_model
from .optim import DEFAULT_LAMBDA_GRID, DataSplit, TrainConfig, grid_search

log = logging.getLogger(__name__)

SIGNIFICANCE = 0.05


@dataclass
class RunManifest:
    command: str = "bench"
    dataset: str | None = None
    label_col: str = "label"
    classes: list | None = None
    synth_classes: int = 3
    synth_dim: int = 2
    separation: float = 4.0
    train_per_class: int = 500
    test_per_class: int = 500
    schemes: list = field(default_factory=lambda: ["pc"])
    losses: list = field(default_factory=lambda: ["sigmoid"])
    model: str = "linear"
    alpha: float = 0.5
    iterations: int = 5000
    batch: int = 100
    learning_rate: float = 1e-3
    lambda_grid: list = field(default_factory=lambda: list(DEFAULT_LAMBDA_GRID))
    eval_stride: int = 1
    trials: int = 5
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidInputError("trials must be >= 1")
        if self.dataset is not None and not Path(self.dataset).is_file():
            raise InvalidInputError(f"dataset file not found: {self.dataset}")
        if not self.lambda_grid:
            raise InvalidInputError("lambda grid is empty")
        self.methods()

    @classmethod
    def from_json(cls, path, **overrides) -> "RunManifest":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInputError(f"unknown manifest keys: {', '.join(sorted(unknown))}")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**raw)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def methods(self) -> list[LossSpec]:
        losses = list(self.losses)
        if len(losses) == 1:
            losses *= len(self.schemes)
        if len(losses) != len(self.schemes):
            raise InvalidInputError("give one loss, or one loss per scheme")
        return [LossSpec.parse(s, k) for s, k in zip(self.schemes, losses)]

    def train_config(self, spec: LossSpec, alpha: float, seed: int) -> TrainConfig:
        return TrainConfig(iterations=self.iterations, batch_size=self.batch,
                           learning_rate=self.learning_rate, lambda_grid=tuple(self.lambda_grid),
                           eval_stride=self.eval_stride, seed=seed, alpha=alpha, spec=spec)

    @property
    def dataset_name(self) -> str:
        if self.dataset:
            return Path(self.dataset).stem
        return f"synth-sep{self.separation:g}-d{self.synth_dim}"

    def class_label(self, K: int) -> str:
        return ",".join(str(c) for c in self.classes) if self.classes else f"1-{K}"


def welch_test(a, b) -> tuple[float, float, float]:
    """Two-sided Welch t-test. Returns (t, degrees of freedom, p-value)."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    diff = a.mean() - b.mean()
    if va + vb == 0.0:
        # both samples constant: equal means are indistinguishable, different ones are not
        return (0.0, np.nan, 1.0) if diff == 0 else (np.copysign(np.inf, diff), np.nan, 0.0)
    dof = (va + vb) ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    with warnings.catch_warnings():
        # near-identical accuracies trip scipy's cancellation warning; the p-value is still usable
        warnings.filterwarnings("ignore", "Precision loss", RuntimeWarning)
        res = stats.ttest_ind(a, b, equal_var=False)
    return float(res.statistic), float(dof), float(res.pvalue)


@dataclass
class ResultRow:
    method: str
    dataset: str
    classes: str
    accuracies: list
    bold: bool = False

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.accuracies, ddof=1)) if len(self.accuracies) > 1 else 0.0


@dataclass
class ResultTable:
    rows: list

    def apply_bolding(self) -> None:
        """Flag the best mean and every method not significantly worse at 5% (Welch)."""
        for r in self.rows:
            r.bold = False
        if not self.rows or any(len(r.accuracies) < 2 for r in self.rows):
            return
        best = max(self.rows, key=lambda r: r.mean)
        for r in self.rows:
            r.bold = r is best or welch_test(best.accuracies, r.accuracies)[2] >= SIGNIFICANCE

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "dataset", "classes", "trials", "mean_acc", "std_acc", "bold", "accuracies"])
        for r in self.rows:
            w.writerow([r.method, r.dataset, r.classes, len(r.accuracies), f"{r.mean:.4f}", f"{r.std:.4f}",
                        int(r.bold), ";".join(f"{a:.4f}" for a in r.accuracies)])
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = ["| method | dataset | classes | accuracy % (std) |", "|---|---|---|---|"]
        for r in self.rows:
            cell = f"{r.mean:.1f} ({r.std:.1f})"
            lines.append(f"| {r.method} | {r.dataset} | {r.classes} | {f'**{cell}**' if r.bold else cell} |")
        return "\n".join(lines) + "\n"

    def write(self, out) -> None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(self.to_csv(), encoding="utf-8")
        out.with_suffix(".md").write_text(self.to_markdown(), encoding="utf-8")


def _trial_data(manifest: RunManifest, full: LabeledDataset | None, rng):
    if full is None:
        K, d, sep = manifest.synth_classes, manifest.synth_dim, manifest.separation
        train = synth_gaussian(K, d, manifest.train_per_class, sep, rng)
        test = synth_gaussian(K, d, manifest.test_per_class, sep, rng)
    else:
        train, test = subsample_per_class(full, manifest.train_per_class, manifest.test_per_class, rng)
    st = standardize_fit(train.X)
    return train.with_features(standardize_apply(st, train.X)), test.with_features(standardize_apply(st, test.X))


def _load(manifest: RunManifest) -> LabeledDataset | None:
    if manifest.dataset is None:
        return None
    full = load_csv(manifest.dataset, manifest.label_col)
    return select_classes(full, manifest.classes) if manifest.classes else full


def _accuracy(model, test: LabeledDataset) -> float:
    return 100.0 * float(np.mean(model.predict(test.X) == test.y))


def _fit(manifest, spec, alpha, train_split, val_split, K, d, init_rng_seed, train_seed):
    model = init_model(manifest.model, K, d, np.random.default_rng(init_rng_seed))
    cfg = manifest.train_config(spec, alpha, train_seed)
    return grid_search(cfg.lambda_grid, model, train_split, val_split, cfg)


def run_bench(manifest: RunManifest) -> ResultTable:
    """Complementary-label benchmark: every method trained on identical per-trial data."""
    full = _load(manifest)
    methods = manifest.methods()
    accs = {m.name: [] for m in methods}
    K = None
    for t in range(manifest.trials):
        rng = np.random.default_rng(manifest.seed + t)
        train, test = _trial_data(manifest, full, rng)
        K, d = train.K, train.d
        tr, va = split_train_val(to_complementary(train, rng), 0.25, rng)
        init_seed, train_seed = (int(v) for v in rng.integers(0, 2**31, size=2))
        for spec in methods:
            res = _fit(manifest, spec, 0.0, DataSplit(complementary=tr), DataSplit(complementary=va),
                       K, d, init_seed, train_seed)
            accs[spec.name].append(_accuracy(res.best_model, test))
            log.info("trial %d %s lambda=%g acc=%.2f", t, spec.name, res.best_lambda, accs[spec.name][-1])
    table = ResultTable([ResultRow(name, manifest.dataset_name, manifest.class_label(K), a)
                         for name, a in accs.items()])
    table.apply_bolding()
    return table


def run_combine(manifest: RunManifest) -> ResultTable:
    """Ordinary-only (alpha=1), complementary-only (alpha=0) and combined runs on a 1:(K-1) split."""
    full = _load(manifest)
    spec = manifest.methods()[0]
    if spec.scheme not in (Scheme.OVA, Scheme.PC):
        raise InvalidInputError("combine needs the OVA or PC scheme")
    columns = [("OL", 1.0), ("CL", 0.0), ("OL&CL", float(manifest.alpha))]
    accs = {name: [] for name, _ in columns}
    K = None
    for t in range(manifest.trials):
        rng = np.random.default_rng(manifest.seed + t)
        train, test = _trial_data(manifest, full, rng)
        K, d = train.K, train.d
        ol, cl = split_ol_cl(train, K, rng)
        ol_tr, ol_va = split_train_val(ol, 0.25, rng)
        cl_tr, cl_va = split_train_val(cl, 0.25, rng)
        init_seed, train_seed = (int(v) for v in rng.integers(0, 2**31, size=2))
        for name, alpha in columns:
            train_split = DataSplit(ol_tr if alpha > 0 else None, cl_tr if alpha < 1 else None)
            val_split = DataSplit(ol_va if alpha > 0 else None, cl_va if alpha < 1 else None)
            res = _fit(manifest, spec, alpha, train_split, val_split, K, d, init_seed, train_seed)
            accs[name].append(_accuracy(res.best_model, test))
            log.info("trial %d %s lambda=%g acc=%.2f", t, name, res.best_lambda, accs[name][-1])
    table = ResultTable([ResultRow(name, manifest.dataset_name, manifest.class_label(K), accs[name])
                         for name, _ in columns])
    table.apply_bolding()
    return table
