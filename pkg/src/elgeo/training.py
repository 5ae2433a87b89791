"""Epoch training loop: per-form batching, frequency weighting, Adam, plateau decay.

Each epoch shuffles every normal form's axiom list and walks the forms
round-robin in fixed order, one batch at a time, taking an optimizer step per
batch.  Positive batches of the corruptible forms are paired with sampled
negative batches.  The per-term weights come from the counts sampled during
an epoch (all lists are iterated fully, so the counts are known upfront) and
the total objective is the weighted sum of per-term mean losses.

Validation loss (positive GCI2 loss on the valid split by default) drives a
reduce-on-plateau schedule and early stopping; the best-validation parameter
snapshot is returned.  Without a valid split the loop runs all epochs.
"""

from __future__ import annotations

import itertools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .axioms import Form
from .closure import DeductiveClosure
from .dataset import KnowledgeBase
from .geometry import EmbeddingModel, GradientBuffer, loss_term
from .sampling import CORRUPT_SLOT, NegativeSampler, SamplerConfig

FORM_ORDER = (Form.GCI0, Form.GCI1, Form.GCI2, Form.GCI3,
              Form.GCI0_BOT, Form.GCI1_BOT, Form.GCI3_BOT)

POS_TERM = {
    Form.GCI0: "gci0_pos", Form.GCI1: "gci1_pos", Form.GCI2: "gci2_pos",
    Form.GCI3: "gci3_pos", Form.GCI0_BOT: "gci0_bot", Form.GCI1_BOT: "gci1_bot",
    Form.GCI3_BOT: "gci3_bot",
}
NEG_TERM = {
    Form.GCI0: "gci0_neg", Form.GCI1: "gci1_neg",
    Form.GCI2: "gci2_neg", Form.GCI3: "gci3_neg",
}

DEFAULT_GRIDS = {
    "margin": (-0.1, -0.01, 0.0, 0.01, 0.1),
    "dim": (50, 100, 200, 400),
    "reg_radius": (1.0, 2.0),
    "lr": (0.01, 0.001, 0.0001),
}


class TrainingError(Exception):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 400
    batch_size: int = 32768
    lr: float = 0.01
    margin: float = 0.1
    dim: int = 50
    reg_mode: str = "strict"
    reg_radius: float = 1.0
    activation: str = "relu"
    leaky_slope: float = 0.01
    weighting: str = "inverse_frequency"     # | proportional | uniform
    neg_forms: tuple[str, ...] = ("gci2",)   # forms that get negative losses
    filter_negatives: bool = False
    entailed_ratio: float = 0.0
    max_resample_attempts: int = 10
    plateau_factor: float = 0.1
    plateau_patience: int = 10
    early_stop_patience: int = 20
    val_include_negatives: bool = False
    seed: int = 42

    def __post_init__(self):
        if self.plateau_patience <= 0 or self.early_stop_patience <= 0:
            raise ValueError("patience values must be positive")
        for f in self.neg_forms:
            if f not in ("gci0", "gci1", "gci2", "gci3"):
                raise ValueError(f"negative losses exist only for gci0..gci3, got {f!r}")

    def to_dict(self) -> dict:
        d = self.__dict__.copy()
        d["neg_forms"] = list(self.neg_forms)
        return d


@dataclass
class TrainReport:
    epochs: list[dict] = field(default_factory=list)
    stop_epoch: int = 0
    best_epoch: int = -1
    seed: int = 0
    weights: dict[str, float] = field(default_factory=dict)
    sampler_stats: dict = field(default_factory=dict)
    checkpoint_path: str | None = None

    def to_jsonl(self, path: str):
        with open(path, "w", encoding="utf-8") as f:
            for rec in self.epochs:
                f.write(json.dumps(rec, sort_keys=True) + "\n")

    def summary(self) -> dict:
        return {
            "stop_epoch": self.stop_epoch,
            "best_epoch": self.best_epoch,
            "seed": self.seed,
            "weights": self.weights,
            "sampler": self.sampler_stats,
            "checkpoint": self.checkpoint_path,
        }


def compute_weights(counts: dict[str, int], mode: str = "inverse_frequency") -> dict[str, float]:
    """Per-term weights from per-term sampled-axiom counts.

    inverse_frequency: w_g proportional to 1/N_g, normalized so the active
    terms' weights sum to their number.  proportional: w_g = N_g / sum(N).
    uniform: w_g = 1.  Terms with zero count always get weight 0.
    """
    if any(n < 0 for n in counts.values()):
        raise ValueError("negative count")
    active = {g: n for g, n in counts.items() if n > 0}
    if not active:
        raise ValueError("all counts are zero")
    weights = {g: 0.0 for g in counts}
    if mode == "inverse_frequency":
        inv_sum = sum(1.0 / n for n in active.values())
        for g, n in active.items():
            weights[g] = (1.0 / n) * len(active) / inv_sum
    elif mode == "proportional":
        total = sum(active.values())
        for g, n in active.items():
            weights[g] = n / total
    elif mode == "uniform":
        for g in active:
            weights[g] = 1.0
    else:
        raise ValueError(f"unknown weighting mode: {mode!r}")
    return weights


class Adam:
    """Dense Adam over the three parameter arrays."""

    def __init__(self, model: EmbeddingModel, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.model = model
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = [np.zeros_like(model.centers), np.zeros_like(model.radii),
                  np.zeros_like(model.rel_vectors)]
        self.v = [np.zeros_like(p) for p in self.m]

    def step(self, grads: GradientBuffer, lr: float):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        params = (self.model.centers, self.model.radii, self.model.rel_vectors)
        gs = (grads.centers, grads.radii, grads.rels)
        for p, m, v, g in zip(params, self.m, self.v, gs):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def _positive_loss(model: EmbeddingModel, form: Form, rows: np.ndarray,
                   grad=None, coef=1.0) -> np.ndarray:
    cols = tuple(rows[:, j] for j in range(rows.shape[1]))
    return loss_term(model, POS_TERM[form], cols, grad=grad, coef=coef)


def validation_loss(model: EmbeddingModel, kb: KnowledgeBase,
                    include_negatives: bool = False,
                    sampler: NegativeSampler | None = None) -> float:
    """Mean positive GCI2 loss on the valid split (negatives optional)."""
    if not kb.valid:
        return float("nan")
    rows = np.array([ax.args for ax in kb.valid], dtype=np.int64)
    vals = _positive_loss(model, Form.GCI2, rows)
    total = float(vals.mean())
    if include_negatives and sampler is not None:
        neg_rows, keep = sampler.corrupt_ids(Form.GCI2, rows)
        if keep.any():
            cols = tuple(neg_rows[keep][:, j] for j in range(neg_rows.shape[1]))
            total += float(loss_term(model, "gci2_neg", cols).mean())
    return total


def train(kb: KnowledgeBase, cfg: TrainConfig, dc: DeductiveClosure | None = None,
          checkpoint_path: str | None = None) -> tuple[EmbeddingModel, TrainReport]:
    """Train an embedding; deterministic for a fixed config seed."""
    if (cfg.filter_negatives or cfg.entailed_ratio > 0.0) and dc is None:
        raise TrainingError("filtered or entailed-biased negatives need a deductive closure")

    seq = np.random.SeedSequence(cfg.seed)
    init_ss, shuffle_ss, sampler_ss = seq.spawn(3)
    model = EmbeddingModel.create(
        kb.sig, dim=cfg.dim, margin=cfg.margin, reg_mode=cfg.reg_mode,
        reg_radius=cfg.reg_radius, activation=cfg.activation,
        leaky_slope=cfg.leaky_slope, seed=cfg.seed,
        rng=np.random.default_rng(init_ss))
    shuffle_rng = np.random.default_rng(shuffle_ss)
    sampler = NegativeSampler(
        kb,
        SamplerConfig(filter_with_closure=cfg.filter_negatives,
                      entailed_ratio=cfg.entailed_ratio,
                      max_resample_attempts=cfg.max_resample_attempts,
                      seed=cfg.seed),
        dc, rng=np.random.default_rng(sampler_ss))

    data = {form: np.array([ax.args for ax in kb.axioms[form]], dtype=np.int64)
            for form in FORM_ORDER if kb.axioms[form]}
    neg_enabled = {form for form in data
                   if form in CORRUPT_SLOT and form.value.lower() in cfg.neg_forms}

    counts = {POS_TERM[form]: len(rows) for form, rows in data.items()}
    for form in neg_enabled:
        counts[NEG_TERM[form]] = len(data[form])
    weights = compute_weights(counts, cfg.weighting) if counts else {}

    report = TrainReport(seed=cfg.seed, weights=weights)
    adam = Adam(model)
    lr = cfg.lr
    best_val = float("inf")
    best_params: EmbeddingModel | None = None
    bad_epochs = 0
    plateau_bad = 0
    epoch = 0

    for epoch in range(1, cfg.epochs + 1):
        order = {form: shuffle_rng.permutation(len(rows)) for form, rows in data.items()}
        cursor = {form: 0 for form in data}
        sums = {term: 0.0 for term in counts}
        seen = {term: 0 for term in counts}
        batch_index = 0
        while any(cursor[form] < len(data[form]) for form in data):
            for form in FORM_ORDER:
                if form not in data or cursor[form] >= len(data[form]):
                    continue
                lo = cursor[form]
                hi = min(lo + cfg.batch_size, len(data[form]))
                cursor[form] = hi
                rows = data[form][order[form][lo:hi]]
                grad = GradientBuffer(model)
                term = POS_TERM[form]
                vals = _positive_loss(model, form, rows, grad=grad,
                                      coef=weights[term] / len(rows))
                batch_loss = weights[term] * float(vals.mean())
                sums[term] += float(vals.sum())
                seen[term] += len(rows)
                if form in neg_enabled:
                    nterm = NEG_TERM[form]
                    neg_rows, keep = sampler.corrupt_ids(form, rows)
                    kept = neg_rows[keep]
                    if len(kept):
                        cols = tuple(kept[:, j] for j in range(kept.shape[1]))
                        nvals = loss_term(model, nterm, cols, grad=grad,
                                          coef=weights[nterm] / len(kept))
                        batch_loss += weights[nterm] * float(nvals.mean())
                        sums[nterm] += float(nvals.sum())
                        seen[nterm] += len(kept)
                if not np.isfinite(batch_loss):
                    raise TrainingError(
                        f"non-finite loss in term {term} (epoch {epoch}, batch {batch_index})")
                adam.step(grad, lr)
                batch_index += 1
        if not model.all_finite():
            raise TrainingError(f"non-finite parameters after epoch {epoch}")

        breakdown = {term: (sums[term] / seen[term] if seen[term] else 0.0)
                     for term in counts}
        total = sum(weights[t] * breakdown[t] for t in breakdown)
        val = validation_loss(model, kb, cfg.val_include_negatives, sampler)
        report.epochs.append({
            "epoch": epoch, "total": total, "breakdown": breakdown,
            "val_loss": None if np.isnan(val) else val, "lr": lr,
        })
        if not np.isnan(val):
            if val < best_val:
                best_val = val
                best_params = model.copy()
                report.best_epoch = epoch
                bad_epochs = 0
                plateau_bad = 0
            else:
                bad_epochs += 1
                plateau_bad += 1
                if plateau_bad > cfg.plateau_patience:
                    lr *= cfg.plateau_factor
                    plateau_bad = 0
            if bad_epochs >= cfg.early_stop_patience:
                break

    report.stop_epoch = epoch if cfg.epochs > 0 else 0
    report.sampler_stats = {
        "requested": sampler.stats.requested,
        "produced": sampler.stats.produced,
        "dropped": sampler.stats.dropped,
        "entailed_injected": sampler.stats.entailed_injected,
        "drop_rate": sampler.stats.drop_rate,
    }
    final = best_params if best_params is not None else model
    if checkpoint_path is not None:
        from .geometry import save_model
        save_model(final, checkpoint_path)
        report.checkpoint_path = checkpoint_path
    return final, report


def worker_count() -> int:
    """Worker cap from the ELGEO_THREADS environment variable (default 1)."""
    try:
        return max(1, int(os.environ.get("ELGEO_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class GridResult:
    entries: list[tuple[dict, float]] = field(default_factory=list)   # ranked
    failures: list[tuple[dict, str]] = field(default_factory=list)

    def to_table(self) -> str:
        lines = ["rank\tmetric\tconfig"]
        for i, (cfg, metric) in enumerate(self.entries, 1):
            lines.append(f"{i}\t{metric:.4f}\t{json.dumps(cfg, sort_keys=True)}")
        for cfg, err in self.failures:
            lines.append(f"FAILED\t{err}\t{json.dumps(cfg, sort_keys=True)}")
        return "\n".join(lines) + "\n"


def grid_search(kb: KnowledgeBase, base_cfg: TrainConfig,
                grids: dict[str, tuple] | None = None,
                dc: DeductiveClosure | None = None) -> GridResult:
    """Train every grid combination and rank by validation macro mean rank."""
    from .evaluation import macro_mean_rank

    grids = dict(DEFAULT_GRIDS) if grids is None else grids
    if not grids or any(len(v) == 0 for v in grids.values()):
        raise ValueError("grids must be non-empty")
    keys = sorted(grids)
    combos = [dict(zip(keys, values)) for values in itertools.product(*(grids[k] for k in keys))]

    def run(combo: dict):
        cfg = replace(base_cfg, **combo)
        model, _ = train(kb, cfg, dc)
        return macro_mean_rank(model, kb)

    result = GridResult()
    max_workers = worker_count()
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(lambda c: _guard(run, c), combos))
    else:
        outcomes = [_guard(run, c) for c in combos]
    for combo, (metric, err) in zip(combos, outcomes):
        if err is None:
            result.entries.append((combo, metric))
        else:
            result.failures.append((combo, err))
    result.entries.sort(key=lambda e: (e[1], json.dumps(e[0], sort_keys=True)))
    return result


def _guard(fn, combo):
    try:
        return fn(combo), None
    except Exception as exc:  # per-run failures are recorded, not fatal
        return float("nan"), f"{type(exc).__name__}: {exc}"
