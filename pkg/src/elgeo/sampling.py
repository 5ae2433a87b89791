"""Corruption-based negative generation with closure filtering.

Negatives corrupt the consequent slot of an axiom (the superclass of GCI0
and GCI3, the filler of GCI2, the conjunction superclass of GCI1) with a
uniform draw from a candidate pool.  With filtering enabled, corruptions
that are entailed (closure members) or asserted are rejected and resampled
up to a retry budget, after which the slot is dropped.  A nonzero
``entailed_ratio`` instead injects that fraction of negatives uniformly
from the entailed-but-not-asserted axioms of the same form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .axioms import Axiom, Form
from .closure import DeductiveClosure
from .dataset import KnowledgeBase

CORRUPT_SLOT = {Form.GCI0: 1, Form.GCI1: 2, Form.GCI2: 2, Form.GCI3: 2}


class SamplingError(Exception):
    pass


@dataclass
class SamplerConfig:
    filter_with_closure: bool = False
    entailed_ratio: float = 0.0
    max_resample_attempts: int = 10
    seed: int = 42
    pools: dict[Form, list[int]] = field(default_factory=dict)   # overrides per form

    def __post_init__(self):
        if not 0.0 <= self.entailed_ratio <= 1.0:
            raise ValueError("entailed_ratio must lie in [0, 1]")
        if self.max_resample_attempts < 1:
            raise ValueError("max_resample_attempts must be positive")


def corrupt(ax: Axiom, pool, rng: np.random.Generator) -> Axiom:
    """Replace the consequent slot with a uniform draw from pool minus the original."""
    slot = CORRUPT_SLOT.get(ax.form)
    if slot is None:
        raise SamplingError(f"cannot corrupt form {ax.form.value}")
    pool = np.asarray(pool, dtype=np.int64)
    original = ax.args[slot]
    candidates = pool[pool != original]
    if len(candidates) == 0 or len(pool) < 2:
        raise SamplingError("pool exhausted")
    pick = int(candidates[rng.integers(len(candidates))])
    args = list(ax.args)
    args[slot] = pick
    return Axiom(ax.form, tuple(args))


@dataclass
class SampleStats:
    requested: int = 0
    produced: int = 0
    dropped: int = 0
    entailed_injected: int = 0

    @property
    def drop_rate(self) -> float:
        return self.dropped / self.requested if self.requested else 0.0


class NegativeSampler:
    """Stateful sampler: one rng stream, per-form pools and entailed pools."""

    def __init__(self, kb: KnowledgeBase, cfg: SamplerConfig,
                 dc: DeductiveClosure | None = None,
                 rng: np.random.Generator | None = None):
        if (cfg.filter_with_closure or cfg.entailed_ratio > 0.0) and dc is None:
            raise SamplingError(
                "closure filtering / entailed_ratio requires a deductive closure")
        self.kb = kb
        self.cfg = cfg
        self.dc = dc
        self.rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        self.stats = SampleStats()
        default = np.asarray(sorted(kb.pool("all")), dtype=np.int64)
        self._pools: dict[Form, np.ndarray] = {}
        for form in CORRUPT_SLOT:
            override = cfg.pools.get(form)
            self._pools[form] = (np.asarray(sorted(override), dtype=np.int64)
                                 if override is not None else default)
        self._train_sets = {form: {ax.args for ax in kb.axioms[form]} for form in CORRUPT_SLOT}
        self._entailed_pools: dict[Form, list[tuple[int, ...]]] = {}

    def _entailed_pool(self, form: Form) -> list[tuple[int, ...]]:
        pool = self._entailed_pools.get(form)
        if pool is None:
            pool = sorted(self.dc.sets[form] - self._train_sets[form])
            self._entailed_pools[form] = pool
        return pool

    def _rejected(self, form: Form, args: tuple[int, ...]) -> bool:
        if args in self._train_sets[form]:
            return True
        return self.dc is not None and self.dc.contains(Axiom(form, args))

    def corrupt_ids(self, form: Form, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized corruption of a (B, arity) id matrix.

        Returns (corrupted rows, keep mask); rows whose filter retries are
        exhausted get masked out.  Rows replaced from the entailed pool are
        always kept.
        """
        slot = CORRUPT_SLOT[form]
        pool = self._pools[form]
        if len(pool) < 2:
            raise SamplingError("pool exhausted")
        B = len(rows)
        out = rows.copy()
        original = rows[:, slot]

        # Uniform draw from pool minus the original: draw an index into the
        # pool with one slot removed, then skip past the original's position.
        def draw(idx: np.ndarray) -> np.ndarray:
            pos = np.searchsorted(pool, original[idx])
            in_pool = pool[np.minimum(pos, len(pool) - 1)] == original[idx]
            k = self.rng.integers(0, len(pool) - 1, size=len(idx))
            k = np.where(in_pool & (k >= pos), k + 1, k)
            full = self.rng.integers(0, len(pool), size=len(idx))
            return np.where(in_pool, pool[k], pool[full])

        active = np.arange(B)
        out[:, slot] = draw(active)
        keep = np.ones(B, dtype=bool)
        if self.cfg.filter_with_closure:
            for _ in range(self.cfg.max_resample_attempts - 1):
                bad = [i for i in active if self._rejected(form, tuple(out[i]))]
                if not bad:
                    break
                active = np.asarray(bad)
                out[active, slot] = draw(active)
            else:
                bad = [i for i in active if self._rejected(form, tuple(out[i]))]
                if bad:
                    keep[np.asarray(bad)] = False

        if self.cfg.entailed_ratio > 0.0:
            ent_pool = self._entailed_pool(form)
            if ent_pool:
                mask = self.rng.random(B) < self.cfg.entailed_ratio
                picks = self.rng.integers(0, len(ent_pool), size=B)
                for i in np.flatnonzero(mask):
                    out[i] = ent_pool[picks[i]]
                    keep[i] = True
                self.stats.entailed_injected += int(mask.sum())
        self.stats.requested += B
        self.stats.produced += int(keep.sum())
        self.stats.dropped += B - int(keep.sum())
        return out, keep

    def sample(self, batch: list[Axiom]) -> list[Axiom]:
        """One negative per input axiom; dropped slots are omitted."""
        by_form: dict[Form, list[int]] = {}
        for i, ax in enumerate(batch):
            if ax.form not in CORRUPT_SLOT:
                raise SamplingError(f"cannot corrupt form {ax.form.value}")
            by_form.setdefault(ax.form, []).append(i)
        results: list[Axiom | None] = [None] * len(batch)
        for form in sorted(by_form, key=lambda f: f.value):
            idx = by_form[form]
            rows = np.array([batch[i].args for i in idx], dtype=np.int64)
            out, keep = self.corrupt_ids(form, rows)
            for j, i in enumerate(idx):
                if keep[j]:
                    results[i] = Axiom(form, tuple(int(x) for x in out[j]))
        return [ax for ax in results if ax is not None]


def sample_negatives(batch: list[Axiom], cfg: SamplerConfig, kb: KnowledgeBase,
                     dc: DeductiveClosure | None = None) -> tuple[list[Axiom], SampleStats]:
    """One-shot sampling with a fresh rng seeded from the config."""
    sampler = NegativeSampler(kb, cfg, dc)
    negs = sampler.sample(batch)
    return negs, sampler.stats
