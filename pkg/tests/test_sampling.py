import numpy as np
import pytest

from elgeo.axioms import Axiom, Form, parse_normalized
from elgeo.closure import compute_closure
from elgeo.dataset import build_kb
from elgeo.reasoner import saturate
from elgeo.sampling import (
    NegativeSampler, SamplerConfig, SamplingError, corrupt, sample_negatives,
)


def kb_with_closure(text):
    axioms, sig = parse_normalized(text)
    kb = build_kb(sig, axioms)
    dc = compute_closure(kb, saturate(kb))
    return kb, dc


class TestCorrupt:
    def test_forced_draw(self):
        axioms, sig = parse_normalized("GCI2\tA\tr\tB\n")
        sig.intern_class("C")
        rng = np.random.default_rng(0)
        pool = [sig.class_id("B"), sig.class_id("C")]
        out = corrupt(axioms[0], pool, rng)
        assert out.args[2] == sig.class_id("C")
        assert out.args[:2] == axioms[0].args[:2]

    def test_pool_exhausted(self):
        axioms, sig = parse_normalized("GCI0\tA\tB\n")
        rng = np.random.default_rng(0)
        with pytest.raises(SamplingError, match="pool exhausted"):
            corrupt(axioms[0], [sig.class_id("B")], rng)

    def test_corrupts_designated_slot_only(self):
        text = "GCI0\tA\tB\nGCI1\tA\tB\tC\nGCI2\tA\tr\tB\nGCI3\tr\tA\tB\n"
        axioms, sig = parse_normalized(text)
        pool = list(range(2, sig.n_classes))
        rng = np.random.default_rng(1)
        slots = {Form.GCI0: 1, Form.GCI1: 2, Form.GCI2: 2, Form.GCI3: 2}
        for ax in axioms:
            out = corrupt(ax, pool, rng)
            slot = slots[ax.form]
            for j in range(len(ax.args)):
                if j == slot:
                    assert out.args[j] != ax.args[j]
                else:
                    assert out.args[j] == ax.args[j]

    def test_uniform_distribution(self):
        # replacement frequencies over a 10-element pool: each of the 9
        # candidates within 0.01 of 1/9
        axioms, sig = parse_normalized("GCI0\tA\tB\n")
        pool = [sig.class_id("B")] + [sig.intern_class(f"X{i}") for i in range(9)]
        kb = build_kb(sig, axioms)
        sampler = NegativeSampler(kb, SamplerConfig(seed=7,
                                                    pools={Form.GCI0: pool}))
        rows = np.array([axioms[0].args] * 100_000, dtype=np.int64)
        out, keep = sampler.corrupt_ids(Form.GCI0, rows)
        assert keep.all()
        values, counts = np.unique(out[:, 1], return_counts=True)
        assert sig.class_id("B") not in values
        assert len(values) == 9
        freqs = counts / len(rows)
        assert np.abs(freqs - 1 / 9).max() < 0.01


class TestFiltering:
    def test_entailed_corruption_rejected(self):
        kb, dc = kb_with_closure("GCI2\tA\tr\tB\nGCI0\tB\tBp\nGCI0\tZ1\tZ1\n"
                                 "GCI0\tZ2\tZ2\nGCI0\tZ3\tZ3\n")
        cfg = SamplerConfig(filter_with_closure=True, seed=5)
        sampler = NegativeSampler(kb, cfg, dc)
        rows = np.array([kb.axioms[Form.GCI2][0].args] * 2000, dtype=np.int64)
        out, keep = sampler.corrupt_ids(Form.GCI2, rows)
        sig = kb.sig
        bp = sig.class_id("Bp")
        assert keep.sum() > 0
        for row in out[keep]:
            assert row[2] != bp
            assert not dc.contains(Axiom(Form.GCI2, tuple(row)))

    def test_requires_closure(self):
        kb, _ = kb_with_closure("GCI2\tA\tr\tB\n")
        with pytest.raises(SamplingError, match="closure"):
            NegativeSampler(kb, SamplerConfig(filter_with_closure=True))

    def test_drop_on_exhaustion(self):
        # every pool candidate is an entailed tail: all corruptions must drop
        kb, dc = kb_with_closure("GCI2\tA\tr\tB\nGCI0\tB\tC\nGCI0\tC\tD\n")
        pool = [kb.sig.class_id(n) for n in ("B", "C", "D")]
        cfg = SamplerConfig(filter_with_closure=True, max_resample_attempts=3,
                            seed=1, pools={Form.GCI2: pool})
        sampler = NegativeSampler(kb, cfg, dc)
        rows = np.array([kb.axioms[Form.GCI2][0].args] * 50, dtype=np.int64)
        out, keep = sampler.corrupt_ids(Form.GCI2, rows)
        assert not keep.any()
        assert sampler.stats.dropped == 50
        assert sampler.stats.drop_rate == pytest.approx(1.0)

    def test_drop_rate_accounting(self):
        kb, dc = kb_with_closure("GCI2\tA\tr\tB\nGCI0\tB\tBp\nGCI0\tZ1\tZ1\n")
        cfg = SamplerConfig(filter_with_closure=True, seed=3)
        sampler = NegativeSampler(kb, cfg, dc)
        batch = [kb.axioms[Form.GCI2][0]] * 500
        negs = sampler.sample(batch)
        st = sampler.stats
        assert st.requested == 500
        assert st.produced == len(negs)
        assert st.dropped == st.requested - st.produced
        assert st.drop_rate == pytest.approx(st.dropped / 500)


class TestEntailedRatio:
    def test_full_ratio_all_closure_members(self):
        kb, dc = kb_with_closure("GCI2\tA\tr\tB\nGCI0\tB\tBp\nGCI0\tZ1\tZ1\n")
        cfg = SamplerConfig(entailed_ratio=1.0, seed=11)
        negs, stats = sample_negatives([kb.axioms[Form.GCI2][0]] * 300, cfg, kb, dc)
        assert len(negs) == 300
        assert all(dc.contains(ax) for ax in negs)
        assert stats.entailed_injected == 300

    def test_zero_ratio_filtering_none_member(self):
        kb, dc = kb_with_closure(
            "GCI2\tA\tr\tB\nGCI0\tB\tBp\n"
            + "".join(f"GCI0\tW{i}\tW{i}\n" for i in range(10)))
        cfg = SamplerConfig(filter_with_closure=True, entailed_ratio=0.0, seed=13)
        negs, _ = sample_negatives([kb.axioms[Form.GCI2][0]] * 1000, cfg, kb, dc)
        train = {ax.args for ax in kb.train_gci2}
        for ax in negs:
            assert not dc.contains(ax)
            assert ax.args not in train


class TestDeterminism:
    def test_same_seed_same_sequence(self):
        kb, dc = kb_with_closure("GCI2\tA\tr\tB\nGCI0\tB\tBp\nGCI0\tZ1\tZ1\n")
        batch = [kb.axioms[Form.GCI2][0]] * 64
        cfg = SamplerConfig(filter_with_closure=True, seed=21)
        a, _ = sample_negatives(batch, cfg, kb, dc)
        b, _ = sample_negatives(batch, cfg, kb, dc)
        assert a == b

    def test_different_seed_differs(self):
        kb, _ = kb_with_closure("GCI2\tA\tr\tB\n" +
                                "".join(f"GCI0\tW{i}\tW{i}\n" for i in range(20)))
        batch = [kb.axioms[Form.GCI2][0]] * 64
        a, _ = sample_negatives(batch, SamplerConfig(seed=1), kb)
        b, _ = sample_negatives(batch, SamplerConfig(seed=2), kb)
        assert a != b
