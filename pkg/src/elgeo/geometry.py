"""Ball-embedding parameters, loss terms, the completion score, and their gradients.

Classes are open n-balls (center plus raw, possibly negative, radius) and
relations are translation vectors.  Every loss term is a sum of activated
hinge arguments plus center regularization; ``strict`` regularization is
``| ||x|| - 1 |`` (centers pinned to the unit sphere) and ``relaxed`` is
``max(0, ||x|| - R)`` (centers inside the radius-R ball).

All losses accept id arrays and return per-sample values; gradients are
accumulated analytically into a :class:`GradientBuffer`.  Subgradient
conventions: activation kinks take the derivative of the negative side at 0
(0 for relu, the slope for leaky_relu), a zero-norm difference vector gets a
zero direction, and regularization kinks get 0.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .axioms import Signature

TERMS = (
    "gci0_pos", "gci1_pos", "gci2_pos", "gci3_pos",
    "gci0_bot", "gci1_bot", "gci3_bot",
    "gci0_neg", "gci1_neg", "gci2_neg", "gci3_neg",
    "score_gci2",
)

# Number of id columns each term consumes (relation slots included).
TERM_ARITY = {
    "gci0_pos": 2, "gci1_pos": 3, "gci2_pos": 3, "gci3_pos": 3,
    "gci0_bot": 1, "gci1_bot": 2, "gci3_bot": 2,
    "gci0_neg": 2, "gci1_neg": 3, "gci2_neg": 3, "gci3_neg": 3,
    "score_gci2": 3,
}

# Columns holding relation ids (all other columns are class ids).
TERM_RELATION_SLOTS = {
    "gci2_pos": (1,), "gci2_neg": (1,), "score_gci2": (1,),
    "gci3_pos": (0,), "gci3_neg": (0,), "gci3_bot": (0,),
}

CHECKPOINT_MAGIC = b"ELGEO\x00"
CHECKPOINT_VERSION = 1


@dataclass
class EmbeddingModel:
    sig: Signature
    dim: int
    margin: float
    reg_mode: str            # "strict" | "relaxed"
    reg_radius: float
    activation: str          # "relu" | "leaky_relu"
    leaky_slope: float
    seed: int
    centers: np.ndarray      # (n_classes, dim) float64
    radii: np.ndarray        # (n_classes,) float64
    rel_vectors: np.ndarray  # (n_relations, dim) float64

    @classmethod
    def create(cls, sig: Signature, dim: int, margin: float = 0.1,
               reg_mode: str = "strict", reg_radius: float = 1.0,
               activation: str = "relu", leaky_slope: float = 0.01,
               seed: int = 42, rng: np.random.Generator | None = None) -> "EmbeddingModel":
        """Initialize parameters i.i.d. uniform on [-1/sqrt(dim), 1/sqrt(dim)]."""
        if reg_mode not in ("strict", "relaxed"):
            raise ValueError(f"unknown reg_mode: {reg_mode!r}")
        if activation not in ("relu", "leaky_relu"):
            raise ValueError(f"unknown activation: {activation!r}")
        if rng is None:
            rng = np.random.default_rng(seed)
        bound = 1.0 / np.sqrt(dim)
        centers = rng.uniform(-bound, bound, size=(sig.n_classes, dim))
        radii = rng.uniform(-bound, bound, size=sig.n_classes)
        rels = rng.uniform(-bound, bound, size=(max(sig.n_relations, 1), dim))
        rels = rels[:sig.n_relations]
        return cls(sig=sig, dim=dim, margin=margin, reg_mode=reg_mode,
                   reg_radius=reg_radius, activation=activation,
                   leaky_slope=leaky_slope, seed=seed,
                   centers=centers, radii=radii, rel_vectors=rels)

    def copy(self) -> "EmbeddingModel":
        return EmbeddingModel(
            sig=self.sig, dim=self.dim, margin=self.margin, reg_mode=self.reg_mode,
            reg_radius=self.reg_radius, activation=self.activation,
            leaky_slope=self.leaky_slope, seed=self.seed,
            centers=self.centers.copy(), radii=self.radii.copy(),
            rel_vectors=self.rel_vectors.copy())

    def all_finite(self) -> bool:
        return bool(np.isfinite(self.centers).all() and np.isfinite(self.radii).all()
                    and np.isfinite(self.rel_vectors).all())

    def score_tails(self, c: int, r: int, tails: np.ndarray) -> np.ndarray:
        """Completion score of (c, r, t) for every candidate tail t."""
        tails = np.asarray(tails, dtype=np.int64)
        cs = np.full(len(tails), c, dtype=np.int64)
        rs = np.full(len(tails), r, dtype=np.int64)
        return loss_term(self, "score_gci2", (cs, rs, tails))


class GradientBuffer:
    """Dense accumulators for parameter gradients (repeated ids add up)."""

    def __init__(self, model: EmbeddingModel):
        self.centers = np.zeros_like(model.centers)
        self.radii = np.zeros_like(model.radii)
        self.rels = np.zeros_like(model.rel_vectors)

    def add_center(self, ids, g):
        np.add.at(self.centers, ids, g)

    def add_radius(self, ids, g):
        np.add.at(self.radii, ids, g)

    def add_rel(self, ids, g):
        np.add.at(self.rels, ids, g)


def _act(model: EmbeddingModel, x: np.ndarray) -> np.ndarray:
    if model.activation == "relu":
        return np.maximum(x, 0.0)
    return np.where(x > 0.0, x, model.leaky_slope * x)


def _dact(model: EmbeddingModel, x: np.ndarray) -> np.ndarray:
    if model.activation == "relu":
        return (x > 0.0).astype(np.float64)
    return np.where(x > 0.0, 1.0, model.leaky_slope)


def _unit(diff: np.ndarray, norms: np.ndarray) -> np.ndarray:
    out = np.zeros_like(diff)
    np.divide(diff, norms[:, None], out=out, where=norms[:, None] > 0.0)
    return out


def _reg(model: EmbeddingModel, ids: np.ndarray, grad: GradientBuffer | None,
         coef) -> np.ndarray:
    """Center regularization value per id; gradients accumulated when asked."""
    x = model.centers[ids]
    norms = np.linalg.norm(x, axis=1)
    if model.reg_mode == "strict":
        val = np.abs(norms - 1.0)
        dval = np.sign(norms - 1.0)
    else:
        excess = norms - model.reg_radius
        val = np.maximum(excess, 0.0)
        dval = (excess > 0.0).astype(np.float64)
    if grad is not None:
        grad.add_center(ids, (coef * dval)[:, None] * _unit(x, norms))
    return val


def _check_ids(model: EmbeddingModel, ids: np.ndarray, n: int, what: str):
    if len(ids) and (ids.min() < 0 or ids.max() >= n):
        raise KeyError(f"unknown {what} id in batch (valid range 0..{n - 1})")


def loss_term(model: EmbeddingModel, term: str, cols, grad: GradientBuffer | None = None,
              coef=1.0) -> np.ndarray:
    """Per-sample values of one loss term; optionally accumulate `coef` x gradient.

    ``cols`` holds one id array per slot in the term's axiom layout
    (relation slots included in order).  ``coef`` may be a scalar or a
    per-sample array and scales only the gradient, not the returned values.
    """
    cols = tuple(np.asarray(c, dtype=np.int64) for c in cols)
    if term not in TERM_ARITY:
        raise ValueError(f"unknown loss term: {term!r}")
    if len(cols) != TERM_ARITY[term]:
        raise ValueError(f"{term} takes {TERM_ARITY[term]} id columns, got {len(cols)}")
    cen, rad, rel = model.centers, model.radii, model.rel_vectors
    gamma = model.margin
    coef = np.asarray(coef, dtype=np.float64)

    def hinge(arg):
        """Activated hinge value plus its upstream derivative times coef."""
        val = _act(model, arg)
        u = _dact(model, arg) * coef if grad is not None else None
        return val, u

    if term in ("gci0_pos",):
        c, d = cols
        _check_ids(model, c, model.sig.n_classes, "class")
        _check_ids(model, d, model.sig.n_classes, "class")
        diff = cen[c] - cen[d]
        nrm = np.linalg.norm(diff, axis=1)
        arg = nrm + rad[c] - rad[d] - gamma
        val, u = hinge(arg)
        if grad is not None:
            direction = _unit(diff, nrm)
            grad.add_center(c, u[:, None] * direction)
            grad.add_center(d, -u[:, None] * direction)
            grad.add_radius(c, u)
            grad.add_radius(d, -u)
        return val + _reg(model, c, grad, coef) + _reg(model, d, grad, coef)

    if term in ("gci0_neg", "gci1_bot"):
        # both penalize ball overlap: hinge(r(c) + r(d) - dist + margin)
        c, d = cols
        _check_ids(model, c, model.sig.n_classes, "class")
        _check_ids(model, d, model.sig.n_classes, "class")
        diff = cen[c] - cen[d]
        nrm = np.linalg.norm(diff, axis=1)
        arg = rad[c] + rad[d] - nrm + gamma
        val, u = hinge(arg)
        if grad is not None:
            direction = _unit(diff, nrm)
            grad.add_center(c, -u[:, None] * direction)
            grad.add_center(d, u[:, None] * direction)
            grad.add_radius(c, u)
            grad.add_radius(d, u)
        return val + _reg(model, c, grad, coef) + _reg(model, d, grad, coef)

    if term == "gci1_pos":
        c, d, e = cols
        for ids in cols:
            _check_ids(model, ids, model.sig.n_classes, "class")
        dcd = cen[c] - cen[d]
        dce = cen[c] - cen[e]
        dde = cen[d] - cen[e]
        ncd = np.linalg.norm(dcd, axis=1)
        nce = np.linalg.norm(dce, axis=1)
        nde = np.linalg.norm(dde, axis=1)
        arg1 = ncd - rad[c] - rad[d] - gamma          # the two balls must meet
        arg2 = nce + rad[c] - rad[e] - gamma          # c inside e
        arg3 = nde + rad[d] - rad[e] - gamma          # d inside e
        arg4 = np.minimum(rad[c], rad[d]) - rad[e] - gamma
        v1, u1 = hinge(arg1)
        v2, u2 = hinge(arg2)
        v3, u3 = hinge(arg3)
        v4, u4 = hinge(arg4)
        if grad is not None:
            e1 = _unit(dcd, ncd)
            e2 = _unit(dce, nce)
            e3 = _unit(dde, nde)
            grad.add_center(c, u1[:, None] * e1 + u2[:, None] * e2)
            grad.add_center(d, -u1[:, None] * e1 + u3[:, None] * e3)
            grad.add_center(e, -u2[:, None] * e2 - u3[:, None] * e3)
            min_c = (rad[c] <= rad[d]).astype(np.float64)
            grad.add_radius(c, -u1 + u2 + u4 * min_c)
            grad.add_radius(d, -u1 + u3 + u4 * (1.0 - min_c))
            grad.add_radius(e, -u2 - u3 - u4)
        val = v1 + v2 + v3 + v4
        return (val + _reg(model, c, grad, coef) + _reg(model, d, grad, coef)
                + _reg(model, e, grad, coef))

    if term == "gci1_neg":
        c, d, e = cols
        for ids in cols:
            _check_ids(model, ids, model.sig.n_classes, "class")
        dcd = cen[c] - cen[d]
        dce = cen[c] - cen[e]
        dde = cen[d] - cen[e]
        ncd = np.linalg.norm(dcd, axis=1)
        nce = np.linalg.norm(dce, axis=1)
        nde = np.linalg.norm(dde, axis=1)
        arg1 = -rad[c] - rad[d] + ncd - gamma         # penalize non-overlap of c and d
        arg2 = rad[c] - nce + gamma                 # e's center outside ball c
        arg3 = rad[d] - nde + gamma                 # e's center outside ball d
        v1, u1 = hinge(arg1)
        v2, u2 = hinge(arg2)
        v3, u3 = hinge(arg3)
        if grad is not None:
            e1 = _unit(dcd, ncd)
            e2 = _unit(dce, nce)
            e3 = _unit(dde, nde)
            grad.add_center(c, u1[:, None] * e1 - u2[:, None] * e2)
            grad.add_center(d, -u1[:, None] * e1 - u3[:, None] * e3)
            grad.add_center(e, u2[:, None] * e2 + u3[:, None] * e3)
            grad.add_radius(c, -u1 + u2)
            grad.add_radius(d, -u1 + u3)
        val = v1 + v2 + v3
        return (val + _reg(model, c, grad, coef) + _reg(model, d, grad, coef)
                + _reg(model, e, grad, coef))

    if term in ("gci2_pos", "gci2_neg", "score_gci2"):
        c, r, d = cols
        _check_ids(model, c, model.sig.n_classes, "class")
        _check_ids(model, r, model.sig.n_relations, "relation")
        _check_ids(model, d, model.sig.n_classes, "class")
        diff = cen[c] + rel[r] - cen[d]
        nrm = np.linalg.norm(diff, axis=1)
        direction = _unit(diff, nrm) if grad is not None else None
        if term == "gci2_pos":
            arg = nrm + rad[c] - rad[d] - gamma
            val, u = hinge(arg)
            if grad is not None:
                grad.add_center(c, u[:, None] * direction)
                grad.add_rel(r, u[:, None] * direction)
                grad.add_center(d, -u[:, None] * direction)
                grad.add_radius(c, u)
                grad.add_radius(d, -u)
            return val + _reg(model, c, grad, coef) + _reg(model, d, grad, coef)
        if term == "gci2_neg":
            arg = rad[c] + rad[d] - nrm + gamma
            val, u = hinge(arg)
            if grad is not None:
                grad.add_center(c, -u[:, None] * direction)
                grad.add_rel(r, -u[:, None] * direction)
                grad.add_center(d, u[:, None] * direction)
                grad.add_radius(c, u)
                grad.add_radius(d, u)
            return val + _reg(model, c, grad, coef) + _reg(model, d, grad, coef)
        # score_gci2: -act(-r(c) - r(d) + dist - margin); no regularization
        arg = -rad[c] - rad[d] + nrm - gamma
        val = -_act(model, arg)
        if grad is not None:
            u = _dact(model, arg) * coef
            grad.add_center(c, -u[:, None] * direction)
            grad.add_rel(r, -u[:, None] * direction)
            grad.add_center(d, u[:, None] * direction)
            grad.add_radius(c, u)
            grad.add_radius(d, u)
        return val

    if term in ("gci3_pos", "gci3_neg"):
        r, c, d = cols
        _check_ids(model, r, model.sig.n_relations, "relation")
        _check_ids(model, c, model.sig.n_classes, "class")
        _check_ids(model, d, model.sig.n_classes, "class")
        diff = cen[c] - rel[r] - cen[d]
        nrm = np.linalg.norm(diff, axis=1)
        direction = _unit(diff, nrm) if grad is not None else None
        if term == "gci3_pos":
            arg = nrm - rad[c] - rad[d] - gamma
            val, u = hinge(arg)
            if grad is not None:
                grad.add_center(c, u[:, None] * direction)
                grad.add_rel(r, -u[:, None] * direction)
                grad.add_center(d, -u[:, None] * direction)
                grad.add_radius(c, -u)
                grad.add_radius(d, -u)
        else:
            arg = rad[c] + rad[d] - nrm + gamma
            val, u = hinge(arg)
            if grad is not None:
                grad.add_center(c, -u[:, None] * direction)
                grad.add_rel(r, u[:, None] * direction)
                grad.add_center(d, u[:, None] * direction)
                grad.add_radius(c, u)
                grad.add_radius(d, u)
        return val + _reg(model, c, grad, coef) + _reg(model, d, grad, coef)

    if term == "gci0_bot":
        (c,) = cols
        _check_ids(model, c, model.sig.n_classes, "class")
        if grad is not None:
            grad.add_radius(c, np.broadcast_to(coef, c.shape).astype(np.float64))
        return rad[c].copy()

    if term == "gci3_bot":
        r, c = cols
        _check_ids(model, r, model.sig.n_relations, "relation")
        _check_ids(model, c, model.sig.n_classes, "class")
        if grad is not None:
            grad.add_radius(c, np.broadcast_to(coef, c.shape).astype(np.float64))
        return rad[c].copy()

    raise AssertionError(term)


def loss_value(model: EmbeddingModel, term: str, ids: tuple[int, ...]) -> float:
    """Single-axiom loss value."""
    cols = tuple(np.array([i], dtype=np.int64) for i in ids)
    return float(loss_term(model, term, cols)[0])


# Named single-axiom helpers mirroring the term table.

def loss_gci0_pos(model, c, d): return loss_value(model, "gci0_pos", (c, d))
def loss_gci1_pos(model, c, d, e): return loss_value(model, "gci1_pos", (c, d, e))
def loss_gci2_pos(model, c, r, d): return loss_value(model, "gci2_pos", (c, r, d))
def loss_gci3_pos(model, r, c, d): return loss_value(model, "gci3_pos", (r, c, d))
def loss_gci0_bot(model, c): return loss_value(model, "gci0_bot", (c,))
def loss_gci1_bot(model, c, d): return loss_value(model, "gci1_bot", (c, d))
def loss_gci3_bot(model, r, c): return loss_value(model, "gci3_bot", (r, c))
def loss_gci0_neg(model, c, d): return loss_value(model, "gci0_neg", (c, d))
def loss_gci1_neg(model, c, d, e): return loss_value(model, "gci1_neg", (c, d, e))
def loss_gci2_neg(model, c, r, d): return loss_value(model, "gci2_neg", (c, r, d))
def loss_gci3_neg(model, r, c, d): return loss_value(model, "gci3_neg", (r, c, d))
def score_gci2(model, c, r, d): return loss_value(model, "score_gci2", (c, r, d))


def gradient(model: EmbeddingModel, term: str, ids: tuple[int, ...]) -> dict:
    """Sparse analytic gradient of one term at one axiom.

    Keys are ("center", id), ("radius", id), ("relation", id); only touched
    parameters appear.
    """
    buf = GradientBuffer(model)
    cols = tuple(np.array([i], dtype=np.int64) for i in ids)
    loss_term(model, term, cols, grad=buf)
    out: dict = {}
    for i in np.flatnonzero(np.abs(buf.centers).sum(axis=1)):
        out[("center", int(i))] = buf.centers[i].copy()
    for i in np.flatnonzero(buf.radii):
        out[("radius", int(i))] = float(buf.radii[i])
    if buf.rels.size:
        for i in np.flatnonzero(np.abs(buf.rels).sum(axis=1)):
            out[("relation", int(i))] = buf.rels[i].copy()
    return out


# --- checkpoint format -------------------------------------------------------

def save_model(model: EmbeddingModel, path: str):
    """Binary checkpoint: header JSON, raw little-endian float64 arrays, id tables."""
    header = {
        "version": CHECKPOINT_VERSION,
        "dim": model.dim,
        "n_classes": model.sig.n_classes,
        "n_relations": model.sig.n_relations,
        "margin": model.margin,
        "reg_mode": model.reg_mode,
        "reg_radius": model.reg_radius,
        "activation": model.activation,
        "leaky_slope": model.leaky_slope,
        "seed": model.seed,
    }
    tables = {
        "classes": list(model.sig.class_names),
        "relations": list(model.sig.relation_names),
    }
    hblob = json.dumps(header, sort_keys=True).encode("utf-8")
    tblob = json.dumps(tables, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<Q", len(hblob)))
        f.write(hblob)
        f.write(np.ascontiguousarray(model.centers, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(model.radii, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(model.rel_vectors, dtype="<f8").tobytes())
        f.write(struct.pack("<Q", len(tblob)))
        f.write(tblob)


def load_model(path: str) -> EmbeddingModel:
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise ValueError(f"not a checkpoint file: {path}")
    off = len(CHECKPOINT_MAGIC)
    (hlen,) = struct.unpack_from("<Q", blob, off)
    off += 8
    header = json.loads(blob[off:off + hlen].decode("utf-8"))
    off += hlen
    if header["version"] != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version: {header['version']}")
    nc, nr, dim = header["n_classes"], header["n_relations"], header["dim"]

    def take(count):
        nonlocal off
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=off).copy()
        off += count * 8
        return arr

    centers = take(nc * dim).reshape(nc, dim)
    radii = take(nc)
    rels = take(nr * dim).reshape(nr, dim)
    (tlen,) = struct.unpack_from("<Q", blob, off)
    off += 8
    tables = json.loads(blob[off:off + tlen].decode("utf-8"))
    sig = Signature()
    for name in tables["classes"][2:]:   # TOP and BOT are pre-interned
        sig.intern_class(name)
    for name in tables["relations"]:
        sig.intern_relation(name)
    return EmbeddingModel(
        sig=sig, dim=dim, margin=header["margin"], reg_mode=header["reg_mode"],
        reg_radius=header["reg_radius"], activation=header["activation"],
        leaky_slope=header["leaky_slope"], seed=header["seed"],
        centers=centers, radii=radii, rel_vectors=rels)
