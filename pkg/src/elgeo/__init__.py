"""Ball-geometry embeddings of EL knowledge bases, with reasoning-aware training.

The package covers the full pipeline: axiom parsing and normalization
(:mod:`elgeo.axioms`, :mod:`elgeo.sexpr`, :mod:`elgeo.normalize`), dataset
handling (:mod:`elgeo.dataset`), subsumption saturation and the per-form
deductive closure (:mod:`elgeo.reasoner`, :mod:`elgeo.closure`), losses,
scores and gradients (:mod:`elgeo.geometry`), negative sampling
(:mod:`elgeo.sampling`), training (:mod:`elgeo.training`), ranking metrics
(:mod:`elgeo.evaluation`), and bundled toy datasets (:mod:`elgeo.toygen`).
The ``elgeo`` command line wires them into reproducible runs.
"""

__version__ = "0.1.0"
