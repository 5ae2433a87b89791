"""Walkthrough: the axiom formats and the normalizer.

General class axioms arrive as s-expressions; the normalizer rewrites them
into the nine normal forms, inventing _N classes for complex subexpressions.
Normalized axioms serialize to a TAB-separated line format and round-trip.
"""

from elgeo.axioms import parse_normalized, serialize_normalized
from elgeo.normalize import normalize
from elgeo.sexpr import parse_general

GENERAL = """
(subclassof protein (and molecule (some has_part amino_acid)))
(subclassof (some regulates (and cell_division checkpoint)) regulator)
(equivalent enzyme catalyst)
(subclassof (and kinase phosphatase) bot)
(subrole regulates interacts_with)
"""

general_axioms = parse_general(GENERAL)
print(f"parsed {len(general_axioms)} general axioms")

normalized, sig = normalize(general_axioms)
doc = serialize_normalized(normalized, sig)
print("\nnormal forms:")
print(doc)

reparsed, _ = parse_normalized(doc, sig)
assert reparsed == normalized
print("round-trip through the line format is exact")

fresh = [name for name in sig.class_names if name.startswith("_N")]
print(f"fresh classes introduced: {fresh}")
