"""Saturation of a normalized knowledge base into the named-concept subsumption closure.

Completion rules over subsumer sets S(C) (seeded with {C, TOP}) and role
edge sets R(r):

  R1  D in S(C), C' sub D' via GCI0(D,E)            -> E in S(C)
  R2  D1,D2 in S(C), GCI1(D1,D2,E)                  -> E in S(C)
  R3  D in S(C), GCI2(D,r,E)                        -> (C,E) in R(r)
  R4  (C,D) in R(r), D' in S(D), GCI3(r,D',E)       -> E in S(C)
  R5  (C,D) in R(r), BOT in S(D)                    -> BOT in S(C)
  R6  the three bottom forms, analogously to R1/R2/R4 with E = BOT

Role inclusion axioms are parsed and stored but play no part here.  The
fixpoint is unique, so the worklist order does not affect the result.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .axioms import BOT, TOP, Form, Signature
from .dataset import KnowledgeBase


@dataclass
class SubsumptionClosure:
    """Derived subsumers per class; unsat classes additionally subsume everything."""

    sig: Signature
    subsumers: list[set[int]]
    unsat: set[int]

    def is_subsumed(self, c: int, d: int) -> bool:
        """True when c is a (derived) subclass of d."""
        n = self.sig.n_classes
        if not (0 <= c < n and 0 <= d < n):
            raise KeyError(f"class id out of range: {(c, d)}")
        return d in self.subsumers[c] or c in self.unsat

    def superclasses_of(self, c: int) -> set[int]:
        if c in self.unsat:
            return set(range(self.sig.n_classes))
        return self.subsumers[c]

    def pairs(self):
        """All derived subclass/superclass pairs, unsat classes expanded."""
        n = self.sig.n_classes
        for c in range(n):
            if c in self.unsat:
                for d in range(n):
                    yield c, d
            else:
                for d in self.subsumers[c]:
                    yield c, d


def saturate(kb: KnowledgeBase) -> SubsumptionClosure:
    n = kb.sig.n_classes
    subsumers: list[set[int]] = [set() for _ in range(n)]
    edges: dict[int, set[tuple[int, int]]] = {}
    succ: dict[tuple[int, int], set[int]] = {}   # (r, C) -> successors D
    incoming: list[list[tuple[int, int]]] = [[] for _ in range(n)]  # D -> [(r, C)]

    # axiom indexes, keyed by the slots that trigger each rule
    gci0_by_sub: dict[int, list[int]] = {}
    gci1_by_part: dict[int, list[tuple[int, int]]] = {}      # D1 -> [(D2, E)]
    gci2_by_sub: dict[int, list[tuple[int, int]]] = {}       # D -> [(r, E)]
    gci3_by_key: dict[tuple[int, int], list[int]] = {}       # (r, D') -> [E]
    gci0_bot: set[int] = set()
    gci1_bot_by_part: dict[int, list[int]] = {}              # D1 -> [D2]
    gci3_bot_keys: set[tuple[int, int]] = set()

    for ax in kb.axioms[Form.GCI0]:
        gci0_by_sub.setdefault(ax.args[0], []).append(ax.args[1])
    for ax in kb.axioms[Form.GCI1]:
        c, d, e = ax.args
        gci1_by_part.setdefault(c, []).append((d, e))
        if d != c:
            gci1_by_part.setdefault(d, []).append((c, e))
    for ax in kb.axioms[Form.GCI2]:
        c, r, d = ax.args
        gci2_by_sub.setdefault(c, []).append((r, d))
    for ax in kb.axioms[Form.GCI3]:
        r, c, d = ax.args
        gci3_by_key.setdefault((r, c), []).append(d)
    for ax in kb.axioms[Form.GCI0_BOT]:
        gci0_bot.add(ax.args[0])
    for ax in kb.axioms[Form.GCI1_BOT]:
        c, d = ax.args
        gci1_bot_by_part.setdefault(c, []).append(d)
        if d != c:
            gci1_bot_by_part.setdefault(d, []).append(c)
    for ax in kb.axioms[Form.GCI3_BOT]:
        gci3_bot_keys.add(ax.args)

    work: deque = deque()

    def add_sub(c: int, d: int):
        if d not in subsumers[c]:
            subsumers[c].add(d)
            work.append(("s", c, d))

    def add_edge(r: int, c: int, d: int):
        pairs = edges.setdefault(r, set())
        if (c, d) not in pairs:
            pairs.add((c, d))
            succ.setdefault((r, c), set()).add(d)
            incoming[d].append((r, c))
            work.append(("e", r, c, d))

    for c in range(n):
        add_sub(c, c)
        add_sub(c, TOP)

    while work:
        item = work.popleft()
        if item[0] == "s":
            _, c, d = item
            for e in gci0_by_sub.get(d, ()):
                add_sub(c, e)
            for other, e in gci1_by_part.get(d, ()):
                if other in subsumers[c]:
                    add_sub(c, e)
            for r, e in gci2_by_sub.get(d, ()):
                add_edge(r, c, e)
            if d in gci0_bot:
                add_sub(c, BOT)
            for other in gci1_bot_by_part.get(d, ()):
                if other in subsumers[c]:
                    add_sub(c, BOT)
            # d joined S(c): re-fire R4/R5/R6 for edges pointing at c
            for r, src in tuple(incoming[c]):
                for e in gci3_by_key.get((r, d), ()):
                    add_sub(src, e)
                if (r, d) in gci3_bot_keys:
                    add_sub(src, BOT)
                if d == BOT:
                    add_sub(src, BOT)
        else:
            _, r, c, d = item
            for dp in tuple(subsumers[d]):
                for e in gci3_by_key.get((r, dp), ()):
                    add_sub(c, e)
                if (r, dp) in gci3_bot_keys:
                    add_sub(c, BOT)
            if BOT in subsumers[d]:
                add_sub(c, BOT)

    unsat = {c for c in range(n) if BOT in subsumers[c]}
    return SubsumptionClosure(sig=kb.sig, subsumers=subsumers, unsat=unsat)


def dump_subsumptions(closure: SubsumptionClosure) -> str:
    """All derived pairs as GCI0 lines in the normalized axiom format."""
    sig = closure.sig
    lines = [
        f"GCI0\t{sig.class_name(c)}\t{sig.class_name(d)}"
        for c, d in closure.pairs()
    ]
    return "\n".join(lines) + ("\n" if lines else "")
