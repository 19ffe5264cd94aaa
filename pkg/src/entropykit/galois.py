"""Finite pre-orders as thin categories: monotone maps, Galois connections
(adjoint pairs), and the realization check between entropy systems.

Pre-orders are first class: adiabatic equivalence makes the thermodynamic
order a genuine pre-order, so "greatest element" always means greatest up
to equivalence and any representative may be returned.  Carriers are small
by design and every check is exhaustive.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .access import EntropyFn, StateSpace


class GaloisError(Exception):
    pass


class Poset:
    """Finite pre-ordered set; the relation is closed reflexively and
    transitively at construction."""

    __slots__ = ("carrier", "relation", "_index")

    def __init__(self, carrier: Sequence, relation):
        carrier = tuple(carrier)
        if len(set(carrier)) != len(carrier):
            raise GaloisError("carrier elements must be distinct")
        members = set(carrier)
        succ = {a: set() for a in carrier}
        for a, b in relation:
            if a not in members or b not in members:
                raise GaloisError(f"relation edge ({a}, {b}) outside carrier")
            succ[a].add(b)
        rel = set()
        for start in carrier:
            seen = {start}
            queue = [start]
            while queue:
                cur = queue.pop()
                for nxt in succ[cur]:
                    if nxt not in seen:
                        seen.add(nxt)
                        queue.append(nxt)
            rel.update((start, reach) for reach in seen)
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "relation", frozenset(rel))
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(carrier)})

    def __setattr__(self, *a):
        raise AttributeError("Poset is immutable")

    def le(self, x, y) -> bool:
        return (x, y) in self.relation

    def equivalent(self, x, y) -> bool:
        return self.le(x, y) and self.le(y, x)

    @property
    def antisymmetric(self) -> bool:
        return all(
            not (self.le(x, y) and self.le(y, x))
            for x, y in itertools.combinations(self.carrier, 2)
        )

    @property
    def total(self) -> bool:
        return all(
            self.le(x, y) or self.le(y, x)
            for x, y in itertools.combinations(self.carrier, 2)
        )

    def __eq__(self, other):
        if not isinstance(other, Poset):
            return NotImplemented
        return set(self.carrier) == set(other.carrier) and self.relation == other.relation

    def __hash__(self):
        return hash((frozenset(self.carrier), self.relation))

    def __repr__(self):
        edges = sorted(
            (a, b) for a, b in self.relation if a != b
        )
        return f"Poset({list(self.carrier)}, {edges})"

    @classmethod
    def chain(cls, labels: Sequence) -> "Poset":
        labels = tuple(labels)
        return cls(labels, [(labels[i], labels[i + 1]) for i in range(len(labels) - 1)])

    @classmethod
    def antichain(cls, labels: Sequence) -> "Poset":
        return cls(tuple(labels), [])

    def join(self, x, y):
        """A least upper bound up to equivalence, or None."""
        uppers = [z for z in self.carrier if self.le(x, z) and self.le(y, z)]
        for z in uppers:
            if all(self.le(z, w) for w in uppers):
                return z
        return None


def poset_from_entropy(space: StateSpace, S: EntropyFn) -> Poset:
    """The (total) pre-order the entropy values induce on the states."""
    names = space.names()
    rel = [
        (x, y) for x in names for y in names if S.value(x) <= S.value(y)
    ]
    return Poset(names, rel)


@dataclass(frozen=True)
class MonotoneResult:
    ok: bool
    witness: Optional[tuple] = None  # (x, y) with x ≤ y but F(x) ≰ F(y)


def check_monotone(src: Poset, dst: Poset, mapping: Mapping) -> MonotoneResult:
    for x in src.carrier:
        if x not in mapping:
            raise GaloisError(f"mapping is not total: {x!r} unmapped")
        if mapping[x] not in dst._index:
            raise GaloisError(f"{mapping[x]!r} is outside the target carrier")
    for x, y in itertools.product(src.carrier, repeat=2):
        if src.le(x, y) and not dst.le(mapping[x], mapping[y]):
            return MonotoneResult(False, (x, y))
    return MonotoneResult(True)


@dataclass(frozen=True)
class MonotoneMap:
    source: Poset
    target: Poset
    mapping: Mapping

    def __post_init__(self):
        object.__setattr__(self, "mapping", dict(self.mapping))
        result = check_monotone(self.source, self.target, self.mapping)
        if not result.ok:
            raise GaloisError(
                f"map is not monotone: {result.witness[0]!r} ≤ {result.witness[1]!r} "
                "is not preserved"
            )

    def __call__(self, x):
        return self.mapping[x]

    @classmethod
    def identity(cls, poset: Poset) -> "MonotoneMap":
        return cls(poset, poset, {x: x for x in poset.carrier})

    def compose(self, inner: "MonotoneMap") -> "MonotoneMap":
        if inner.target != self.source:
            raise GaloisError("posets do not line up for composition")
        return MonotoneMap(
            inner.source, self.target, {x: self(inner(x)) for x in inner.source.carrier}
        )


@dataclass(frozen=True)
class GaloisResult:
    ok: bool
    witness: Optional[tuple] = None  # (a, b, direction)
    unit_ok: Optional[bool] = None  # a ≤ G(F(a))
    counit_ok: Optional[bool] = None  # F(G(b)) ≤ b


def check_galois(F: MonotoneMap, G: MonotoneMap) -> GaloisResult:
    """Exhaustive adjunction check: F(a) ≤ b ⇔ a ≤ G(b) for all pairs."""
    if F.source != G.target or F.target != G.source:
        raise GaloisError("F and G must run between the same two posets")
    A, B = F.source, F.target
    for a in A.carrier:
        for b in B.carrier:
            forward = B.le(F(a), b)
            backward = A.le(a, G(b))
            if forward != backward:
                direction = "F(a) ≤ b but a ≰ G(b)" if forward else "a ≤ G(b) but F(a) ≰ b"
                return GaloisResult(False, (a, b, direction))
    unit = all(A.le(a, G(F(a))) for a in A.carrier)
    counit = all(B.le(F(G(b)), b) for b in B.carrier)
    return GaloisResult(True, None, unit, counit)


@dataclass(frozen=True)
class AdjointResult:
    map: Optional[MonotoneMap]
    witness: Optional[object] = None  # element whose candidate set failed

    @property
    def found(self) -> bool:
        return self.map is not None


def right_adjoint(F: MonotoneMap) -> AdjointResult:
    """G(b) = a greatest element of {a : F(a) ≤ b}, when one exists for
    every b (greatest in the pre-order sense; any representative)."""
    A, B = F.source, F.target
    mapping = {}
    for b in B.carrier:
        candidates = [a for a in A.carrier if B.le(F(a), b)]
        greatest = next(
            (a0 for a0 in candidates if all(A.le(a, a0) for a in candidates)),
            None,
        )
        if greatest is None:
            return AdjointResult(None, b)
        mapping[b] = greatest
    return AdjointResult(MonotoneMap(B, A, mapping))


def left_adjoint(G: MonotoneMap) -> AdjointResult:
    """F(a) = a least element of {b : a ≤ G(b)}, dual to right_adjoint."""
    B, A = G.source, G.target
    mapping = {}
    for a in A.carrier:
        candidates = [b for b in B.carrier if A.le(a, G(b))]
        least = next(
            (b0 for b0 in candidates if all(B.le(b0, b) for b in candidates)),
            None,
        )
        if least is None:
            return AdjointResult(None, a)
        mapping[a] = least
    return AdjointResult(MonotoneMap(A, B, mapping))


@dataclass(frozen=True)
class ClosureReport:
    inflationary: bool  # a ≤ GF(a)
    monotone: bool
    idempotent: bool  # GF(GF(a)) ∼ GF(a)
    kernel_deflationary: bool  # FG(b) ≤ b
    kernel_idempotent: bool

    @property
    def ok(self) -> bool:
        return all(
            (
                self.inflationary,
                self.monotone,
                self.idempotent,
                self.kernel_deflationary,
                self.kernel_idempotent,
            )
        )


def closure_report(F: MonotoneMap, G: MonotoneMap) -> ClosureReport:
    """G∘F should be a closure operator and F∘G a kernel operator whenever
    (F, G) is a Galois pair; assertable exhaustively on finite carriers."""
    A, B = F.source, F.target
    gf = {a: G(F(a)) for a in A.carrier}
    fg = {b: F(G(b)) for b in B.carrier}
    return ClosureReport(
        inflationary=all(A.le(a, gf[a]) for a in A.carrier),
        monotone=all(
            A.le(gf[x], gf[y])
            for x, y in itertools.product(A.carrier, repeat=2)
            if A.le(x, y)
        ),
        idempotent=all(A.equivalent(gf[gf[a]], gf[a]) for a in A.carrier),
        kernel_deflationary=all(B.le(fg[b], b) for b in B.carrier),
        kernel_idempotent=all(B.equivalent(fg[fg[b]], fg[b]) for b in B.carrier),
    )


@dataclass(frozen=True)
class GaloisPair:
    """A validated adjunction F ⊣ G between two pre-orders."""

    F: MonotoneMap
    G: MonotoneMap

    def __post_init__(self):
        result = check_galois(self.F, self.G)
        if not result.ok:
            raise GaloisError(f"not a Galois connection: {result.witness}")


@dataclass(frozen=True)
class LandauerReport:
    ok: bool
    galois: Optional[GaloisResult]
    rows: tuple = ()  # (state, S1(state), S2(F state)) bookkeeping per state
    witness: Optional[tuple] = None
    stage: Optional[str] = None  # which precondition failed


def landauer_check(
    sys1: tuple[StateSpace, EntropyFn],
    sys2: tuple[StateSpace, EntropyFn],
    f_mapping: Mapping,
    g_mapping: Mapping,
) -> LandauerReport:
    """Is the first entropy system realized in the second?

    The realization map F and abstraction map G must be monotone for the
    entropy-induced orders and form a Galois connection:
    S₂(Fc) ≤ S₂(d) ⇔ S₁(c) ≤ S₁(Gd).  The report lists, per abstract
    state c, the entropy S₂(Fc) booked at the realization level.
    """
    space1, s1 = sys1
    space2, s2 = sys2
    p1 = poset_from_entropy(space1, s1)
    p2 = poset_from_entropy(space2, s2)
    mono_f = check_monotone(p1, p2, f_mapping)
    if not mono_f.ok:
        return LandauerReport(
            False, None, witness=mono_f.witness, stage="realization map not monotone"
        )
    mono_g = check_monotone(p2, p1, g_mapping)
    if not mono_g.ok:
        return LandauerReport(
            False, None, witness=mono_g.witness, stage="abstraction map not monotone"
        )
    F = MonotoneMap(p1, p2, f_mapping)
    G = MonotoneMap(p2, p1, g_mapping)
    result = check_galois(F, G)
    rows = tuple(
        (c, s1.value(c), s2.value(F(c))) for c in p1.carrier
    )
    if not result.ok:
        return LandauerReport(False, result, rows, result.witness, "adjunction fails")
    return LandauerReport(True, result, rows)
