"""Axiomatic entropy on finite state spaces: adiabatic-accessibility
pre-orders, axiom verification, the Comparison Hypothesis, entropy
construction, and cross-system affine calibration.

States are composed as scaled multisets (λ₁X₁, λ₂X₂, …) with positive
rational scales, so every comparison stays exact.  Relations come in two
backends: explicit edge lists (closed on demand) and decision-procedure
oracles, of which the entropy-backed oracle is the workhorse for synthetic
test systems.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .expr import Expr


class AccessError(Exception):
    pass


class OracleMismatchError(AccessError):
    """A memoized oracle answered the same query differently."""


class ConstructionImpossible(AccessError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class StateSpace:
    label: str
    coords: tuple[str, ...]
    states: Mapping[str, tuple[Fraction, ...]]
    scalable: bool = False

    def __post_init__(self):
        clean = {}
        for name, vec in self.states.items():
            vec = tuple(Fraction(v) for v in vec)
            if len(vec) != len(self.coords):
                raise AccessError(f"state {name!r} has the wrong dimension")
            clean[name] = vec
        object.__setattr__(self, "states", clean)
        object.__setattr__(self, "coords", tuple(self.coords))

    def names(self) -> tuple[str, ...]:
        return tuple(self.states)


class CompositeState:
    """Multiset of (scale, space label, state name) with positive scales.

    Immutable by convention; the hash is precomputed because composites are
    used heavily as memo keys.
    """

    __slots__ = ("parts", "_hash")

    def __init__(self, parts):
        clean = []
        for lam, lbl, name in parts:
            if type(lam) is not Fraction:
                lam = Fraction(lam)
            if lam <= 0:
                raise AccessError("scales must be positive")
            clean.append((lam, lbl, name))
        if not clean:
            raise AccessError("a composite state needs at least one part")
        clean.sort(key=lambda p: (p[1], p[2], p[0]))
        self.parts = tuple(clean)
        self._hash = hash(self.parts)

    def __eq__(self, other):
        if not isinstance(other, CompositeState):
            return NotImplemented
        return self.parts == other.parts

    def __hash__(self):
        return self._hash

    @classmethod
    def pure(cls, space: str, name: str, scale=1) -> "CompositeState":
        return cls(((Fraction(scale), space, name),))

    def compose(self, other: "CompositeState") -> "CompositeState":
        return CompositeState(self.parts + other.parts)

    def scale(self, lam) -> "CompositeState":
        lam = Fraction(lam)
        return CompositeState(
            tuple((lam * l, s, n) for l, s, n in self.parts)
        )

    def __str__(self):
        body = ", ".join(
            (f"{s}.{n}" if l == 1 else f"{l}·{s}.{n}") for l, s, n in self.parts
        )
        return f"({body})" if len(self.parts) > 1 else body

    __repr__ = __str__


def compose(*states: CompositeState) -> CompositeState:
    out = states[0]
    for s in states[1:]:
        out = out.compose(s)
    return out


# ---------------------------------------------------------------------------
# Accessibility backends
# ---------------------------------------------------------------------------


class Accessibility:
    """Base interface: the pre-order query X ≺ Y."""

    supports_scaling: bool = False

    def le(self, x: CompositeState, y: CompositeState) -> bool:
        raise NotImplementedError

    def universe(self) -> Optional[tuple[CompositeState, ...]]:
        """Explicitly known nodes, or None for intensionally defined relations."""
        return None


class EdgeRelation(Accessibility):
    """Relation given by explicit directed edges on known nodes."""

    def __init__(
        self,
        nodes: Iterable[CompositeState],
        edges: Iterable[tuple[CompositeState, CompositeState]],
        supports_scaling: bool = False,
    ):
        self.nodes = tuple(dict.fromkeys(nodes))
        self._node_set = set(self.nodes)
        self.supports_scaling = supports_scaling
        self.edges = set()
        for a, b in edges:
            if a not in self._node_set or b not in self._node_set:
                raise AccessError("edge endpoint outside the declared nodes")
            self.edges.add((a, b))

    def __contains__(self, x: CompositeState) -> bool:
        return x in self._node_set

    def le(self, x, y) -> bool:
        if x not in self._node_set or y not in self._node_set:
            raise AccessError(f"state outside the relation's universe: {x} or {y}")
        return (x, y) in self.edges

    def universe(self):
        return self.nodes

    def closure(self) -> "EdgeRelation":
        """Reflexive-transitive closure (breadth-first from every node)."""
        succ = {n: set() for n in self.nodes}
        for a, b in self.edges:
            succ[a].add(b)
        closed = set()
        for start in self.nodes:
            seen = {start}
            queue = [start]
            while queue:
                cur = queue.pop()
                for nxt in succ[cur]:
                    if nxt not in seen:
                        seen.add(nxt)
                        queue.append(nxt)
            closed.update((start, reach) for reach in seen)
        return EdgeRelation(self.nodes, closed, self.supports_scaling)


class MemoizedOracle(Accessibility):
    """Wrap a decision procedure; answers are cached and, when recheck is
    set, re-queried to detect nondeterminism."""

    def __init__(self, fn: Callable[[CompositeState, CompositeState], bool],
                 supports_scaling: bool = True, recheck: bool = False):
        self.fn = fn
        self.supports_scaling = supports_scaling
        self.recheck = recheck
        self.memo: dict = {}

    def le(self, x, y) -> bool:
        key = (x, y)
        if key in self.memo:
            if self.recheck and self.fn(x, y) != self.memo[key]:
                raise OracleMismatchError(f"oracle changed its answer on {x} ≺ {y}")
            return self.memo[key]
        answer = bool(self.fn(x, y))
        self.memo[key] = answer
        return answer


class EntropyOracle(Accessibility):
    """X ≺ Y iff the additive, extensive total of a hidden per-state entropy
    does not decrease."""

    supports_scaling = True

    def __init__(self, values: Mapping[str, Mapping[str, Fraction]]):
        self.values = {
            lbl: {n: Fraction(v) for n, v in per.items()} for lbl, per in values.items()
        }
        self._totals: dict[CompositeState, Fraction] = {}

    @classmethod
    def from_expression(cls, spaces: Sequence[StateSpace], entropy: Expr) -> "EntropyOracle":
        values = {}
        for space in spaces:
            chart = entropy.chart
            if set(chart.coords) != set(space.coords):
                raise AccessError("entropy expression does not match state coordinates")
            values[space.label] = {
                name: entropy.evaluate(dict(zip(space.coords, vec)))
                for name, vec in space.states.items()
            }
        return cls(values)

    def total(self, x: CompositeState) -> Fraction:
        cached = self._totals.get(x)
        if cached is not None:
            return cached
        out = Fraction(0)
        for lam, lbl, name in x.parts:
            try:
                out += lam * self.values[lbl][name]
            except KeyError:
                raise AccessError(f"no entropy value for {lbl}.{name}") from None
        self._totals[x] = out
        return out

    def le(self, x, y) -> bool:
        return self.total(x) <= self.total(y)


# ---------------------------------------------------------------------------
# Derived relations and the Comparison Hypothesis
# ---------------------------------------------------------------------------


class Relation(Enum):
    STRICT = "STRICT"  # X ≺≺ Y
    EQUIVALENT = "EQUIVALENT"  # X ∼ Y
    ACCESSIBLE = "ACCESSIBLE"  # comparable in the reverse direction only (Y ≺≺ X)
    INCOMPARABLE = "INCOMPARABLE"


def derived_relations(A: Accessibility, x: CompositeState, y: CompositeState) -> Relation:
    forward = A.le(x, y)
    back = A.le(y, x)
    if forward and back:
        return Relation.EQUIVALENT
    if forward:
        return Relation.STRICT
    if back:
        return Relation.ACCESSIBLE
    return Relation.INCOMPARABLE


@dataclass(frozen=True)
class CHResult:
    total: bool
    incomparable: tuple[tuple[CompositeState, CompositeState], ...]


def comparison_hypothesis(A: Accessibility, space: StateSpace) -> CHResult:
    """Are all pairs of (pure) states of the space comparable?"""
    pures = [CompositeState.pure(space.label, n) for n in space.names()]
    bad = []
    for x, y in itertools.combinations(pures, 2):
        if derived_relations(A, x, y) is Relation.INCOMPARABLE:
            bad.append((x, y))
    return CHResult(not bad, tuple(bad))


# ---------------------------------------------------------------------------
# Axiom verification
# ---------------------------------------------------------------------------


class AxiomStatus(Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    NOT_APPLICABLE = "NOT_APPLICABLE"


@dataclass(frozen=True)
class AxiomResult:
    name: str
    status: AxiomStatus
    witness: Optional[tuple] = None
    caveats: tuple[str, ...] = ()


@dataclass(frozen=True)
class AxiomReport:
    results: tuple[AxiomResult, ...]

    def __getitem__(self, name: str) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def ok(self) -> bool:
        return all(r.status is not AxiomStatus.FAIL for r in self.results)


@dataclass(frozen=True)
class AxiomConfig:
    lambda_grid: tuple[Fraction, ...] = (Fraction(1, 2), Fraction(2), Fraction(3))
    eps_steps: int = 6
    seed: int = 0
    max_triples: int = 600
    max_consistency_pairs: int = 400
    max_stability_quadruples: int = 80
    composite_samples: int = 24
    grid_step: Fraction = Fraction(1, 64)
    margin: Fraction = Fraction(1, 10**6)


DEFAULT_AXIOM_CONFIG = AxiomConfig()

AXIOM_NAMES = (
    "reflexivity",
    "transitivity",
    "consistency",
    "scaling-invariance",
    "splitting-recombination",
    "stability",
)


def _pure_pool(spaces: Sequence[StateSpace]) -> list[CompositeState]:
    return [
        CompositeState.pure(sp.label, n) for sp in spaces for n in sp.names()
    ]


def _composite_pool(pures, config: AxiomConfig, rng: random.Random) -> list[CompositeState]:
    pool = []
    for _ in range(config.composite_samples):
        a, b = rng.choice(pures), rng.choice(pures)
        la = rng.choice(config.lambda_grid)
        lb = rng.choice(config.lambda_grid)
        pool.append(a.scale(la).compose(b.scale(lb)))
    return pool


def _bounded_product(pools, cap: int, rng: random.Random) -> list[tuple]:
    """Full cartesian product when small, otherwise cap random samples."""
    count = 1
    for p in pools:
        count *= len(p)
        if count > cap:
            return [tuple(rng.choice(p) for p in pools) for _ in range(cap)]
    return list(itertools.product(*pools))


def check_axioms(
    A: Accessibility,
    spaces: Sequence[StateSpace],
    config: AxiomConfig = DEFAULT_AXIOM_CONFIG,
) -> AxiomReport:
    """Verify the accessibility axioms on a finite test pool.

    Scaling, splitting and stability only make sense for backends that
    support scaled composites; on plain edge relations they come back
    NOT_APPLICABLE.  Stability quantifies a limit ε → 0⁺, which a finite
    run can only approximate; its verdict always carries the
    LIMIT_APPROXIMATED caveat.
    """
    rng = random.Random(config.seed)
    universe = A.universe()
    scaled = A.supports_scaling and all(sp.scalable for sp in spaces)
    if universe is not None:
        pool = list(universe)
        pures = [
            p for p in pool if len(p.parts) == 1 and p.parts[0][0] == 1
        ]
    else:
        pures = _pure_pool(spaces)
        pool = pures + (_composite_pool(pures, config, rng) if scaled else [])
    results = []

    # reflexivity
    witness = next((x for x in pool if not A.le(x, x)), None)
    results.append(
        AxiomResult(
            "reflexivity",
            AxiomStatus.FAIL if witness is not None else AxiomStatus.PASS,
            (witness,) if witness is not None else None,
        )
    )

    # transitivity
    triples = _bounded_product((pool, pool, pool), config.max_triples, rng)
    witness = None
    for x, y, z in triples:
        if A.le(x, y) and A.le(y, z) and not A.le(x, z):
            witness = (x, y, z)
            break
    results.append(
        AxiomResult(
            "transitivity",
            AxiomStatus.FAIL if witness else AxiomStatus.PASS,
            witness,
        )
    )

    # consistency: X ≺ X' and Y ≺ Y' ⇒ (X,Y) ≺ (X',Y')
    accessible = [(x, y) for x in pool for y in pool if A.le(x, y)]
    testable = _bounded_product(
        (accessible, accessible), config.max_consistency_pairs, rng
    )
    if universe is not None:
        known_nodes = set(universe)
        testable = [
            (p, q)
            for p, q in testable
            if p[0].compose(q[0]) in known_nodes and p[1].compose(q[1]) in known_nodes
        ]
    if not testable:
        results.append(
            AxiomResult(
                "consistency", AxiomStatus.NOT_APPLICABLE,
                caveats=("no composable instances in the relation's universe",),
            )
        )
    else:
        witness = None
        for (x, xp), (y, yp) in testable:
            if not A.le(x.compose(y), xp.compose(yp)):
                witness = (x, xp, y, yp)
                break
        results.append(
            AxiomResult(
                "consistency",
                AxiomStatus.FAIL if witness else AxiomStatus.PASS,
                witness,
            )
        )

    if not scaled:
        for name in AXIOM_NAMES[3:]:
            results.append(
                AxiomResult(
                    name, AxiomStatus.NOT_APPLICABLE,
                    caveats=("backend does not support scaled composites",),
                )
            )
        return AxiomReport(tuple(results))

    known = set(universe) if universe is not None else None

    def testable(*composites) -> bool:
        return known is None or all(c in known for c in composites)

    # scaling invariance: λ > 0 and X ≺ Y ⇒ λX ≺ λY
    witness = None
    tested = 0
    for lam in config.lambda_grid:
        for x, y in itertools.product(pures, repeat=2):
            lx, ly = x.scale(lam), y.scale(lam)
            if not testable(lx, ly):
                continue
            tested += 1
            if A.le(x, y) and not A.le(lx, ly):
                witness = (lam, x, y)
                break
        if witness:
            break
    results.append(
        AxiomResult(
            "scaling-invariance",
            AxiomStatus.FAIL
            if witness
            else (AxiomStatus.PASS if tested else AxiomStatus.NOT_APPLICABLE),
            witness,
        )
    )

    # splitting recombination: X ∼ (λX, (1−λ)X) for λ in (0,1)
    fractions_01 = [l for l in config.lambda_grid if 0 < l < 1] or [Fraction(1, 2)]
    witness = None
    tested = 0
    for lam in fractions_01:
        for x in pures:
            split = x.scale(lam).compose(x.scale(1 - lam))
            if not testable(split):
                continue
            tested += 1
            if not (A.le(x, split) and A.le(split, x)):
                witness = (lam, x)
                break
        if witness:
            break
    results.append(
        AxiomResult(
            "splitting-recombination",
            AxiomStatus.FAIL
            if witness
            else (AxiomStatus.PASS if tested else AxiomStatus.NOT_APPLICABLE),
            witness,
        )
    )

    # stability: (X, εZ) ≺ (Y, εZ') for all scheduled ε ⇒ X ≺ Y
    schedule = [Fraction(1, 2**k) for k in range(1, config.eps_steps + 1)]
    quads = _bounded_product(
        (pool, pool, pures, pures), config.max_stability_quadruples, rng
    )
    witness = None
    tested = 0
    for x, y, z, zp in quads:
        sides = [
            (x.compose(z.scale(eps)), y.compose(zp.scale(eps))) for eps in schedule
        ]
        if not all(testable(a, b) for a, b in sides):
            continue
        tested += 1
        if all(A.le(a, b) for a, b in sides) and not A.le(x, y):
            witness = (x, y, z, zp)
            break
    results.append(
        AxiomResult(
            "stability",
            AxiomStatus.FAIL
            if witness
            else (AxiomStatus.PASS if tested else AxiomStatus.NOT_APPLICABLE),
            witness,
            caveats=("LIMIT_APPROXIMATED",),
        )
    )
    return AxiomReport(tuple(results))


# ---------------------------------------------------------------------------
# Entropy construction and verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EntropyFn:
    """Per-state entropy values, extended to composites additively and
    extensively."""

    space: str
    values: Mapping[str, Fraction]
    method: str = "rank"
    degenerate: bool = False
    grid_step: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(
            self, "values", {n: Fraction(v) for n, v in self.values.items()}
        )

    def value(self, x) -> Fraction:
        if isinstance(x, str):
            return self.values[x]
        out = Fraction(0)
        for lam, lbl, name in x.parts:
            if lbl != self.space:
                raise AccessError(f"state {name!r} is not in space {self.space!r}")
            out += lam * self.values[name]
        return out


def _equivalence_classes(A, pures):
    classes: list[list] = []
    for x in pures:
        for cls in classes:
            if derived_relations(A, x, cls[0]) is Relation.EQUIVALENT:
                cls.append(x)
                break
        else:
            classes.append([x])
    return classes


def construct_entropy(
    A: Accessibility,
    space: StateSpace,
    config: AxiomConfig = DEFAULT_AXIOM_CONFIG,
) -> EntropyFn:
    """Build an entropy representing the accessibility order on one space.

    Requires the comparison hypothesis; plain backends get the class-rank
    entropy, scalable ones the two-reference construction: S(X) is the
    largest grid λ with ((1−λ)X₀, λX₁) ≺ X for a fixed strict pair X₀ ≺≺ X₁.
    """
    ch = comparison_hypothesis(A, space)
    if not ch.total:
        raise ConstructionImpossible(
            f"comparison hypothesis fails on {space.label!r}", ch.incomparable[0]
        )
    pures = [CompositeState.pure(space.label, n) for n in space.names()]
    for x in pures:
        if not A.le(x, x):
            raise ConstructionImpossible("relation is not reflexive", (x,))
    classes = _equivalence_classes(A, pures)
    below = [
        sum(1 for other in classes if A.le(other[0], cls[0])) for cls in classes
    ]
    classes = [classes[i] for i in sorted(range(len(classes)), key=below.__getitem__)]
    rank_of = {}
    for rank, cls in enumerate(classes):
        for x in cls:
            rank_of[x.parts[0][2]] = Fraction(rank)

    scaled = A.supports_scaling and space.scalable
    if not scaled:
        return EntropyFn(space.label, rank_of, method="rank")
    if len(classes) == 1:
        return EntropyFn(
            space.label,
            {n: Fraction(0) for n in space.names()},
            method="reference",
            degenerate=True,
            grid_step=config.grid_step,
        )
    lo = classes[0][0]
    hi = classes[-1][0]

    def reference(lam: Fraction) -> CompositeState:
        if lam == 0:
            return lo
        if lam == 1:
            return hi
        return lo.scale(1 - lam).compose(hi.scale(lam))

    grid = []
    step = config.grid_step
    lam = Fraction(0)
    while lam < 1:
        grid.append(lam)
        lam += step
    grid.append(Fraction(1))
    references = [(lam, reference(lam)) for lam in grid]

    values = {}
    for x in pures:
        best = Fraction(0)
        for lam, ref in references:
            if A.le(ref, x):
                best = lam
        values[x.parts[0][2]] = best
    return EntropyFn(
        space.label, values, method="reference", grid_step=step
    )


@dataclass(frozen=True)
class VerifyReport:
    monotonicity: AxiomResult
    additivity: AxiomResult
    extensivity: AxiomResult

    @property
    def ok(self) -> bool:
        return all(
            r.status is AxiomStatus.PASS
            for r in (self.monotonicity, self.additivity, self.extensivity)
        )


def verify_entropy(
    S: EntropyFn,
    A: Accessibility,
    space: StateSpace,
    config: AxiomConfig = DEFAULT_AXIOM_CONFIG,
) -> VerifyReport:
    """Check X ≺ Y ⇔ S(X) ≤ S(Y) exhaustively over the space's states, and
    re-assert additivity/extensivity on sampled composites.

    The iff is checked on the state space itself: grid-built entropies
    represent that order exactly, while their additive extension to
    composites is only grid-accurate by construction.
    """
    rng = random.Random(config.seed)
    pures = [CompositeState.pure(space.label, n) for n in space.names()]
    witness = None
    for x in pures:
        for y in pures:
            le = A.le(x, y)
            sle = S.value(x) <= S.value(y)
            if le != sle:
                witness = (x, y, "≺ but S decreases" if le else "S ≤ without ≺")
                break
        if witness:
            break
    mono = AxiomResult(
        "monotonicity",
        AxiomStatus.FAIL if witness else AxiomStatus.PASS,
        witness,
    )
    witness = None
    for _ in range(config.composite_samples):
        x, y = rng.choice(pures), rng.choice(pures)
        if S.value(x.compose(y)) != S.value(x) + S.value(y):
            witness = (x, y)
            break
    add = AxiomResult(
        "additivity", AxiomStatus.FAIL if witness else AxiomStatus.PASS, witness
    )
    witness = None
    for lam in config.lambda_grid:
        for x in pures:
            if S.value(x.scale(lam)) != lam * S.value(x):
                witness = (lam, x)
                break
    ext = AxiomResult(
        "extensivity", AxiomStatus.FAIL if witness else AxiomStatus.PASS, witness
    )
    return VerifyReport(mono, add, ext)


# ---------------------------------------------------------------------------
# Affine calibration across systems (exact rational feasibility)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    """Σ coeffs·vars + const ≤ 0, remembering its origin."""

    coeffs: tuple[Fraction, ...]
    const: Fraction
    provenance: frozenset[int]


class _Infeasible(Exception):
    def __init__(self, provenance):
        self.provenance = provenance


def _tighten(constraints) -> list[Constraint]:
    """Normalize rows and keep only the tightest constraint per halfspace
    direction; without this, equivalence-heavy systems blow the elimination
    up combinatorially."""
    best: dict[tuple, Constraint] = {}
    for c in constraints:
        lead = next((a for a in c.coeffs if a != 0), None)
        if lead is None:
            if c.const > 0:
                raise _Infeasible(c.provenance)
            continue
        scale = abs(lead)
        coeffs = tuple(a / scale for a in c.coeffs)
        const = c.const / scale
        kept = best.get(coeffs)
        if kept is None or const > kept.const:
            best[coeffs] = Constraint(coeffs, const, c.provenance)
    return list(best.values())


def _fm_solve(constraints: list[Constraint], nvars: int) -> list[Fraction]:
    """Fourier–Motzkin elimination with provenance; returns a feasible point."""
    stages = []
    current = _tighten(constraints)
    for var in range(nvars):
        stages.append(current)
        nxt = []
        pos = [c for c in current if c.coeffs[var] > 0]
        neg = [c for c in current if c.coeffs[var] < 0]
        for c in current:
            if c.coeffs[var] == 0:
                nxt.append(c)
        for p in pos:
            for q in neg:
                scale_p = -q.coeffs[var]
                scale_q = p.coeffs[var]
                coeffs = tuple(
                    scale_p * a + scale_q * b for a, b in zip(p.coeffs, q.coeffs)
                )
                nxt.append(
                    Constraint(
                        coeffs,
                        scale_p * p.const + scale_q * q.const,
                        p.provenance | q.provenance,
                    )
                )
        current = _tighten(nxt)
    for c in current:
        if c.const > 0:
            raise _Infeasible(c.provenance)
    assignment: list[Optional[Fraction]] = [None] * nvars
    for var in range(nvars - 1, -1, -1):
        lower = None
        upper = None
        for c in stages[var]:
            coef = c.coeffs[var]
            if coef == 0:
                continue
            rest = c.const
            for j in range(var + 1, nvars):
                rest += c.coeffs[j] * assignment[j]
            bound = -rest / coef
            if coef > 0:
                upper = bound if upper is None else min(upper, bound)
            else:
                lower = bound if lower is None else max(lower, bound)
        if lower is not None and upper is not None:
            assignment[var] = (lower + upper) / 2
        elif lower is not None:
            assignment[var] = lower + 1
        elif upper is not None:
            assignment[var] = upper - 1
        else:
            assignment[var] = Fraction(0)
    return assignment


@dataclass(frozen=True)
class CalibrationResult:
    ok: bool
    coefficients: tuple[tuple[Fraction, Fraction], ...] = ()  # (a_i, B_i) per system
    witness: tuple = ()  # conflicting cross-pair descriptions when infeasible

    def glued_value(self, systems, x: CompositeState) -> Fraction:
        by_label = {space.label: (i, S) for i, (space, S) in enumerate(systems)}
        out = Fraction(0)
        for lam, lbl, name in x.parts:
            i, S = by_label[lbl]
            a, b = self.coefficients[i]
            out += lam * (a * S.value(name) + b)
        return out


def calibrate(
    systems: Sequence[tuple[StateSpace, EntropyFn]],
    cross: Accessibility,
    pairs: Optional[Sequence[tuple[CompositeState, CompositeState]]] = None,
    margin: Fraction = Fraction(1, 10**6),
) -> CalibrationResult:
    """Find positive multipliers a_i and offsets B_i making the glued entropy
    a_Γ S_Γ + B_Γ monotone across the cross-space relation.

    Normalized by a₁ = 1, B₁ = 0.  Strict cross pairs become strict
    inequalities with the given margin, equivalences become equalities; the
    result is any feasible point, or INFEASIBLE with the subset of cross
    pairs whose inequalities collided.
    """
    if not systems:
        raise AccessError("nothing to calibrate")
    labels = [space.label for space, _ in systems]
    if pairs is None:
        uni = cross.universe()
        if uni is None:
            raise AccessError("cross relation has no finite universe; pass pairs")
        pairs = list(itertools.combinations(uni, 2))
    # variables: a_1, B_1, ..., a_{m-1}, B_{m-1} (system 0 pinned to identity)
    nvars = 2 * (len(systems) - 1)
    index = {lbl: i for i, lbl in enumerate(labels)}

    def glued_row(x: CompositeState):
        coeffs = [Fraction(0)] * nvars
        const = Fraction(0)
        for lam, lbl, name in x.parts:
            i = index[lbl]
            s_val = systems[i][1].value(name)
            if i == 0:
                const += lam * s_val
            else:
                coeffs[2 * (i - 1)] += lam * s_val
                coeffs[2 * (i - 1) + 1] += lam
        return coeffs, const

    constraints: list[Constraint] = []
    descriptions: list[str] = []

    def add(coeffs, const, description):
        constraints.append(
            Constraint(tuple(coeffs), const, frozenset({len(descriptions)}))
        )
        descriptions.append(description)

    for i in range(1, len(systems)):
        coeffs = [Fraction(0)] * nvars
        coeffs[2 * (i - 1)] = Fraction(-1)
        add(coeffs, margin, f"a[{labels[i]}] > 0")
    for x, y in pairs:
        rel = derived_relations(cross, x, y)
        if rel is Relation.INCOMPARABLE:
            continue
        cx, kx = glued_row(x)
        cy, ky = glued_row(y)
        diff = [a - b for a, b in zip(cx, cy)]
        const = kx - ky
        if rel is Relation.EQUIVALENT:
            add(diff, const, f"{x} ∼ {y}")
            add([-d for d in diff], -const, f"{x} ∼ {y}")
        elif rel is Relation.STRICT:
            add(diff, const + margin, f"{x} ≺≺ {y}")
        else:  # reverse strict
            add([-d for d in diff], -const + margin, f"{y} ≺≺ {x}")

    try:
        point = _fm_solve(constraints, nvars)
    except _Infeasible as bad:
        return CalibrationResult(
            False, witness=tuple(sorted(descriptions[i] for i in bad.provenance))
        )
    coeffs = [(Fraction(1), Fraction(0))]
    for i in range(1, len(systems)):
        coeffs.append((point[2 * (i - 1)], point[2 * (i - 1) + 1]))
    return CalibrationResult(True, tuple(coeffs))
