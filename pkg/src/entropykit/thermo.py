"""Thermodynamic layer over the exterior calculus: First-Law contact form,
Legendre submanifolds and equations of state, Maxwell relations, potentials,
process-path integrals and Second-Law audits.

Sign convention, fixed once: θ = dX₀ − Σ σ_i P_i dX_i with the heat pair
entering as σ = +1 (so θ = dU − TdS + pdV on the standard chart) and
Q = σ_h P_h dX_h, W = −Σ_{i≠h} σ_i P_i dX_i, giving θ = dX₀ − Q + W.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from scipy import integrate as _scipy_integrate

from .expr import (
    Chart,
    DomainError,
    Expr,
    ZeroTestConfig,
    DEFAULT_ZERO_CONFIG,
    ZeroVerdict,
    is_zero,
    ln,
)
from .forms import (
    Confidence,
    ContactResult,
    Form,
    SmoothMap,
    SymmetryResult,
    contact_check,
    contact_symmetry_check,
    pullback,
    verify_integrating_factor,
)


class ThermoError(Exception):
    pass


T_CHART_NAME = "t"


@dataclass(frozen=True)
class ThermoChart:
    """Energy coordinate plus (intensive, extensive, sign) pairs.

    heat names the pair carrying the heat form (the (T, S) pair on the
    standard chart); None means no heat bookkeeping is available.
    """

    energy: str
    pairs: tuple[tuple[str, str, int], ...]
    params: tuple[str, ...] = ()
    heat: Optional[int] = 0

    def __post_init__(self):
        pairs = tuple((p, x, int(s)) for p, x, s in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise ThermoError("a thermodynamic chart needs at least one pair")
        for _, _, s in pairs:
            if s not in (1, -1):
                raise ThermoError("pair signs must be +1 or -1")
        if self.heat is not None and not 0 <= self.heat < len(pairs):
            raise ThermoError("heat pair index out of range")
        # Chart() validates uniqueness of all 2n+1 names.
        self.chart

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def extensives(self) -> tuple[str, ...]:
        return tuple(x for _, x, _ in self.pairs)

    @property
    def intensives(self) -> tuple[str, ...]:
        return tuple(p for p, _, _ in self.pairs)

    @property
    def chart(self) -> Chart:
        return Chart((self.energy,) + self.extensives + self.intensives, self.params)

    @property
    def base_chart(self) -> Chart:
        return Chart(self.extensives, self.params)

    @property
    def t_chart(self) -> Chart:
        return Chart((T_CHART_NAME,), self.params)


def first_law_form(tc: ThermoChart) -> Form:
    """θ = dX₀ − Σ σ_i P_i dX_i on the full 2n+1 chart."""
    chart = tc.chart
    theta = Form.d_coord(chart, tc.energy)
    for p, x, s in tc.pairs:
        theta = theta - Form.d_coord(chart, x).scale(chart.var(p) * s)
    return theta


def heat_form(tc: ThermoChart) -> Form:
    if tc.heat is None:
        raise ThermoError("chart does not designate a heat pair")
    p, x, s = tc.pairs[tc.heat]
    chart = tc.chart
    return Form.d_coord(chart, x).scale(chart.var(p) * s)


def work_form(tc: ThermoChart) -> Form:
    if tc.heat is None:
        raise ThermoError("chart does not designate a heat pair")
    chart = tc.chart
    w = Form.zero(chart, 1)
    for i, (p, x, s) in enumerate(tc.pairs):
        if i == tc.heat:
            continue
        w = w - Form.d_coord(chart, x).scale(chart.var(p) * s)
    return w


# ---------------------------------------------------------------------------
# Legendre specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LegendreSpec:
    """Candidate submanifold: either the potential X₀ as a function of the
    extensive coordinates, or one expression per intensive coordinate
    (optionally plus X₀)."""

    potential: Optional[Expr] = None
    equations: Optional[Mapping[str, Expr]] = None

    def __post_init__(self):
        if self.potential is None and self.equations is None:
            raise ThermoError("spec needs a potential or state equations")
        if self.equations is not None:
            object.__setattr__(self, "equations", dict(self.equations))

    @classmethod
    def from_potential(cls, e: Expr) -> "LegendreSpec":
        return cls(potential=e)

    @classmethod
    def from_state_equations(
        cls, equations: Mapping[str, Expr], energy: Optional[Expr] = None
    ) -> "LegendreSpec":
        return cls(potential=energy, equations=equations)

    @property
    def is_potential_form(self) -> bool:
        return self.equations is None

    def _validate(self, tc: ThermoChart):
        base = tc.base_chart
        if self.equations is not None:
            if set(self.equations) != set(tc.intensives):
                raise ThermoError(
                    "state equations must cover exactly the intensive coordinates"
                )
            for name, e in self.equations.items():
                if e.chart != base:
                    raise ThermoError(f"equation for {name!r} is not on the base chart")
        if self.potential is not None and self.potential.chart != base:
            raise ThermoError("potential is not on the base chart")

    def state_equations(self, tc: ThermoChart) -> dict[str, Expr]:
        """Given or induced (P_i = σ_i ∂X₀/∂X_i) equations of state."""
        self._validate(tc)
        if self.equations is not None:
            return dict(self.equations)
        return {
            p: self.potential.diff(x) * s for p, x, s in tc.pairs
        }

    def energy_expr(self, tc: ThermoChart) -> Expr:
        """The potential, reconstructing it by line integration if absent."""
        self._validate(tc)
        if self.potential is not None:
            return self.potential
        return _reconstruct_energy(tc, self.state_equations(tc))

    def inclusion(self, tc: ThermoChart) -> SmoothMap:
        """Φ: extensive chart → full chart cut out by these equations."""
        base = tc.base_chart
        comps = {x: base.var(x) for x in tc.extensives}
        comps[tc.energy] = self.energy_expr(tc)
        comps.update(self.state_equations(tc))
        return SmoothMap(base, tc.chart, comps)


def _antiderivative(e: Expr, x: str) -> Expr:
    """Term-wise antiderivative in x; each term must be a monomial in x."""
    chart = e.chart
    out = chart.zero()
    xvar = chart.var(x)
    for term in e.terms:
        power = Fraction(0)
        rest = chart.const(term.coeff)
        for b, q in term.factors:
            if isinstance(b, str) and b == x:
                power = q
                continue
            piece = Expr._monomial(chart, Fraction(1), [(b, q)])
            if x in piece.free_symbols():
                raise ThermoError(
                    f"cannot symbolically integrate {e} along {x}"
                )
            rest = rest * piece
        if power == -1:
            out = out + rest * ln(xvar)
        else:
            out = out + rest * xvar ** (power + 1) / (power + 1)
    return out


def _reconstruct_energy(tc: ThermoChart, eqs: Mapping[str, Expr]) -> Expr:
    """X₀ from exact state equations: line integral along coordinate axes
    from the all-ones reference point (X₀(1,…,1) = 0)."""
    base = tc.base_chart
    total = base.zero()
    for i, (pname, xname, sign) in enumerate(tc.pairs):
        pin = {}
        for j, (_, xj, _) in enumerate(tc.pairs):
            pin[xj] = base.one() if j > i else base.var(xj)
        integrand = eqs[pname].subs(pin) * sign
        anti = _antiderivative(integrand, xname)
        total = total + anti - anti.subs({xname: base.one()})
    return total


# ---------------------------------------------------------------------------
# Legendre and Maxwell checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LegendreReport:
    ok: bool
    confidence: Confidence
    equations_of_state: dict[str, Expr]
    energy: Optional[Expr]
    reconstructed: bool
    failures: tuple = ()  # ((P_i, X_j, P_j, X_i, residual), ...)
    residual: Optional[Form] = None


def _integrability_failures(tc: ThermoChart, eqs, config) -> tuple[list, Confidence]:
    failures = []
    confidence = Confidence.CERTAIN
    for i in range(tc.n):
        for j in range(i + 1, tc.n):
            pi, xi, si = tc.pairs[i]
            pj, xj, sj = tc.pairs[j]
            residual = eqs[pi].diff(xj) * si - eqs[pj].diff(xi) * sj
            r = is_zero(residual, config)
            if r.verdict is ZeroVerdict.CERTAIN_NONZERO:
                failures.append((pi, xj, pj, xi, residual))
            elif r.verdict is ZeroVerdict.PROBABLY_ZERO:
                confidence = Confidence.SAMPLED
    return failures, confidence


def check_legendre(
    tc: ThermoChart,
    spec: LegendreSpec,
    config: ZeroTestConfig = DEFAULT_ZERO_CONFIG,
) -> LegendreReport:
    """Does this candidate define a Legendre submanifold (Φ*θ = 0)?

    Potential-form specs also report the induced equations of state;
    state-equation specs are checked through the mixed-partial conditions,
    reconstructing X₀ when they pass.
    """
    spec._validate(tc)
    eqs = spec.state_equations(tc)
    failures, confidence = _integrability_failures(tc, eqs, config)
    if failures:
        return LegendreReport(
            False, Confidence.CERTAIN, eqs, None, False, tuple(failures)
        )
    try:
        energy = spec.energy_expr(tc)
        reconstructed = spec.potential is None
    except ThermoError:
        energy = None
        reconstructed = False
    if energy is None:
        return LegendreReport(True, confidence, eqs, None, False)
    phi = LegendreSpec.from_state_equations(eqs, energy=energy).inclusion(tc)
    residual = pullback(phi, first_law_form(tc))
    for _, coeff in residual.items():
        r = is_zero(coeff, config)
        if r.verdict is ZeroVerdict.CERTAIN_NONZERO:
            return LegendreReport(
                False, Confidence.CERTAIN, eqs, energy, reconstructed,
                residual=residual,
            )
        if r.verdict is ZeroVerdict.PROBABLY_ZERO:
            confidence = Confidence.SAMPLED
    return LegendreReport(
        True, confidence, eqs, energy, reconstructed, residual=residual
    )


@dataclass(frozen=True)
class MaxwellIdentity:
    lhs: tuple[str, str]  # (P_i, X_j)
    sign: int  # ∂P_i/∂X_j = sign · ∂P_j/∂X_i
    rhs: tuple[str, str]
    residual: Optional[Expr] = None
    verdict: Optional[str] = None  # "OK" | "FAIL" | None when no spec given
    confidence: Optional[Confidence] = None

    @property
    def text(self) -> str:
        s = "-" if self.sign < 0 else ""
        return (
            f"∂{self.lhs[0]}/∂{self.lhs[1]} = {s}∂{self.rhs[0]}/∂{self.rhs[1]}"
        )


def maxwell_relations(
    tc: ThermoChart,
    spec: Optional[LegendreSpec] = None,
    config: ZeroTestConfig = DEFAULT_ZERO_CONFIG,
) -> list[MaxwellIdentity]:
    """Identities forced by Φ*dθ = 0, one per basis 2-form dX_i∧dX_j.

    Without a spec only the identities are emitted; with one, each carries
    an exactness verdict for the given equations of state.
    """
    eqs = spec.state_equations(tc) if spec is not None else None
    out = []
    for i in range(tc.n):
        for j in range(i + 1, tc.n):
            pi, xi, si = tc.pairs[i]
            pj, xj, sj = tc.pairs[j]
            residual = None
            verdict = None
            confidence = None
            if eqs is not None:
                residual = eqs[pi].diff(xj) * si - eqs[pj].diff(xi) * sj
                r = is_zero(residual, config)
                verdict = "FAIL" if r.verdict is ZeroVerdict.CERTAIN_NONZERO else "OK"
                confidence = (
                    Confidence.CERTAIN if r.certain else Confidence.SAMPLED
                )
            out.append(
                MaxwellIdentity((pi, xj), si * sj, (pj, xi), residual, verdict, confidence)
            )
    return out


# ---------------------------------------------------------------------------
# Legendre transformations (thermodynamic potentials)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LegendreTransformResult:
    chart: ThermoChart
    potential_name: str
    potential: Expr  # template over the original full chart
    form: Form  # θ̃ on the transformed chart
    map: SmoothMap  # contact symmetry on the original chart
    symmetry: SymmetryResult
    contact: ContactResult


def legendre_transform(
    tc: ThermoChart,
    pairs_to_swap: Sequence[Union[int, str]],
    theta: Optional[Form] = None,
    new_name: Optional[str] = None,
    config: ZeroTestConfig = DEFAULT_ZERO_CONFIG,
) -> LegendreTransformResult:
    """Swap the roles of the selected intensive/extensive pairs.

    Each swapped pair (P, X, σ) contributes −σPX to the potential and
    re-enters the transformed form as the pair (X, P, −σ); the underlying
    coordinate change is a contact symmetry of θ with multiplier 1.
    """
    theta = theta if theta is not None else first_law_form(tc)
    swap_idx = set()
    for item in pairs_to_swap:
        if isinstance(item, int):
            if not 0 <= item < tc.n:
                raise ThermoError(f"no pair with index {item}")
            swap_idx.add(item)
        else:
            for k, (p, x, _) in enumerate(tc.pairs):
                if item in (p, x):
                    swap_idx.add(k)
                    break
            else:
                raise ThermoError(f"no pair named {item!r}")
    chart = tc.chart
    if not swap_idx:
        return LegendreTransformResult(
            tc,
            tc.energy,
            chart.var(tc.energy),
            theta,
            SmoothMap.identity(chart),
            contact_symmetry_check(SmoothMap.identity(chart), theta, config),
            contact_check(theta, tc.n, config),
        )
    if new_name is None:
        new_name = tc.energy + "".join(
            "_" + tc.pairs[k][1] for k in sorted(swap_idx)
        )
    new_pairs = []
    for k, (p, x, s) in enumerate(tc.pairs):
        new_pairs.append((x, p, -s) if k in swap_idx else (p, x, s))
    new_heat = tc.heat if tc.heat not in swap_idx else None
    new_tc = ThermoChart(new_name, tuple(new_pairs), tc.params, heat=new_heat)

    potential = chart.var(tc.energy)
    comps = {n: chart.var(n) for n in chart.coords}
    for k in swap_idx:
        p, x, s = tc.pairs[k]
        potential = potential - chart.var(p) * chart.var(x) * s
        comps[x] = chart.var(p) * s
        comps[p] = -chart.var(x) * s
    comps[tc.energy] = potential
    phi = SmoothMap(chart, chart, comps)
    return LegendreTransformResult(
        new_tc,
        new_name,
        potential,
        first_law_form(new_tc),
        phi,
        contact_symmetry_check(phi, theta, config),
        contact_check(first_law_form(new_tc), new_tc.n, config),
    )


# ---------------------------------------------------------------------------
# Process paths and numeric audits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathSegment:
    """One smooth leg t ∈ [0,1] → extensive coordinates."""

    components: Mapping[str, Expr]
    claim: Optional[str] = None  # e.g. "adiabatic" for audited claims

    def __post_init__(self):
        object.__setattr__(self, "components", dict(self.components))


@dataclass(frozen=True)
class EndpointPair:
    """A non-quasi-static process: just the two equilibrium endpoints.

    There is no path, so no heat or work integral exists; only state
    functions may be compared.
    """

    initial: Mapping[str, Fraction]
    final: Mapping[str, Fraction]


@dataclass(frozen=True)
class ProcessPath:
    base_chart: Chart
    segments: tuple[PathSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ThermoError("a process path needs at least one segment")
        tchart = Chart((T_CHART_NAME,), self.base_chart.params)
        for seg in self.segments:
            if set(seg.components) != set(self.base_chart.coords):
                raise ThermoError("segment must define every extensive coordinate")
            for e in seg.components.values():
                if e.chart != tchart:
                    raise ThermoError("segment components must be functions of t")

    @property
    def t_chart(self) -> Chart:
        return Chart((T_CHART_NAME,), self.base_chart.params)

    def segment_map(self, seg: PathSegment) -> SmoothMap:
        return SmoothMap(self.t_chart, self.base_chart, seg.components)

    def point(self, seg: PathSegment, t, params) -> dict:
        env = dict(params)
        env[T_CHART_NAME] = t
        return {n: seg.components[n].evaluate(env) for n in self.base_chart.coords}

    def endpoints(self, params) -> tuple[dict, dict]:
        return (
            self.point(self.segments[0], Fraction(0), params),
            self.point(self.segments[-1], Fraction(1), params),
        )

    def check_continuity(self, params, tol: float = 1e-12):
        prev = None
        for seg in self.segments:
            start = self.point(seg, Fraction(0), params)
            if prev is not None:
                for n in self.base_chart.coords:
                    if abs(float(prev[n]) - float(start[n])) > tol:
                        raise ThermoError(
                            f"segments do not join continuously at {n}"
                        )
            prev = self.point(seg, Fraction(1), params)

    def is_closed(self, params, tol: float = 1e-12) -> bool:
        start, end = self.endpoints(params)
        return all(
            abs(float(start[n]) - float(end[n])) <= tol
            for n in self.base_chart.coords
        )

    @staticmethod
    def line(base_chart: Chart, start: Mapping, end: Mapping) -> PathSegment:
        tchart = Chart((T_CHART_NAME,), base_chart.params)
        t = tchart.var(T_CHART_NAME)
        comps = {}
        for n in base_chart.coords:
            a, b = Fraction(start[n]), Fraction(end[n])
            comps[n] = tchart.const(a) + t * (b - a)
        return PathSegment(comps)


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    max_subdivisions: int = 10_000
    samples_per_segment: int = 64
    sample_tol: float = 1e-9
    balance_tol: float = 1e-8


DEFAULT_QUADRATURE = QuadratureConfig()


class QuadratureError(ThermoError):
    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class PathIntegral:
    value: float
    error: float


def _segment_full_maps(tc: ThermoChart, spec: LegendreSpec, path: ProcessPath):
    if path.base_chart != tc.base_chart:
        raise ThermoError("path does not live in the chart's extensive coordinates")
    inclusion = spec.inclusion(tc)
    return [inclusion.compose(path.segment_map(seg)) for seg in path.segments]


def _integrate_segment(coeff: Expr, params, cfg: QuadratureConfig):
    env = dict(params)

    def f(tval: float) -> float:
        env[T_CHART_NAME] = tval
        return float(coeff.evaluate(env))

    with warnings.catch_warnings():
        warnings.simplefilter("error", _scipy_integrate.IntegrationWarning)
        try:
            value, err = _scipy_integrate.quad(
                f, 0.0, 1.0, epsabs=cfg.abs_tol, limit=cfg.max_subdivisions
            )
        except _scipy_integrate.IntegrationWarning as w:
            raise QuadratureError(f"quadrature did not converge: {w}") from None
        except DomainError as w:
            # deep subdivision near a singularity drives nodes out of the domain
            raise QuadratureError(
                f"integrand left its domain near t={env.get(T_CHART_NAME)}: {w}"
            ) from None
    return value, err


def path_integral(
    tc: ThermoChart,
    spec: LegendreSpec,
    path: ProcessPath,
    form: Form,
    params: Mapping[str, Fraction],
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> PathIntegral:
    """∫ over the path of the form's pullback onto the Legendre manifold."""
    if isinstance(path, EndpointPair):
        raise ThermoError(
            "non-quasi-static processes have no path; integrals are undefined"
        )
    if form.chart != tc.chart or form.degree != 1:
        raise ThermoError("integrand must be a 1-form on the full chart")
    path.check_continuity(params)
    total = 0.0
    total_err = 0.0
    for full_map in _segment_full_maps(tc, spec, path):
        pulled = pullback(full_map, form)
        coeff = pulled.coefficient((0,))
        value, err = _integrate_segment(coeff, params, cfg)
        total += value
        total_err += err
    return PathIntegral(total, total_err)


@dataclass(frozen=True)
class FirstLawBalance:
    delta_energy: float
    delta_heat: float
    delta_work: float
    residual: float
    ok: bool


def first_law_balance(
    tc: ThermoChart,
    spec: LegendreSpec,
    path: ProcessPath,
    params: Mapping[str, Fraction],
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> FirstLawBalance:
    """ΔU = ΔQ − ΔW checked by independent quadratures of dX₀, Q and W."""
    du = path_integral(tc, spec, path, Form.d_coord(tc.chart, tc.energy), params, cfg)
    dq = path_integral(tc, spec, path, heat_form(tc), params, cfg)
    dw = path_integral(tc, spec, path, work_form(tc), params, cfg)
    residual = abs(du.value - (dq.value - dw.value))
    return FirstLawBalance(
        du.value, dq.value, dw.value, residual, residual < cfg.balance_tol
    )


def _sample_ts(count: int):
    return [Fraction(k, count - 1) for k in range(count)]


@dataclass(frozen=True)
class LegAudit:
    index: int
    claim: Optional[str]
    max_abs_heat: float
    sampled_adiabatic: bool

    @property
    def claim_honored(self) -> Optional[bool]:
        if self.claim != "adiabatic":
            return None
        return self.sampled_adiabatic


@dataclass(frozen=True)
class CycleAuditReport:
    heat: float
    work: float
    balance_residual: float
    balance_ok: bool
    kelvin_violation: bool
    heat_sample_min: float
    legs: tuple[LegAudit, ...]


def cycle_audit(
    tc: ThermoChart,
    spec: LegendreSpec,
    cycle: ProcessPath,
    params: Mapping[str, Fraction],
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> CycleAuditReport:
    """Audit a closed cycle: ∮Q = ∮W (exactness of dX₀), per-leg adiabatic
    claims, and the Kelvin configuration (heat absorbed everywhere while net
    work is extracted) that the Second Law forbids."""
    cycle.check_continuity(params)
    if not cycle.is_closed(params, tol=1e-9):
        raise ThermoError("cycle_audit requires a closed path")
    q_total = 0.0
    w_total = 0.0
    q_min = float("inf")
    legs = []
    full_maps = _segment_full_maps(tc, spec, cycle)
    qf, wf = heat_form(tc), work_form(tc)
    for i, (seg, full_map) in enumerate(zip(cycle.segments, full_maps)):
        q_coeff = pullback(full_map, qf).coefficient((0,))
        w_coeff = pullback(full_map, wf).coefficient((0,))
        qv, _ = _integrate_segment(q_coeff, params, cfg)
        wv, _ = _integrate_segment(w_coeff, params, cfg)
        q_total += qv
        w_total += wv
        env = dict(params)
        samples = []
        for t in _sample_ts(cfg.samples_per_segment):
            env[T_CHART_NAME] = t
            samples.append(float(q_coeff.evaluate(env)))
        q_min = min(q_min, min(samples))
        max_abs = max(abs(v) for v in samples)
        legs.append(
            LegAudit(i, seg.claim, max_abs, max_abs < cfg.sample_tol)
        )
    residual = abs(q_total - w_total)
    kelvin = q_min >= -cfg.sample_tol and w_total > cfg.balance_tol
    return CycleAuditReport(
        q_total,
        w_total,
        residual,
        residual < cfg.balance_tol,
        kelvin,
        q_min,
        tuple(legs),
    )


class AdiabaticStatus(Enum):
    QUASI_STATIC_ADIABATIC = "QUASI_STATIC_ADIABATIC"
    S_INCREASING = "S_INCREASING"
    S_DECREASING = "S_DECREASING"
    S_NONMONOTONE = "S_NONMONOTONE"


@dataclass(frozen=True)
class AdiabaticReport:
    status: AdiabaticStatus
    max_abs_heat: float
    entropy_drift: float  # max |S(t) - S(0)|
    entropy_start: float
    entropy_end: float
    leaves_leaf: bool
    violations: tuple = ()  # sample indices breaking monotonicity


def adiabatic_entropy_check(
    tc: ThermoChart,
    spec: LegendreSpec,
    path: ProcessPath,
    entropy: Expr,
    params: Mapping[str, Fraction],
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    zconfig: ZeroTestConfig = DEFAULT_ZERO_CONFIG,
) -> AdiabaticReport:
    """Sample the heat pullback and the entropy along a path.

    Requires Q = T dS to certify on the manifold for the supplied entropy
    (T the heat-pair intensive restricted to the manifold); a path whose
    sampled heat vanishes must then stay on one S = const leaf, and any
    heat flow moves it transversally across leaves.
    """
    if entropy.chart != tc.base_chart:
        raise ThermoError("entropy must be a function of the extensive coordinates")
    inclusion = spec.inclusion(tc)
    q_manifold = pullback(inclusion, heat_form(tc))
    p, _, _ = tc.pairs[tc.heat]
    t_manifold = spec.state_equations(tc)[p]
    cert = verify_integrating_factor(q_manifold, t_manifold, entropy, zconfig)
    if not cert.ok:
        raise ThermoError(
            f"Q = T dS not certified for the supplied entropy ({cert.status.value})"
        )
    path.check_continuity(params)
    heat_samples = []
    s_samples = []
    env = dict(params)
    for k, (full_map, seg) in enumerate(
        zip(_segment_full_maps(tc, spec, path), path.segments)
    ):
        q_coeff = pullback(full_map, heat_form(tc)).coefficient((0,))
        seg_map = path.segment_map(seg)
        s_on_t = entropy.subs(dict(seg_map.components), path.t_chart)
        for t in _sample_ts(cfg.samples_per_segment):
            if k > 0 and t == 0:
                continue  # junction sample repeats the previous segment's end
            env[T_CHART_NAME] = t
            heat_samples.append(float(q_coeff.evaluate(env)))
            s_samples.append(float(s_on_t.evaluate(env)))
    max_heat = max(abs(v) for v in heat_samples)
    drift = max(abs(v - s_samples[0]) for v in s_samples)
    if max_heat < cfg.sample_tol:
        return AdiabaticReport(
            AdiabaticStatus.QUASI_STATIC_ADIABATIC,
            max_heat,
            drift,
            s_samples[0],
            s_samples[-1],
            leaves_leaf=drift >= cfg.sample_tol,
        )
    diffs = [b - a for a, b in zip(s_samples, s_samples[1:])]
    increasing = [i for i, d in enumerate(diffs) if d > 0.0]
    decreasing = [i for i, d in enumerate(diffs) if d < 0.0]
    if not decreasing and len(increasing) == len(diffs):
        status, violations = AdiabaticStatus.S_INCREASING, ()
    elif not increasing and len(decreasing) == len(diffs):
        status, violations = AdiabaticStatus.S_DECREASING, ()
    else:
        status = AdiabaticStatus.S_NONMONOTONE
        violations = tuple(
            i for i, d in enumerate(diffs) if d <= 0.0
        )
    return AdiabaticReport(
        status,
        max_heat,
        drift,
        s_samples[0],
        s_samples[-1],
        leaves_leaf=True,
        violations=violations,
    )


def endpoint_entropy_check(
    entropy: Expr, process: EndpointPair, params: Mapping[str, Fraction]
) -> tuple[float, bool]:
    """For a non-quasi-static process only the endpoint comparison S(y) ≥ S(x)
    is testable; returns (ΔS, ΔS ≥ 0)."""
    env_i = dict(params)
    env_i.update(process.initial)
    env_f = dict(params)
    env_f.update(process.final)
    delta = float(entropy.evaluate(env_f)) - float(entropy.evaluate(env_i))
    return delta, delta >= 0.0
