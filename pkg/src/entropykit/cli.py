"""Command-line front end: load a system document, run a named check, and
emit a deterministic report.

Exit codes: 0 all verdicts pass, 1 at least one failure, 2 usage or parse
error, 3 no failures but at least one verdict rests on sampling
(probably-zero) rather than structural certainty.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
from fractions import Fraction

from . import access, forms, galois, thermo
from .access import AxiomConfig, AxiomStatus, ConstructionImpossible
from .documents import Document, DocumentError, load_document
from .expr import ExprError, ZeroTestConfig
from .forms import Confidence
from .galois import GaloisError, MonotoneMap, Poset
from .thermo import QuadratureConfig, ThermoError

COMMANDS = {}


def command(name):
    def register(fn):
        COMMANDS[name] = fn
        return fn

    return register


class UsageError(Exception):
    pass


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


class Report:
    def __init__(self):
        self.blocks = []  # list of (status, [(key, value), ...])

    def block(self, check: str, status=None):
        rows = [("check", check)]
        self.blocks.append([status, rows])
        return len(self.blocks) - 1

    def add(self, idx: int, key: str, value):
        self.blocks[idx][1].append((key, _fmt(value)))

    def set_status(self, idx: int, status: str):
        self.blocks[idx][0] = status

    def exit_code(self) -> int:
        statuses = [s for s, _ in self.blocks if s]
        if any(s == "fail" for s in statuses):
            return 1
        if any(s == "inconclusive" for s in statuses):
            return 3
        return 0

    def render(self, fmt: str) -> str:
        out = []
        for status, rows in self.blocks:
            lines = [f"{k}: {v}" for k, v in rows]
            if status:
                lines.append(f"status: {status}")
            if fmt == "text":
                out.append("\n".join(["-" * 40] + lines))
            else:
                out.append("\n".join(lines))
        code = self.exit_code()
        tail = [
            "check: summary",
            f"blocks: {len(self.blocks)}",
            f"failures: {sum(1 for s, _ in self.blocks if s == 'fail')}",
            f"exit: {code}",
        ]
        if fmt == "text":
            out.append("\n".join(["-" * 40] + tail))
        else:
            out.append("\n".join(tail))
        return "\n\n".join(out) + "\n"


def _status_from(ok: bool, confidence=None) -> str:
    if not ok:
        return "fail"
    if confidence is Confidence.SAMPLED:
        return "inconclusive"
    return "pass"


def _zero_config(doc: Document, opts) -> ZeroTestConfig:
    tol = opts.tol if opts.tol is not None else doc.config.get("tol", 1e-9)
    return ZeroTestConfig(
        samples=doc.config.get("samples", 16), tol=tol, seed=opts.seed
    )


def _axiom_config(doc: Document, opts) -> AxiomConfig:
    kwargs = {"seed": opts.seed}
    grid = opts.lambda_grid or doc.config.get("lambda_grid")
    if grid:
        kwargs["lambda_grid"] = tuple(grid)
    steps = opts.eps_steps or doc.config.get("eps_steps")
    if steps:
        kwargs["eps_steps"] = steps
    if "margin" in doc.config:
        kwargs["margin"] = doc.config["margin"]
    if "grid_step" in doc.config:
        kwargs["grid_step"] = doc.config["grid_step"]
    return AxiomConfig(**kwargs)


def _quad_config(doc: Document, opts) -> QuadratureConfig:
    if opts.tol is not None:
        return QuadratureConfig(sample_tol=opts.tol, balance_tol=opts.tol)
    return QuadratureConfig()


def _require(condition, message):
    if not condition:
        raise UsageError(message)


def _numeric_params(doc: Document) -> dict:
    missing = [k for k, v in doc.param_values.items() if v is None]
    _require(
        not missing,
        f"numeric command needs values for parameters {sorted(missing)}",
    )
    return dict(doc.param_values)


def _thermo_parts(doc: Document):
    _require(doc.thermo_chart is not None, "document has no thermodynamic chart")
    _require(doc.spec is not None, "document has no [spec] section")
    return doc.thermo_chart, doc.spec


# ---------------------------------------------------------------------------
# form-level commands
# ---------------------------------------------------------------------------


def _declared_forms(doc: Document):
    if doc.forms:
        return list(doc.forms.items())
    if doc.thermo_chart is not None:
        return [("theta", thermo.first_law_form(doc.thermo_chart))]
    raise UsageError("document declares no forms")


@command("contact-check")
def cmd_contact_check(doc: Document, opts, report: Report):
    zcfg = _zero_config(doc, opts)
    for name, form in _declared_forms(doc):
        dim = form.chart.dimension
        _require(dim % 2 == 1, f"chart dimension {dim} is even; no contact rank")
        result = forms.contact_check(form, (dim - 1) // 2, zcfg)
        idx = report.block("contact-check")
        report.add(idx, "form", name)
        report.add(idx, "verdict", result.status.value)
        report.add(idx, "certainty", result.confidence.value)
        report.add(idx, "top-coefficient", result.top_coefficient)
        report.set_status(idx, _status_from(result.contact, result.confidence))


@command("frobenius")
def cmd_frobenius(doc: Document, opts, report: Report):
    zcfg = _zero_config(doc, opts)
    for name, form in _declared_forms(doc):
        _require(form.degree == 1, f"form {name!r} is not a 1-form")
        result = forms.frobenius_check(form, zcfg)
        idx = report.block("frobenius")
        report.add(idx, "form", name)
        report.add(idx, "verdict", result.status.value)
        report.add(idx, "certainty", result.confidence.value)
        report.add(idx, "obstruction", result.obstruction)
        report.set_status(idx, _status_from(result.integrable, result.confidence))


@command("legendre-check")
def cmd_legendre_check(doc: Document, opts, report: Report):
    tc, spec = _thermo_parts(doc)
    result = thermo.check_legendre(tc, spec, _zero_config(doc, opts))
    idx = report.block("legendre-check")
    report.add(idx, "verdict", "OK" if result.ok else "FAIL")
    report.add(idx, "certainty", result.confidence.value)
    for name in tc.intensives:
        report.add(idx, f"state-equation {name}", result.equations_of_state[name])
    if result.energy is not None:
        key = "reconstructed-energy" if result.reconstructed else "energy"
        report.add(idx, key, result.energy)
    for pi, xj, pj, xi, residual in result.failures:
        report.add(
            idx,
            "mixed-partial-failure",
            f"∂{pi}/∂{xj} vs ∂{pj}/∂{xi}: residual {residual}",
        )
    report.set_status(idx, _status_from(result.ok, result.confidence))


@command("maxwell")
def cmd_maxwell(doc: Document, opts, report: Report):
    _require(doc.thermo_chart is not None, "document has no thermodynamic chart")
    identities = thermo.maxwell_relations(
        doc.thermo_chart, doc.spec, _zero_config(doc, opts)
    )
    for ident in identities:
        idx = report.block("maxwell")
        report.add(idx, "identity", ident.text)
        if ident.verdict is None:
            report.add(idx, "verdict", "GENERIC")
            report.set_status(idx, "pass")
        else:
            report.add(idx, "verdict", ident.verdict)
            report.add(idx, "certainty", ident.confidence.value)
            report.set_status(
                idx, _status_from(ident.verdict == "OK", ident.confidence)
            )


@command("potential")
def cmd_potential(doc: Document, opts, report: Report):
    _require(doc.thermo_chart is not None, "document has no thermodynamic chart")
    _require(bool(doc.transforms), "document has no [transform] section")
    zcfg = _zero_config(doc, opts)
    for swaps, new_name in doc.transforms:
        result = thermo.legendre_transform(
            doc.thermo_chart, list(swaps), new_name=new_name, config=zcfg
        )
        idx = report.block("potential")
        report.add(idx, "name", result.potential_name)
        report.add(idx, "potential", result.potential)
        report.add(idx, "form", result.form)
        report.add(idx, "contact", result.contact.status.value)
        report.add(idx, "symmetry", result.symmetry.status.value)
        if result.symmetry.factor is not None:
            report.add(idx, "multiplier", result.symmetry.factor)
        ok = result.contact.contact and result.symmetry.symmetry
        confidence = (
            Confidence.SAMPLED
            if Confidence.SAMPLED
            in (result.contact.confidence, result.symmetry.confidence)
            else Confidence.CERTAIN
        )
        report.set_status(idx, _status_from(ok, confidence))


# ---------------------------------------------------------------------------
# numeric path commands
# ---------------------------------------------------------------------------


@command("path")
def cmd_path(doc: Document, opts, report: Report):
    tc, spec = _thermo_parts(doc)
    _require(bool(doc.paths), "document has no [paths] section")
    params = _numeric_params(doc)
    cfg = _quad_config(doc, opts)
    for name, path in doc.paths.items():
        balance = thermo.first_law_balance(tc, spec, path, params, cfg)
        idx = report.block("path")
        report.add(idx, "path", name)
        report.add(idx, "delta-energy", balance.delta_energy)
        report.add(idx, "delta-heat", balance.delta_heat)
        report.add(idx, "delta-work", balance.delta_work)
        report.add(idx, "balance-residual", balance.residual)
        report.set_status(idx, "pass" if balance.ok else "fail")


@command("cycle-audit")
def cmd_cycle_audit(doc: Document, opts, report: Report):
    tc, spec = _thermo_parts(doc)
    _require(bool(doc.paths), "document has no [paths] section")
    params = _numeric_params(doc)
    cfg = _quad_config(doc, opts)
    for name, path in doc.paths.items():
        audit = thermo.cycle_audit(tc, spec, path, params, cfg)
        idx = report.block("cycle-audit")
        report.add(idx, "cycle", name)
        report.add(idx, "heat", audit.heat)
        report.add(idx, "work", audit.work)
        report.add(idx, "balance-residual", audit.balance_residual)
        report.add(idx, "balance", "OK" if audit.balance_ok else "FAIL")
        report.add(idx, "heat-sample-min", audit.heat_sample_min)
        report.add(
            idx, "kelvin", "KELVIN_VIOLATION" if audit.kelvin_violation else "OK"
        )
        for leg in audit.legs:
            claim = f" claim={leg.claim}" if leg.claim else ""
            honored = (
                ""
                if leg.claim_honored is None
                else f" claim-honored={'yes' if leg.claim_honored else 'no'}"
            )
            report.add(
                idx,
                f"leg {leg.index}",
                f"max|Q|={_fmt(leg.max_abs_heat)}{claim}{honored}",
            )
        ok = audit.balance_ok and not audit.kelvin_violation
        dishonored = any(leg.claim_honored is False for leg in audit.legs)
        report.set_status(idx, "fail" if not ok or dishonored else "pass")


# ---------------------------------------------------------------------------
# order-theoretic commands
# ---------------------------------------------------------------------------


def _relation(doc: Document):
    _require(doc.relation is not None, "document has no [relation] section")
    return doc.relation


@command("axioms")
def cmd_axioms(doc: Document, opts, report: Report):
    rel = _relation(doc)
    _require(bool(doc.spaces), "document has no [states] section")
    result = access.check_axioms(
        rel, list(doc.spaces.values()), _axiom_config(doc, opts)
    )
    for axiom in result.results:
        idx = report.block("axiom")
        report.add(idx, "axiom", axiom.name)
        report.add(idx, "verdict", axiom.status.value)
        if axiom.witness is not None:
            report.add(idx, "witness", ", ".join(str(w) for w in axiom.witness))
        for caveat in axiom.caveats:
            report.add(idx, "caveat", caveat)
        report.set_status(
            idx, "fail" if axiom.status is AxiomStatus.FAIL else "pass"
        )


@command("ch")
def cmd_ch(doc: Document, opts, report: Report):
    rel = _relation(doc)
    _require(bool(doc.spaces), "document has no [states] section")
    for label, space in doc.spaces.items():
        result = access.comparison_hypothesis(rel, space)
        idx = report.block("comparison-hypothesis")
        report.add(idx, "space", label)
        report.add(idx, "verdict", "TOTAL" if result.total else "NOT_TOTAL")
        for x, y in result.incomparable:
            report.add(idx, "incomparable", f"{x} vs {y}")
        report.set_status(idx, "pass" if result.total else "fail")


@command("entropy-construct")
def cmd_entropy_construct(doc: Document, opts, report: Report):
    rel = _relation(doc)
    _require(bool(doc.spaces), "document has no [states] section")
    config = _axiom_config(doc, opts)
    for label, space in doc.spaces.items():
        idx = report.block("entropy-construct")
        report.add(idx, "space", label)
        try:
            S = access.construct_entropy(rel, space, config)
        except ConstructionImpossible as err:
            report.add(idx, "verdict", "CONSTRUCTION_IMPOSSIBLE")
            report.add(idx, "witness", ", ".join(str(w) for w in err.witness))
            report.set_status(idx, "fail")
            continue
        report.add(idx, "method", S.method)
        if S.degenerate:
            report.add(idx, "degenerate", "yes")
        if S.grid_step is not None:
            report.add(idx, "grid-step", S.grid_step)
        for name in space.names():
            report.add(idx, f"S({name})", S.values[name])
        verdict = access.verify_entropy(S, rel, space, config)
        report.add(idx, "verified", "yes" if verdict.ok else "no")
        report.set_status(idx, "pass" if verdict.ok else "fail")


@command("entropy-verify")
def cmd_entropy_verify(doc: Document, opts, report: Report):
    rel = _relation(doc)
    _require(bool(doc.entropies), "document has no [entropy] section")
    config = _axiom_config(doc, opts)
    for name, (label, S) in doc.entropies.items():
        result = access.verify_entropy(S, rel, doc.spaces[label], config)
        idx = report.block("entropy-verify")
        report.add(idx, "entropy", name)
        report.add(idx, "space", label)
        for part in (result.monotonicity, result.additivity, result.extensivity):
            value = part.status.value
            if part.witness is not None:
                value += f" ({', '.join(str(w) for w in part.witness)})"
            report.add(idx, part.name, value)
        report.set_status(idx, "pass" if result.ok else "fail")


@command("calibrate")
def cmd_calibrate(doc: Document, opts, report: Report):
    _require(bool(doc.entropies), "document has no [entropy] section")
    _require(doc.cross is not None, "document has no [cross] section")
    systems = [
        (doc.spaces[label], S) for label, S in doc.entropies.values()
    ]
    margin = doc.config.get("margin", Fraction(1, 10**6))
    result = access.calibrate(systems, doc.cross, margin=margin)
    idx = report.block("calibrate")
    if result.ok:
        report.add(idx, "verdict", "FEASIBLE")
        for (space, _), (a, b) in zip(systems, result.coefficients):
            report.add(idx, f"a({space.label})", a)
            report.add(idx, f"B({space.label})", b)
        report.set_status(idx, "pass")
    else:
        report.add(idx, "verdict", "INFEASIBLE")
        for item in result.witness:
            report.add(idx, "conflict", item)
        report.set_status(idx, "fail")


# ---------------------------------------------------------------------------
# categorical commands
# ---------------------------------------------------------------------------


def _poset(doc: Document, name: str) -> Poset:
    _require(name in doc.posets, f"no poset named {name!r}")
    carrier, edges = doc.posets[name]
    return Poset(carrier, edges)


def _poset_map(doc: Document, name: str) -> MonotoneMap:
    _require(name in doc.maps, f"no map named {name!r}")
    src, dst, mapping = doc.maps[name]
    return MonotoneMap(_poset(doc, src), _poset(doc, dst), mapping)


@command("galois")
def cmd_galois(doc: Document, opts, report: Report):
    F = _poset_map(doc, "F")
    G = _poset_map(doc, "G")
    result = galois.check_galois(F, G)
    idx = report.block("galois")
    report.add(idx, "verdict", "PASS" if result.ok else "FAIL")
    if result.ok:
        report.add(idx, "unit", "OK" if result.unit_ok else "FAIL")
        report.add(idx, "counit", "OK" if result.counit_ok else "FAIL")
        closure = galois.closure_report(F, G)
        report.add(idx, "closure-operator", "OK" if closure.ok else "FAIL")
    else:
        a, b, direction = result.witness
        report.add(idx, "witness", f"a={a}, b={b}: {direction}")
    report.set_status(idx, "pass" if result.ok else "fail")


@command("adjoint")
def cmd_adjoint(doc: Document, opts, report: Report):
    F = _poset_map(doc, "F")
    result = galois.right_adjoint(F)
    idx = report.block("adjoint")
    if not result.found:
        report.add(idx, "verdict", "NONE")
        report.add(idx, "witness", result.witness)
        report.set_status(idx, "fail")
        return
    report.add(idx, "verdict", "FOUND")
    for b in result.map.source.carrier:
        report.add(idx, f"G({b})", result.map(b))
    check = galois.check_galois(F, result.map)
    report.add(idx, "galois", "PASS" if check.ok else "FAIL")
    report.set_status(idx, "pass" if check.ok else "fail")


@command("landauer")
def cmd_landauer(doc: Document, opts, report: Report):
    _require(len(doc.entropies) >= 2, "landauer needs two entropy systems")
    _require("F" in doc.maps and "G" in doc.maps, "landauer needs maps F and G")
    (label1, s1), (label2, s2) = list(doc.entropies.values())[:2]
    f_src, f_dst, f_mapping = doc.maps["F"]
    g_src, g_dst, g_mapping = doc.maps["G"]
    _require(
        (f_src, f_dst) == (label1, label2) and (g_src, g_dst) == (label2, label1),
        "maps F and G must run between the two entropy spaces",
    )
    result = galois.landauer_check(
        (doc.spaces[label1], s1), (doc.spaces[label2], s2), f_mapping, g_mapping
    )
    idx = report.block("landauer")
    report.add(idx, "verdict", "PASS" if result.ok else "FAIL")
    if result.stage:
        report.add(idx, "stage", result.stage)
    if result.witness is not None:
        report.add(idx, "witness", ", ".join(str(w) for w in result.witness))
    for state, s_abstract, s_real in result.rows:
        report.add(
            idx,
            f"realization-entropy {state}",
            f"abstract={s_abstract} realized={s_real}",
        )
    report.set_status(idx, "pass" if result.ok else "fail")


# ---------------------------------------------------------------------------
# batch mode and entry point
# ---------------------------------------------------------------------------


@command("batch")
def cmd_batch(doc, opts, report):  # pragma: no cover - dispatched specially
    raise UsageError("batch is handled by the driver")


def _run_single(command_name: str, doc_path: str, opts, report: Report) -> None:
    doc = load_document(doc_path)
    idx = report.block("document")
    report.add(idx, "path", doc_path)
    report.add(idx, "command", command_name)
    COMMANDS[command_name](doc, opts, report)


def _run_batch(manifest_path: str, opts, out) -> int:
    base = os.path.dirname(manifest_path)
    entries = []
    with open(manifest_path, encoding="utf-8") as handle:
        for raw in handle:
            body = raw.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 3:
                raise UsageError(
                    f"manifest line needs 'COMMAND DOC EXPECTED_EXIT': {body!r}"
                )
            entries.append((parts[0], os.path.join(base, parts[1]), int(parts[2])))
    all_ok = True
    chunks = []
    for command_name, doc_path, expected in entries:
        report = Report()
        try:
            _require(command_name in COMMANDS, f"unknown command {command_name!r}")
            _run_single(command_name, doc_path, opts, report)
            code = report.exit_code()
        except (UsageError, DocumentError, ExprError, ThermoError, GaloisError,
                access.AccessError, ValueError) as err:
            idx = report.block("error")
            report.add(idx, "message", str(err))
            code = 2
        matched = code == expected
        all_ok = all_ok and matched
        chunks.append(report.render(opts.format))
        tail = (
            f"check: batch-entry\ndocument: {os.path.basename(doc_path)}"
            f"\ncommand: {command_name}\nexit: {code}\nexpected: {expected}"
            f"\nmatched: {'yes' if matched else 'no'}\n"
        )
        chunks.append(tail)
    out.write("\n".join(chunks))
    out.write(f"\ncheck: batch-summary\nentries: {len(entries)}"
              f"\nall-matched: {'yes' if all_ok else 'no'}\n")
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entropykit",
        description="Symbolic thermodynamics checks over system documents",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("document", help="system document (or manifest for batch)")
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument(
        "--lambda-grid",
        type=lambda s: tuple(Fraction(v) for v in s.split(",")),
        default=None,
    )
    parser.add_argument("--eps-steps", type=int, default=None)
    parser.add_argument("--format", choices=("text", "structured"), default="text")
    parser.add_argument("--out", default=None)
    return parser


def run(argv, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        opts = parser.parse_args(argv)
    except SystemExit as err:
        return 2 if err.code else 0
    if opts.seed is None:
        opts.seed = int(os.environ.get("ENTROPYKIT_SEED", "0"))
    sink = io.StringIO() if opts.out else out
    try:
        if opts.command == "batch":
            code = _run_batch(opts.document, opts, sink)
        else:
            report = Report()
            _run_single(opts.command, opts.document, opts, report)
            sink.write(report.render(opts.format))
            code = report.exit_code()
    except (UsageError, DocumentError, ExprError, ThermoError, GaloisError,
            access.AccessError, OSError, ValueError) as err:
        sink.write(f"error: {err}\n")
        code = 2
    if opts.out:
        with open(opts.out, "w", encoding="utf-8") as handle:
            handle.write(sink.getvalue())
    return code


def main():  # pragma: no cover - thin wrapper
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":  # pragma: no cover
    main()
