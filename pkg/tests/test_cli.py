import io
from fractions import Fraction as F
from pathlib import Path

import pytest

from entropykit.cli import run
from entropykit.documents import DocumentError, load_document, parse_document

CORPUS = Path(__file__).resolve().parent.parent / "docs" / "corpus"


def run_cli(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


# -- document parsing -----------------------------------------------------------


def test_load_ideal_gas_document():
    doc = load_document(str(CORPUS / "ideal_gas.doc"))
    assert doc.thermo_chart.energy == "U"
    assert doc.thermo_chart.pairs == (("T", "S", 1), ("p", "V", -1))
    assert doc.param_values == {"N": F(1), "R": F(1)}
    assert doc.spec.is_potential_form
    assert set(doc.paths) == {"direct", "dogleg"}
    assert len(doc.paths["dogleg"].segments) == 2


def test_load_states_and_relation_document():
    doc = load_document(str(CORPUS / "oracle_space.doc"))
    assert doc.spaces["Gamma"].scalable
    assert doc.spaces["Gamma"].states["c"] == (F(2), F(3))
    assert doc.relation is not None
    assert doc.relation.supports_scaling


def test_load_poset_document():
    doc = load_document(str(CORPUS / "chains.doc"))
    assert doc.posets["A"][0] == ("a0", "a1", "a2")
    assert doc.maps["F"][2]["a2"] == "b1"


def test_parse_errors_name_file_and_line():
    with pytest.raises(DocumentError) as err:
        parse_document("[chart]\ncoords x y\n", path="bad.doc")
    assert "bad.doc:2" in str(err.value)
    with pytest.raises(DocumentError):
        parse_document("stray line\n")
    with pytest.raises(DocumentError):
        parse_document("[nonsense]\nkey = 1\n")


def test_segment_claims_parse():
    doc = load_document(str(CORPUS / "fig2_audit.doc"))
    segs = doc.paths["cooling_then_claimed_adiabat"].segments
    assert segs[0].claim is None
    assert segs[1].claim == "adiabatic"


def test_higher_degree_forms_parse():
    doc = parse_document(
        "[chart]\ncoords = x y z\n\n[forms]\nform area : x y = 1, y z = x\n"
    )
    area = doc.forms["area"]
    assert area.degree == 2
    assert area.coefficient(("x", "y")) == doc.chart.one()
    assert area.coefficient(("y", "z")) == doc.chart.var("x")
    with pytest.raises(DocumentError):
        parse_document("[chart]\ncoords = x y z\n\n[forms]\nform bad : x = 1, x y = 1\n")


# -- exit codes ------------------------------------------------------------------


def test_exit_zero_on_pass():
    code, text = run_cli("maxwell", str(CORPUS / "ideal_gas.doc"))
    assert code == 0
    assert "identity: ∂T/∂V = -∂p/∂S" in text
    assert "verdict: OK" in text


def test_exit_one_on_failure():
    code, text = run_cli("frobenius", str(CORPUS / "cartan_form.doc"))
    assert code == 1
    assert "NOT_INTEGRABLE" in text


def test_exit_two_on_parse_error():
    code, text = run_cli("maxwell", str(CORPUS / "parse_error.doc"))
    assert code == 2
    assert "error:" in text
    assert "parse_error.doc:2" in text


def test_exit_two_on_missing_file_and_bad_usage():
    code, _ = run_cli("maxwell", str(CORPUS / "no_such.doc"))
    assert code == 2
    code, _ = run_cli("not-a-command", str(CORPUS / "ideal_gas.doc"))
    assert code == 2


def test_exit_three_on_inconclusive_only():
    code, text = run_cli("maxwell", str(CORPUS / "sampled_maxwell.doc"))
    assert code == 3
    assert "certainty: sampled" in text


def test_potential_command_reports_all_rows():
    code, text = run_cli(
        "potential", str(CORPUS / "potentials.doc"), "--format", "structured"
    )
    assert code == 0
    assert "potential: U + V*p" in text
    assert "potential: U - S*T" in text
    assert "potential: U - S*T + V*p" in text
    assert text.count("contact: CONTACT") == 3
    assert text.count("symmetry: SYMMETRY") == 3


def test_structured_output_is_deterministic():
    args = ("axioms", str(CORPUS / "oracle_space.doc"), "--format", "structured")
    code1, text1 = run_cli(*args)
    code2, text2 = run_cli(*args)
    assert code1 == code2 == 0
    assert text1 == text2


def test_sampling_flags_are_accepted():
    code, text = run_cli(
        "axioms",
        str(CORPUS / "oracle_space.doc"),
        "--lambda-grid",
        "1/2,2",
        "--eps-steps",
        "4",
        "--seed",
        "3",
    )
    assert code == 0
    assert "axiom: stability" in text
    assert "caveat: LIMIT_APPROXIMATED" in text


def test_out_flag_writes_file(tmp_path):
    target = tmp_path / "report.txt"
    code, text = run_cli(
        "maxwell",
        str(CORPUS / "ideal_gas.doc"),
        "--format",
        "structured",
        "--out",
        str(target),
    )
    assert code == 0
    assert target.read_text().startswith("check: document")
    assert text == ""


def test_batch_runs_whole_corpus():
    code, text = run_cli(
        "batch", str(CORPUS / "manifest.txt"), "--format", "structured"
    )
    assert code == 0
    assert "all-matched: yes" in text
