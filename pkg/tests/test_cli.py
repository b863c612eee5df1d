import json

import pytest

from adjoint_kernel.cli import main
from adjoint_kernel.io import InstanceError, bundled_instance, dump_json, from_wire, load_instance, parse_instance


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def inst(name):
    return str(bundled_instance(name))


def test_hilbert_command(capsys):
    code, out, _ = run(capsys, "hilbert", "--cone", "1,0;1,2")
    assert code == 0 and out.strip() == "(1,0) (1,1) (1,2)"


def test_verify_fg_on_projective_line(capsys):
    code, out, _ = run(capsys, "verify-fg", inst("p1"))
    assert code == 0 and out.startswith("finitely generated: 4 generators")


def test_lift_check_modes(capsys):
    code, out, _ = run(capsys, "lift-check", "--mode", "sharp", inst("f1-lift"))
    assert code == 0 and "inclusion holds" in out and "FAILS" not in out
    code, out, _ = run(capsys, "lift-check", inst("p2-lift"))
    assert code == 0 and "equality holds" in out
    code, _, err = run(capsys, "lift-check", "--mode", "tinker", inst("f1-lift"))
    assert code == 1 and "--eps" in err


def test_lift_check_reports_hypothesis_failure(capsys):
    code, out, _ = run(capsys, "lift-check", "--mode", "tinker", "--eps", "5", inst("f1-lift"))
    assert code == 2 and "hypothesis fails" in out


def test_certificate_and_dioph_commands(capsys):
    code, out, _ = run(capsys, "check-cert", inst("f1-cert"))
    assert code == 0 and "Theta affine at 5 interior points" in out
    code, out, _ = run(capsys, "dioph", "--x", "0+1/2*sqrt(2),1-1/2*sqrt(2)", "--eps", "1/10")
    assert code == 0 and "w = (12/17,5/17), p = 17" in out and "certificate valid" in out


def test_toric_commands(capsys):
    code, out, _ = run(capsys, "sections", inst("p2"), "--divisor", "D1")
    assert code == 0 and out.startswith("h0(D1) = 3")
    code, out, _ = run(capsys, "sbl", inst("f1"), "--divisor", "D2")
    assert code == 0 and "B(D2) = D2" in out
    code, out, _ = run(capsys, "degree-bound", inst("p1"))
    assert code == 0 and "N = 2" in out and "N - 1 fails" in out
    code, out, _ = run(capsys, "regions", inst("p2"), "--divisor", "A", "--boundary", "D1", "--probes", "20")
    assert code == 0 and "20/20 agree" in out


def test_usage_errors(capsys):
    assert run(capsys, "no-such-command")[0] == 1
    assert run(capsys, "sections")[0] == 1
    assert run(capsys, "hilbert", "--cone", "1,x")[0] == 1
    assert run(capsys, "sections", "/nonexistent.json")[0] == 1


def _doc(**over):
    base = json.loads(bundled_instance("p1").read_text())
    base.update(over)
    return base


def test_strict_parsing():
    assert parse_instance(bundled_instance("p2")).variety.label == "P2"
    with pytest.raises(InstanceError, match="1/2"):
        load_instance(_doc(divisors={"A": {"D1": 0.5, "D2": "1"}}))
    with pytest.raises(InstanceError, match="unsupported version"):
        load_instance(_doc(version=2))
    with pytest.raises(InstanceError, match="unknown field"):
        load_instance(_doc(colour="blue"))
    with pytest.raises(InstanceError, match="not a prime"):
        load_instance(_doc(divisors={"A": {"D7": "1"}}))


def test_parse_errors_carry_location(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"version": 1,\n "label": }')
    with pytest.raises(InstanceError, match="line 2"):
        parse_instance(p)
    p.write_text('{"version": 1, "divisors": {"A": {"D1": 0.5}}}')
    with pytest.raises(InstanceError, match="rationals must be strings"):
        parse_instance(p)


@pytest.mark.parametrize("argv", [
    ["hilbert", "--cone", "1,0;1,2"],
    ["sections", "@p2", "--divisor", "D1"],
    ["fixmob", "@f1", "--divisor", "D2"],
    ["sbl", "@f1", "--divisor", "D2"],
    ["asymfix", "@f1", "--divisor", "D2"],
    ["regions", "@p2", "--divisor", "A", "--boundary", "D1", "--probes", "10"],
    ["chop", "@p1"],
    ["degree-bound", "@p1"],
    ["verify-fg", "@p1"],
    ["lift-check", "@p2-lift"],
    ["dioph", "--x", "0+1/2*sqrt(2)", "--eps", "1/10", "--modulus", "6"],
    ["check-cert", "@f1-cert"],
])
def test_json_output_round_trips_and_is_deterministic(capsys, argv):
    argv = [inst(a[1:]) if a.startswith("@") else a for a in argv] + ["--json"]
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0 and out1 == out2
    data = from_wire(json.loads(out1))
    assert dump_json(data) == out1.strip()
    assert data["command"] == argv[0] and data["exit"] == 0
