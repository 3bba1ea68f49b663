import json

import pytest

from hyp3.cli import main


def _run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr().out
    return rc, (json.loads(out) if out.strip() else None)


def test_identities_pass_and_report(capsys):
    rc, doc = _run(capsys, "identities", "--samples", "300", "--seed", "11")
    assert rc == 0
    assert doc["pass"] is True
    names = {r["name"] for r in doc["algebraic"]}
    assert "reg_disc_expansion" in names and "sumsq_vs_crit_gap" in names
    assert set(doc["trajectory"]) == {"strict_sin", "oleinik_ok"}
    for per_op in doc["trajectory"].values():
        assert all(v["pass"] for v in per_op.values())


def test_identities_zero_samples_trivial(capsys):
    rc, doc = _run(capsys, "identities", "--samples", "0")
    assert rc == 0 and doc["algebraic"] == [] and doc["pass"] is True


def test_identities_corrupted_formula_fails_and_names_it(capsys):
    rc, doc = _run(capsys, "identities", "--samples", "100",
                   "--corrupt", "reg_disc_expansion")
    assert rc == 1
    assert doc["pass"] is False
    assert "reg_disc_expansion" in doc["failures"]


def test_identities_deterministic_documents(tmp_path, capsys):
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["identities", "--samples", "200", "--seed", "3", "--out", str(a)]) == 0
    assert main(["identities", "--samples", "200", "--seed", "3", "--out", str(b)]) == 0
    capsys.readouterr()
    assert (a / "identities.json").read_bytes() == (b / "identities.json").read_bytes()


def test_check_single_battery_member(capsys):
    rc, doc = _run(capsys, "check", "--battery", "triple_plus_dx",
                   "--xi-min", "64", "--xi-max", "16384", "--xi-steps", "9")
    assert rc == 0
    op = doc["operators"]["triple_plus_dx"]
    assert op["verdicts"]["n_levi"] == "violated"
    assert op["case_report"]["case"] == "III"
    assert op["constant_coeff"]["decomposition_verdict"] == "unbounded"
    assert doc["pass"] is True


def test_check_operator_file(tmp_path, capsys):
    p = tmp_path / "wave.op"
    p.write_text("order = 3\ndimension = 1\nT = 1.0\nname = wave\na[1,(2)] = -1\n")
    rc, doc = _run(capsys, "check", "--config", str(p),
                   "--xi-min", "64", "--xi-max", "2048", "--xi-steps", "6")
    assert rc == 0
    assert doc["operators"]["wave"]["verdicts"]["m_levi"] == "logarithmic"


def test_check_second_order_file(tmp_path, capsys):
    p = tmp_path / "o2.op"
    p.write_text("order = 2\ndimension = 1\nT = 1.0\nname = o2\n"
                 "a[0,(2)] = -t^2\na[0,(1)] = 1\n")
    rc, doc = _run(capsys, "check", "--config", str(p))
    assert rc == 0
    assert doc["operators"]["o2"]["order"] == 2
    assert doc["operators"]["o2"]["verdicts"]["lower_weighted"] == "logarithmic"


def test_check_two_dimensional_operator_with_direction(tmp_path, capsys):
    p = tmp_path / "iso2.op"
    p.write_text("order = 3\ndimension = 2\nT = 1.0\nname = iso2\n"
                 "a[1,(2,0)] = -1\na[1,(0,2)] = -1\n")
    rc, doc = _run(capsys, "check", "--config", str(p), "--direction", "0.6,0.8",
                   "--xi-min", "64", "--xi-max", "2048", "--xi-steps", "6")
    assert rc == 0
    assert doc["operators"]["iso2"]["verdicts"]["m_levi"] == "logarithmic"
    rc, _ = _run(capsys, "check", "--config", str(p), "--direction", "1")
    assert rc == 2  # wrong component count


def test_check_usage_error_without_target(capsys):
    rc, _ = _run(capsys, "check")
    assert rc == 2


def test_check_nonexistent_file(capsys):
    rc, _ = _run(capsys, "check", "--config", "/no/such/file.op")
    assert rc == 2


def test_check_non_hyperbolic_operator_is_numerical_failure(tmp_path, capsys):
    p = tmp_path / "bad.op"
    p.write_text("order = 3\ndimension = 1\nT = 1.0\na[1,(2)] = 1\n")
    rc, _ = _run(capsys, "check", "--config", str(p))
    assert rc == 3


def test_tables_emission(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["check", "--battery", "strict_const", "--format", "both",
               "--out", str(out), "--xi-min", "64", "--xi-max", "2048",
               "--xi-steps", "6", "--grid", "512"])
    capsys.readouterr()
    assert rc == 0
    table = (out / "integrands_strict_const.tsv").read_text().splitlines()
    assert table[0] == "xi\tcondition\tt\tvalue"
    assert len(table) > 100
    doc = json.loads((out / "conditions.json").read_text())
    assert doc["pass"] is True


def test_modes_battery_member(capsys):
    rc, doc = _run(capsys, "modes", "--battery", "triple_plus_dx",
                   "--grid", "256", "--xi-min", "64", "--xi-max", "16384")
    assert rc == 0
    fit = doc["operators"]["triple_plus_dx"]
    assert fit["model"] == "exp_power"
    assert abs(fit["kappa"] - 1.0 / 3.0) <= 0.05


def test_check_document_is_byte_deterministic(tmp_path, capsys):
    args = ["check", "--battery", "strict_const", "--xi-min", "64",
            "--xi-max", "2048", "--xi-steps", "6"]
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    capsys.readouterr()
    assert (a / "conditions.json").read_bytes() == (b / "conditions.json").read_bytes()


def test_version_runs():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
