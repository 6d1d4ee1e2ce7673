import json

import jsonschema
import pytest

from oracles import dim_S_prime_level_odd_quadratic
from theta_doubler import cli


def run(capsys, *argv):
    code = cli.main(list(argv) + ["--threads", "1"])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def _strip(rep):
    rep = dict(rep)
    rep.pop("timings")
    return rep


def test_basis_dimension_and_cache(capsys):
    code, rep = run(capsys, "basis", "--p", "5", "--N", "23", "--k", "5", "--chi", "23:11-quadratic")
    assert code == 0
    jsonschema.validate(rep, cli.REPORT_SCHEMA)
    assert rep["results"]["dim"] == rep["results"]["formula_dim"]
    # full space: cusp forms plus the two Eisenstein series
    assert rep["results"]["dim"] == dim_S_prime_level_odd_quadratic(5, 23) + 2
    assert rep["provenance"]["cache_hits"] == []
    code, again = run(capsys, "basis", "--p", "5", "--N", "23", "--k", "5", "--chi", "23:11-quadratic")
    assert code == 0 and len(again["provenance"]["cache_hits"]) == 1
    assert again["results"]["dim"] == rep["results"]["dim"]


def test_unknown_character_is_usage_error(capsys):
    code, rep = run(capsys, "basis", "--p", "5", "--N", "23", "--chi", "23:nonsense")
    assert code == 2 and rep["error"]["code"]


def test_small_characteristic_rejected(capsys):
    code, rep = run(capsys, "nonlift", "--p", "3", "--D", "-23")
    assert code == 2 and rep["error"]["code"] == "UnsupportedCharacteristic"


def test_p_dividing_level_rejected(capsys):
    code, _ = run(capsys, "basis", "--p", "5", "--N", "25")
    assert code == 2


def test_missing_subcommand(capsys):
    assert cli.main([]) == 2


def test_sieve_only(capsys):
    code, rep = run(capsys, "nonlift", "--p", "5", "--D", "-23", "--budget", "0")
    assert code == 0 and rep["verdicts"] == {"sieve_only": True}
    assert [c["ell"] for c in rep["results"]["sieve"]["candidates"]] == [101, 211, 271]
    jsonschema.validate(rep, cli.REPORT_SCHEMA)


def test_primes_deterministic(capsys):
    _, a = run(capsys, "primes", "--p", "5", "--D", "-47", "--count", "2")
    _, b = run(capsys, "primes", "--p", "5", "--D", "-47", "--count", "2")
    assert _strip(a) == _strip(b)
    assert [c["ell"] for c in a["results"]["candidates"]] == [191, 761]


def test_doubling_minimal_level(capsys, tmp_path):
    out = tmp_path / "rep.json"
    code, rep = run(capsys, "doubling", "--p", "5", "--D", "-23", "-o", str(out))
    assert code == 0
    jsonschema.validate(rep, cli.REPORT_SCHEMA)
    assert rep["verdicts"]["count_identity"] is True
    assert rep["results"]["d_w1_torsion"] == 1
    assert json.loads(out.read_text()) == rep
    _, again = run(capsys, "doubling", "--p", "5", "--D", "-23")
    assert _strip(again)["results"] == _strip(rep)["results"]


def test_doubling_refuses_eisenstein(capsys):
    # the D = -47 eigensystem is Eisenstein mod 5 (h = 5 = p)
    code, rep = run(capsys, "doubling", "--p", "5", "--D", "-47")
    assert code == 3 and rep["error"]["code"] == "EisensteinComponent"
