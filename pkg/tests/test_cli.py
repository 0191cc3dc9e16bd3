import json

import numpy as np
import pytest

from qsot.algebra import AlgebraElement, ShapeMismatchError
from qsot.cli import EXIT_ANOMALY, EXIT_FAIL, EXIT_OK, EXIT_PARSE, EXIT_SHAPE, LS_HEADER, SWEEP_HEADER, main
from qsot.experiments import epr_channel
from qsot.io import (
    ParseError,
    channel_to_dict,
    decode_matrix,
    encode_matrix,
    load_effects,
    loads_json,
    parse_channel,
    parse_state,
)
from qsot.linmap import density_of, from_function, hs_adjoint, identity_map
from qsot.sampling import random_map, rng_from

SWAP = [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def _identity_spec(rep="channel_density", picture="heisenberg"):
    data = SWAP if rep == "channel_density" else [np.eye(2).tolist()]
    return {"picture": picture, "domain_shape": [2], "codomain_shape": [2], "representation": rep, "data": data}


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# io


def test_matrix_codec_roundtrip():
    a = np.array([[1 + 2j, -0.5], [3j, 0.25]])
    assert np.abs(decode_matrix(encode_matrix(a)) - a).max() == 0
    assert np.abs(decode_matrix([[1, 2], [3, 4]]) - [[1, 2], [3, 4]]).max() == 0
    for bad in ([[1, 2], [3]], [["x"]], "nope", [[[1, 2, 3]]]):
        with pytest.raises(ParseError):
            decode_matrix(bad)


def test_three_representations_agree():
    for rep in ("channel_density", "kraus"):
        assert parse_channel(_identity_spec(rep)).distance(identity_map((2,))) < 1e-15
    rng = rng_from(0)
    f = random_map((2, 1), (3,), rng)
    assert parse_channel(json.loads(json.dumps(channel_to_dict(f)))).distance(f) < 1e-15


def test_schrodinger_picture_is_adjointed():
    u = np.array([[0, 1j], [1, 0]])
    kraus = {"picture": "schrodinger", "domain_shape": [2], "codomain_shape": [2], "representation": "kraus", "data": [encode_matrix(u)]}
    # ρ ↦ UρU† in the Schrödinger picture is B ↦ U†BU in the Heisenberg picture
    expected = from_function(lambda b: AlgebraElement.from_matrix(u.conj().T @ b.matrix @ u), (2,), (2,))
    assert parse_channel(kraus).distance(expected) < 1e-15
    rng = rng_from(1)
    f = random_map((2,), (2,), rng)
    spec = channel_to_dict(f)
    spec["picture"] = "schrodinger"
    assert parse_channel(spec).distance(hs_adjoint(f)) < 1e-15


def test_channel_parse_errors():
    with pytest.raises(ParseError):
        parse_channel({**_identity_spec(), "representation": "choi"})
    with pytest.raises(ParseError):
        parse_channel({**_identity_spec(), "domain_shape": [0]})
    with pytest.raises(ShapeMismatchError):
        parse_channel({**_identity_spec(), "domain_shape": [3]})
    with pytest.raises(ShapeMismatchError):
        parse_channel({**_identity_spec(), "codomain_shape": [1, 1]})
    with pytest.raises(ParseError) as info:
        loads_json('{"a": 1,\n "b": }', "chan.json")
    assert "chan.json:2:" in str(info.value)


def test_state_presets_and_objects():
    assert np.abs(density_of(parse_state("diag:p=0.3", (2,))).matrix - np.diag([0.3, 0.7])).max() < 1e-16
    assert np.abs(density_of(parse_state("maximally_mixed", (3,))).matrix - np.eye(3) / 3).max() < 1e-16
    assert np.abs(density_of(parse_state({"shape": [2, 1], "preset": "diag:0.5,0.25,0.25"})).to_dense() - np.diag([0.5, 0.25, 0.25])).max() == 0
    rho = parse_state({"shape": [2], "density": [[[0.5, 0], [0, 0.5]], [[0, -0.5], [0.5, 0]]]})
    assert abs(density_of(rho).matrix[0, 1] - 0.5j) < 1e-16
    with pytest.raises(ShapeMismatchError):
        parse_state("diag:p=0.3", (3,))
    with pytest.raises(ParseError):
        parse_state("pure:0", (2,))
    with pytest.raises(ShapeMismatchError):
        parse_state({"shape": [1, 1], "density": [[1, 0.5], [0.5, 0]]})


def test_effects_file(tmp_path):
    path = _write(tmp_path, "e.json", {"M": np.eye(2).tolist(), "N": [[0.5, 0], [0, 0.5]]})
    m, n = load_effects(path)
    assert np.abs(m - np.eye(2)).max() == 0 and n[1, 1] == 0.5
    with pytest.raises(ShapeMismatchError):
        load_effects(_write(tmp_path, "bad.json", {"M": np.eye(3).tolist(), "N": np.eye(2).tolist()}))


# commands and exit codes


def test_compute_identity_channel(tmp_path, capsys):
    chan = _write(tmp_path, "id.json", _identity_spec())
    code, out, _ = _run(["compute", chan, "diag:p=0.3"], capsys)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert abs(rep["min_eigenvalue"] + 0.5) < 1e-15 and not rep["positive"]
    assert rep["channel"]["completely_positive"] and rep["self_adjoint"]


def test_compute_is_deterministic(tmp_path, capsys):
    chan = _write(tmp_path, "id.json", _identity_spec("kraus"))
    outs = [tmp_path / f"r{i}.json" for i in range(2)]
    for o in outs:
        assert main(["compute", chan, "maximally_mixed", "--out", str(o)]) == EXIT_OK
    assert outs[0].read_bytes() == outs[1].read_bytes()


def test_exit_parse_on_malformed_json(tmp_path, capsys):
    chan = _write(tmp_path, "bad.json", '{"picture": "heisenberg",\n  "data": [1, 2,, 3]}')
    code, _, err = _run(["compute", chan, "maximally_mixed"], capsys)
    assert code == EXIT_PARSE
    assert "bad.json:2:" in err
    code, _, _ = _run(["compute", str(tmp_path / "missing.json"), "maximally_mixed"], capsys)
    assert code == EXIT_PARSE


def test_exit_shape_on_mismatch(tmp_path, capsys):
    chan = _write(tmp_path, "id.json", _identity_spec())
    state = _write(tmp_path, "s.json", {"shape": [3], "preset": "maximally_mixed"})
    assert _run(["compute", chan, state], capsys)[0] == EXIT_SHAPE
    assert _run(["compute", chan, "diag:0.2,0.3,0.5"], capsys)[0] == EXIT_SHAPE


def test_exit_anomaly_on_nan_input(tmp_path, capsys):
    spec = _identity_spec()
    text = json.dumps(spec).replace('"data": [[1, 0', '"data": [[NaN, 0')
    chan = _write(tmp_path, "nan.json", text)
    code, _, err = _run(["compute", chan, "maximally_mixed"], capsys)
    assert code == EXIT_ANOMALY and "non-finite" in err


def test_exit_anomaly_from_epr_guard(monkeypatch, capsys):
    import qsot.experiments as ex

    monkeypatch.setattr(ex, "epr_channel", lambda: identity_map((2,)))
    assert _run(["epr"], capsys)[0] == EXIT_ANOMALY


def test_epr_command(capsys):
    code, out, _ = _run(["epr"], capsys)
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["max_deviation_from_epr"] < 1e-15
    assert rep["positive"] and not rep["channel"]["completely_positive"]
    assert rep["channel"]["unital"] and rep["channel"]["dagger_preserving"]


def test_check_axioms_passes_and_is_seeded(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"ax{i}.json"
        assert main(["check-axioms", "--seed", "3", "--trials", "6", "--dims", "2", "--dims", "2,1", "--out", str(path)]) == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    assert rep["passed"] and rep["shapes"] == [[2], [2, 1]]
    assert all(rep["axioms"][k]["failures"] == 0 for k in "abcde")
    assert _run(["check-axioms", "--dims", "2,x"], capsys)[0] == EXIT_PARSE


def test_check_axioms_exit_fail_on_impossible_tolerance(capsys):
    code, out, _ = _run(["check-axioms", "--trials", "2", "--dims", "3", "--tol", "0"], capsys)
    rep = json.loads(out)
    assert code == EXIT_FAIL and not rep["passed"] and rep["failures"]
    assert {"axiom", "max_violation", "witness"} <= set(rep["failures"][0])


def test_noise_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["noise-sweep", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(SWEEP_HEADER) == "p,delta,epsilon,min_eig,lambda,positive"
    assert len(lines) == 1 + 21**3
    first = lines[1].split(",")
    assert first[:3] == ["0", "0", "0"] and float(first[3]) == -0.5 and first[5] == "false"


def test_ls_compare_csv(tmp_path, capsys):
    code, out, _ = _run(["ls-compare", "--case", "a"], capsys)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == ",".join(LS_HEADER)
    assert len(lines) == 102
    row = next(r.split(",") for r in lines[1:] if float(r.split(",")[0]) == 0.5)
    assert abs(float(row[1]) - float(row[2])) < 1e-12 and abs(float(row[1]) - 0.38) < 1e-12
    assert row[3] == "a"
    eff = _write(tmp_path, "e.json", {"M": np.eye(2).tolist(), "N": np.eye(2).tolist()})
    code, out, _ = _run(["ls-compare", "--effects", eff, "--grid", "3"], capsys)
    assert code == EXIT_OK and out.splitlines()[1].endswith(",custom")


def test_classical_check_planted_pair(tmp_path, capsys):
    f = np.array([[0.9, 0.3], [0.1, 0.7]])
    # embedded stochastic channel in the superoperator wire format
    comp = np.zeros((4, 4))
    for k in range(2):
        for i in range(2):
            comp[3 * i, 3 * k] = f[k, i]
    spec = {"picture": "heisenberg", "domain_shape": [2], "codomain_shape": [2], "representation": "superoperator", "data": [[comp.tolist()]]}
    chan = _write(tmp_path, "stoch.json", spec)
    code, out, _ = _run(["classical-check", chan, "diag:p=0.8"], capsys)
    rep = json.loads(out)
    assert code == EXIT_OK and rep["bloom_symmetric"] and rep["densities_commute"]
    st = np.array(rep["model"]["stochastic"])
    assert np.abs(np.sort(st.ravel()) - np.sort(f.ravel())).max() < 1e-12


def test_classical_check_failure_has_witness(tmp_path, capsys):
    chan = _write(tmp_path, "id.json", _identity_spec())
    code, out, _ = _run(["classical-check", chan, "diag:p=0.3"], capsys)
    rep = json.loads(out)
    assert code == EXIT_FAIL and not rep["densities_commute"]
    assert rep["model"] is None and "witness" in rep["not_classical"]


def test_classical_check_epr(tmp_path, capsys):
    chan = _write(tmp_path, "epr.json", channel_to_dict(epr_channel()))
    code, out, _ = _run(["classical-check", chan, "maximally_mixed"], capsys)
    rep = json.loads(out)
    assert code == EXIT_FAIL and rep["densities_commute"] and rep["model"] is None


def test_env_tolerance(tmp_path, capsys, monkeypatch):
    chan = _write(tmp_path, "id.json", _identity_spec())
    monkeypatch.setenv("QSOT_DEFAULT_TOL", "1.0")
    rep = json.loads(_run(["compute", chan, "diag:p=0.3"], capsys)[1])
    # a tolerance of 1 absorbs the -1/2 eigenvalue
    assert rep["positive"]
    rep = json.loads(_run(["compute", chan, "diag:p=0.3", "--tol", "1e-12"], capsys)[1])
    assert not rep["positive"]
