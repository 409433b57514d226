import csv
import json
import math

import numpy as np
import pytest

from noisyqsl import channels as ch
from noisyqsl import figures
from noisyqsl.cli import RunConfig, InputError, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, c in {
        "I": ch.identity_channel(2),
        "AD": ch.amplitude_damping(1.0, math.log(4)),
        "R1": ch.random_channel(2, 2, np.random.Generator(np.random.Philox(1))),
        "R2": ch.random_channel(2, 2, np.random.Generator(np.random.Philox(2))),
        "I3": ch.identity_channel(3),
    }.items():
        paths[name] = tmp_path / f"{name}.json"
        ch.save_channel(c, paths[name])
    return paths


def test_distance_identity(capsys, files):
    code, out, _ = run(capsys, "distance", "--a", files["I"], "--b", files["I"])
    res = json.loads(out)
    assert code == 0 and res["d"] == 0 and res["certified"]
    for key in ("cos_d", "gap", "residuals", "W", "rho_S", "optimal_input"):
        assert key in res


def test_distance_amplitude_damping(capsys, files):
    code, out, _ = run(capsys, "distance", "--a", files["I"], "--b", files["AD"])
    res = json.loads(out)
    assert code == 0 and res["d"] == pytest.approx(math.pi / 3, abs=1e-8)
    assert res["d"] == pytest.approx(1.0472, abs=1e-4)


def test_distance_verify_pinches(capsys, files):
    code, out, _ = run(capsys, "distance", "--a", files["R1"], "--b", files["R2"], "--verify",
                       "--samples", 3000)
    res = json.loads(out)
    assert code == 0
    fid, wmax = res["oracle"]["min_fidelity"], res["oracle"]["w_max"]
    assert fid["best_value"] >= res["cos_d"] - 1e-6
    assert wmax["best_value"] <= res["cos_d"] + 1e-6


def test_distance_input_errors(capsys, files, tmp_path):
    assert run(capsys, "distance", "--a", files["I"], "--b", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "distance", "--a", files["I"], "--b", files["I3"])[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dim": 2, "kraus": [ch.matrix_to_json(2 * np.eye(2))]}))
    code, _, err = run(capsys, "distance", "--a", files["I"], "--b", bad)
    assert code == 2 and "trace preserving" in err


def test_distance_nonconvergence_exit_code(capsys, files):
    code, out, _ = run(capsys, "distance", "--a", files["I"], "--b", files["R1"], "--tol", 1e-300)
    res = json.loads(out)
    assert code == 3 and res["certified"] is False and res["converged"] is False


def test_verify_identity(capsys, files):
    code, out, _ = run(capsys, "verify", "--channel", files["I"], "--samples", 200, "--seed", 3)
    res = json.loads(out)
    assert code == 0 and res["passed"]
    assert abs(res["min_fidelity"]["violation"]) <= 1e-12
    assert abs(res["w_max"]["violation"]) <= 1e-12


def test_verify_random_channel_with_reference(capsys, files):
    code, out, _ = run(capsys, "verify", "--channel", files["R2"], "--reference", files["R1"],
                       "--samples", 500)
    assert code == 0 and json.loads(out)["passed"]


def test_mintime(capsys, tmp_path):
    code, out, _ = run(capsys, "mintime", "--model", "ad", "--gamma", 1, "--theta", 0.7853981634)
    assert code == 0 and json.loads(out)["time"] == pytest.approx(0.6931472, abs=1e-7)
    code, out, _ = run(capsys, "mintime", "--model", "dephasing", "--gamma", 0.1, "--omega", 1,
                       "--theta", 1.5707963)
    res = json.loads(out)
    assert code == 0 and res["reachable"] is False and res["alpha_min"] > 0
    h = tmp_path / "H.json"
    h.write_text(json.dumps({"H": ch.matrix_to_json(np.diag([0.5, -0.5]))}))
    code, out, _ = run(capsys, "mintime", "--model", "unitary", "--hamiltonian", h, "--theta", 1.0)
    assert json.loads(out)["time"] == pytest.approx(2.0)
    assert run(capsys, "mintime", "--model", "unitary", "--theta", 1.0)[0] == 2
    assert run(capsys, "mintime", "--model", "ad", "--theta", 3.0)[0] == 2


def test_mintime_two_qubit_dephasing(capsys):
    code, out, _ = run(capsys, "mintime", "--model", "dephasing", "--n", 2, "--theta", 0.5,
                       "--t-max", 2, "--step", 0.05)
    res = json.loads(out)
    assert code == 0 and res["reachable"] and 0 < res["time"] < 2


def test_channel_round_trip_through_cli(capsys, tmp_path):
    out = tmp_path / "c.json"
    assert run(capsys, "channel", "--model", "dephasing", "--t", 1.234567, "--out", out)[0] == 0
    again = tmp_path / "c2.json"
    ch.save_channel(ch.load_channel(out), again)
    assert out.read_bytes() == again.read_bytes()
    assert ch.load_channel(out) == ch.dephasing(ch.ConstantRate(0.1), 1.0, 1.234567)
    assert run(capsys, "channel", "--model", "random", "--dim", 3, "--num-kraus", 2, "--seed", 4,
               "--out", tmp_path / "r.json")[0] == 0
    assert ch.load_channel(tmp_path / "r.json").dim == 3


def read_csv(path):
    text = path.read_bytes()
    assert b"\r" not in text
    rows = list(csv.reader(text.decode().splitlines()))
    return rows[0], rows[1:]


def test_figure1_csv(capsys, tmp_path):
    out = tmp_path / "f1.csv"
    assert run(capsys, "figure", 1, "--out", out)[0] == 0
    header, rows = read_csv(out)
    assert header == ["t", "cos_d", "d"]
    at_pi = [r for r in rows if abs(float(r[0]) - math.pi) < 1e-12][0]
    assert float(at_pi[2]) == pytest.approx(1.1948, abs=1e-4)
    # 17 significant digits survive the round trip
    assert float(at_pi[0]) == np.linspace(0, 4 * math.pi, 201)[50]
    deg = tmp_path / "f1d.csv"
    run(capsys, "figure", 1, "--degrees", "--out", deg)
    _, drows = read_csv(deg)
    k = rows.index(at_pi)
    assert float(drows[k][2]) == pytest.approx(math.degrees(float(at_pi[2])))
    assert drows[k][1] == at_pi[1]


def test_figure1_with_sdp_columns(capsys, tmp_path):
    out = tmp_path / "f.csv"
    run(capsys, "figure", 1, "--steps", 9, "--sdp", "--out", out)
    header, rows = read_csv(out)
    assert header[-2:] == ["cos_d_sdp", "d_sdp"]
    for r in rows:
        assert float(r[1]) == pytest.approx(float(r[3]), abs=1e-8)


def test_figure2_ordering_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["figure", 2, "--n", 2, "--ratios", 3, "--steps", 120, "--exact-steps", 12]
    run(capsys, *args, "--out", a)
    run(capsys, *args, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    header, rows = read_csv(a)
    assert header == ["ratio", "max_theta_sep", "max_d_exact", "max_arccos_alpha_N", "max_theta_ghz"]
    for r in rows:
        sep, exact, up = float(r[1]), float(r[2]), float(r[3])
        assert sep <= exact + 1e-6 and exact <= up + 1e-6


def test_figure2_n5_default_leaves_exact_empty(capsys, tmp_path):
    out = tmp_path / "f2.csv"
    run(capsys, "figure", 2, "--ratios", 3, "--steps", 100, "--out", out)
    _, rows = read_csv(out)
    assert all(r[2] == "" for r in rows)
    assert all(float(r[1]) <= float(r[3]) for r in rows)


def test_figure2_force_exact_warns(caplog):
    with caplog.at_level("WARNING"):
        t = figures.figure2(N=4, ratios=1, ratio_min=1.0, ratio_max=2.0, steps=20, exact_steps=2,
                            force_exact=True)
    assert "slow" in caplog.text
    assert not math.isnan(t.column("max_d_exact")[0])


def test_figures_3_and_4(capsys, tmp_path):
    f3, f4 = tmp_path / "f3.csv", tmp_path / "f4.csv"
    run(capsys, "figure", 3, "--t-max", 3, "--steps", 7, "--out", f3)
    run(capsys, "figure", 4, "--t-max", 3, "--steps", 7, "--out", f4)
    h3, r3 = read_csv(f3)
    h4, r4 = read_csv(f4)
    assert h3 == ["t", "theta_ghz", "theta_sep", "d_exact"] and len(r3) == 7
    assert h4[:3] == ["t", "ent_system", "ent_purification"] and len(r4) == 7
    for r in r3:
        ghz, sep, d = map(float, r[1:])
        assert max(ghz, sep) <= d + 1e-7


def test_curve(capsys):
    code, out, _ = run(capsys, "curve", "--model", "ad", "--gamma", 1, "--t-max", 2, "--steps", 3)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "t,cos_d,d" and len(lines) == 4
    assert float(lines[-1].split(",")[1]) == pytest.approx(math.exp(-1))


def test_config_validation(capsys):
    assert run(capsys, "figure", 3, "--steps", 1)[0] == 2
    code, _, err = run(capsys, "figure", 3, "--n", 7)
    assert code == 2 and "lower --n" in err
    with pytest.raises(InputError):
        RunConfig("curve", t_min=2.0, t_max=1.0)
    with pytest.raises(SystemExit) as e:
        main(["figure", "5"])
    assert e.value.code == 2


def test_maximize_over_t_refines():
    f = lambda t: -(t - 1.2345) ** 2
    best, t = figures.maximize_over_t(f, np.linspace(0, 3, 7))
    assert t == pytest.approx(1.2345, abs=1e-6) and best == pytest.approx(0, abs=1e-10)
    best, t = figures.maximize_over_t(f, np.linspace(0, 3, 7), candidates=[1.2345])
    assert best == 0
