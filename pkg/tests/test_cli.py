import io
import json

from fot.cli import flatten, main, read_csv, unflatten, write_csv
from fot.core import dumps, instance_to_obj, loads
from fot.dynamics import flow_to_obj
from fot.gen import MnParams, geometric_alphas, make_mn

from fractions import Fraction

from helpers import two_link_all_on_slow_flow, two_link_base_instance

F = Fraction


def write_instance(tmp_path, inst, name="inst.json"):
    path = tmp_path / name
    path.write_text(dumps(instance_to_obj(inst)))
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_flatten_unflatten_roundtrip():
    obj = {
        "a": [{"x": "1/2", "flag": True}, {"x": "3", "flag": False}],
        "empty_list": [],
        "empty_dict": {},
        "count": 7,
        "nothing": None,
        "name": "e1,e2",
    }
    assert unflatten(flatten(obj)) == obj
    buf = io.StringIO()
    write_csv(obj, buf)
    assert read_csv(io.StringIO(buf.getvalue())) == obj


def test_gen_and_simulate_roundtrip(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "gen", "mn", "--n", "2", "--eps", "1/10")
    assert code == 0
    inst_path = tmp_path / "m2.json"
    inst_path.write_text(out)
    code, out, _ = run_cli(capsys, "simulate", str(inst_path))
    assert code == 0
    run = loads(out)
    assert run["social_cost"] == "1"
    assert run["steady"] is True and run["diverging"] is False
    assert run["events"][0]["activations"] == ["f1"]


def test_gen_integer_carries_cost_target(capsys):
    code, out, _ = run_cli(capsys, "gen", "mn", "--n", "3", "--eps", "1/8",
                           "--integer")
    assert code == 0
    obj = loads(out)
    assert obj["_meta"]["cost_target"] == "1/2"
    assert all("/" not in e["capacity"] for e in obj["edges"])


def test_subcommand_output_is_deterministic(tmp_path, capsys):
    inst = make_mn(MnParams(n=3, horizon=F(1),
                            alphas=geometric_alphas(3, F(1, 10), 1)))
    path = write_instance(tmp_path, inst)
    for argv in (["simulate", path], ["braess", path], ["classify", path]):
        _, first, _ = run_cli(capsys, *argv)
        _, second, _ = run_cli(capsys, *argv)
        assert first == second, argv


def test_simulate_csv_carries_identical_information(tmp_path, capsys):
    inst = two_link_base_instance()
    path = write_instance(tmp_path, inst)
    code, as_json, _ = run_cli(capsys, "simulate", path)
    assert code == 0
    code, as_csv, _ = run_cli(capsys, "simulate", path, "--format", "csv")
    assert code == 0
    assert read_csv(io.StringIO(as_csv)) == loads(as_json)


def test_simulate_csv_decimal_column_is_display_only(tmp_path, capsys):
    path = write_instance(tmp_path, two_link_base_instance())
    code, out, _ = run_cli(capsys, "simulate", path, "--format", "csv",
                           "--decimal", "3")
    assert code == 0
    header = out.splitlines()[0]
    assert "display_only" in header and "not_authoritative" in header
    row = next(line for line in out.splitlines() if line.startswith("social_cost"))
    assert row.endswith("1.000")


def test_validate_cli(tmp_path, capsys):
    inst = two_link_base_instance()
    inst_path = write_instance(tmp_path, inst)
    run_code, run_out, _ = run_cli(capsys, "simulate", inst_path)
    flow_path = tmp_path / "flow.json"
    flow_path.write_text(dumps(loads(run_out)["flow"]))
    code, out, _ = run_cli(capsys, "validate", inst_path, str(flow_path), "--nash")
    assert code == 0
    report = loads(out)
    assert report["feasible"] and report["nash"]

    bad = two_link_all_on_slow_flow()
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(dumps(flow_to_obj(bad)))
    code, out, _ = run_cli(capsys, "validate", inst_path, str(bad_path), "--nash")
    assert code == 1
    report = loads(out)
    assert report["feasible"] and not report["nash"]
    assert report["nash_violations"]


def test_braess_cli(tmp_path, capsys):
    from fot.core import transpose

    inst = transpose(make_mn(MnParams(n=3, horizon=F(1),
                                      alphas=geometric_alphas(3, F(1, 10), 1))))
    path = write_instance(tmp_path, inst)
    code, out, _ = run_cli(capsys, "braess", path)
    assert code == 0
    report = loads(out)
    assert report["ratio"] == "1" and report["paradox"] is False
    assert len(report["entries"]) == 16

    subsets = tmp_path / "subsets.json"
    subsets.write_text(json.dumps([["e1", "e2"]]))
    code, out, _ = run_cli(capsys, "braess", path, "--subsets", str(subsets))
    assert code == 0
    assert len(loads(out)["entries"]) == 2  # given subset plus the full set


def test_classify_cli(tmp_path, capsys):
    inst = make_mn(MnParams(n=3, horizon=F(1),
                            alphas=geometric_alphas(3, F(1, 10), 1)))
    path = write_instance(tmp_path, inst)
    code, out, _ = run_cli(capsys, "classify", path)
    assert code == 0
    report = loads(out)
    assert report["series_parallel"] is True
    assert report["minors"]["M3"]["nodes"] == {"v1": "v1", "v2": "v2", "v3": "v3"}
    assert report["uses_only_chains"] is False


def test_sweep_cli_with_grid_file(tmp_path, capsys):
    from fot.braess import default_transpose_m3_grid

    grid = [{"label": label, "instance": instance_to_obj(inst)}
            for label, inst in default_transpose_m3_grid()[:6]]
    grid_path = tmp_path / "grid.json"
    grid_path.write_text(json.dumps(grid))
    code, out, _ = run_cli(capsys, "sweep", "--preset", "transpose-m3",
                           "--grid", str(grid_path))
    assert code == 0
    report = loads(out)
    assert report["any_paradox"] is False
    assert all(p["ratio"] == "1" for p in report["points"])


def test_reproduce_cli(capsys):
    code, out, _ = run_cli(capsys, "reproduce", "lemma2", "--n", "3")
    assert code == 0
    assert loads(out)["ok"] is True


def test_exit_codes(tmp_path, capsys):
    code, _, err = run_cli(capsys, "simulate", "/nonexistent.json")
    assert code == 2 and "input error" in err
    code, _, _ = run_cli(capsys, "nonsense")
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run_cli(capsys, "simulate", str(bad))
    assert code == 2


def test_export_plotdata(tmp_path, capsys):
    inst = two_link_base_instance()
    inst_path = write_instance(tmp_path, inst)
    _, run_out, _ = run_cli(capsys, "simulate", inst_path)
    run_path = tmp_path / "run.json"
    run_path.write_text(run_out)
    code, out, _ = run_cli(capsys, "export-plotdata", str(run_path))
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "series,name,x,value"
    assert any(line.startswith("label,v2") for line in lines)
    assert any(line.startswith("queue,e1") for line in lines)
