import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from coflowsched import cli, formats
from coflowsched.formats import GeneratorParams, generate
from coflowsched.model import make_coflow, make_instance
from coflowsched.pipeline import run_instance, run_pipeline
from coflowsched.relaxations import solve_divisible_lp, solve_indivisible_lp
from coflowsched.divisible import schedule_divisible
from coflowsched.simulator import verify_trace

from conftest import random_instance


# --- round trips ----------------------------------------------------------------


def test_instance_round_trip_with_fractional_weight():
    inst = make_instance(2, 3, [
        make_coflow(4, [(1, 2, 3), (3, 3, 1)], weight=Fraction(3, 2), release=5),
        make_coflow(1, [(2, 1, 2)]),
    ])
    text = formats.dumps_instance(inst)
    assert '"3/2"' in text
    assert formats.loads_instance(text) == inst


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_generated_instances_round_trip(seed):
    inst = random_instance(seed)
    assert formats.loads_instance(formats.dumps_instance(inst)) == inst


@pytest.mark.parametrize("text", [
    "not json",
    "[]",
    '{"schema_version": 2, "network": {"cores": 1, "ports": 1}, "coflows": []}',
    '{"schema_version": 1, "network": {"cores": 1}, "coflows": []}',
    '{"schema_version": 1, "network": {"cores": 1, "ports": 1}, '
    '"coflows": [{"id": 1, "flows": [{"input": 2, "output": 1, "size": 1}]}]}',
    '{"schema_version": 1, "network": {"cores": 1, "ports": 1}, '
    '"coflows": [{"id": 1, "weight": "x", "flows": [{"input": 1, "output": 1, "size": 1}]}]}',
])
def test_bad_instance_text(text):
    with pytest.raises(formats.FormatError):
        formats.loads_instance(text)


@pytest.mark.parametrize("mode", ["divisible", "indivisible"])
def test_solution_round_trip(mode):
    inst = random_instance(3)
    sol = (solve_divisible_lp if mode == "divisible" else solve_indivisible_lp)(inst)
    back = formats.solution_from_dict(json.loads(formats.dumps_json(formats.solution_to_dict(sol))))
    assert back == sol


def test_trace_round_trip():
    inst = random_instance(5)
    trace = schedule_divisible(inst, solve_divisible_lp(inst))
    text = formats.dumps_trace(trace)
    assert text.splitlines()[0] == "core,coflow_id,input,output,start,end"
    back = formats.loads_trace(text, inst)
    assert back == trace
    assert verify_trace(back, inst).ok


def test_bad_trace_text():
    inst = random_instance(5)
    with pytest.raises(formats.FormatError):
        formats.loads_trace("a,b\n", inst)
    with pytest.raises(formats.FormatError):
        formats.loads_trace("core,coflow_id,input,output,start,end\n1,1,1,1,x,2\n", inst)


# --- generator -------------------------------------------------------------------


def test_generator_deterministic():
    p = GeneratorParams(seed=42)
    assert generate(p) == generate(p)
    assert generate(p) != generate(GeneratorParams(seed=43))


def test_full_density_two_ports():
    inst = generate(GeneratorParams(seed=1, ports=2, flow_density=1.0))
    assert all(len(c.flows) == 4 for c in inst.coflows)


def test_zero_max_release():
    inst = generate(GeneratorParams(seed=9, max_release=0, num_coflows=8))
    assert inst.zero_release


def test_generator_ranges():
    p = GeneratorParams(seed=3, ports=3, num_coflows=40, flow_density=0.1, max_size=4, max_release=6, max_weight=3)
    inst = generate(p)
    assert len(inst.coflows) == 40
    assert all(c.flows for c in inst.coflows)
    assert {f.size for f in inst.flows} <= set(range(1, 5))
    assert {c.release for c in inst.coflows} <= set(range(0, 7))
    assert {c.weight for c in inst.coflows} <= {1, 2, 3}


@pytest.mark.parametrize("bad", [dict(ports=0), dict(flow_density=0), dict(flow_density=1.5), dict(max_release=-1)])
def test_generator_rejects_bad_params(bad):
    with pytest.raises(ValueError):
        GeneratorParams(**bad)


# --- curves ---------------------------------------------------------------------


def test_curve_rows():
    assert formats.ratio_row(1) == (1, 4.0, 3.0, 5, 4, 5, 4)
    assert formats.ratio_row(2) == (2, 5.0, 4.0, 9, 8, 10, 8)
    assert formats.ratio_row(5)[1] == 5.6
    assert formats.ratio_row(1000)[1] == pytest.approx(5.998, abs=1e-12)


def test_curves_text_and_errors():
    text = formats.dumps_curves(formats.emit_ratio_curves([1, 2]))
    assert text.splitlines() == [
        ",".join(formats.CURVE_HEADER),
        "1,4.0,3.0,5,4,5,4",
        "2,5.0,4.0,9,8,10,8",
    ]
    for bad in ([], [0], [1.5]):
        with pytest.raises(ValueError):
            formats.emit_ratio_curves(bad)


# --- pipeline and CLI ---------------------------------------------------------------


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "inst.json"
    formats.write_instance(random_instance(17, ports=3, num_coflows=4), path)
    return path


@pytest.mark.parametrize("mode", ["divisible", "indivisible"])
def test_pipeline_report(instance_file, tmp_path, mode):
    res = run_pipeline(instance_file, mode, tmp_path / "out")
    r = res.report
    assert res.exit_code == 0
    assert r["feasible"] and r["bound_satisfied"] and r["lp_certified"]
    assert r["lp_objective"] <= r["schedule_objective"] + 1e-6
    assert set(res.files) == {"solution", "trace", "report"}
    assert json.loads(res.files["report"].read_text()) == r
    assert "timing" not in r


def test_pipeline_byte_identical(instance_file, tmp_path):
    outs = []
    for run in ("a", "b"):
        res = run_pipeline(instance_file, "indivisible", tmp_path / run)
        outs.append({k: p.read_bytes() for k, p in res.files.items()})
    assert outs[0] == outs[1]


def test_pipeline_round_limit_exit():
    inst = random_instance(4, ports=3, num_coflows=5, flow_density=0.75, cores=1)
    res = run_instance(inst, "divisible", max_rounds=1)
    assert res.exit_code == 4
    assert res.report["lp_certified"] is False


def test_baseline_needs_indivisible(instance_file):
    inst = formats.read_instance(instance_file)
    with pytest.raises(ValueError):
        run_instance(inst, "divisible", baseline="random")
    res = run_instance(inst, "indivisible", baseline="weighted-total-size")
    assert res.report["policy"] == "weighted-total-size"
    assert "bound" not in res.report


def test_cli_gen_schedule_verify(tmp_path, capsys):
    inst = tmp_path / "g.json"
    assert cli.main(["gen", "--seed", "4", "--ports", "3", "-o", str(inst)]) == 0
    assert cli.main(["lp", str(inst), "--mode", "indivisible"]) == 0
    assert json.loads(capsys.readouterr().out)["mode"] == "indivisible"
    assert cli.main(["schedule", str(inst), "--out-dir", str(tmp_path)]) == 0
    trace = tmp_path / "g.divisible.trace.csv"
    assert cli.main(["verify", str(inst), str(trace)]) == 0
    assert capsys.readouterr().out.strip().endswith("pass")


def test_cli_verify_failure(tmp_path, capsys):
    inst = tmp_path / "i.json"
    formats.write_instance(make_instance(1, 1, [make_coflow(1, [(1, 1, 2)])]), inst)
    trace = tmp_path / "t.csv"
    trace.write_text("core,coflow_id,input,output,start,end\n1,1,1,1,0,1\n")
    assert cli.main(["verify", str(inst), str(trace)]) == 2
    assert "size conservation" in capsys.readouterr().out


def test_cli_corrupted_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert cli.main(["schedule", str(bad)]) == 1
    assert "error" in capsys.readouterr().err
    assert cli.main(["lp", str(tmp_path / "missing.json")]) == 1


def test_cli_curves(tmp_path):
    out = tmp_path / "curves.csv"
    assert cli.main(["curves", "--m-min", "1", "--m-max", "5", "-o", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert len(rows) == 6 and rows[5].split(",")[1] == "5.6"


def test_cli_oracles(tmp_path, capsys):
    items = tmp_path / "items.json"
    items.write_text('[["a", 1, 0.5], ["b", 2, 1.0]]')
    assert cli.main(["oracle", "separate", str(items), "--cores", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["brute_force"]["violation"] == pytest.approx(4.5)
    assert out["prefix"]["set"] == ["a", "b"]

    inst = tmp_path / "tiny.json"
    formats.write_instance(make_instance(1, 1, [
        make_coflow(1, [(1, 1, 1)]), make_coflow(2, [(1, 1, 1)], weight=10),
    ]), inst)
    trace = tmp_path / "opt.csv"
    assert cli.main(["oracle", "exact", str(inst), "--trace", str(trace)]) == 0
    assert capsys.readouterr().out.startswith("optimum 12")
    assert cli.main(["verify", str(inst), str(trace)]) == 0
    assert cli.main(["oracle", "exact", str(inst), "--max-states", "1"]) == 1
