import json

from src.colgen import integerize, run_cg
from src.data_loader import IdTable
from src.result_writer import ResultWriter, format_summary, iteration_records, summary_record


def test_bare_names_land_in_output_dir(tmp_path, worked_instance):
    writer = ResultWriter(tmp_path / "out")
    ids = IdTable(["a", "b", "c", "d", "e"])
    path = writer.write_theta(worked_instance, ids, "theta.csv")
    assert path == tmp_path / "out" / "theta.csv"
    lines = path.read_bytes().split(b"\n")
    assert lines[0] == b"id1,id2,theta"
    assert b"\r" not in path.read_bytes()


def test_stats_stream(tmp_path, worked_instance):
    result = run_cg(worked_instance)
    clustering = integerize(worked_instance, result.pool, result.doi)
    records = iteration_records(result) + [summary_record(worked_instance, result, clustering)]
    path = ResultWriter().write_stats(records, tmp_path / "stats.jsonl")
    parsed = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]
    assert len(parsed) == result.iterations + 1
    assert parsed[0]["iteration"] == 0
    assert parsed[-1]["clusters"] == 2
    assert parsed[-1]["doi"] == "flexible"
    assert "doi_fallback_iteration" in parsed[-1]


def test_timings_are_opt_in(worked_instance):
    result = run_cg(worked_instance)
    assert "pricing_seconds" not in iteration_records(result)[0]
    assert "pricing_seconds" in iteration_records(result, timings=True)[0]


def test_format_summary(worked_instance):
    result = run_cg(worked_instance)
    clustering = integerize(worked_instance, result.pool, result.doi)
    text = format_summary(summary_record(worked_instance, result, clustering, {"f1": 1.0}, seconds=0.5))
    assert "LP objective:  -800.000000 (exact LP bound)" in text
    assert "Clusters: 2" in text
    assert "f1" in text
    assert "Wall time" in text
