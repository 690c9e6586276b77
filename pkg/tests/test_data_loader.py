import pytest

from src.core import hypothesis_cost
from src.data_loader import IdTable, PairFileLoader, ingest_pairs, ingest_theta, ingest_truth
from src.exceptions import DuplicatePair, ParseError, ProbabilityOutOfRange, UnknownId
from src.result_writer import write_pairs, write_theta


def write(tmp_path, name, *lines):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestIdTable:
    def test_first_appearance_order(self):
        ids = IdTable()
        assert ids.intern("x") == 0
        assert ids.intern("y") == 1
        assert ids.intern("x") == 0
        assert ids.id_of(1) == "y"
        assert "y" in ids
        assert len(ids) == 2

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            IdTable(["a", "a"])


class TestIngestPairs:
    def test_probability_to_cost(self, tmp_path):
        instance, ids = ingest_pairs(write(tmp_path, "pairs.csv", "a,b,0.9", "b,c,0.5"))
        assert ids.ids == ["a", "b", "c"]
        assert instance.theta(0, 1) == pytest.approx(-0.4)
        assert instance.theta(1, 2) == 0.0
        assert instance.theta(0, 2) is None

    def test_bias(self, tmp_path):
        instance, _ = ingest_pairs(write(tmp_path, "pairs.csv", "a,b,0.9"), bias=0.7)
        assert instance.theta(0, 1) == pytest.approx(-0.2)

    def test_header_skipped(self, tmp_path):
        instance, ids = ingest_pairs(write(tmp_path, "pairs.csv", "id1,id2,p", "a,b,0.9"))
        assert len(ids) == 2
        assert instance.n_pairs == 1

    def test_theta_header_accepted_case_insensitively(self, tmp_path):
        instance, ids = ingest_theta(write(tmp_path, "theta.csv", "ID1,Id2,THETA", "a,b,-1.5"))
        assert ids.ids == ["a", "b"]
        assert instance.theta(0, 1) == pytest.approx(-1.5)

    def test_malformed_first_record_is_not_a_header(self, tmp_path):
        with pytest.raises(ParseError) as info:
            ingest_pairs(write(tmp_path, "pairs.csv", "a,b,0.9x", "c,d,0.8"))
        assert info.value.line == 1

    def test_blank_lines_and_whitespace(self, tmp_path):
        instance, ids = ingest_pairs(write(tmp_path, "pairs.csv", "a, b ,0.8", "", "b,c,0.1"))
        assert ids.ids == ["a", "b", "c"]
        assert instance.n_pairs == 2

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        instance, ids = ingest_pairs(path)
        assert instance.n_observations == 0
        assert instance.n_pairs == 0

    def test_missing_field_reports_line(self, tmp_path):
        with pytest.raises(ParseError) as info:
            ingest_pairs(write(tmp_path, "pairs.csv", "a,b,0.9", "b,c"))
        assert info.value.line == 2

    def test_non_numeric_probability(self, tmp_path):
        with pytest.raises(ParseError) as info:
            ingest_pairs(write(tmp_path, "pairs.csv", "a,b,0.9", "b,c,high"))
        assert info.value.line == 2

    def test_probability_out_of_range(self, tmp_path):
        with pytest.raises(ProbabilityOutOfRange):
            ingest_pairs(write(tmp_path, "pairs.csv", "a,b,1.2"))

    @pytest.mark.parametrize("second", ["a,b,0.3", "b,a,0.3"])
    def test_duplicate_pair(self, tmp_path, second):
        with pytest.raises(DuplicatePair) as info:
            ingest_pairs(write(tmp_path, "pairs.csv", "a,b,0.9", second))
        assert info.value.line == 2

    def test_self_pair(self, tmp_path):
        with pytest.raises(ParseError):
            ingest_pairs(write(tmp_path, "pairs.csv", "a,a,0.9"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            ingest_pairs(tmp_path / "nope.csv")


class TestIngestTheta:
    def test_theta_file(self, theta_file):
        instance, ids = ingest_theta(theta_file)
        assert ids.ids == ["d1", "d2", "d3", "d4", "d5"]
        assert hypothesis_cost(instance, [0, 1, 2]) == -600.0
        assert hypothesis_cost(instance, [2, 3, 4]) == -204.0

    def test_infinite_theta_rejected(self, tmp_path):
        with pytest.raises(ParseError):
            ingest_theta(write(tmp_path, "theta.csv", "a,b,inf"))

    def test_theta_writer_round_trip(self, tmp_path, theta_file):
        instance, ids = ingest_theta(theta_file)
        reread, reread_ids = ingest_theta(write_theta(instance, ids, tmp_path / "copy.csv"))
        assert reread_ids.ids == ids.ids
        assert dict(reread.pair_costs) == dict(instance.pair_costs)


def test_pairs_writer_round_trip(tmp_path):
    instance, ids = ingest_pairs(write(tmp_path, "pairs.csv", "a,b,0.9", "b,c,0.25", "c,d,1"))
    reread, reread_ids = ingest_pairs(write_pairs(instance, ids, tmp_path / "copy.csv"))
    assert reread_ids.ids == ids.ids
    assert reread.pair_costs.keys() == instance.pair_costs.keys()
    for pair, value in instance.pair_costs.items():
        assert reread.pair_costs[pair] == pytest.approx(value, abs=1e-12)


class TestIngestTruth:
    def test_ordered_by_instance_ids(self, tmp_path):
        ids = IdTable(["a", "b", "c"])
        truth = ingest_truth(write(tmp_path, "truth.csv", "id,cluster_label", "c,2", "a,1", "b,1"), ids)
        assert list(truth.assignment) == ["a", "b", "c"]
        assert truth.assignment["a"] == truth.assignment["b"] == "1"

    def test_unknown_id(self, tmp_path):
        with pytest.raises(UnknownId):
            ingest_truth(write(tmp_path, "truth.csv", "a,1", "z,1"), IdTable(["a", "b"]))

    def test_duplicate_id(self, tmp_path):
        with pytest.raises(ParseError) as info:
            ingest_truth(write(tmp_path, "truth.csv", "a,1", "a,2"))
        assert info.value.line == 2

    def test_missing_ids_become_singletons(self, tmp_path):
        ids = IdTable(["a", "b", "c", "d"])
        truth = ingest_truth(write(tmp_path, "truth.csv", "a,1", "b,1"), ids)
        assert len(truth) == 4
        assert truth.assignment["c"] != truth.assignment["d"]
        assert sorted(len(cluster) for cluster in truth.clusters()) == [1, 1, 2]

    def test_without_instance(self, tmp_path):
        truth = PairFileLoader().ingest_truth(write(tmp_path, "truth.csv", "x,k1", "y,k2"))
        assert truth.assignment == {"x": "k1", "y": "k2"}
