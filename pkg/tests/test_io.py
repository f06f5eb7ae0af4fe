import numpy as np
import pytest

from chanpred import io
from chanpred.errors import DataFormatError
from chanpred.networks import NetworkConfig, NetworkKind, TrainingSet, predict, train
from chanpred.pipeline import ChannelTrace, LsfSeries, TransferFunctionRecord
from chanpred.synthetic import SyntheticParams, generate_trace, generate_transfer_functions


def test_trace_round_trip_is_exact(tmp_path):
    tr = generate_trace(SyntheticParams(n_points=200, seed=1))
    io.write_trace(tmp_path / "t.csv", tr)
    back = io.read_trace(tmp_path / "t.csv")
    np.testing.assert_array_equal(back.distances_m, tr.distances_m)
    np.testing.assert_array_equal(back.pl_db, tr.pl_db)


def test_trace_with_source_column_still_reads(tmp_path):
    io.write_trace(tmp_path / "p.csv", [1.0, 2.0, 3.0], [90.0, 91.0, 92.0],
                   source=["measured", "predicted", "measured"])
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "distance_m,pl_db,source"
    assert lines[2].endswith(",predicted")
    assert io.read_trace(tmp_path / "p.csv").pl_db.tolist() == [90.0, 91.0, 92.0]


@pytest.mark.parametrize("content, needle", [
    ("d,pl\n1,2\n", "header"),
    ("distance_m,pl_db\n1,2\n2,x\n", ":3"),
    ("distance_m,pl_db\n1,2\n3,4\n4,5\n", "spacing"),
    ("", "header"),
])
def test_trace_reader_diagnostics(tmp_path, content, needle):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(DataFormatError, match=needle):
        io.read_trace(path)


def test_trace_reader_missing_file(tmp_path):
    with pytest.raises(DataFormatError):
        io.read_trace(tmp_path / "nope.csv")


@pytest.mark.parametrize("suffix", [".csv", ".npz"])
def test_transfer_function_round_trip(tmp_path, suffix):
    p = SyntheticParams(n_points=12, n_f=8, seed=2)
    recs = generate_transfer_functions(generate_trace(p), p)
    path = tmp_path / f"tf{suffix}"
    io.write_transfer_functions(path, recs)
    back = io.read_transfer_functions(path)
    assert len(back) == len(recs)
    for a, b in zip(recs, back):
        assert a.distance_m == b.distance_m
        np.testing.assert_array_equal(a.response, b.response)


def test_inconsistent_tone_count_reports_row(tmp_path):
    recs = [TransferFunctionRecord(1.0, [1 + 1j, 2]), TransferFunctionRecord(2.0, [1j, 1, 1]),
            TransferFunctionRecord(3.0, [1, 1])]
    path = tmp_path / "tf.csv"
    io.write_transfer_functions(path, recs)
    with pytest.raises(DataFormatError, match=r"tf\.csv:3: n_f=3 differs"):
        io.read_transfer_functions(path)


def test_tone_count_must_match_values(tmp_path):
    path = tmp_path / "tf.csv"
    path.write_text("distance_m,n_f\n1.0,2,1,0,1\n")
    with pytest.raises(DataFormatError, match=":2:"):
        io.read_transfer_functions(path)


def test_empty_transfer_function_file(tmp_path):
    path = tmp_path / "tf.csv"
    path.write_text("distance_m,n_f\n")
    with pytest.raises(DataFormatError):
        io.read_transfer_functions(path)


def test_model_file_round_trip(tmp_path):
    d = 50 + 1.42 * np.arange(40)
    model = train(TrainingSet(d, 30 + 35 * np.log10(d)), NetworkConfig(NetworkKind.RBF, 6))
    io.save_model(tmp_path / "m.json", model)
    back = io.load_model(tmp_path / "m.json")
    np.testing.assert_allclose(predict(back, d), predict(model, d), rtol=1e-12)


def test_model_loader_rejects_garbage(tmp_path):
    (tmp_path / "m.json").write_text("{not json")
    with pytest.raises(DataFormatError):
        io.load_model(tmp_path / "m.json")
    with pytest.raises(DataFormatError):
        io.load_model(tmp_path / "missing.json")


def test_plot_data_and_lsf_files(tmp_path):
    io.write_plot_data(tmp_path / "a.dat", [1, 2], [0.5, 0.25], header=("m", "rmse"))
    assert (tmp_path / "a.dat").read_text() == "# m rmse\n1.0 0.5\n2.0 0.25\n"
    io.write_lsf(tmp_path / "l.csv", LsfSeries(np.array([1.0]), np.array([-0.5])))
    assert (tmp_path / "l.csv").read_text() == "distance_m,x_sigma_db\n1.0,-0.5\n"


def test_reader_does_not_touch_input(tmp_path):
    tr = ChannelTrace([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    io.write_trace(tmp_path / "t.csv", tr)
    before = (tmp_path / "t.csv").read_bytes()
    io.read_trace(tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_bytes() == before
