import numpy as np
import pytest

from depbound.core import ObservedData
from depbound.io import DataFormatError, load_data, read_edges, read_outcomes, write_edges, write_outcomes


def write(path, text):
    path.write_text(text)
    return path


def test_roundtrip(tmp_path):
    data = ObservedData([0.1, 2.5, -3.0], [1, 2, 9], ((0, 1), (1, 2)), ("a", "b", "c"))
    write_outcomes(tmp_path / "o.csv", data)
    write_edges(tmp_path / "e.csv", data)
    back = load_data(tmp_path / "o.csv", tmp_path / "e.csv")
    assert back.ids == data.ids
    assert np.array_equal(back.outcomes, data.outcomes)
    assert np.array_equal(back.degrees, data.degrees)
    assert set(back.observed_edges) == set(data.observed_edges)


def test_missing_edges_file_is_empty(tmp_path):
    o = write(tmp_path / "o.csv", "id,x,d\n1,0,1\n2,1,1\n")
    e = write(tmp_path / "e.csv", "id_i,id_j\n")
    assert load_data(o).observed_edges == load_data(o, e).observed_edges == ()


def test_tab_delimiter(tmp_path):
    o = write(tmp_path / "o.tsv", "id\tx\td\nu\t1.5\t2\nv\t0\t0\n")
    ids, xs, ds = read_outcomes(o)
    assert ids == ["u", "v"] and xs == [1.5, 0.0] and ds == [2, 0]


def test_absent_degrees_use_global_bound(tmp_path, caplog):
    o = write(tmp_path / "o.csv", "id,x\n1,0\n2,1\n3,1\n")
    data = load_data(o)
    assert data.degrees.tolist() == [2, 2, 2]
    assert "n-1" in caplog.text
    assert load_data(o, global_degree_bound=7).degrees.tolist() == [7, 7, 7]


@pytest.mark.parametrize("text, line", [
    ("id,x,d\n1,0,1\n2,abc,1\n", 3),
    ("id,x,d\n1,0,1\n1,0,1\n", 3),
    ("id,x,d\n1,0,-1\n", 2),
    ("id,x,d\n1,0\n", 2),
    ("id,y\n1,0\n", 1),
    ("id,x,d\n1,nan,1\n", 2),
])
def test_outcome_errors_carry_line(tmp_path, text, line):
    with pytest.raises(DataFormatError) as exc:
        read_outcomes(write(tmp_path / "o.csv", text))
    assert exc.value.line == line
    assert f":{line}:" in str(exc.value)


def test_edge_errors(tmp_path):
    ids = ["a", "b"]
    with pytest.raises(DataFormatError, match="unknown id"):
        read_edges(write(tmp_path / "e.csv", "id_i,id_j\na,z\n"), ids)
    with pytest.raises(DataFormatError, match="self-loop"):
        read_edges(write(tmp_path / "e.csv", "id_i,id_j\na,a\n"), ids)


def test_duplicate_edges_dropped(tmp_path, caplog):
    e = write(tmp_path / "e.csv", "id_i,id_j\na,b\nb,a\n")
    assert read_edges(e, ["a", "b"]) == [(0, 1)]
    assert "duplicate" in caplog.text
