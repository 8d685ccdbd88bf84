import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vsdk import ParseError, ValidationError, lissajous_nodes
from vsdk import io


def test_nodes_roundtrip_bitwise(tmp_path):
    nodes = lissajous_nodes(7, 8)
    io.write_nodes(tmp_path / "n.csv", nodes)
    np.testing.assert_array_equal(io.read_nodes(tmp_path / "n.csv"), nodes)
    assert (tmp_path / "n.csv").read_text().splitlines()[0] == "x,y"


def test_data_roundtrip(tmp_path):
    nodes = np.array([[0.1, -0.2], [1 / 3, 2 / 7]])
    values = np.array([np.pi, -1e-300])
    io.write_data(tmp_path / "d.csv", nodes, values)
    n, v = io.read_data(tmp_path / "d.csv")
    np.testing.assert_array_equal(n, nodes)
    np.testing.assert_array_equal(v, values)


def test_labels_roundtrip(tmp_path):
    nodes = np.array([[0.0, 0.0], [0.5, 0.5]])
    io.write_labels(tmp_path / "l.csv", nodes, [1, 3])
    assert (tmp_path / "l.csv").read_text().splitlines()[1:] == ["0,0,1", "0.5,0.5,3"]
    n, z = io.read_labels(tmp_path / "l.csv")
    np.testing.assert_array_equal(z, [1, 3])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_values_roundtrip_property(tmp_path_factory, vals):
    path = tmp_path_factory.mktemp("rt") / "v.csv"
    pts = np.zeros((len(vals), 2))
    io.write_values(path, pts, vals)
    _, back = io.read_values(path)
    np.testing.assert_array_equal(back, vals)


def test_parse_error_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y,f\n0,0,1\n0,abc,1\n")
    with pytest.raises(ParseError, match="bad.csv:3"):
        io.read_data(path)
    path.write_text("x,y\n0,0\n")
    with pytest.raises(ParseError, match=":1"):
        io.read_data(path)
    path.write_text("x,y,f\n0,0\n")
    with pytest.raises(ParseError, match=":2"):
        io.read_data(path)


def test_non_finite_rejected(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text("x,y,f\n0,0,nan\n")
    with pytest.raises(ValidationError):
        io.read_data(path)
    with pytest.raises(ValidationError):
        io.write_data(tmp_path / "w.csv", [[0, 0]], [np.inf])
    with pytest.raises(ValidationError):
        io.write_json(tmp_path / "r.json", {"a": [1.0, float("nan")]})


@pytest.mark.parametrize("binary", [True, False])
def test_pgm_constant_image(tmp_path, binary):
    io.write_pgm(tmp_path / "c.pgm", np.full((4, 6), 0.7), binary=binary)
    pixels, display = io.read_pgm(tmp_path / "c.pgm")
    assert pixels.shape == (4, 6)
    assert len(np.unique(pixels)) == 1
    assert display == (0.7, 0.7)


@pytest.mark.parametrize("binary", [True, False])
def test_pgm_quantization(tmp_path, binary):
    image = np.linspace(0, 1, 12).reshape(3, 4)
    io.write_pgm(tmp_path / "q.pgm", image, binary=binary)
    pixels, display = io.read_pgm(tmp_path / "q.pgm")
    assert display == (0.0, 1.0)
    np.testing.assert_array_equal(pixels, np.rint(image * 255))
    head = (tmp_path / "q.pgm").read_bytes()[:2]
    assert head == (b"P5" if binary else b"P2")


def test_pgm_truncated(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(b"P5\n4 4\n255\n\x00\x01")
    with pytest.raises(ParseError):
        io.read_pgm(path)


def test_json_roundtrip_and_parse_error(tmp_path):
    payload = {"slope": 2.5, "pairs": [{"n1": 4, "h": np.float64(0.3)}], "v": np.arange(3)}
    io.write_json(tmp_path / "r.json", payload)
    back = io.read_json(tmp_path / "r.json")
    assert back == {"slope": 2.5, "pairs": [{"n1": 4, "h": 0.3}], "v": [0, 1, 2]}
    (tmp_path / "bad.json").write_text('{\n"a": 1,\n}\n')
    with pytest.raises(ParseError, match="bad.json:3"):
        io.read_json(tmp_path / "bad.json")


def test_atomic_write_leaves_no_temp_files(tmp_path):
    io.atomic_write(tmp_path / "sub" / "f.txt", "hello")
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["f.txt"]
