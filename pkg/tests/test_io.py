import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from nvscatter import io
from nvscatter.grid import ComplexField, GridSpec, make_grid
from nvscatter.scattering import KGrid, ScatteringData, evolve_b

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


def test_nvs1_layout():
    g = make_grid(8.0, 8)
    f = ComplexField(g, np.arange(64.0), real=True)
    raw = io.encode_nvs1(f)
    assert raw[:4] == b"NVS1" and len(raw) == 17 + 8 * 64
    assert raw[16] == 0
    c = ComplexField(g, np.arange(64.0) * 1j)
    raw = io.encode_nvs1(c)
    assert raw[16] == 1 and len(raw) == 17 + 16 * 64


def test_nvb1_layout_and_time():
    s = ScatteringData(KGrid(2.0, 4), np.arange(16) * (1 + 1j))
    s = evolve_b(s, 0.5)
    raw = io.encode_nvb1(s)
    assert raw[:4] == b"NVB1" and len(raw) == 24 + 16 * 16
    back = io.decode_nvb1(raw)
    assert back.t == 0.5
    assert np.allclose(back.b, s.b, rtol=1e-14)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (8, 8), elements=finite), arrays(np.float64, (8, 8), elements=finite))
def test_nvs1_roundtrip(re, im):
    f = ComplexField(GridSpec(3.0, 8), re + 1j * im)
    back = io.decode_nvs1(io.encode_nvs1(f))
    assert np.array_equal(back.values, f.values)
    assert back.grid == f.grid


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-1e6, 1e6)),
       arrays(np.float64, (4, 4), elements=st.floats(-1e6, 1e6)))
def test_csv_is_lossless(re, im):
    s = ScatteringData(KGrid(2.0, 4), re + 1j * im)
    raw = io.encode_nvb1(s)
    text = io.export_csv(raw)
    assert io.binary_from_csv(text) == raw
    assert io.export_csv(io.binary_from_csv(text)) == text
    f = ComplexField(GridSpec(8.0, 4, ), re + 1j * im)
    raw = io.encode_nvs1(f)
    assert io.binary_from_csv(io.export_csv(raw)) == raw


def test_zero_field_csv():
    g = make_grid(8.0, 8)
    text = io.export_csv(io.encode_nvs1(ComplexField(g, np.zeros((8, 8)), real=True)))
    lines = text.splitlines()
    assert lines[0] == "# NVS1 N=8 L=8 kind=0"
    assert lines[1] == "x1,x2,re,im"
    assert len(lines) == 2 + 64
    assert all(l.split(",")[2:] == ["0", "0"] for l in lines[2:])


def test_nvb1_csv_node_order():
    kg = KGrid(2.0, 4)
    s = ScatteringData(kg, np.arange(16.0))
    rows = io.data_csv(s).splitlines()
    assert rows[1] == "kre,kim,bre,bim"
    for row, k, b in zip(rows[2:], kg.nodes(), np.arange(16.0)):
        kre, kim, bre, bim = map(float, row.split(","))
        assert complex(kre, kim) == k and bre == b and bim == 0


def test_malformed_inputs():
    with pytest.raises(io.FormatError):
        io.decode_nvs1(b"NVB1" + bytes(20))
    with pytest.raises(io.FormatError):
        io.decode_nvs1(io.encode_nvs1(ComplexField(make_grid(8.0, 8), np.zeros(64)))[:-1])
    with pytest.raises(io.FormatError):
        io.decode_nvb1(b"NVB1" + bytes(3))
    with pytest.raises(io.FormatError):
        io.export_csv(b"JUNKJUNK")
    with pytest.raises(io.FormatError):
        io.binary_from_csv("x1,x2\n")
    bad = bytearray(io.encode_nvs1(ComplexField(make_grid(8.0, 8), np.zeros(64))))
    bad[16] = 7
    with pytest.raises(io.FormatError):
        io.decode_nvs1(bytes(bad))


def test_files(tmp_path):
    f = ComplexField(make_grid(8.0, 8), np.ones(64), real=True)
    io.write_field(tmp_path / "f.nvs1", f)
    assert np.array_equal(io.read_field(tmp_path / "f.nvs1").values, f.values)
    s = ScatteringData(KGrid(2.0, 4), np.ones(16))
    io.write_data(tmp_path / "b.nvb1", s)
    assert np.array_equal(io.read_data(tmp_path / "b.nvb1").b0, s.b0)
