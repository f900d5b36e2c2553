import json
import struct

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from sidlab import io
from sidlab.climit import hamiltonian_flow, oscillator
from sidlab.diagonal import DiagonalState
from sidlab.errors import ExportError
from sidlab.phase_space import make_chart
from sidlab.phase_space.chart import PhaseSpaceFunction
from sidlab.phase_space.wigner import OperatorKernel, position_grid
from sidlab.spectral import make_grid


def test_diagonal_csv_header_and_rows(tmp_path):
    gw, gp = make_grid((0, 1), 3), make_grid((0.5, 1.0), 2, label="p")
    diag = DiagonalState(gw, gp, np.arange(6.0).reshape(3, 2))
    header, data = io.read_csv(io.write_diagonal_csv(diag, tmp_path / "d.csv"))
    assert header == ["omega", "p", "rho"]
    assert data.shape == (6, 3)
    assert data[3].tolist() == [0.5, 1.0, 3.0]
    assert (tmp_path / "d.csv").read_text().splitlines()[0] == "omega,p,rho"


def test_trace_and_trajectory_csv(tmp_path):
    header, data = io.read_csv(io.write_trace_csv([0.0, 1.0], [1 + 1j, 0.5j], tmp_path / "t.csv"))
    assert header == ["t", "re", "im", "modulus"]
    assert data[0].tolist() == [0.0, 1.0, 1.0, np.sqrt(2)]
    tr = hamiltonian_flow(oscillator(), [0.0, 1.0], 0.01)
    header, data = io.read_csv(io.write_trajectory_csv(tr, tmp_path / "tr.csv"))
    assert header == ["t", "q1", "p1"]
    assert_array_equal(data[:, 1:], tr.points)


def test_phase_space_csv_real_and_complex(tmp_path):
    chart = make_chart(1, (-1, 1), (-1, 1), 4)
    f = PhaseSpaceFunction(chart, np.ones((4, 4)), 1.0)
    assert io.read_csv(io.write_phase_space_csv(f, tmp_path / "r.csv"))[0] == ["q", "p", "value"]
    g = f.with_values(1j * np.ones((4, 4)))
    header, data = io.read_csv(io.write_phase_space_csv(g, tmp_path / "c.csv"))
    assert header == ["q", "p", "value_re", "value_im"] and data.shape == (16, 4)


def test_binary_layout_is_little_endian(tmp_path):
    chart = make_chart(1, (-1, 1), (-1, 1), 3)
    vals = (np.arange(9) + 0.5j * np.arange(9)).reshape(3, 3)
    path = io.save_phase_space_function(PhaseSpaceFunction(chart, vals, 1.0), tmp_path / "f.psf")
    raw = path.read_bytes()
    assert raw[:4] == b"PSF1"
    assert struct.unpack("<I", raw[4:8]) == (2,)
    assert struct.unpack("<2Q", raw[8:24]) == (3, 3)
    assert len(raw) == 24 + 9 * 8
    assert_array_equal(np.frombuffer(raw[24:], "<c8"), vals.ravel().astype(np.complex64))
    magic, arr = io.read_array(path)
    assert magic == b"PSF1" and arr.shape == (3, 3)


def test_kernel_files(tmp_path):
    K = OperatorKernel(position_grid(1.0, 4), np.eye(4) * (1 + 2j))
    path = io.save_kernel(K, tmp_path / "k.krn")
    assert path.read_bytes()[:4] == b"KRN1"
    assert_array_equal(io.load_kernel(path), K.matrix.astype(np.complex64))
    io.write_array(np.zeros(2), tmp_path / "z.psf")
    with pytest.raises(ExportError):
        io.load_kernel(tmp_path / "z.psf")


def test_bad_files_name_the_path(tmp_path):
    bad = tmp_path / "bad.psf"
    bad.write_bytes(b"NOPE1234")
    with pytest.raises(ExportError, match="bad.psf"):
        io.read_array(bad)
    short = tmp_path / "short.psf"
    short.write_bytes(b"PSF1" + struct.pack("<I", 1) + struct.pack("<Q", 10) + b"\0" * 8)
    with pytest.raises(ExportError, match="payload"):
        io.read_array(short)
    with pytest.raises(ExportError):
        io.write_array(np.zeros(2), tmp_path / "x.bin", magic=b"XXXX")
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ExportError, match="file"):
        io.write_json({}, blocker / "sub" / "r.json")


def test_json_round_trip(tmp_path):
    obj = {"a": np.float64(0.1), "b": np.arange(3), "c": 1 + 2j, "d": [np.bool_(True), None],
           "e": float("nan")}
    path = io.write_json(obj, tmp_path / "r.json")
    back = io.read_json(path)
    assert back == {"a": 0.1, "b": [0, 1, 2], "c": {"re": 1.0, "im": 2.0}, "d": [True, None], "e": "nan"}
    assert json.loads(io.dumps_json(back)) == back
