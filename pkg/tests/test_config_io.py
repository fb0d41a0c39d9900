import os

import numpy as np
import pytest

from penalfr import config, io, runners
from penalfr.sfd import SfdState


def test_defaults():
    cfg = config.parse_config("version: 1\nmode: advect\n")
    assert cfg.advect.N == 40 and cfg.advect.P == 3
    assert cfg.ns2d.scheme == "lserk"


@pytest.mark.parametrize("text", ["", "{}\n"])
def test_empty_file_lists_required_keys(text):
    with pytest.raises(config.ConfigError, match="version, mode"):
        config.parse_config(text)


def test_missing_key_named():
    with pytest.raises(config.ConfigError, match="mode"):
        config.parse_config("version: 1\n")


def test_syntax_error_reports_line():
    with pytest.raises(config.ConfigError) as exc:
        config.parse_config("version: 1\nmode: advect\nadvect:\n  N: [1, 2\n  P: 3\n")
    assert exc.value.line is not None and exc.value.line >= 4


def test_unknown_key_rejected_with_path():
    with pytest.raises(config.ConfigError) as exc:
        config.parse_config("version: 1\nmode: advect\nadvect:\n  Q: 3\n")
    assert exc.value.key == "advect.Q"


@pytest.mark.parametrize("body,key", [
    ("mode: advect\nadvect:\n  dt: -1.0\n", "advect.dt"),
    ("mode: eigen-full\n", "eigen.dt"),
    ("mode: weird\n", "mode"),
    ("mode: ns2d\nns2d:\n  case: vortex\n  mesh:\n    preset: coarse\n", "ns2d.mesh.preset"),
    ("mode: ns2d\nns2d:\n  case: cylinder\n  mesh:\n    preset: fine\n", "ns2d.mesh.preset"),
    ("mode: ns2d\nns2d:\n  scheme: euler\n", "ns2d.scheme"),
])
def test_invalid_values(body, key):
    with pytest.raises(config.ConfigError) as exc:
        config.parse_config("version: 1\n" + body)
    assert exc.value.key == key


def test_wrong_version():
    with pytest.raises(config.ConfigError):
        config.parse_config("version: 2\nmode: advect\n")


def test_roundtrip_parse_emit_parse():
    text = ("version: 1\nmode: ns2d\nns2d:\n  case: naca0012\n  P: 3\n  ibm:\n    eta: 0.01\n"
            "  mesh:\n    preset: fine\n  probes: [[0.1, 0.2]]\n")
    a = config.parse_config(text)
    b = config.parse_config(config.emit_config(a))
    assert a == b
    assert config.emit_config(a) == config.emit_config(b)


def test_sweep_parsing():
    s = config.parse_sweep("eta: [0.001, null]\nchi_f: [10]\n")
    assert s.eta == [0.001, None] and s.chi_f == [10.0]
    with pytest.raises(config.ConfigError):
        config.parse_sweep("bogus: 1\n")


def test_csv_header_only_and_exact_readback(tmp_path):
    p = tmp_path / "empty.csv"
    io.write_csv(p, ("a", "b"), [])
    assert p.read_bytes() == b"a,b\n"
    vals = [0.1, 1 / 3, -2.5e-300, 123456789.123456789, np.pi]
    p = tmp_path / "v.csv"
    io.write_csv(p, ("x", "tag"), [(v, "s") for v in vals])
    cols, rows = io.read_csv(p)
    assert cols == ["x", "tag"]
    assert [r[0] for r in rows] == vals  # bitwise
    assert b"\r" not in p.read_bytes()
    with pytest.raises(ValueError):
        io.write_csv(tmp_path / "bad.csv", ("a",), [(1, 2)])


def _ckpt(tmp_path, **kw):
    U = np.random.default_rng(0).standard_normal((4, 2, 2, 3, 3))
    st = SfdState(q=np.arange(4.0), q_bar=np.ones(4))
    path = str(tmp_path / "c.npz")
    io.checkpoint(path, U, st, 7, 0.1 + 0.2, "abc", {"step": [1, 2], "cl": [0.5, 0.25]})
    return path, U


def test_checkpoint_roundtrip(tmp_path):
    path, U = _ckpt(tmp_path)
    r = io.restore(path, "abc")
    np.testing.assert_array_equal(r["U"], U)
    assert r["step"] == 7 and r["t"] == 0.1 + 0.2
    np.testing.assert_array_equal(r["sfd_state"].q_bar, 1.0)
    assert r["history"] == {"step": [1, 2], "cl": [0.5, 0.25]}


def test_checkpoint_mesh_mismatch(tmp_path):
    path, _ = _ckpt(tmp_path)
    with pytest.raises(io.CheckpointError, match="mesh"):
        io.restore(path, "other")


def test_checkpoint_corruption_detected(tmp_path):
    path, U = _ckpt(tmp_path)
    with np.load(path) as z:
        data = {k: z[k] for k in z.files}
    data["U"] = data["U"] + 1e-15
    np.savez(path, **data)
    with pytest.raises(io.CheckpointError, match="checksum"):
        io.restore(path)
    with open(path, "wb") as fh:
        fh.write(b"garbage")
    with pytest.raises(io.CheckpointError):
        io.restore(path)


def test_checkpoint_version_checked(tmp_path, monkeypatch):
    path, _ = _ckpt(tmp_path)
    monkeypatch.setattr(io, "CHECKPOINT_VERSION", 99)
    with pytest.raises(io.CheckpointError, match="version"):
        io.restore(path)


CYL = """version: 1
mode: ns2d
ns2d:
  case: cylinder
  dt: 0.001
  t_final: {t}
  mesh:
    preset: reduced
    size: 0.2
    stretch: [1.3, 1.3]
  ibm:
    eta: 0.01
    chi_f: 100.0
  output:
    record_every: 1
    checkpoint_every: 5
"""


def test_resumed_run_is_bitwise_identical(tmp_path):
    cfg = config.parse_config(CYL.format(t=0.01))
    full = tmp_path / "full"
    runners.run_ns2d(cfg, str(full))
    first = tmp_path / "first"
    runners.run_ns2d(config.parse_config(CYL.format(t=0.005)), str(first))
    resumed = tmp_path / "resumed"
    sim = runners.run_ns2d(cfg, str(resumed), resume=str(first / "checkpoint_final.npz"))
    a = io.restore(str(full / "checkpoint_final.npz"))
    b = io.restore(str(resumed / "checkpoint_final.npz"))
    assert sim.step == 10
    assert np.max(np.abs(a["U"] - b["U"])) == 0.0
    np.testing.assert_array_equal(a["sfd_state"].q_bar, b["sfd_state"].q_bar)
    assert a["history"] == b["history"]
    assert (full / "forces.csv").read_bytes() == (resumed / "forces.csv").read_bytes()
    assert os.path.exists(full / "checkpoint_00000005.npz")


def test_resume_rejects_other_mesh(tmp_path):
    cfg = config.parse_config(CYL.format(t=0.002))
    runners.run_ns2d(cfg, str(tmp_path / "a"))
    other = config.parse_config(CYL.format(t=0.004).replace("size: 0.2", "size: 0.25"))
    with pytest.raises(io.CheckpointError):
        runners.run_ns2d(other, str(tmp_path / "b"), resume=str(tmp_path / "a" / "checkpoint_final.npz"))
