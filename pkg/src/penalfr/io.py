"""CSV tables, field snapshots and checksummed checkpoints."""
import csv
import hashlib
import io
import json
import os
import zipfile

import numpy as np

CHECKPOINT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    if v is None:
        return ""
    return str(v)


def write_csv(path, columns, rows):
    """Header plus rows, 17 significant digits, LF line endings.

    ``rows`` is an iterable of sequences, or a mapping of column -> sequence.
    """
    columns = list(columns)
    if isinstance(rows, dict):
        cols = [rows[c] for c in columns]
        n = {len(c) for c in cols}
        if len(n) > 1:
            raise ValueError("columns have different lengths")
        rows = zip(*cols)
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            r = list(r)
            if len(r) != len(columns):
                raise ValueError(f"row has {len(r)} fields, header has {len(columns)}")
            w.writerow([_fmt(v) for v in r])
    return path


def read_csv(path):
    """(columns, rows) with numeric fields converted to float where possible."""
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        columns = next(r)
        rows = []
        for rec in r:
            out = []
            for v in rec:
                try:
                    out.append(float(v))
                except ValueError:
                    out.append(v)
            rows.append(out)
    return columns, rows


def write_snapshot(path, mesh, U, t):
    """Field snapshot as .npz: X, Y (ney, nex, n, n), U (4, ney, nex, n, n), t."""
    X, Y = mesh.points()
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    np.savez(path, X=X, Y=Y, U=U, t=np.float64(t), x_edges=mesh.x_edges, y_edges=mesh.y_edges)
    return path


def _digest(arrays):
    h = hashlib.sha256()
    for name in sorted(arrays):
        a = np.ascontiguousarray(arrays[name])
        h.update(name.encode())
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def checkpoint(path, U, sfd_state, step, t, mesh_hash, history=None):
    """Write a restartable state. Floats are stored as raw binary, so a resumed run is bit-exact."""
    arrays = {"U": np.asarray(U, dtype=float)}
    if sfd_state is not None:
        arrays["q"] = np.asarray(sfd_state.q, dtype=float)
        arrays["q_bar"] = np.asarray(sfd_state.q_bar, dtype=float)
    if history:
        for k, v in history.items():
            arrays[f"history/{k}"] = np.asarray(v, dtype=float)
    meta = {
        "version": CHECKPOINT_VERSION,
        "step": int(step),
        "t": float(t).hex(),
        "mesh_hash": mesh_hash,
        "history_keys": list(history) if history else [],
        "checksum": _digest(arrays),
    }
    buf = io.BytesIO()
    np.savez(buf, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(buf.getvalue())
    os.replace(tmp, path)
    return path


def restore(path, expected_mesh_hash=None):
    """Read a checkpoint; returns dict(U, sfd_state, step, t, history)."""
    from .sfd import SfdState

    try:
        with np.load(path, allow_pickle=False) as z:
            data = {k: z[k] for k in z.files}
    except (OSError, ValueError, zipfile.BadZipFile, EOFError) as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    if "meta" not in data:
        raise CheckpointError("checkpoint has no metadata")
    meta = json.loads(data.pop("meta").tobytes().decode())
    if meta.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"checkpoint version {meta.get('version')} != {CHECKPOINT_VERSION}")
    if _digest(data) != meta["checksum"]:
        raise CheckpointError("checksum mismatch: checkpoint is corrupted")
    if expected_mesh_hash is not None and meta["mesh_hash"] != expected_mesh_hash:
        raise CheckpointError("mesh hash mismatch: checkpoint belongs to a different mesh")
    sfd_state = SfdState(q=data["q"], q_bar=data["q_bar"]) if "q" in data else None
    history = None
    if meta["history_keys"]:
        history = {k: data[f"history/{k}"].tolist() for k in meta["history_keys"]}
        for k in ("step",):
            if k in history:
                history[k] = [int(v) for v in history[k]]
    return {
        "U": data["U"],
        "sfd_state": sfd_state,
        "step": meta["step"],
        "t": float.fromhex(meta["t"]),
        "history": history,
        "mesh_hash": meta["mesh_hash"],
    }
