"""JSON encodings shared by the CLI and the file formats.

A complex matrix is a list of rows whose entries are two-element
[re, im] lists of doubles; a channel file is
{"dim": N, "kraus": [matrix, ...]}. Report writers emit sorted keys so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channels import KrausMap
from .errors import PreconditionError
from .operators import as_operator


def complex_pair(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def matrix_to_json(mat: np.ndarray) -> list:
    return [[complex_pair(entry) for entry in row] for row in np.asarray(mat, dtype=complex)]


def matrix_from_json(obj, name: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise PreconditionError(f"{name}: expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != len(obj):
            raise PreconditionError(
                f"{name}: row {i} has {len(row) if isinstance(row, list) else 'no'} "
                f"entries, expected {len(obj)} (square matrix)"
            )
        entries = []
        for j, entry in enumerate(row):
            if (not isinstance(entry, list) or len(entry) != 2
                    or not all(isinstance(v, (int, float)) for v in entry)):
                raise PreconditionError(
                    f"{name}: entry [{i}][{j}] must be a two-element [re, im] list"
                )
            entries.append(complex(entry[0], entry[1]))
        rows.append(entries)
    return as_operator(np.array(rows, dtype=complex), name)


def channel_to_json(channel: KrausMap) -> dict:
    return {"dim": channel.dim, "kraus": [matrix_to_json(a) for a in channel.kraus]}


def channel_from_json(obj) -> KrausMap:
    if not isinstance(obj, dict):
        raise PreconditionError("channel file: expected a JSON object")
    if "dim" not in obj or not isinstance(obj["dim"], int):
        raise PreconditionError("channel file: field 'dim' must be an integer")
    if "kraus" not in obj or not isinstance(obj["kraus"], list) or not obj["kraus"]:
        raise PreconditionError("channel file: field 'kraus' must be a non-empty list")
    ops = [matrix_from_json(mat, f"kraus[{i}]") for i, mat in enumerate(obj["kraus"])]
    for i, a in enumerate(ops):
        if a.shape[0] != obj["dim"]:
            raise PreconditionError(
                f"channel file: kraus[{i}] is {a.shape[0]}x{a.shape[1]} "
                f"but dim is {obj['dim']}"
            )
    return KrausMap(ops)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def save_json(path, obj) -> None:
    Path(path).write_text(dump_json(obj))


def load_json(path, what: str = "input"):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PreconditionError(f"cannot read {what} file {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"{what} file {path} is not valid JSON: {exc}") from exc


def load_channel(path) -> KrausMap:
    return channel_from_json(load_json(path, "channel"))


def save_channel(path, channel: KrausMap) -> None:
    save_json(path, channel_to_json(channel))


def load_operator(path, name: str = "operator") -> np.ndarray:
    return matrix_from_json(load_json(path, name), name)


def save_operator(path, mat: np.ndarray) -> None:
    save_json(path, matrix_to_json(mat))


def spectrum_report(data) -> dict:
    return {
        "eigenvalues": [complex_pair(w) for w in data.eigenvalues],
        "peripheral": [
            {"lambda": complex_pair(c.eigenvalue), "multiplicity": c.multiplicity}
            for c in data.peripheral_clusters
        ],
    }


def attractor_report(basis, residuals: dict | None = None) -> dict:
    return {
        "entries": [
            {
                "lambda": complex_pair(e.eigenvalue),
                "X": matrix_to_json(e.vector),
                "X_dual": matrix_to_json(e.dual),
            }
            for e in basis.entries
        ],
        "route": basis.route,
        "residuals": residuals or {},
    }


def invariant_state_report(result) -> dict:
    return {
        "state": matrix_to_json(result.state),
        "residual": result.residual,
        "support_dim": result.support_dim,
        "strictly_positive": result.strictly_positive,
    }
