"""Plain-text record format for kets and operators.

Grammar (one item per line, ``#`` lines are comments and ignored)::

    edgecert-matrix 1
    kind: ket | operator
    locals: <int> <int> ...
    cut: <int> | none
    data:
    <row>
    ...

A ket has one row per amplitude, each row ``re im``.  An operator has one
row per matrix row, each holding ``n`` consecutive ``re im`` pairs.  Numbers
are written with 17 significant digits, so every IEEE double round-trips
exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .tensor_core import HilbertDims, Ket, Operator

MAGIC = "edgecert-matrix 1"


class MatrixFormatError(ValueError):
    pass


def _fmt(z: complex) -> str:
    return f"{z.real:.17g} {z.imag:.17g}"


def dumps(obj: Ket | Operator) -> str:
    if isinstance(obj, Ket):
        kind, rows = "ket", [_fmt(z) for z in obj.amplitudes]
    elif isinstance(obj, Operator):
        kind, rows = "operator", [" ".join(_fmt(z) for z in row) for row in obj.entries]
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    cut = "none" if obj.dims.cut is None else str(obj.dims.cut)
    header = [
        MAGIC,
        f"kind: {kind}",
        "locals: " + " ".join(str(d) for d in obj.dims.locals),
        f"cut: {cut}",
        "data:",
    ]
    return "\n".join(header + rows) + "\n"


def loads(text: str) -> Ket | Operator:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != MAGIC:
        raise MatrixFormatError("missing 'edgecert-matrix 1' header")
    fields = {}
    i = 1
    while i < len(lines) and lines[i] != "data:":
        key, sep, value = lines[i].partition(":")
        if not sep:
            raise MatrixFormatError(f"malformed header line {lines[i]!r}")
        fields[key.strip()] = value.strip()
        i += 1
    if i == len(lines):
        raise MatrixFormatError("missing 'data:' section")
    for key in ("kind", "locals", "cut"):
        if key not in fields:
            raise MatrixFormatError(f"missing field {key!r}")
    try:
        locs = tuple(int(t) for t in fields["locals"].split())
        cut = None if fields["cut"] == "none" else int(fields["cut"])
        rows = [[float(t) for t in ln.split()] for ln in lines[i + 1:]]
    except ValueError as exc:
        raise MatrixFormatError(str(exc)) from exc
    dims = HilbertDims(locs, cut)
    n = dims.total
    if fields["kind"] == "ket":
        if len(rows) != n or any(len(r) != 2 for r in rows):
            raise MatrixFormatError(f"ket data must be {n} rows of 're im'")
        amp = np.array([complex(r[0], r[1]) for r in rows])
        return Ket(amp, dims)
    if fields["kind"] == "operator":
        if len(rows) != n or any(len(r) != 2 * n for r in rows):
            raise MatrixFormatError(f"operator data must be {n} rows of {n} 're im' pairs")
        arr = np.array(rows).reshape(n, n, 2)
        mat = arr[..., 0] + 1j * arr[..., 1]
        hermitian = bool(np.array_equal(mat, mat.conj().T)) or np.max(np.abs(mat - mat.conj().T)) <= 1e-12
        return Operator(mat, dims, hermitian=hermitian)
    raise MatrixFormatError(f"unknown kind {fields['kind']!r}")


def save(obj: Ket | Operator, path) -> None:
    Path(path).write_text(dumps(obj))


def load(path) -> Ket | Operator:
    return loads(Path(path).read_text())
