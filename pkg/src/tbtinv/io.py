"""JSON file formats for symbols, GPairs, complex matrices and reports.

Floats are written with ``repr`` (shortest round-trip decimal), so a
write/read cycle reproduces every double exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .extraction import GPair
from .symbol import TbtSymbol


class FormatError(ValueError):
    """Malformed input file; `location` is a path like ``coeffs[3].re``."""

    def __init__(self, location: str, message: str, source: str | None = None):
        self.location = location
        self.message = message
        self.source = source
        where = f"{source}: " if source else ""
        super().__init__(f"{where}at {location}: {message}")


def _expect(cond, loc, msg):
    if not cond:
        raise FormatError(loc, msg)


def _int(obj, key, loc="", minimum=1):
    _expect(key in obj, loc or "$", f"missing key {key!r}")
    v = obj[key]
    _expect(isinstance(v, int) and not isinstance(v, bool), f"{loc}{key}", "expected an integer")
    _expect(v >= minimum, f"{loc}{key}", f"must be >= {minimum}")
    return v


def _float(v, loc):
    _expect(isinstance(v, (int, float)) and not isinstance(v, bool), loc, "expected a number")
    _expect(np.isfinite(v), loc, "must be finite")
    return float(v)


def _kind(obj, kind):
    _expect(isinstance(obj, dict), "$", "expected a JSON object")
    _expect(obj.get("kind") == kind, "kind", f"expected {kind!r}, got {obj.get('kind')!r}")


def _pair(z):
    return [float(z.real), float(z.imag)]


def matrix_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[_pair(z) for z in row] for row in a]


def matrix_from_json(data, rows: int, cols: int, loc: str = "data") -> np.ndarray:
    _expect(isinstance(data, list) and len(data) == rows, loc, f"expected a list of {rows} rows")
    out = np.empty((rows, cols), dtype=complex)
    for i, row in enumerate(data):
        _expect(isinstance(row, list) and len(row) == cols, f"{loc}[{i}]", f"expected {cols} entries")
        for j, z in enumerate(row):
            zl = f"{loc}[{i}][{j}]"
            _expect(isinstance(z, list) and len(z) == 2, zl, "expected [re, im]")
            out[i, j] = complex(_float(z[0], f"{zl}[0]"), _float(z[1], f"{zl}[1]"))
    return out


def symbol_to_dict(sym: TbtSymbol) -> dict:
    coeffs = []
    for r in range(-(sym.n - 1), sym.n):
        for s in range(-(sym.m - 1), sym.m):
            z = sym.t(r, s)
            coeffs.append({"r": r, "s": s, "re": float(z.real), "im": float(z.imag)})
    return {"kind": "tbt-symbol", "m": sym.m, "n": sym.n, "coeffs": coeffs}


def symbol_from_dict(obj) -> TbtSymbol:
    _kind(obj, "tbt-symbol")
    m, n = _int(obj, "m"), _int(obj, "n")
    _expect(isinstance(obj.get("coeffs"), list), "coeffs", "expected a list")
    arr = np.empty((2 * n - 1, 2 * m - 1), dtype=complex)
    seen = set()
    for k, c in enumerate(obj["coeffs"]):
        loc = f"coeffs[{k}]."
        _expect(isinstance(c, dict), loc[:-1], "expected an object")
        r = _int(c, "r", loc, minimum=-(n - 1))
        s = _int(c, "s", loc, minimum=-(m - 1))
        _expect(r <= n - 1, loc + "r", f"out of range for n={n}")
        _expect(s <= m - 1, loc + "s", f"out of range for m={m}")
        _expect((r, s) not in seen, loc[:-1], f"duplicate pair (r={r}, s={s})")
        seen.add((r, s))
        for key in ("re", "im"):
            _expect(key in c, loc[:-1], f"missing key {key!r}")
        arr[r + n - 1, s + m - 1] = complex(_float(c["re"], loc + "re"), _float(c["im"], loc + "im"))
    missing = (2 * n - 1) * (2 * m - 1) - len(seen)
    _expect(missing == 0, "coeffs", f"{missing} (r, s) pairs missing")
    return TbtSymbol(m, n, arr)


def gpair_to_dict(gp: GPair) -> dict:
    return {"kind": "gpair", "m": gp.m, "n": gp.n, "g12": matrix_to_json(gp.g12)}


def gpair_from_dict(obj) -> GPair:
    _kind(obj, "gpair")
    m, n = _int(obj, "m"), _int(obj, "n")
    _expect("g12" in obj, "$", "missing key 'g12'")
    return GPair(m, n, matrix_from_json(obj["g12"], 2 * m, 2 * n, "g12"))


def cmatrix_to_dict(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"kind": "cmatrix", "rows": a.shape[0], "cols": a.shape[1], "data": matrix_to_json(a)}


def cmatrix_from_dict(obj) -> np.ndarray:
    _kind(obj, "cmatrix")
    rows, cols = _int(obj, "rows"), _int(obj, "cols")
    _expect("data" in obj, "$", "missing key 'data'")
    return matrix_from_json(obj["data"], rows, cols)


def dumps(obj) -> str:
    return json.dumps(obj, allow_nan=False)


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def read_json(path, parser):
    """Load `path` and apply `parser`; errors carry the file name and location."""
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {exc.lineno} column {exc.colno}", exc.msg, str(path)) from exc
    try:
        return parser(obj)
    except FormatError as exc:
        raise FormatError(exc.location, exc.message, str(path)) from exc
    except ValueError as exc:
        raise FormatError("$", str(exc), str(path)) from exc


def read_symbol(path) -> TbtSymbol:
    return read_json(path, symbol_from_dict)


def read_gpair(path) -> GPair:
    return read_json(path, gpair_from_dict)


def read_cmatrix(path) -> np.ndarray:
    return read_json(path, cmatrix_from_dict)


def read_any(path):
    """Read a symbol or GPair file, dispatching on ``kind``."""
    def parse(obj):
        _expect(isinstance(obj, dict), "$", "expected a JSON object")
        kind = obj.get("kind")
        if kind == "tbt-symbol":
            return symbol_from_dict(obj)
        if kind == "gpair":
            return gpair_from_dict(obj)
        raise FormatError("kind", f"expected 'tbt-symbol' or 'gpair', got {kind!r}")

    return read_json(path, parse)
