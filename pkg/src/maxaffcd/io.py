"""Readers and writers for instance, model and trace files."""
from __future__ import annotations

import csv
import json
import math
from decimal import Decimal
from pathlib import Path

from ._numeric import NumericMode, converter, format_number
from .maxaff import MaxAffInstance
from .mrf import PairwiseModel


class ParseError(ValueError):
    """Malformed input, with a position (``line``/``column`` or a JSON path)."""

    def __init__(self, reason, line=None, column=None, path=None, source=None):
        self.reason = reason
        self.line = line
        self.column = column
        self.path = path
        self.source = source
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}" + (f", column {column}" if column is not None else ""))
        if path:
            where.append(path)
        super().__init__(f"{': '.join(where) + ': ' if where else ''}{reason}")


def _read(path):
    return Path(path).read_text(encoding="utf-8"), str(path)


# -- max-of-affine JSON ---------------------------------------------------

def loads_maxaff(text, mode="float", source=None):
    """Parse the JSON instance format; returns ``(instance, x0)``."""
    mode = NumericMode.coerce(mode)
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, source=source) from None
    conv = converter(mode)

    def num(value, path):
        if isinstance(value, bool) or not isinstance(value, (int, Decimal, str)):
            raise ParseError("expected a number or decimal string", path=path, source=source)
        try:
            return conv(value)
        except (ValueError, TypeError) as exc:
            raise ParseError(str(exc), path=path, source=source) from None

    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", source=source)
    for key in ("m", "n", "rows"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}", path="$", source=source)
    m, n, rows = doc["m"], doc["n"], doc["rows"]
    if not isinstance(m, int) or not isinstance(n, int) or m < 1 or n < 0:
        raise ParseError("m and n must be non-negative integers (m >= 1)", path="$", source=source)
    if not isinstance(rows, list) or len(rows) != m:
        raise ParseError(f"expected {m} rows", path="$.rows", source=source)
    parsed = []
    for i, row in enumerate(rows):
        path = f"$.rows[{i}]"
        if not isinstance(row, dict) or "b" not in row or "terms" not in row:
            raise ParseError("row needs 'b' and 'terms'", path=path, source=source)
        terms, seen = [], set()
        for k, term in enumerate(row["terms"]):
            tpath = f"{path}.terms[{k}]"
            if not isinstance(term, list) or len(term) != 2 or not isinstance(term[0], int) \
                    or isinstance(term[0], bool):
                raise ParseError("term must be [j, a]", path=tpath, source=source)
            j = term[0]
            if not 0 <= j < n:
                raise ParseError(f"column {j} out of range", path=tpath, source=source)
            if j in seen:
                raise ParseError(f"duplicate entry for column {j}", path=tpath, source=source)
            seen.add(j)
            a = num(term[1], tpath)
            if a == 0:
                raise ParseError("zero coefficient", path=tpath, source=source)
            terms.append((j, a))
        parsed.append((num(row["b"], f"{path}.b"), terms))
    x0 = None
    if "x0" in doc:
        if not isinstance(doc["x0"], list) or len(doc["x0"]) != n:
            raise ParseError(f"x0 must have length {n}", path="$.x0", source=source)
        x0 = [num(v, f"$.x0[{k}]") for k, v in enumerate(doc["x0"])]
    inst = MaxAffInstance.from_rows(parsed, n=n, mode=mode)
    for v in list(inst.coefficients()) + inst.offsets:
        if isinstance(v, float) and not math.isfinite(v):
            raise ParseError("non-finite value", source=source)
    return inst, x0


def parse_maxaff(path, mode="float"):
    text, source = _read(path)
    return loads_maxaff(text, mode, source)


def dumps_maxaff(instance: MaxAffInstance, x0=None) -> str:
    """Serialize with numbers written as exact decimal strings, one row per line."""
    rows = [
        json.dumps({"b": format_number(b), "terms": [[j, format_number(a)] for j, a in terms]})
        for b, terms in instance.rows
    ]
    out = ["{", f' "m": {instance.m},', f' "n": {instance.n},', ' "rows": [']
    out.append(",\n".join("  " + r for r in rows))
    out.append(" ]" + ("," if x0 is not None else ""))
    if x0 is not None:
        out.append(f' "x0": {json.dumps([format_number(v) for v in x0])}')
    out.append("}")
    return "\n".join(out) + "\n"


# -- MRF text format -------------------------------------------------------

def _tokens(line):
    col = 0
    out = []
    for part in line.split():
        col = line.index(part, col)
        out.append((part, col + 1))
        col += len(part)
    return out


def loads_mrf(text, mode="float", source=None) -> PairwiseModel:
    conv = converter(mode)
    lines = [
        (no, line.split("#", 1)[0]) for no, line in enumerate(text.splitlines(), 1)
    ]
    lines = [(no, ln) for no, ln in lines if ln.strip()]
    if not lines:
        raise ParseError("empty file", source=source)

    def integer(tok, no, what):
        try:
            value = int(tok[0])
        except ValueError:
            raise ParseError(f"{what} must be an integer, got {tok[0]!r}", no, tok[1], source=source) from None
        return value

    def real(tok, no):
        try:
            return conv(tok[0])
        except (ValueError, TypeError, ZeroDivisionError):
            raise ParseError(f"bad number {tok[0]!r}", no, tok[1], source=source) from None

    no, head = lines[0]
    toks = _tokens(head)
    if len(toks) != 3 or toks[0][0] != "MRF":
        raise ParseError("header must be 'MRF <nodes> <labels>'", no, 1, source=source)
    V, L = integer(toks[1], no, "node count"), integer(toks[2], no, "label count")
    if V < 1 or L < 1:
        raise ParseError("need at least one node and one label", no, toks[1][1], source=source)
    unary = [None] * V
    pairwise = {}
    for no, line in lines[1:]:
        toks = _tokens(line)
        kind = toks[0][0]
        if kind == "UNARY":
            if len(toks) != 2 + L:
                raise ParseError(f"UNARY needs a node and {L} values", no, toks[0][1], source=source)
            i = integer(toks[1], no, "node id")
            if not 0 <= i < V:
                raise ParseError(f"node {i} out of range", no, toks[1][1], source=source)
            if unary[i] is not None:
                raise ParseError(f"duplicate UNARY for node {i}", no, toks[0][1], source=source)
            unary[i] = [real(t, no) for t in toks[2:]]
        elif kind == "EDGE":
            if len(toks) != 3 + L * L:
                raise ParseError(f"EDGE needs two nodes and {L * L} values", no, toks[0][1], source=source)
            i, j = integer(toks[1], no, "node id"), integer(toks[2], no, "node id")
            for v, tok in ((i, toks[1]), (j, toks[2])):
                if not 0 <= v < V:
                    raise ParseError(f"node {v} out of range", no, tok[1], source=source)
            if i == j:
                raise ParseError("self loop", no, toks[1][1], source=source)
            key = (min(i, j), max(i, j))
            if key in pairwise:
                raise ParseError(f"duplicate EDGE {key}", no, toks[0][1], source=source)
            vals = [real(t, no) for t in toks[3:]]
            mat = [vals[x * L:(x + 1) * L] for x in range(L)]
            if i > j:
                mat = [list(col) for col in zip(*mat)]
            pairwise[key] = mat
        else:
            raise ParseError(f"unknown record {kind!r}", no, toks[0][1], source=source)
    missing = [i for i, u in enumerate(unary) if u is None]
    if missing:
        raise ParseError(f"missing UNARY for node {missing[0]}", lines[-1][0] + 1, 1, source=source)
    return PairwiseModel.build(V, L, unary, pairwise)


def parse_mrf(path, mode="float") -> PairwiseModel:
    text, source = _read(path)
    return loads_mrf(text, mode, source)


def dumps_mrf(model: PairwiseModel) -> str:
    out = [f"MRF {model.n_nodes} {model.n_labels}"]
    for i, row in enumerate(model.unary):
        out.append(" ".join(["UNARY", str(i)] + [format_number(v) for v in row]))
    for (i, j), mat in model.pairwise.items():
        out.append(" ".join(["EDGE", str(i), str(j)] + [format_number(v) for r in mat for v in r]))
    return "\n".join(out) + "\n"


# -- UAI MARKOV import -----------------------------------------------------

def loads_uai(text, log_domain=False, source=None) -> PairwiseModel:
    """Pairwise MARKOV networks only; factor tables become weights.

    With ``log_domain`` entries are replaced by their natural logarithm.
    Several factors over the same scope are added up.
    """
    toks = []
    for no, line in enumerate(text.splitlines(), 1):
        toks += [(t, no, c) for t, c in _tokens(line)]
    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(toks):
            last = toks[-1] if toks else ("", 1, 1)
            raise ParseError(f"unexpected end of file, expected {what}", last[1], last[2], source=source)
        pos += 1
        return toks[pos - 1]

    def integer(what):
        t, no, col = take(what)
        try:
            return int(t), no, col
        except ValueError:
            raise ParseError(f"expected {what}, got {t!r}", no, col, source=source) from None

    t, no, col = take("network type")
    if t != "MARKOV":
        raise ParseError(f"only MARKOV networks are supported, got {t!r}", no, col, source=source)
    V = integer("variable count")[0]
    cards = [integer("cardinality") for _ in range(V)]
    L = cards[0][0] if cards else 0
    for c, no, col in cards:
        if c != L:
            raise ParseError("all variables must share one label count", no, col, source=source)
    n_fac = integer("factor count")[0]
    scopes = []
    for _ in range(n_fac):
        k, no, col = integer("scope size")
        if k not in (1, 2):
            raise ParseError(f"only unary and pairwise factors are supported (scope size {k})",
                             no, col, source=source)
        scope = []
        for _ in range(k):
            v, vno, vcol = integer("variable id")
            if not 0 <= v < V:
                raise ParseError(f"variable {v} out of range", vno, vcol, source=source)
            scope.append(v)
        if k == 2 and scope[0] == scope[1]:
            raise ParseError("pairwise factor over a single variable", no, col, source=source)
        scopes.append(scope)
    unary = [[0.0] * L for _ in range(V)]
    pairwise = {}
    for scope in scopes:
        count, no, col = integer("table size")
        if count != L ** len(scope):
            raise ParseError(f"table size {count}, expected {L ** len(scope)}", no, col, source=source)
        vals = []
        for _ in range(count):
            t, vno, vcol = take("table entry")
            try:
                v = float(t)
                if log_domain:
                    v = math.log(v)
            except ValueError:
                raise ParseError(f"bad table entry {t!r}", vno, vcol, source=source) from None
            if not math.isfinite(v):
                raise ParseError(f"table entry {t!r} gives a non-finite weight", vno, vcol, source=source)
            vals.append(v)
        if len(scope) == 1:
            for x in range(L):
                unary[scope[0]][x] += vals[x]
        else:
            i, j = scope
            mat = [vals[x * L:(x + 1) * L] for x in range(L)]
            if i > j:
                i, j = j, i
                mat = [list(c) for c in zip(*mat)]
            acc = pairwise.setdefault((i, j), [[0.0] * L for _ in range(L)])
            for x in range(L):
                for y in range(L):
                    acc[x][y] += mat[x][y]
    if pos != len(toks):
        t, no, col = toks[pos]
        raise ParseError(f"trailing data {t!r}", no, col, source=source)
    return PairwiseModel.build(V, L, unary, pairwise)


def import_uai(path, log_domain=False) -> PairwiseModel:
    text, source = _read(path)
    return loads_uai(text, log_domain, source)


def load_model(path, mode="float", log_domain=False) -> PairwiseModel:
    """MRF text or UAI file, chosen by the first token."""
    text, source = _read(path)
    first = text.split(None, 1)[0] if text.strip() else ""
    if first == "MARKOV":
        return loads_uai(text, log_domain, source)
    return loads_mrf(text, mode, source)


# -- traces ----------------------------------------------------------------

TRACE_HEADER = (
    "sweep", "update", "block", "coord", "delta", "eta_running", "objective",
    "energy_before", "energy_after",
)


def write_trace(path_or_file, rows):
    """Write trace rows (dicts keyed by :data:`TRACE_HEADER`) as CSV."""
    own = isinstance(path_or_file, (str, Path))
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        writer = csv.DictWriter(fh, fieldnames=TRACE_HEADER, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in TRACE_HEADER})
    finally:
        if own:
            fh.close()


def read_trace(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def trace_row(sweep, update, block, coord, delta, eta, objective, energy=None):
    row = {
        "sweep": sweep,
        "update": update,
        "block": block,
        "coord": coord,
        "delta": format_number(delta),
        "eta_running": format_number(eta),
        "objective": format_number(objective),
    }
    if energy is not None:
        row["energy_before"] = format_number(energy[0])
        row["energy_after"] = format_number(energy[1])
    return row
