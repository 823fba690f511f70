"""JSON/CSV serialization for profiles, zetas, and grids.

Function format (schema version 1):

    {"schema": 1, "kind": "radial_pl", "base": t1,
     "segments": [[rho, slope], ...],
     "tail": {"rule": "none|factorial|uzeta|vlt", ...params},
     "domain_bound": number | "inf"}

Lazy tails are reconstructed from their parameters rather than materialized:
"factorial" carries {"k": K} and wraps the stored eager segments,
"vlt" carries {"t": ..., "l": ...}, "uzeta" carries the zeta spec and
dimension it was built from.

ScalarZeta format:

    {"schema": 1, "kind": "scalar_zeta", "knots": [[t, val], ...],
     "tail": {"kind": "zero"} | {"kind": "exp", "c": ..., "alpha": ...}
           | {"kind": "harmonic", "c": ...},
     "threshold_T": number | null}

("harmonic" is an extension beyond the zero/exp pair; it round-trips but
carries no decay certificate.)

Grids travel as CSV with a JSON header line (box, resolution, sentinel).
"""

from __future__ import annotations

import io
import json
import math
from typing import Optional, Union

import numpy as np

from .embed import build_uzeta, build_vlt, compose_gk
from .errors import InputError
from .grid import GridFn
from .profiles import INF, PLProfile
from .zetas import ScalarZeta

SCHEMA_VERSION = 1


def _num(x) -> Union[float, str]:
    return "inf" if x == INF else float(x)


def _denum(x) -> float:
    return INF if x == "inf" else float(x)


# -- profiles -------------------------------------------------------------------------------


def profile_to_dict(p: PLProfile, tail: Optional[dict] = None) -> dict:
    """Eager knots plus an optional structured tail rule.

    Lazy profiles must be described through their `tail` parameters; bare
    lazy profiles cannot be serialized faithfully.
    """
    if p.is_lazy and tail is None:
        raise InputError("lazy profile needs an explicit tail rule to serialize")
    return {
        "schema": SCHEMA_VERSION,
        "kind": "radial_pl",
        "base": float(p.base),
        "segments": [[float(r), float(s)] for r, s in zip(p._radii, p._slopes)],
        "tail": tail or {"rule": "none"},
        "domain_bound": _num(p.domain_bound),
    }


def profile_from_dict(d: dict) -> PLProfile:
    if d.get("kind") != "radial_pl":
        raise InputError(f"expected kind 'radial_pl', got {d.get('kind')!r}")
    segments = [(float(r), float(s)) for r, s in d.get("segments", [])]
    base = float(d.get("base", 0.0))
    db = _denum(d.get("domain_bound", "inf"))
    tail = d.get("tail") or {"rule": "none"}
    rule = tail.get("rule", "none")
    if rule == "none":
        return PLProfile(base, segments, domain_bound=db)
    if rule == "factorial":
        inner = PLProfile(base, segments, domain_bound=db)
        return compose_gk(int(tail["k"]), inner)
    if rule == "vlt":
        return build_vlt(float(tail["t"]), int(tail["l"]))
    if rule == "uzeta":
        zeta = zeta_from_dict(tail["zeta"])
        return build_uzeta(zeta.eval, int(tail["n"]))
    raise InputError(f"unknown tail rule {rule!r}")


# -- zetas ----------------------------------------------------------------------------------


def zeta_to_dict(z: ScalarZeta) -> dict:
    kind = z.tail[0]
    if kind == "zero":
        tail = {"kind": "zero"}
    elif kind == "exp":
        tail = {"kind": "exp", "c": z.tail[1], "alpha": z.tail[2]}
    else:
        tail = {"kind": "harmonic", "c": z.tail[1]}
    return {
        "schema": SCHEMA_VERSION,
        "kind": "scalar_zeta",
        "knots": [[t, v] for t, v in z.knots],
        "tail": tail,
        "threshold_T": z.threshold_T,
    }


def zeta_from_dict(d: dict) -> ScalarZeta:
    if d.get("kind") != "scalar_zeta":
        raise InputError(f"expected kind 'scalar_zeta', got {d.get('kind')!r}")
    knots = [(float(t), float(v)) for t, v in d["knots"]]
    t = d.get("tail") or {"kind": "zero"}
    kind = t.get("kind", "zero")
    if kind == "zero":
        tail = ("zero",)
    elif kind == "exp":
        tail = ("exp", float(t["c"]), float(t["alpha"]))
    elif kind == "harmonic":
        tail = ("harmonic", float(t["c"]))
    else:
        raise InputError(f"unknown zeta tail kind {kind!r}")
    T = d.get("threshold_T")
    return ScalarZeta(knots, tail, threshold_T=None if T is None else float(T))


# -- finite maxima of affine pieces -----------------------------------------------------------


def affine_max_to_dict(u) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "kind": "affine_max",
        "n": u.n,
        "pieces": [[list(a), float(c)] for a, c in u.pieces],
    }


def affine_max_from_dict(d: dict):
    from .affine import AffineMax

    if d.get("kind") != "affine_max":
        raise InputError(f"expected kind 'affine_max', got {d.get('kind')!r}")
    pieces = [(tuple(float(x) for x in a), float(c)) for a, c in d["pieces"]]
    return AffineMax.make(pieces, int(d["n"]))


# -- grids ----------------------------------------------------------------------------------


def grid_to_csv(g: GridFn) -> str:
    """Header line: JSON {box, resolution, sentinel}; then one CSV row per axis-0 index."""
    header = json.dumps(
        {
            "schema": SCHEMA_VERSION,
            "kind": "grid",
            "box": {"lo": list(g.lo), "hi": list(g.hi)},
            "resolution": list(g.resolution),
            "sentinel": "inf",
        }
    )
    buf = io.StringIO()
    buf.write(header + "\n")
    v = np.atleast_2d(g.values)
    for row in v:
        buf.write(",".join("inf" if not math.isfinite(x) else repr(float(x)) for x in row))
        buf.write("\n")
    return buf.getvalue()


def grid_from_csv(text: str) -> GridFn:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InputError("empty grid file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise InputError(f"grid header is not valid JSON: {e}") from e
    if header.get("kind") != "grid":
        raise InputError(f"expected kind 'grid', got {header.get('kind')!r}")
    res = tuple(int(r) for r in header["resolution"])
    rows = []
    for ln in lines[1:]:
        rows.append([INF if f.strip() == "inf" else float(f) for f in ln.split(",")])
    values = np.asarray(rows, dtype=float)
    if len(res) == 1:
        values = values.reshape(res)
    elif values.shape != res:
        raise InputError(f"grid body shape {values.shape} does not match resolution {res}")
    lo = tuple(float(x) for x in header["box"]["lo"])
    hi = tuple(float(x) for x in header["box"]["hi"])
    return GridFn(lo, hi, values)


# -- file-level helpers -----------------------------------------------------------------------


def load_function(path: str):
    """Load a radial_pl JSON or grid CSV file by sniffing the header."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if not stripped:
        raise InputError(f"{path}: empty file")
    first_line = stripped.splitlines()[0]
    try:
        head = json.loads(first_line)
    except json.JSONDecodeError:
        head = None
    if isinstance(head, dict) and head.get("kind") == "grid":
        return grid_from_csv(text)
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: line {e.lineno}: {e.msg}") from e
    if not isinstance(d, dict):
        raise InputError(f"{path}: expected a JSON object")
    if d.get("kind") == "radial_pl":
        return profile_from_dict(d)
    if d.get("kind") == "affine_max":
        return affine_max_from_dict(d)
    if d.get("kind") == "grid":
        return grid_from_csv(text)
    raise InputError(f"{path}: unknown kind {d.get('kind')!r}")


def load_zeta(path: str) -> ScalarZeta:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as e:
            raise InputError(f"{path}: line {e.lineno}: {e.msg}") from e
    return zeta_from_dict(d)
