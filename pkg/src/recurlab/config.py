"""Declarative descriptors for signals, windows and systems.

A signal descriptor is one of

* a registered name, e.g. ``"sin"``, ``"chirp"``, ``"aa_phi"``, ``"tent"``;
* a node ``{"kind": ..., <parameters>, "of": <descriptor>}``, exactly the
  shape produced by ``Signal.to_dict()``;
* a pipeline ``{"generator": <descriptor>, "pipeline": [{"op": ...}, ...]}``
  applying operators left to right.

Complex numbers are written as numbers or ``[re, im]`` pairs. Unknown keys are
rejected. ``serialize_signal(parse_signal(d))`` is the canonical node form, and
parsing it again yields an equal signal.

System descriptors::

    {"type": "ode", "coeffs": [a_0, ..., a_{n-1}]}          # each r x r
    {"type": "neutral", "delays": [...], "coeffs": [...]}   # (m, n+1, r, r)

where scalars may stand in for ``1 x 1`` matrices.
"""

import json
import math
from pathlib import Path

import numpy as np
import yaml

from . import signals as S
from .errors import ConfigError
from .systems import NeutralSystem, OdeSystem

SQRT2 = math.sqrt(2.0)


def _named():
    psi1 = S.aa_step_signal("psi1")
    psi2 = S.aa_step_signal("psi2")
    return {
        "sin": lambda: S.sine(1.0),
        "cos": lambda: S.cosine(1.0),
        "exp": lambda: S.exponential(1.0),
        "chirp": S.chirp,
        "aa_phi": lambda: S.aa_step_signal("phi"),
        "g1": lambda: psi1,
        "g2": lambda: psi2,
        "tent": lambda: psi1 - psi2,
        "quasi": lambda: S.sine(1.0) + S.sine(SQRT2),
        "lacunary": lambda: S.build_lacunary(8),
        "zero": lambda: S.zero(1),
        "one": lambda: S.constant(1.0),
    }


NAMED_SIGNALS = tuple(sorted(_named()))


def named_signal(name):
    table = _named()
    if name not in table:
        raise ConfigError(f"unknown signal name {name!r}; known: {', '.join(NAMED_SIGNALS)}")
    return table[name]()


# ---------------------------------------------------------------------------
# scalar helpers
# ---------------------------------------------------------------------------


def parse_complex(x):
    if isinstance(x, bool):
        raise ConfigError(f"expected a number, got {x!r}")
    if isinstance(x, (int, float)):
        return complex(float(x), 0.0)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in x
    ):
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, complex):
        return x
    raise ConfigError(f"expected a number or [re, im] pair, got {x!r}")


def parse_vector(x):
    if isinstance(x, (int, float, complex)) and not isinstance(x, bool):
        return (parse_complex(x),)
    if not isinstance(x, (list, tuple)) or not x:
        raise ConfigError(f"expected a non-empty vector, got {x!r}")
    return tuple(parse_complex(v) for v in x)


def _float(x, what, positive=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{what} must be a number, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise ConfigError(f"{what} must be finite")
    if positive and not x > 0:
        raise ConfigError(f"{what} must be positive")
    return x


def _check_keys(d, allowed, what):
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"unknown key(s) for {what}: {', '.join(sorted(extra))}")


def _require(d, key, what):
    if key not in d:
        raise ConfigError(f"{what} needs {key!r}")
    return d[key]


# ---------------------------------------------------------------------------
# signals
# ---------------------------------------------------------------------------


def _quad_opts(d):
    out = {}
    if "tol" in d:
        out["tol"] = _float(d["tol"], "tol", positive=True)
    if "method" in d:
        out["method"] = d["method"]
    return out


def _parse_sequence(d):
    if not isinstance(d, dict):
        raise ConfigError(f"sequence descriptor must be a mapping, got {d!r}")
    kind = d.get("kind")
    if kind == "aa_step":
        _check_keys(d, {"kind", "branch"}, "aa_step")
        return S.build_aa_step(d.get("branch", "phi"))
    if kind == "affine":
        _check_keys(d, {"kind", "a", "b"}, "affine")
        return S.AffineSequence(parse_complex(d.get("a", 0)), parse_complex(d.get("b", 0)))
    raise ConfigError(f"unknown sequence kind {kind!r}")


def _node(d):
    kind = d["kind"]
    of = lambda: parse_signal(_require(d, "of", kind))  # noqa: E731
    if kind == "trig_poly":
        _check_keys(d, {"kind", "terms"}, kind)
        terms = _require(d, "terms", kind)
        if not isinstance(terms, list) or not terms:
            raise ConfigError("trig_poly needs a non-empty term list")
        out = []
        for term in terms:
            if not isinstance(term, dict):
                raise ConfigError("trig_poly terms are mappings with omega and coef")
            _check_keys(term, {"omega", "coef"}, "trig_poly term")
            out.append((_float(_require(term, "omega", "term"), "omega"), parse_vector(_require(term, "coef", "term"))))
        return S.trig_poly(out)
    if kind in ("sine", "cosine"):
        _check_keys(d, {"kind", "omega", "amplitude"}, kind)
        fn = S.sine if kind == "sine" else S.cosine
        return fn(_float(d.get("omega", 1.0), "omega"), parse_complex(d.get("amplitude", 1.0)))
    if kind == "exponential":
        _check_keys(d, {"kind", "omega", "vector"}, kind)
        return S.exponential(_float(d.get("omega", 1.0), "omega"), parse_vector(d.get("vector", 1.0)))
    if kind == "constant":
        _check_keys(d, {"kind", "value"}, kind)
        return S.Constant(parse_vector(_require(d, "value", kind)))
    if kind == "chirp":
        _check_keys(d, {"kind", "rate", "poly"}, kind)
        return S.Chirp(_float(d.get("rate", 1.0), "rate"), parse_vector(d.get("poly", [1.0])))
    if kind == "aa_step":
        _check_keys(d, {"kind", "branch"}, kind)
        return S.aa_step_signal(d.get("branch", "phi"))
    if kind == "linear_extension":
        _check_keys(d, {"kind", "sequence"}, kind)
        return S.linear_extension(_parse_sequence(_require(d, "sequence", kind)))
    if kind == "lacunary":
        _check_keys(d, {"kind", "order"}, kind)
        order = _require(d, "order", kind)
        if isinstance(order, bool) or not isinstance(order, int):
            raise ConfigError("lacunary order must be an integer")
        return S.build_lacunary(order)
    if kind == "sum":
        _check_keys(d, {"kind", "terms"}, kind)
        terms = _require(d, "terms", kind)
        if not isinstance(terms, list) or not terms:
            raise ConfigError("sum needs a non-empty term list")
        return S.Sum(tuple(parse_signal(t) for t in terms))
    if kind == "stack":
        _check_keys(d, {"kind", "parts"}, kind)
        parts = _require(d, "parts", kind)
        if not isinstance(parts, list):
            raise ConfigError("stack parts must be a list")
        return S.stack(parse_signal(p) for p in parts)
    if kind == "scale":
        _check_keys(d, {"kind", "factor", "of"}, kind)
        return S.Scale(parse_complex(_require(d, "factor", kind)), of())
    if kind == "matrix":
        _check_keys(d, {"kind", "matrix", "of"}, kind)
        rows = _require(d, "matrix", kind)
        if not isinstance(rows, list) or not rows:
            raise ConfigError("matrix must be a non-empty list of rows")
        return S.MatrixMap(tuple(parse_vector(r) for r in rows), of())
    if kind == "translate":
        _check_keys(d, {"kind", "shift", "of"}, kind)
        return S.Translate(_float(_require(d, "shift", kind), "shift"), of())
    if kind == "difference":
        _check_keys(d, {"kind", "step", "of"}, kind)
        return S.Difference(_float(_require(d, "step", kind), "step"), of())
    if kind == "character":
        _check_keys(d, {"kind", "omega", "of"}, kind)
        return S.Character(_float(_require(d, "omega", kind), "omega"), of())
    if kind == "running_mean":
        _check_keys(d, {"kind", "width", "tol", "method", "of"}, kind)
        return S.RunningMean(_float(_require(d, "width", kind), "width", positive=True), of(), **_quad_opts(d))
    if kind == "integral":
        _check_keys(d, {"kind", "base", "tol", "method", "spacing", "of"}, kind)
        kw = _quad_opts(d)
        if "spacing" in d:
            kw["spacing"] = _float(d["spacing"], "spacing", positive=True)
        return S.Integral(_float(d.get("base", 0.0), "base"), of(), **kw)
    if kind == "derivative":
        _check_keys(d, {"kind", "order", "of"}, kind)
        return of().derivative(int(d.get("order", 1)))
    if kind == "named":
        _check_keys(d, {"kind", "name"}, kind)
        return named_signal(_require(d, "name", kind))
    raise ConfigError(f"unknown signal kind {kind!r}")


_OPS = {
    "translate": ({"shift"}, lambda f, d: f.translate(_float(d["shift"], "shift"))),
    "difference": ({"step"}, lambda f, d: f.difference(_float(d["step"], "step"))),
    "running_mean": (
        {"width", "tol", "method"},
        lambda f, d: f.running_mean(_float(d["width"], "width", positive=True), **_quad_opts(d)),
    ),
    "integral": ({"base", "tol", "method"}, lambda f, d: f.integral(_float(d.get("base", 0.0), "base"), **_quad_opts(d))),
    "character": ({"omega"}, lambda f, d: f.character(_float(d["omega"], "omega"))),
    "scale": ({"factor"}, lambda f, d: f * parse_complex(d["factor"])),
    "derivative": ({"order"}, lambda f, d: f.derivative(int(d.get("order", 1)))),
    "add": ({"signal"}, lambda f, d: f + parse_signal(d["signal"])),
    "sub": ({"signal"}, lambda f, d: f - parse_signal(d["signal"])),
}
_REQUIRED = {"translate": "shift", "difference": "step", "running_mean": "width", "character": "omega",
             "scale": "factor", "add": "signal", "sub": "signal"}


def parse_signal(doc):
    """Build a :class:`~recurlab.signals.Signal` from a descriptor."""
    if isinstance(doc, S.Signal):
        return doc
    if isinstance(doc, str):
        return named_signal(doc)
    if not isinstance(doc, dict):
        raise ConfigError(f"signal descriptor must be a name or mapping, got {type(doc).__name__}")
    if "kind" in doc:
        try:
            return _node(doc)
        except (TypeError, KeyError) as exc:
            raise ConfigError(f"malformed {doc.get('kind')!r} descriptor: {exc}") from exc
    if "generator" in doc:
        _check_keys(doc, {"generator", "pipeline"}, "pipeline descriptor")
        f = parse_signal(doc["generator"])
        steps = doc.get("pipeline", [])
        if not isinstance(steps, list):
            raise ConfigError("pipeline must be a list of operations")
        for step in steps:
            if not isinstance(step, dict) or "op" not in step:
                raise ConfigError(f"pipeline step needs an 'op': {step!r}")
            op = step["op"]
            if op not in _OPS:
                raise ConfigError(f"unknown pipeline op {op!r}")
            allowed, fn = _OPS[op]
            _check_keys(step, allowed | {"op"}, f"op {op}")
            if op in _REQUIRED:
                _require(step, _REQUIRED[op], f"op {op}")
            f = fn(f, step)
        return f
    raise ConfigError("signal descriptor needs 'kind' or 'generator'")


def serialize_signal(f):
    """Canonical node-form descriptor of a signal."""
    return f.to_dict()


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------


def parse_window(doc, default_step=1e-2):
    """``T`` (for ``[-T, T]``), ``{"T": ..}``, ``{"lo", "hi", "step"}`` or ``{"probes": [...]}``."""
    if isinstance(doc, (int, float)) and not isinstance(doc, bool):
        return S.ProbeWindow.interval(_float(doc, "window T", positive=True), step=default_step)
    if not isinstance(doc, dict):
        raise ConfigError(f"window must be a number or mapping, got {doc!r}")
    if "probes" in doc:
        _check_keys(doc, {"probes"}, "probe window")
        probes = doc["probes"]
        if not isinstance(probes, list) or not probes:
            raise ConfigError("probe set must be a non-empty list")
        return S.ProbeWindow.finite(_float(p, "probe") for p in probes)
    _check_keys(doc, {"T", "lo", "hi", "step"}, "interval window")
    step = _float(doc.get("step", default_step), "window step", positive=True)
    if "T" in doc:
        if "lo" in doc or "hi" in doc:
            raise ConfigError("give either T or lo/hi")
        return S.ProbeWindow.interval(_float(doc["T"], "T", positive=True), step=step)
    lo = _float(_require(doc, "lo", "window"), "lo")
    hi = _float(_require(doc, "hi", "window"), "hi")
    return S.ProbeWindow.interval(lo, hi, step)


def parse_range(doc):
    if not isinstance(doc, (list, tuple)) or len(doc) != 2:
        raise ConfigError(f"range must be [lo, hi], got {doc!r}")
    lo, hi = (_float(x, "range bound") for x in doc)
    if not hi >= lo:
        raise ConfigError("range must satisfy lo <= hi")
    return lo, hi


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------


def _complex_array(doc, ndim, what):
    try:
        raw = np.array(doc, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what} must be a rectangular nested numeric array") from exc
    if raw.ndim == ndim + 1 and raw.shape[-1] == 2:
        return raw[..., 0] + 1j * raw[..., 1]
    if raw.ndim == ndim:
        return raw.astype(complex)
    raise ConfigError(f"{what} has shape {raw.shape}; expected {ndim} axes (plus an optional [re, im] axis)")


def parse_system(doc):
    if not isinstance(doc, dict):
        raise ConfigError("system descriptor must be a mapping")
    kind = doc.get("type")
    if kind == "ode":
        _check_keys(doc, {"type", "coeffs"}, "ode system")
        coeffs = _require(doc, "coeffs", "ode system")
        if isinstance(coeffs, list) and coeffs and all(
            isinstance(c, (int, float)) or (isinstance(c, list) and len(c) == 2 and all(isinstance(v, (int, float)) for v in c))
            for c in coeffs
        ):
            return OdeSystem.scalar(*(parse_complex(c) for c in coeffs))
        return OdeSystem(_complex_array(coeffs, 3, "ode coeffs"))
    if kind == "neutral":
        _check_keys(doc, {"type", "delays", "coeffs"}, "neutral system")
        delays = [_float(x, "delay") for x in _require(doc, "delays", "neutral system")]
        return NeutralSystem(tuple(delays), _complex_array(_require(doc, "coeffs", "neutral system"), 4, "neutral coeffs"))
    raise ConfigError(f"unknown system type {kind!r}")


def serialize_system(sys):
    return sys.to_dict()


# ---------------------------------------------------------------------------
# documents
# ---------------------------------------------------------------------------


def load_document(source):
    """Read a JSON or YAML document from a path, or parse an inline JSON string."""
    if isinstance(source, dict):
        return source
    text = str(source)
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"inline descriptor is not valid JSON: {exc}") from exc
    path = Path(text)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    raw = path.read_text()
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            doc = yaml.safe_load(raw)
        else:
            doc = json.loads(raw)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path} must contain a mapping at top level")
    return doc
