"""Problem-file and run-config ingestion with field-locating diagnostics.

Problems are JSON objects with exact rational coefficients carried as
strings, so a file round-trips through the solver without any float
contamination.  Every parse failure raises ProblemFormatError carrying the
path of the offending field.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ProblemFormatError, WedgehullError
from .geometry import EdgeModel, WedgeSpec, ambient_vars, param_vars
from .normalform import HypersurfaceModel
from .series import TruncatedPoly, parse_rational

DEFAULT_CAP = 6
MIN_CAP = 4

WEDGE_SIDES = ("two", "plus", "minus")

# every knob a run can turn, echoed verbatim into each report
DEFAULT_CONFIG: dict = {
    "seed": 0,
    "tau": None,
    "classify": {"samples": 4096},
    "screens": {
        "t_count": 64,
        "boundary_samples": 1000,
        "target_count": 50,
        "audit_polynomials": 20,
        "audit_degree": 4,
        "tol": 1e-6,
        "trace_samples": 96,
    },
    "slice": {
        "slopes": [["0"]],
        "box_radius": "1/2",
        "alpha": "1/4",
        "kappa": "1/2",
    },
    "sweep": {
        "t_count": 5,
        "alpha": "1/4",
        "kappa": "1/2",
        "box_radius": "1/2",
        "union_samples": 20000,
        "max_radius": "1",
    },
    "lewy": {
        "sigma": None,
        "deltas": [0.01, 0.03, 0.05],
        "angles": 720,
        "march_steps": 300,
        "aperture": "1/2",
        "extent": "1",
        "ring_depth": 6,
        "ring_angles": 16,
        "audit_polynomials": 8,
        "audit_degree": 3,
        "audit_tol": 1e-6,
    },
    "one_sided": {
        "deltas": [0.01, 0.03, 0.05],
        "offset": "1/20",
        "resolution": 1e-3,
        "angles": 240,
        "march_steps": 150,
    },
}


def default_config() -> dict:
    return copy.deepcopy(DEFAULT_CONFIG)


@dataclass(frozen=True)
class ProblemFile:
    """A validated problem: model + wedge + resolved config."""

    n: int
    degree_cap: int
    model: HypersurfaceModel
    wedge: WedgeSpec
    config: dict
    digest: str
    raw: dict

    @property
    def seed(self) -> int:
        return int(self.config["seed"])


def _fail(message: str, where: str):
    raise ProblemFormatError(message, where)


def _get_object(obj, where: str) -> dict:
    if not isinstance(obj, dict):
        _fail(f"expected an object, got {type(obj).__name__}", where)
    return obj


def _check_keys(obj: Mapping, allowed: Sequence[str], where: str) -> None:
    for key in obj:
        if key not in allowed:
            _fail(f"unknown field {key!r} (allowed: {', '.join(sorted(allowed))})",
                  where)


def parse_exact(value, where: str) -> Fraction:
    """Exact rational from a string or integer; floats are refused."""
    if isinstance(value, bool) or value is None:
        _fail(f"expected a rational, got {value!r}", where)
    if isinstance(value, float):
        _fail("needs an exact rational as a string like \"3/4\"; "
              f"float literal {value!r} is not exact", where)
    try:
        return parse_rational(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        _fail(f"bad rational {value!r}: {exc}", where)


def parse_terms(obj, vars: Sequence[str], cap: int, where: str) -> TruncatedPoly:
    """Polynomial literal: a list of {"c": rational, "m": {var: exponent}}."""
    if not isinstance(obj, list):
        _fail(f"polynomial literal must be a list of terms, got {type(obj).__name__}",
              where)
    terms = []
    for i, item in enumerate(obj):
        spot = f"{where}[{i}]"
        item = _get_object(item, spot)
        _check_keys(item, ("c", "m"), spot)
        if "c" not in item:
            _fail("term is missing its coefficient \"c\"", spot)
        coeff = parse_exact(item["c"], f"{spot}.c")
        mono = item.get("m", {})
        mono = _get_object(mono, f"{spot}.m")
        exps: dict = {}
        for name, exp in mono.items():
            if name not in vars:
                _fail(f"unknown variable {name!r} (expected one of {', '.join(vars)})",
                      f"{spot}.m")
            if not isinstance(exp, int) or isinstance(exp, bool) or exp < 0:
                _fail(f"exponent for {name!r} must be a nonnegative integer, "
                      f"got {exp!r}", f"{spot}.m")
            exps[name] = exps.get(name, 0) + exp
        terms.append((coeff, exps))
    return TruncatedPoly.from_terms(terms, tuple(vars), cap)


def _parse_edge(obj, n: int, cap: int, where: str) -> EdgeModel:
    pv = param_vars(n)
    if obj is None:
        return EdgeModel.flat(n, cap)
    obj = _get_object(obj, where)
    _check_keys(obj, ("graph_y", "graph_v"), where)
    ys = obj.get("graph_y", [[] for _ in range(n)])
    if not isinstance(ys, list) or len(ys) != n:
        _fail(f"graph_y must list {n} polynomials, one per y-coordinate", f"{where}.graph_y")
    f = tuple(parse_terms(item, pv, cap, f"{where}.graph_y[{j}]")
              for j, item in enumerate(ys))
    g = parse_terms(obj.get("graph_v", []), pv, cap, f"{where}.graph_v")
    return EdgeModel(n, f, g)


def _parse_axis(obj, edge: EdgeModel, where: str) -> dict:
    obj = _get_object(obj, where)
    if not obj:
        _fail("axis field needs at least one nonzero component", where)
    comps: dict = {}
    for name, val in obj.items():
        spot = f"{where}.{name}"
        if name not in ambient_vars(edge.n):
            _fail(f"unknown ambient coordinate {name!r}", spot)
        if isinstance(val, list):
            comps[name] = parse_terms(val, edge.params, edge.cap, spot)
        else:
            comps[name] = parse_exact(val, spot)
    return comps


def merge_config(base: dict, override, where: str = "config") -> dict:
    """Overlay user settings onto the defaults, rejecting unknown keys."""
    override = _get_object(override, where)
    out = copy.deepcopy(base)
    for key, val in override.items():
        spot = f"{where}.{key}"
        if key not in base:
            _fail(f"unknown config key {key!r}", where)
        if isinstance(base[key], dict) and base[key]:
            out[key] = merge_config(base[key], val, spot)
        else:
            out[key] = copy.deepcopy(val)
    return out


def parse_problem(data: dict, *, digest: str = "", cap_override: int | None = None,
                  config_overlay: dict | None = None,
                  seed_override: int | None = None) -> ProblemFile:
    """Validate a decoded problem object and build the model it describes."""
    top = "problem"
    data = _get_object(data, top)
    _check_keys(data, ("n", "degree_cap", "hypersurface", "edge", "base_point",
                       "wedge", "config"), top)

    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        _fail(f"n must be an integer >= 2, got {n!r}", f"{top}.n")

    cap = data.get("degree_cap", DEFAULT_CAP)
    if not isinstance(cap, int) or isinstance(cap, bool):
        _fail(f"degree_cap must be an integer, got {cap!r}", f"{top}.degree_cap")
    if cap_override is not None:
        cap = cap_override
    if cap < MIN_CAP:
        _fail(f"degree_cap must be at least {MIN_CAP} to see the quartic tail, "
              f"got {cap}", f"{top}.degree_cap")

    edge = _parse_edge(data.get("edge"), n, cap, f"{top}.edge")

    surf = _get_object(data.get("hypersurface"), f"{top}.hypersurface")
    _check_keys(surf, ("graph_v", "defining_r"), f"{top}.hypersurface")
    if ("graph_v" in surf) == ("defining_r" in surf):
        _fail("provide exactly one of graph_v or defining_r", f"{top}.hypersurface")

    base = data.get("base_point")
    if base is not None:
        if not isinstance(base, list) or len(base) != n + 1:
            _fail(f"base_point must list {n + 1} rationals (edge parameters)",
                  f"{top}.base_point")
        base = [parse_exact(c, f"{top}.base_point[{i}]") for i, c in enumerate(base)]

    try:
        if "graph_v" in surf:
            h = parse_terms(surf["graph_v"], ambient_vars(n)[:-1], cap,
                            f"{top}.hypersurface.graph_v")
            model = HypersurfaceModel.from_graph(h, edge, base)
        else:
            r = parse_terms(surf["defining_r"], ambient_vars(n), cap,
                            f"{top}.hypersurface.defining_r")
            model = HypersurfaceModel.from_defining(r, edge, base)
    except ProblemFormatError:
        raise
    except WedgehullError as exc:
        _fail(str(exc), f"{top}.hypersurface")

    wspec = _get_object(data.get("wedge"), f"{top}.wedge")
    _check_keys(wspec, ("axis", "aperture", "extent", "sides"), f"{top}.wedge")
    sides = wspec.get("sides", "two")
    if sides not in WEDGE_SIDES:
        _fail(f"sides must be one of {WEDGE_SIDES}, got {sides!r}", f"{top}.wedge.sides")
    aperture = parse_exact(wspec.get("aperture", "1/10"), f"{top}.wedge.aperture")
    extent = parse_exact(wspec.get("extent", "1"), f"{top}.wedge.extent")
    comps = _parse_axis(wspec.get("axis"), edge, f"{top}.wedge.axis")
    try:
        wedge = WedgeSpec.from_sparse(edge, comps, aperture, extent, sides)
    except WedgehullError as exc:
        _fail(str(exc), f"{top}.wedge")

    config = default_config()
    if "config" in data:
        config = merge_config(config, data["config"], f"{top}.config")
    if config_overlay is not None:
        config = merge_config(config, config_overlay, "config-file")
    if seed_override is not None:
        config["seed"] = seed_override
    if not isinstance(config["seed"], int) or isinstance(config["seed"], bool) \
            or not 0 <= config["seed"] < 2 ** 64:
        _fail(f"seed must be an unsigned 64-bit integer, got {config['seed']!r}",
              "config.seed")

    return ProblemFile(n, cap, model, wedge, config, digest, data)


def _decode(text: str, label: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"invalid JSON: {exc.msg}",
                                 f"{label}:line {exc.lineno}, column {exc.colno}")


def load_problem(path, *, cap_override: int | None = None,
                 config_path=None, seed_override: int | None = None) -> ProblemFile:
    """Read, hash, and validate a problem file (plus an optional config file)."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise ProblemFormatError(f"cannot read problem file: {exc}", str(path))
    overlay = None
    if config_path is not None:
        overlay = load_config(config_path)
    data = _decode(blob.decode("utf-8", errors="replace"), path.name)
    return parse_problem(data, digest=hashlib.sha256(blob).hexdigest(),
                         cap_override=cap_override, config_overlay=overlay,
                         seed_override=seed_override)


def load_config(path) -> dict:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise ProblemFormatError(f"cannot read config file: {exc}", str(path))
    data = _decode(blob.decode("utf-8", errors="replace"), path.name)
    return _get_object(data, path.name)


def canonical_problem(problem: ProblemFile) -> str:
    """Canonical text for a validated problem; parse-then-serialize is
    idempotent on it."""
    from .report import canonical_json
    return canonical_json(problem.raw)


def parse_direction(values, n: int, where: str) -> tuple[Fraction, ...]:
    """A length-n exact vector, for transversal directions in configs."""
    if not isinstance(values, list) or len(values) != n:
        _fail(f"expected a list of {n} rationals", where)
    return tuple(parse_exact(v, f"{where}[{i}]") for i, v in enumerate(values))


def parse_slopes(values, n: int, where: str) -> list[tuple[Fraction, ...]]:
    """Slice slopes: each entry is a length n-1 exact vector (scalars allowed
    when n == 2)."""
    if not isinstance(values, list) or not values:
        _fail("expected a nonempty list of slopes", where)
    out = []
    for i, item in enumerate(values):
        spot = f"{where}[{i}]"
        if isinstance(item, list):
            if len(item) != n - 1:
                _fail(f"slope must have {n - 1} components", spot)
            out.append(tuple(parse_exact(c, f"{spot}[{j}]")
                             for j, c in enumerate(item)))
        elif n == 2:
            out.append((parse_exact(item, spot),))
        else:
            _fail(f"slope must be a list of {n - 1} components", spot)
    return out
