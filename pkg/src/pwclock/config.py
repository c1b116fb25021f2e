"""Experiment description documents.

A document is a YAML (or JSON) mapping. Keys may be nested
(``observer: {delta_grid: 32}``) or dotted (``observer.delta_grid: 32``).
Every key is optional:

    mode: both                    # observer | superobserver | both
    seed: 0
    output_dir: pwclock-out
    output_format: csv            # csv | json
    observer.tau_count: 9
    observer.tau_span: 1.0        # in clock periods 2 pi / omega
    observer.tau_list: [...]      # explicit delays; excludes tau_count/tau_span
    observer.delta_grid: 32
    observer.shots_per_delta: 0   # 0 = exact
    observer.omega: 1.0
    tomography.external_times: [0, 0.7853981634, 1.5707963268, 4.7123889804]
    tomography.counts_per_projection: 0
    tomography.mle_tolerance: 1e-10
    tomography.mle_max_iters: 5000
    tomography.erasure_visibility: 1.0

A run manifest is also accepted: its ``resolved_config`` entry is used.
"""

import re
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from pwclock.observer import ObserverConfig
from pwclock.tomography import TomographyConfig

MODES = ("observer", "superobserver", "both")
FORMATS = ("csv", "json")

TABLE_TIMES = (0.0, 0.7853981634, 1.5707963268, 4.7123889804)


class SpecError(ValueError):
    pass


class _Loader(yaml.SafeLoader):
    pass


# YAML 1.1 reads "1e-10" as a string; accept exponent floats without a dot
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


@dataclass(frozen=True)
class ExperimentSpec:
    mode: str = "both"
    observer: ObserverConfig = field(default_factory=ObserverConfig)
    tomography: TomographyConfig = field(default_factory=TomographyConfig)
    output_dir: str = "pwclock-out"
    output_format: str = "csv"
    seed: int = 0

    def with_overrides(self, seed=None, output_dir=None, mode=None):
        spec = self
        if seed is not None:
            if seed < 0:
                raise SpecError(f"seed: must be a non-negative integer, got {seed}")
            spec = replace(
                spec,
                seed=seed,
                observer=replace(spec.observer, rng_seed=seed),
                tomography=replace(spec.tomography, rng_seed=seed),
            )
        if output_dir is not None:
            spec = replace(spec, output_dir=str(output_dir))
        if mode is not None:
            if mode not in MODES:
                raise SpecError(f"mode: must be one of {', '.join(MODES)}, got {mode!r}")
            spec = replace(spec, mode=mode)
        return spec


def _default_taus(count, span, omega):
    period = 2 * np.pi / omega
    return tuple(float(x) for x in np.arange(count) * span * period / count)


_INT = "integer"
_FLOAT = "number"
_STR = "string"
_LIST = "list of numbers"

_SCHEMA = {
    "mode": _STR,
    "seed": _INT,
    "output_dir": _STR,
    "output_format": _STR,
    "observer.tau_count": _INT,
    "observer.tau_span": _FLOAT,
    "observer.tau_list": _LIST,
    "observer.delta_grid": _INT,
    "observer.shots_per_delta": _INT,
    "observer.omega": _FLOAT,
    "tomography.external_times": _LIST,
    "tomography.counts_per_projection": _INT,
    "tomography.mle_tolerance": _FLOAT,
    "tomography.mle_max_iters": _INT,
    "tomography.erasure_visibility": _FLOAT,
}

_DEFAULTS = {
    "mode": "both",
    "seed": 0,
    "output_dir": "pwclock-out",
    "output_format": "csv",
    "observer.tau_count": 9,
    "observer.tau_span": 1.0,
    "observer.delta_grid": 32,
    "observer.shots_per_delta": 0,
    "observer.omega": 1.0,
    "tomography.external_times": list(TABLE_TIMES),
    "tomography.counts_per_projection": 0,
    "tomography.mle_tolerance": 1e-10,
    "tomography.mle_max_iters": 5000,
    "tomography.erasure_visibility": 1.0,
}


_RANGES = (
    ("seed", lambda v: v >= 0, ">= 0"),
    ("observer.tau_count", lambda v: v >= 0, ">= 0"),
    ("observer.tau_span", lambda v: v >= 0, ">= 0"),
    ("observer.tau_list", lambda v: all(t >= 0 for t in v), "a list of delays >= 0"),
    ("observer.delta_grid", lambda v: v >= 2, ">= 2"),
    ("observer.shots_per_delta", lambda v: v >= 0, ">= 0"),
    ("observer.omega", lambda v: v > 0, "> 0"),
    ("tomography.counts_per_projection", lambda v: v >= 0, ">= 0"),
    ("tomography.mle_tolerance", lambda v: v > 0, "> 0"),
    ("tomography.mle_max_iters", lambda v: v >= 1, ">= 1"),
    ("tomography.erasure_visibility", lambda v: 0.0 <= v <= 1.0, "in [0, 1]"),
)


def _flatten(doc, prefix=""):
    out = {}
    for key, value in doc.items():
        if not isinstance(key, str):
            raise SpecError(f"{prefix}{key!r}: keys must be strings")
        path = prefix + key
        if isinstance(value, dict):
            out.update(_flatten(value, path + "."))
        else:
            if path in out:
                raise SpecError(f"{path}: given more than once")
            out[path] = value
    return out


def _check_type(path, value, kind):
    is_num = isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == _INT:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind == _FLOAT:
        ok = is_num
    elif kind == _STR:
        ok = isinstance(value, str)
    else:
        ok = isinstance(value, list) and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        )
    if not ok:
        raise SpecError(f"{path}: expected {kind}, got {type(value).__name__} {value!r}")
    if kind == _FLOAT:
        return float(value)
    if kind == _LIST:
        return [float(v) for v in value]
    return value


def parse_mapping(doc):
    """Validate a (possibly nested) mapping and resolve defaults."""
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise SpecError(f"top level: expected a mapping, got {type(doc).__name__}")
    if "resolved_config" in doc:
        doc = doc["resolved_config"]
        if not isinstance(doc, dict):
            raise SpecError("resolved_config: expected a mapping")
    flat = _flatten(doc)
    for path in flat:
        if path not in _SCHEMA:
            raise SpecError(f"unknown key {path!r}")
    values = {path: _check_type(path, v, _SCHEMA[path]) for path, v in flat.items()}
    if "observer.tau_list" in values and ({"observer.tau_count", "observer.tau_span"} & values.keys()):
        raise SpecError("observer.tau_list: cannot be combined with observer.tau_count or observer.tau_span")
    cfg = {**_DEFAULTS, **values}

    if cfg["mode"] not in MODES:
        raise SpecError(f"mode: must be one of {', '.join(MODES)}, got {cfg['mode']!r}")
    if cfg["output_format"] not in FORMATS:
        raise SpecError(f"output_format: must be one of {', '.join(FORMATS)}, got {cfg['output_format']!r}")
    for path, ok, rule in _RANGES:
        if path in cfg and not ok(cfg[path]):
            raise SpecError(f"{path}: must be {rule}, got {cfg[path]!r}")

    if "observer.tau_list" in cfg:
        taus = tuple(cfg["observer.tau_list"])
    else:
        taus = _default_taus(cfg["observer.tau_count"], cfg["observer.tau_span"], cfg["observer.omega"])

    try:
        observer = ObserverConfig(
            tau_list=taus,
            delta_grid_size=cfg["observer.delta_grid"],
            shots_per_delta=cfg["observer.shots_per_delta"],
            omega=cfg["observer.omega"],
            rng_seed=cfg["seed"],
        )
    except ValueError as exc:
        raise SpecError(f"observer: {exc}") from None
    try:
        tomography = TomographyConfig(
            external_times=tuple(cfg["tomography.external_times"]),
            counts_per_projection=cfg["tomography.counts_per_projection"],
            rng_seed=cfg["seed"],
            mle_tolerance=cfg["tomography.mle_tolerance"],
            mle_max_iters=cfg["tomography.mle_max_iters"],
            erasure_visibility=cfg["tomography.erasure_visibility"],
        )
    except ValueError as exc:
        raise SpecError(f"tomography: {exc}") from None
    return ExperimentSpec(
        mode=cfg["mode"],
        observer=observer,
        tomography=tomography,
        output_dir=cfg["output_dir"],
        output_format=cfg["output_format"],
        seed=cfg["seed"],
    )


def parse_spec(text):
    """Parse an experiment description document into an ExperimentSpec."""
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        raise SpecError(f"malformed document: {exc}") from None
    return parse_mapping(doc)


def spec_to_mapping(spec):
    """Fully resolved nested mapping; parse_mapping inverts it exactly."""
    o, t = spec.observer, spec.tomography
    return {
        "mode": spec.mode,
        "seed": spec.seed,
        "output_dir": spec.output_dir,
        "output_format": spec.output_format,
        "observer": {
            "tau_list": list(o.tau_list),
            "delta_grid": o.delta_grid_size,
            "shots_per_delta": o.shots_per_delta,
            "omega": o.omega,
        },
        "tomography": {
            "external_times": list(t.external_times),
            "counts_per_projection": t.counts_per_projection,
            "mle_tolerance": t.mle_tolerance,
            "mle_max_iters": t.mle_max_iters,
            "erasure_visibility": t.erasure_visibility,
        },
    }


def serialize_spec(spec):
    return yaml.safe_dump(spec_to_mapping(spec), sort_keys=False)
