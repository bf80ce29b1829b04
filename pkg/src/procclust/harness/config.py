"""Flat ``key = value`` experiment configuration.

Example::

    # Fig. 2 style sweep
    models = (0.6, 0.7pi), (0.6, 0.4pi)
    n_per_model = 25
    M = 400
    sigma = 0.2
    p = 1
    window = bartlett 101
    metric = L1
    algorithm = nnpc
    q = 10
    L = 2
    trials = 10
    master_seed = 0
    sweep.nu2 = 0.4pi, 0.5pi, 0.6pi
    sweep.sigma = 0, 0.5, 1

Numbers accept a ``pi`` suffix (``0.7pi``). ``#`` starts a comment. Unknown
keys are rejected. ``psd_files`` may replace ``models`` with tabulated PSDs
(one value per line, uniform grid over ``[0, 1)``).
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

ALGORITHMS = ("nnpc", "km", "kmit", "sl", "al", "cl", "tsc")
SWEEP_AXES = ("nu2", "M", "sigma", "inv_p")
METRIC_NAMES = {"l1": "L1", "l2": "L2", "linf": "Linf"}


class ConfigError(ValueError):
    """Invalid configuration; carries the offending line or field."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"field '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


class DataError(ValueError):
    """Unreadable or invalid input series."""


@dataclass(frozen=True)
class ExperimentConfig:
    models: tuple = ((0.6, 0.7 * math.pi), (0.6, 0.4 * math.pi))
    psd_files: tuple = ()
    n_per_model: int = 25
    M: int = 2000
    sigma: float = 0.0
    p: float = 1.0
    window: str = "bartlett"
    W: int | None = 101  # None: W equals the series length
    bias_correction: bool = True
    metric: str = "L1"
    algorithm: str = "nnpc"
    q: int = 10
    L: int | None = 2  # None: eigengap estimate
    L_max: int = 10
    kmit_iters: int = 100
    trials: int = 10
    master_seed: int = 0
    normalize: bool = False
    center: bool = False
    sweep: tuple = ()  # ((axis, (values...)), ...)

    def validate(self) -> "ExperimentConfig":
        def bad(key, msg):
            raise ConfigError(msg, key=key)

        if not self.models and not self.psd_files:
            bad("models", "at least one model or psd_files entry is required")
        for a, nu in self.models:
            if not 0 < a < 1:
                bad("models", f"pole radius {a} outside (0, 1)")
            if not 0 <= nu <= math.pi + 1e-12:
                bad("models", f"frequency {nu} outside [0, pi]")
        if self.n_per_model < 1:
            bad("n_per_model", "must be >= 1")
        if self.M < 2:
            bad("M", "must be >= 2")
        if self.sigma < 0:
            bad("sigma", "must be >= 0")
        if not 0 < self.p <= 1:
            bad("p", "must lie in (0, 1]")
        if self.window != "bartlett":
            bad("window", f"unsupported window {self.window!r}")
        if self.W is not None and self.W < 3:
            bad("window", "Bartlett length must be >= 3")
        if self.metric not in METRIC_NAMES.values():
            bad("metric", f"unknown metric {self.metric!r}")
        if self.algorithm not in ALGORITHMS:
            bad("algorithm", f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.q < 1:
            bad("q", "must be >= 1")
        if self.L is not None and self.L < 1:
            bad("L", "must be >= 1 or 'eigengap'")
        if self.L_max < 2:
            bad("L_max", "must be >= 2")
        if self.trials < 1:
            bad("trials", "must be >= 1")
        if self.kmit_iters < 0:
            bad("kmit_iters", "must be >= 0")
        axes = [a for a, _ in self.sweep]
        if len(axes) > 2:
            bad("sweep", "at most two sweep axes")
        if len(set(axes)) != len(axes):
            bad("sweep", "sweep axes must be distinct")
        for axis, values in self.sweep:
            if not values:
                bad(f"sweep.{axis}", "empty value list")
            for v in values:
                if axis == "M" and (v < 2 or int(v) != v):
                    bad("sweep.M", f"invalid length {v}")
                if axis == "sigma" and v < 0:
                    bad("sweep.sigma", f"negative noise level {v}")
                if axis == "inv_p" and v < 1:
                    bad("sweep.inv_p", f"1/p must be >= 1, got {v}")
                if axis == "nu2" and not 0 <= v <= math.pi + 1e-12:
                    bad("sweep.nu2", f"frequency {v} outside [0, pi]")
        if "nu2" in axes and len(self.models) < 2:
            bad("sweep.nu2", "needs at least two AR(2) models")
        return self

    def at(self, point: dict) -> "ExperimentConfig":
        """Copy with the sweep coordinates in ``point`` applied."""
        cfg = replace(self, sweep=())
        for axis, v in point.items():
            if axis == "nu2":
                models = list(cfg.models)
                models[1] = (models[1][0], v)
                cfg = replace(cfg, models=tuple(models))
            elif axis == "M":
                cfg = replace(cfg, M=int(v))
            elif axis == "sigma":
                cfg = replace(cfg, sigma=float(v))
            elif axis == "inv_p":
                cfg = replace(cfg, p=1.0 / float(v))
        return cfg

    def digest(self) -> str:
        text = repr(tuple((f.name, getattr(self, f.name)) for f in fields(self)))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


_NUM = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*(pi)?$")


def parse_number(text: str) -> float:
    s = text.strip().lower().replace("π", "pi")
    mt = _NUM.match(s)
    if not s or not mt or (mt.group(1) is None and mt.group(2) is None):
        raise ValueError(f"not a number: {text!r}")
    base = float(mt.group(1)) if mt.group(1) else 1.0
    return base * math.pi if mt.group(2) else base


def _parse_list(text: str) -> list[float]:
    return [parse_number(t) for t in text.split(",") if t.strip()]


def _parse_models(text: str) -> tuple:
    pairs = re.findall(r"\(([^()]*)\)", text)
    if not pairs or re.sub(r"\([^()]*\)|[\s,]", "", text):
        raise ValueError("expected '(a, nu), (a, nu), ...'")
    out = []
    for pair in pairs:
        vals = _parse_list(pair)
        if len(vals) != 2:
            raise ValueError(f"model '({pair})' needs exactly two numbers")
        out.append((vals[0], vals[1]))
    return tuple(out)


def _parse_bool(text: str) -> bool:
    s = text.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int(text: str) -> int:
    v = parse_number(text)
    if int(v) != v:
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _parse_window(text: str) -> tuple[str, int | None]:
    parts = text.split()
    if not parts:
        raise ValueError("empty window")
    kind = parts[0].lower()
    if len(parts) == 1 or parts[1].lower() in ("auto", "full"):
        return kind, None
    return kind, _parse_int(parts[1])


def _parse_L(text: str) -> int | None:
    return None if text.strip().lower() == "eigengap" else _parse_int(text)


def _parse_metric(text: str) -> str:
    key = text.strip().lower()
    if key not in METRIC_NAMES:
        raise ValueError(f"unknown metric {text!r}")
    return METRIC_NAMES[key]


_SCALARS = {
    "n_per_model": _parse_int,
    "M": _parse_int,
    "sigma": parse_number,
    "p": parse_number,
    "metric": _parse_metric,
    "algorithm": lambda s: s.strip().lower(),
    "q": _parse_int,
    "L": _parse_L,
    "L_max": _parse_int,
    "kmit_iters": _parse_int,
    "trials": _parse_int,
    "master_seed": _parse_int,
    "normalize": _parse_bool,
    "center": _parse_bool,
    "bias_correction": _parse_bool,
}


def parse_config(text: str, base_dir: Path | None = None) -> ExperimentConfig:
    values: dict = {}
    sweep = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"duplicate key (first on line {seen[key]})", line=lineno, key=key)
        seen[key] = lineno
        try:
            if key == "models":
                values["models"] = _parse_models(val)
            elif key == "psd_files":
                paths = [Path(s.strip()) for s in val.split(",") if s.strip()]
                if base_dir is not None:
                    paths = [p if p.is_absolute() else base_dir / p for p in paths]
                values["psd_files"] = tuple(str(p) for p in paths)
            elif key == "window":
                values["window"], values["W"] = _parse_window(val)
            elif key.startswith("sweep."):
                axis = key[len("sweep.") :]
                if axis not in SWEEP_AXES:
                    raise ConfigError(f"unknown sweep axis; expected one of {SWEEP_AXES}", line=lineno, key=key)
                sweep.append((axis, tuple(_parse_list(val))))
            elif key in _SCALARS:
                values[key] = _SCALARS[key](val)
            else:
                raise ConfigError("unknown key", line=lineno, key=key)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc), line=lineno, key=key) from None
    if sweep:
        values["sweep"] = tuple(sweep)
    if "psd_files" in values and "models" not in values:
        values["models"] = ()
    return ExperimentConfig(**values).validate()


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=path.parent)
