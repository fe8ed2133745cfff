"""Experiment configuration: JSON loading and validation."""

import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from dotenv import load_dotenv

from .checks import DEFAULT_N_MAX, DEFAULT_SAMPLE_RADIUS, DEFAULT_SAMPLES
from .errors import ConfigError, FixpointError
from .operators import KSequence, OperatorSpec, PsiSpec, operator_from_dict
from .scheme import IterationConfig, ScheduleSpec
from .spaces import NormTag, Point

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SEED_ENV = "FIXPOINT_SEED"

TOP_KEYS = {"schema_version", "norm_p", "dim", "seed", "output", "iteration", "classify"}
ITERATION_KEYS = {"p", "operators", "alpha", "betas", "x1", "xstar", "n_max", "tol", "M"}
CLASSIFY_KEYS = {"operator", "samples", "sample_radius", "n_max", "checks"}
CHECK_KEYS = {
    "lipschitz": {"L"},
    "power_lipschitz": {"n"},
    "uniform_lipschitz": {"L", "n_max"},
    "asymptotic_pseudocontractivity": {"k", "n_max"},
    "star_condition": {"xstar", "k", "psi", "n_max"},
    "unique_fixed_point": {"xstar", "candidates"},
}
OPERATOR_KEYS = {
    "scaling": {"kind", "c"},
    "toward_point": {"kind", "center", "r"},
    "affine": {"kind", "A", "b"},
    "clamp": {"kind", "lo", "hi"},
}


@dataclass(frozen=True)
class CheckPlan:
    name: str
    params: Dict[str, Any]


@dataclass(frozen=True)
class ClassifyPlan:
    operator: OperatorSpec
    samples: int = DEFAULT_SAMPLES
    sample_radius: float = DEFAULT_SAMPLE_RADIUS
    n_max: int = DEFAULT_N_MAX
    checks: Tuple[CheckPlan, ...] = ()


@dataclass(frozen=True)
class ExperimentConfig:
    source: str
    norm: NormTag
    dim: int
    seed: int
    seed_from_env: bool = False
    output: Optional[str] = None
    iteration: Optional[IterationConfig] = None
    classify: Optional[ClassifyPlan] = None
    raw: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)


def _require_keys(obj: Any, path: str, allowed: set, required: set = frozenset()) -> Dict[str, Any]:
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown field")
    for key in sorted(required):
        if key not in obj:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return obj


def _number(obj: Dict[str, Any], key: str, path: str, default: Optional[float] = None) -> float:
    where = f"{path}.{key}" if path else key
    if key not in obj:
        if default is None:
            raise ConfigError(where, "missing required field")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(where, f"expected a finite number, got {value!r}")
    return float(value)


def _integer(obj: Dict[str, Any], key: str, path: str, default: Optional[int] = None,
             minimum: int = 1) -> int:
    where = f"{path}.{key}" if path else key
    if key not in obj:
        if default is None:
            raise ConfigError(where, "missing required field")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(where, f"must be >= {minimum}, got {value}")
    return value


def _point(value: Any, path: str, dim: int) -> Point:
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(path, "expected a list of numbers")
    if len(value) != dim:
        raise ConfigError(path, f"dimension mismatch: expected {dim} coordinates, got {len(value)}")
    try:
        return Point(value)
    except FixpointError as exc:
        raise ConfigError(path, str(exc)) from exc


def _guarded(path: str, build):
    try:
        return build()
    except ConfigError:
        raise
    except (FixpointError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(path, str(exc)) from exc


def _operator(obj: Any, path: str, dim: int) -> OperatorSpec:
    if not isinstance(obj, dict) or obj.get("kind") not in OPERATOR_KEYS:
        kind = obj.get("kind") if isinstance(obj, dict) else None
        raise ConfigError(f"{path}.kind", f"unknown operator kind {kind!r}; expected one of {sorted(OPERATOR_KEYS)}")
    kind = obj["kind"]
    _require_keys(obj, path, OPERATOR_KEYS[kind], OPERATOR_KEYS[kind])
    if kind == "toward_point":
        _point(obj["center"], f"{path}.center", dim)
    if kind == "affine":
        _point(obj["b"], f"{path}.b", dim)
        matrix = obj["A"]
        if not isinstance(matrix, list) or len(matrix) != dim:
            raise ConfigError(f"{path}.A", f"dimension mismatch: expected {dim} rows")
        for i, row in enumerate(matrix):
            _point(row, f"{path}.A[{i}]", dim)
    for key in OPERATOR_KEYS[kind] - {"kind", "center", "A", "b"}:
        _number(obj, key, path)
    return _guarded(path, lambda: operator_from_dict(obj))


def _schedule(obj: Any, path: str) -> ScheduleSpec:
    _require_keys(obj, path, {"a", "b", "q"}, {"a"})
    return _guarded(path, lambda: ScheduleSpec(
        _number(obj, "a", path), _number(obj, "b", path, 0.0), _number(obj, "q", path, 1.0)))


def _k_sequence(obj: Any, path: str) -> KSequence:
    if obj is None:
        return KSequence()
    _require_keys(obj, path, {"c", "s"})
    return _guarded(path, lambda: KSequence(_number(obj, "c", path, 0.0), _number(obj, "s", path, 1.0)))


def _psi(obj: Any, path: str) -> PsiSpec:
    _require_keys(obj, path, {"lambda", "m"}, {"lambda"})
    return _guarded(path, lambda: PsiSpec(_number(obj, "lambda", path), _number(obj, "m", path, 1.0)))


def _iteration(obj: Any, dim: int, norm: NormTag) -> IterationConfig:
    path = "iteration"
    _require_keys(obj, path, ITERATION_KEYS, {"p", "operators", "alpha", "betas", "x1"})
    p = _integer(obj, "p", path, minimum=-(10**9))
    if p < 2:
        raise ConfigError(f"{path}.p", f"the scheme needs p >= 2, got {p}")
    operators = obj["operators"]
    if not isinstance(operators, list) or len(operators) != p:
        raise ConfigError(f"{path}.operators", f"expected exactly p={p} operators")
    betas = obj["betas"]
    if not isinstance(betas, list) or len(betas) != p - 1:
        raise ConfigError(f"{path}.betas", f"expected exactly p-1={p - 1} beta schedules")
    ops = [_operator(op, f"{path}.operators[{i}]", dim) for i, op in enumerate(operators)]
    alpha = _schedule(obj["alpha"], f"{path}.alpha")
    beta_specs = [_schedule(b, f"{path}.betas[{i}]") for i, b in enumerate(betas)]
    x1 = _point(obj["x1"], f"{path}.x1", dim)
    xstar = _point(obj["xstar"], f"{path}.xstar", dim) if obj.get("xstar") is not None else None
    n_max = _integer(obj, "n_max", path, 10_000)
    tol = _number(obj, "tol", path, 1e-3)
    if tol < 0:
        raise ConfigError(f"{path}.tol", "must be >= 0")
    M = _number(obj, "M", path, 1.0)
    if M <= 0:
        raise ConfigError(f"{path}.M", "must be > 0")
    return _guarded(path, lambda: IterationConfig(
        p=p, operators=tuple(ops), alpha=alpha, betas=tuple(beta_specs), x1=x1, xstar=xstar,
        n_max=n_max, tol=tol, M=M, norm=norm))


def _check(name: str, obj: Any, path: str, dim: int, default_n_max: int) -> CheckPlan:
    _require_keys(obj, path, CHECK_KEYS[name])
    params: Dict[str, Any] = {}
    if "n_max" in CHECK_KEYS[name]:
        params["n_max"] = _integer(obj, "n_max", path, default_n_max)
    if name in ("lipschitz", "uniform_lipschitz"):
        L = _number(obj, "L", path)
        if L <= 0:
            raise ConfigError(f"{path}.L", "must be > 0")
        params["L"] = L
    if name == "power_lipschitz":
        params["n"] = _integer(obj, "n", path, 1)
    if name == "asymptotic_pseudocontractivity":
        params["k"] = _k_sequence(obj.get("k"), f"{path}.k")
    if name == "star_condition":
        _require_keys(obj, path, CHECK_KEYS[name], {"xstar", "psi"})
        params["xstar"] = _point(obj["xstar"], f"{path}.xstar", dim)
        params["k"] = _k_sequence(obj.get("k"), f"{path}.k")
        params["psi"] = _psi(obj["psi"], f"{path}.psi")
    if name == "unique_fixed_point":
        _require_keys(obj, path, CHECK_KEYS[name], {"xstar"})
        params["xstar"] = _point(obj["xstar"], f"{path}.xstar", dim)
        params["candidates"] = _integer(obj, "candidates", path, DEFAULT_SAMPLES)
    return CheckPlan(name, params)


def _classify(obj: Any, dim: int) -> ClassifyPlan:
    path = "classify"
    _require_keys(obj, path, CLASSIFY_KEYS, {"operator", "checks"})
    operator = _operator(obj["operator"], f"{path}.operator", dim)
    samples = _integer(obj, "samples", path, DEFAULT_SAMPLES)
    radius = _number(obj, "sample_radius", path, DEFAULT_SAMPLE_RADIUS)
    if radius <= 0:
        raise ConfigError(f"{path}.sample_radius", "must be > 0")
    n_max = _integer(obj, "n_max", path, DEFAULT_N_MAX)
    checks_obj = _require_keys(obj["checks"], f"{path}.checks", set(CHECK_KEYS))
    if not checks_obj:
        raise ConfigError(f"{path}.checks", "select at least one check")
    checks: List[CheckPlan] = []
    for name in CHECK_KEYS:
        if name in checks_obj:
            checks.append(_check(name, checks_obj[name] or {}, f"{path}.checks.{name}", dim, n_max))
    return ClassifyPlan(operator, samples, radius, n_max, tuple(checks))


def parse_config(data: Any, source: str = "<memory>", env: Optional[Dict[str, str]] = None) -> ExperimentConfig:
    """Validate a decoded JSON document; nothing is computed before this passes."""
    env = os.environ if env is None else env
    _require_keys(data, "", TOP_KEYS, {"schema_version", "dim"})
    version = data["schema_version"]
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported schema version {version!r}; expected {SCHEMA_VERSION}")
    dim = _integer(data, "dim", "")
    norm_p = _number(data, "norm_p", "", 2.0)
    norm = _guarded("norm_p", lambda: NormTag(norm_p))
    seed = _integer(data, "seed", "", 0, minimum=0)
    seed_from_env = False
    if env.get(SEED_ENV):
        try:
            seed = int(env[SEED_ENV])
        except ValueError as exc:
            raise ConfigError(SEED_ENV, f"expected an integer, got {env[SEED_ENV]!r}") from exc
        if seed < 0:
            raise ConfigError(SEED_ENV, f"must be >= 0, got {seed}")
        seed_from_env = True
    output = data.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output", "expected a file path string")
    if "iteration" not in data and "classify" not in data:
        raise ConfigError("", "config needs an 'iteration' or a 'classify' section")
    iteration = _iteration(data["iteration"], dim, norm) if "iteration" in data else None
    classify = _classify(data["classify"], dim) if "classify" in data else None
    return ExperimentConfig(source, norm, dim, seed, seed_from_env, output, iteration, classify, data)


def load_config(path: str) -> ExperimentConfig:
    """Read and validate a JSON experiment file, honouring a local .env."""
    load_dotenv()
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError("", f"Config file not found: {path}")
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"Invalid JSON in {path}: {exc}") from exc
    config = parse_config(data, source=str(config_path))
    logger.debug("loaded %s (dim=%d, seed=%d)", config_path, config.dim, config.seed)
    return config
