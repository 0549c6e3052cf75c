"""Run configuration: a single declarative YAML file plus --set overrides.

Runs are meant to be diffable and archivable; every artifact embeds the
fully resolved configuration (defaults included) so reports are
self-describing.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .models import ForecasterSpec
from .series import CsvSpec, QualityPolicy
from .synth import SynthSpec

METRICS = ("rmse", "mae")
PREPROC = ("none", "standardize", "log1p")


@dataclass(frozen=True)
class DataConfig:
    csv_path: str | None = None
    csv_spec: CsvSpec = CsvSpec()
    quality: QualityPolicy | None = None
    synth: SynthSpec | None = None


@dataclass(frozen=True)
class ProtocolConfig:
    kind: str                      # rolling | static
    boundary: dt.date | None = None
    initial_train_end: dt.date | None = None
    min_test: int = 15


@dataclass(frozen=True)
class RunConfig:
    data: DataConfig
    models: tuple[ForecasterSpec, ...]
    protocol: ProtocolConfig
    h_max: int = 7
    preprocessing: str = "none"
    metric: str = "rmse"
    seed: int = 0
    jobs: int = 1
    out_dir: str | None = None


def load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return raw


def apply_overrides(cfg: dict, assignments) -> dict:
    """Apply ``--set dotted.path=value`` overrides; integer path segments
    index lists (e.g. models.0.n_trees=100). Values are YAML-parsed."""
    for item in assignments or ():
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        path, raw_value = item.split("=", 1)
        keys = path.strip().split(".")
        if not all(keys):
            raise ConfigError(f"bad --set path {path!r}")
        try:
            value = yaml.safe_load(raw_value)
        except yaml.YAMLError:
            value = raw_value
        node = cfg
        for i, key in enumerate(keys):
            last = i == len(keys) - 1
            if isinstance(node, list):
                try:
                    idx = int(key)
                    node[idx]
                except (ValueError, IndexError) as exc:
                    raise ConfigError(
                        f"--set {path!r}: bad list index {key!r}") from exc
                if last:
                    node[idx] = value
                else:
                    node = node[idx]
            elif isinstance(node, dict):
                if last:
                    node[key] = value
                else:
                    node = node.setdefault(key, {})
                    if not isinstance(node, (dict, list)):
                        raise ConfigError(
                            f"--set {path!r}: {key!r} is not a section")
            else:
                raise ConfigError(f"--set {path!r}: cannot descend into {key!r}")
    return cfg


def _as_date(value, what: str) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    try:
        return dt.date.fromisoformat(str(value))
    except ValueError as exc:
        raise ConfigError(f"{what} must be an ISO date, got {value!r}") from exc


def _build_data(raw: dict, default_seed: int) -> DataConfig:
    data = dict(raw or {})
    csv_path = data.pop("csv", None)
    synth_raw = data.pop("synth", None)
    if (csv_path is None) == (synth_raw is None):
        raise ConfigError("data needs exactly one of 'csv' or 'synth'")
    csv_spec = CsvSpec(
        date_column=str(data.pop("date_column", "date")),
        value_column=str(data.pop("value_column", "value")),
        name=data.pop("name", None),
    )
    quality = None
    q = data.pop("quality_filter", False)
    if q:
        q = dict(q) if isinstance(q, dict) else {}
        ceiling = q.pop("ceiling", None)
        try:
            quality = QualityPolicy(
                require_nonnegative=bool(q.pop("nonnegative", True)),
                require_finite=bool(q.pop("finite", True)),
                ceiling=None if ceiling is None else float(ceiling),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad quality_filter: {exc}") from exc
        if q:
            raise ConfigError(f"unknown quality_filter keys: {sorted(q)}")
    if data:
        raise ConfigError(f"unknown data keys: {sorted(data)}")
    synth = None
    if synth_raw is not None:
        if not isinstance(synth_raw, dict):
            raise ConfigError("data.synth must be a mapping")
        synth_raw = dict(synth_raw)
        synth_raw.setdefault("seed", default_seed)
        synth = SynthSpec.from_dict(synth_raw)
    return DataConfig(csv_path=csv_path, csv_spec=csv_spec,
                      quality=quality, synth=synth)


def _build_protocol(raw: dict) -> ProtocolConfig:
    proto = dict(raw or {})
    kind = proto.pop("kind", None)
    if kind not in ("rolling", "static"):
        raise ConfigError("protocol.kind must be 'rolling' or 'static'")
    boundary = proto.pop("boundary", None)
    initial = proto.pop("initial_train_end", None)
    min_test = proto.pop("min_test", 15)
    if proto:
        raise ConfigError(f"unknown protocol keys: {sorted(proto)}")
    if kind == "static":
        if boundary is None or initial is not None:
            raise ConfigError("static protocol needs 'boundary' only")
        return ProtocolConfig(kind="static",
                              boundary=_as_date(boundary, "boundary"))
    if initial is None or boundary is not None:
        raise ConfigError("rolling protocol needs 'initial_train_end' only")
    try:
        min_test = int(min_test)
    except (TypeError, ValueError) as exc:
        raise ConfigError("min_test must be an integer") from exc
    if min_test < 1:
        raise ConfigError("min_test must be >= 1")
    return ProtocolConfig(kind="rolling",
                          initial_train_end=_as_date(initial,
                                                     "initial_train_end"),
                          min_test=min_test)


def build_run_config(cfg: dict) -> RunConfig:
    raw = dict(cfg)
    try:
        h_max = int(raw.pop("h_max", 7))
        seed = int(raw.pop("seed", 0))
        jobs = int(raw.pop("jobs", 1))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scalar setting: {exc}") from exc
    if h_max < 1:
        raise ConfigError("h_max must be >= 1")
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    preprocessing = str(raw.pop("preprocessing", "none"))
    if preprocessing not in PREPROC:
        raise ConfigError(f"preprocessing must be one of {PREPROC}")
    metric = str(raw.pop("metric", "rmse"))
    if metric not in METRICS:
        raise ConfigError(f"metric must be one of {METRICS}")
    out_dir = raw.pop("out", None)

    data = _build_data(raw.pop("data", None) or {}, seed)
    protocol = _build_protocol(raw.pop("protocol", None) or {})

    models_raw = raw.pop("models", None)
    if not models_raw or not isinstance(models_raw, list):
        raise ConfigError("config needs a non-empty 'models' list")
    models = []
    for entry in models_raw:
        if not isinstance(entry, dict):
            raise ConfigError(f"model entries must be mappings, got {entry!r}")
        entry = dict(entry)
        # default the GBT seed from the run seed when not set explicitly
        if entry.get("kind") == "gbt" and "rng_seed" not in entry:
            entry["rng_seed"] = seed
        models.append(ForecasterSpec.from_dict(entry))
    tags = [m.tag for m in models]
    if len(set(tags)) != len(tags):
        raise ConfigError(f"model tags must be unique, got {tags}")
    if raw:
        raise ConfigError(f"unknown config keys: {sorted(raw)}")
    return RunConfig(
        data=data,
        models=tuple(models),
        protocol=protocol,
        h_max=h_max,
        preprocessing=preprocessing,
        metric=metric,
        seed=seed,
        jobs=jobs,
        out_dir=out_dir,
    )


def resolved_dict(rc: RunConfig) -> dict:
    """Fully defaulted configuration echo for artifacts."""
    data: dict = {
        "date_column": rc.data.csv_spec.date_column,
        "value_column": rc.data.csv_spec.value_column,
    }
    if rc.data.csv_path is not None:
        data["csv"] = str(rc.data.csv_path)
    if rc.data.synth is not None:
        data["synth"] = rc.data.synth.to_dict()
    if rc.data.quality is not None:
        data["quality_filter"] = {
            "nonnegative": rc.data.quality.require_nonnegative,
            "finite": rc.data.quality.require_finite,
            "ceiling": rc.data.quality.ceiling,
        }
    if rc.protocol.kind == "static":
        protocol = {"kind": "static",
                    "boundary": rc.protocol.boundary.isoformat()}
    else:
        protocol = {"kind": "rolling",
                    "initial_train_end":
                        rc.protocol.initial_train_end.isoformat(),
                    "min_test": rc.protocol.min_test}
    return {
        "h_max": rc.h_max,
        "preprocessing": rc.preprocessing,
        "metric": rc.metric,
        "seed": rc.seed,
        "data": data,
        "protocol": protocol,
        "models": [m.to_dict() for m in rc.models],
    }
