"""Experiment configuration: INI files with environment and flag overrides.

Layout::

    [experiment]
    suite = thm-main-verify
    seed = 7
    instances = 50
    threads = 4
    budget_ms = 0
    out = results/thm.jsonl

    [params]
    dim = 4

Unknown sections or keys are rejected. Precedence is flags > environment
(``OPLAB_SEED``, ``OPLAB_THREADS``) > file > defaults.
"""
import configparser
from dataclasses import dataclass, field, replace
import hashlib
import json
import os


class ConfigError(ValueError):
    exit_code = 2


EXPERIMENT_KEYS = {"suite", "seed", "instances", "threads", "budget_ms", "out", "format"}
SEED_MASK = 2**64 - 1


def _parse_seed(v):
    s = int(str(v), 0)
    if not 0 <= s <= SEED_MASK:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {v}")
    return s


def _coerce(v):
    try:
        return json.loads(v)
    except (json.JSONDecodeError, TypeError):
        return v


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str
    seed: int = None
    instances: int = None
    threads: int = 1
    budget_ms: int = 0
    out: str = None
    format: str = "jsonl"
    params: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path):
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        if not cp.read(path):
            raise ConfigError(f"cannot read config file {path}")
        extra = set(cp.sections()) - {"experiment", "params"}
        if extra:
            raise ConfigError(f"unknown config section(s): {', '.join(sorted(extra))}")
        if not cp.has_section("experiment"):
            raise ConfigError("config needs an [experiment] section")
        exp = dict(cp.items("experiment"))
        bad = set(exp) - EXPERIMENT_KEYS
        if bad:
            raise ConfigError(f"unknown key(s) in [experiment]: {', '.join(sorted(bad))}")
        if "suite" not in exp:
            raise ConfigError("[experiment] must name a suite")
        kw = {"suite": exp["suite"]}
        if "seed" in exp:
            kw["seed"] = _parse_seed(exp["seed"])
        for k in ("instances", "threads", "budget_ms"):
            if k in exp:
                kw[k] = int(exp[k])
        for k in ("out", "format"):
            if k in exp:
                kw[k] = exp[k]
        if cp.has_section("params"):
            kw["params"] = {k: _coerce(v) for k, v in cp.items("params")}
        return cls(**kw)

    def with_env(self, environ=None):
        env = os.environ if environ is None else environ
        cfg = self
        if env.get("OPLAB_SEED"):
            cfg = replace(cfg, seed=_parse_seed(env["OPLAB_SEED"]))
        if env.get("OPLAB_THREADS"):
            cfg = replace(cfg, threads=int(env["OPLAB_THREADS"]))
        return cfg

    def with_flags(self, **flags):
        return replace(self, **{k: v for k, v in flags.items() if v is not None})

    def fingerprint(self, version):
        """Hash of everything that determines the numbers (not threads, budget or paths)."""
        key = {"suite": self.suite, "seed": self.seed, "instances": self.instances,
               "params": self.params, "version": version}
        return hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:16]


def resolve(path=None, suite=None, environ=None, **flags):
    """Config from file (if any), then environment, then flags."""
    if path:
        cfg = ExperimentConfig.from_file(path)
        if suite and suite != cfg.suite:
            cfg = replace(cfg, suite=suite)
    elif suite:
        cfg = ExperimentConfig(suite)
    else:
        raise ConfigError("no suite given (use --config or a suite name)")
    return cfg.with_env(environ).with_flags(**flags)
