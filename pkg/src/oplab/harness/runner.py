"""Suite execution with an append-only JSON-lines log.

Instances run on a thread pool but are written by the calling thread in
index order, so the log is identical for any worker count. A rerun with the
same config fingerprint reuses the records already in the log.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import json
import os
import time

from .. import __version__
from .._rng import rng_for
from .config import ConfigError
from .suites import get_suite

QUANTITY_FIELDS = ("suite", "instance", "seed", "config_hash", "quantities")


@dataclass
class ReportRecord:
    suite: str
    instance: int
    seed: int
    config_hash: str
    quantities: dict
    witnesses: dict = field(default_factory=dict)
    wall_time: float = 0.0
    version: str = __version__

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line):
        return cls(**json.loads(line))

    def quantity_fields(self):
        d = asdict(self)
        return {k: d[k] for k in QUANTITY_FIELDS}


def instance_seed(seed, suite, i):
    return int(rng_for(seed, "instance", suite, i).integers(2**63))


def _run_one(suite, seed, params, i):
    s = instance_seed(seed, suite.name, i)
    rng = rng_for(s, suite.name)
    t = time.perf_counter()
    quantities, witnesses = suite.run(rng, s, params)
    return quantities, witnesses, time.perf_counter() - t


def read_log(path):
    if not os.path.exists(path):
        raise FileNotFoundError(f"result log {path} does not exist")
    with open(path) as fh:
        return [ReportRecord.from_json(line) for line in fh if line.strip()]


def run_suite(cfg, log_path=None):
    """Run ``cfg.suite`` and yield one ReportRecord per instance, in index order."""
    suite = get_suite(cfg.suite)
    params = suite.params(cfg.params)
    if suite.stochastic and cfg.seed is None:
        raise ConfigError(f"suite {suite.name} is stochastic: a seed is required (--seed, OPLAB_SEED or config)")
    n = suite.instances if cfg.instances is None else int(cfg.instances)
    fp = cfg.with_flags(params=params, instances=n).fingerprint(__version__)
    log_path = log_path or cfg.out
    cached = {}
    if log_path and os.path.exists(log_path):
        for r in read_log(log_path):
            if r.config_hash == fp:
                cached[r.instance] = r
    todo = [i for i in range(n) if i not in cached]
    deadline = time.monotonic() + cfg.budget_ms / 1000.0 if cfg.budget_ms else None
    fh = None
    if log_path and todo:
        os.makedirs(os.path.dirname(os.path.abspath(log_path)), exist_ok=True)
        fh = open(log_path, "a")
    try:
        with ThreadPoolExecutor(max_workers=max(1, int(cfg.threads))) as pool:
            futures = {}
            for i in range(n):
                if i in cached:
                    yield cached[i]
                    continue
                # keep a small window of submitted work ahead of the writer
                for j in todo:
                    if len(futures) >= 2 * max(1, cfg.threads) or j in futures:
                        continue
                    if j >= i and (deadline is None or time.monotonic() < deadline):
                        futures[j] = pool.submit(_run_one, suite, cfg.seed, params, j)
                if i not in futures:
                    break
                qs, wit, wall = futures.pop(i).result()
                rec = ReportRecord(suite.name, i, cfg.seed, fp, qs, wit, wall)
                if fh:
                    fh.write(rec.to_json() + "\n")
                    fh.flush()
                yield rec
    finally:
        if fh:
            fh.close()
