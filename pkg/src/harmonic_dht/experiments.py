"""Experiment drivers: settling, scaling, worst case and the module reports.

Each ``run_*`` function takes an :class:`ExperimentConfig` and returns a list
of flat records ready for :func:`harmonic_dht.records.emit`. Randomness comes
only from the named streams in :mod:`harmonic_dht.rng`, so a config fully
determines the output.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import adaptation, baselines, hierarchy
from .overlay import Overlay
from .rng import stream
from .routing import greedy_hops
from .stats import settled_index

EXPERIMENTS = ("settle", "scaling", "worst_case", "stationary", "baseline", "hierarchy", "reach")

SETTLE_FIELDS = ["step", "adaptive_queries", "mean_hops", "p99_hops", "max_hops",
                 "resolved_fraction"]


class ConfigError(ValueError):
    pass


_DEFAULTS = {
    "settle": {},
    "scaling": {"queries": 10_000},
    "worst_case": {"queries": 10_000, "trials": 3},
    "stationary": {"n": 64},
    "baseline": {"n": 10_000, "trials": 10_000, "c_local": 33, "c_short": 33},
    "hierarchy": {"n": 4096},
    "reach": {"steps": 16},
}


@dataclass
class ExperimentConfig:
    experiment: str = "settle"
    n: int = 1000
    m: int = 10_000
    seed: int = 0
    probes_per_step: int = 100
    steps: int = 5000
    trials: int = 1
    shortcut_count: int = 1
    comparison: bool = False
    queries: int = 10_000
    sizes: tuple[int, ...] = (256, 512, 1024, 2048, 4096, 8192)
    bootstrap: str = "uniform"
    c_local: int = 1
    c_short: int = 1
    m_exp: int = 1
    budget_factor: int = 2
    far_pairs: bool = False
    offsets: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096,
                                8192, 16384, 32768)
    modulus: int = 65536
    signed: bool = True
    tol: float = 1e-12

    @classmethod
    def for_experiment(cls, experiment: str, **overrides) -> "ExperimentConfig":
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {experiment!r}")
        kw = {**_DEFAULTS[experiment], **overrides}
        cfg = cls(experiment=experiment, **kw)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        positive = ["probes_per_step", "steps", "trials", "queries", "modulus", "m_exp"]
        for name in positive:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.shortcut_count < 0:
            raise ConfigError("shortcut_count must be >= 0")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.bootstrap not in ("uniform", "join"):
            raise ConfigError("bootstrap must be 'uniform' or 'join'")
        if self.experiment == "settle":
            if not 2 <= self.n <= self.m:
                raise ConfigError(f"need 2 <= n <= m, got n={self.n}, m={self.m}")
            if self.shortcut_count < 1:
                raise ConfigError("settling needs at least one shortcut slot")
        if self.experiment in ("scaling", "worst_case") and min(self.sizes) < 2:
            raise ConfigError("sizes must be >= 2")
        if self.experiment == "stationary" and self.n < 2:
            raise ConfigError("stationary needs n >= 2 states")
        if self.experiment == "hierarchy" and self.n < 4:
            raise ConfigError("hierarchy needs n >= 4")
        if self.experiment == "baseline":
            try:
                baselines.UniformRingConfig(self.n, self.c_local, self.c_short, self.m_exp)
            except ValueError as e:
                raise ConfigError(str(e)) from e
        if self.experiment == "reach" and not self.offsets:
            raise ConfigError("reach needs at least one offset")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["sizes"] = list(self.sizes)
        d["offsets"] = list(self.offsets)
        return d


@dataclass
class MetricsRecord:
    step: int
    adaptive_queries: int
    mean_hops: float
    p99_hops: float
    max_hops: int
    resolved_fraction: float
    control_mean_hops: float | None = None


# -- settling ------------------------------------------------------------------

def bootstrap_overlay(cfg: ExperimentConfig) -> Overlay:
    """Grow the initial network for the settling run.

    ``bootstrap="uniform"``: each newcomer is spliced between its nearest keys
    and takes as shortcut a uniformly chosen node that joined before it.
    ``bootstrap="join"``: greedy joins with harmonic shortcuts.
    """
    rng = stream(cfg.seed, "overlay-build")
    s = cfg.shortcut_count
    if cfg.bootstrap == "join":
        o = Overlay.bootstrap(cfg.n, cfg.m, rng, s)
    else:
        keys = rng.choice(cfg.m, size=cfg.n, replace=False).tolist()
        o = Overlay.seed_pair(keys[0], keys[1], cfg.m, s)
        for i, k in enumerate(keys[2:]):
            o.place(k)
            for slot in range(s):
                o.set_shortcut(k, slot, keys[int(rng.integers(i + 2))])
    o.seed = cfg.seed
    return o


def _probe(o: Overlay, keys: np.ndarray, count: int, rng: np.random.Generator):
    n = len(keys)
    si = rng.integers(n, size=count)
    ti = (si + 1 + rng.integers(n - 1, size=count)) % n
    return greedy_hops(o.links, o.m, keys[si], keys[ti]) + (keys[ti],)


def run_settling(cfg: ExperimentConfig, overlay_out: list | None = None) -> list[MetricsRecord]:
    """Adaptive-update run: one update query then ``probes_per_step``
    measurement queries per step.

    The update query picks two distinct live nodes; the target applies the
    replacement rule to the requester. Probes never touch the caches. With
    ``comparison`` the untouched bootstrap overlay is probed alongside from
    its own stream.
    """
    if cfg.experiment != "settle":
        raise ConfigError("run_settling needs experiment='settle'")
    o = bootstrap_overlay(cfg)
    control = o.copy() if cfg.comparison else None
    adapt = stream(cfg.seed, "adaptive")
    probes = stream(cfg.seed, "probes")
    ctrl = stream(cfg.seed, "control")
    keys = o.keys_array()
    n = len(keys)
    out = []
    for step in range(1, cfg.steps + 1):
        a, b = adapt.choice(n, size=2, replace=False)
        adaptation.process_answered_query(o, int(keys[b]), int(keys[a]), adapt)
        hops, term, tgt = _probe(o, keys, cfg.probes_per_step, probes)
        rec = MetricsRecord(
            step=step,
            adaptive_queries=step,
            mean_hops=float(hops.mean()),
            p99_hops=float(np.percentile(hops, 99)),
            max_hops=int(hops.max()),
            resolved_fraction=float(np.mean(term == tgt)),
        )
        if control is not None:
            chops, _, _ = _probe(control, keys, cfg.probes_per_step, ctrl)
            rec.control_mean_hops = float(chops.mean())
        out.append(rec)
    if overlay_out is not None:
        overlay_out.append(o)
    return out


def settle_fields(cfg: ExperimentConfig) -> list[str]:
    return SETTLE_FIELDS + (["control_mean_hops"] if cfg.comparison else [])


def steady_state(records, window: int = 1000) -> float:
    """Mean of ``mean_hops`` over the last ``window`` steps."""
    return float(np.mean([r.mean_hops for r in records[-window:]]))


def settled_point(records, window: int = 1000, stride: int = 100,
                  alpha: float = 0.05) -> int | None:
    """Adaptive-query count at which the Mann-Kendall window first reports
    no trend, or None."""
    i = settled_index([r.mean_hops for r in records], window, stride, alpha)
    return None if i is None else records[i].adaptive_queries


# -- static scaling ------------------------------------------------------------

def static_overlay(n: int, m: int, seed: int, shortcut_count: int = 1,
                   shortcuts: str = "harmonic") -> Overlay:
    """Random key set with directly placed shortcuts; seeded per ``n``."""
    rng = stream(seed, "overlay-build", n)
    keys = rng.choice(m, size=n, replace=False)
    o = Overlay.from_keys(keys, m, rng, shortcut_count, shortcuts=shortcuts, seed=seed)
    return o


def random_pairs(keys: np.ndarray, count: int, rng: np.random.Generator):
    n = len(keys)
    si = rng.integers(n, size=count)
    ti = (si + 1 + rng.integers(n - 1, size=count)) % n
    return keys[si], keys[ti]


def run_scaling(cfg: ExperimentConfig) -> list[dict]:
    """Mean and max hops on static harmonic overlays with ``m = 16 n``."""
    rows = []
    for n in cfg.sizes:
        m = 16 * n
        o = static_overlay(n, m, cfg.seed, cfg.shortcut_count)
        src, dst = random_pairs(o.keys_array(), cfg.queries, stream(cfg.seed, "probes", n))
        hops, _ = greedy_hops(o.links, m, src, dst)
        ln = math.log(n)
        rows.append({
            "n": n,
            "m": m,
            "queries": cfg.queries,
            "mean_hops": float(hops.mean()),
            "max_hops": int(hops.max()),
            "mean_over_ln2": float(hops.mean() / ln ** 2),
            "max_over_ln3": float(hops.max() / ln ** 3),
        })
    return rows


def run_worst_case(cfg: ExperimentConfig) -> list[dict]:
    """Tail of the hop distribution over ``trials`` independent overlays per size."""
    rows = []
    for n in cfg.sizes:
        m = 16 * n
        all_hops = []
        for trial in range(cfg.trials):
            o = static_overlay(n, m, cfg.seed + trial, cfg.shortcut_count)
            src, dst = random_pairs(o.keys_array(), cfg.queries,
                                    stream(cfg.seed + trial, "probes", n))
            all_hops.append(greedy_hops(o.links, m, src, dst)[0])
        hops = np.concatenate(all_hops)
        rows.append({
            "n": n,
            "m": m,
            "queries": int(hops.size),
            "mean_hops": float(hops.mean()),
            "p99_hops": float(np.percentile(hops, 99)),
            "max_hops": int(hops.max()),
            "max_over_ln3": float(hops.max() / math.log(n) ** 3),
        })
    return rows


# -- module reports ------------------------------------------------------------

def run_stationary(cfg: ExperimentConfig) -> list[dict]:
    P = adaptation.transition_matrix(cfg.n)
    computed = adaptation.stationary_distribution(P, cfg.tol)
    analytic = adaptation.harmonic_vector(cfg.n)
    return [
        {"state": x + 1, "analytic_p": float(a), "computed_p": float(c),
         "abs_err": float(abs(a - c))}
        for x, (a, c) in enumerate(zip(analytic, computed))
    ]


def run_baseline(cfg: ExperimentConfig) -> list[dict]:
    """Greedy success rate on the uniform-shortcut ring vs the analytic bounds."""
    rc = baselines.UniformRingConfig(cfg.n, cfg.c_local, cfg.c_short, cfg.m_exp)
    o = baselines.build_uniform_ring(rc, stream(cfg.seed, "overlay-build"))
    budget = cfg.budget_factor * math.ceil(rc.polylog)
    min_dist = budget * rc.c_local if cfg.far_pairs else 0
    rate = baselines.monte_carlo_success(o, budget, cfg.trials, stream(cfg.seed, "probes"),
                                         min_distance=min_dist)
    fail_bound, success_bound = baselines.freenet_bound(rc)
    return [{
        "n": cfg.n,
        "c_local": cfg.c_local,
        "c_short": cfg.c_short,
        "epsilon": rc.epsilon,
        "budget": budget,
        "success_rate": rate,
        "analytic_failure_bound": fail_bound,
        "analytic_success_bound": success_bound,
    }]


def run_hierarchy(cfg: ExperimentConfig) -> list[dict]:
    """Nested-shortcut search vs the flat one-shortcut overlay on the same keys."""
    n, m = cfg.n, 16 * cfg.n
    flat = static_overlay(n, m, cfg.seed, 1)
    h = hierarchy.build_labels(n)
    nested = hierarchy.build_nested_overlay(flat, h, stream(cfg.seed, "overlay-build", n, 1))
    src, dst = random_pairs(flat.keys_array(), cfg.queries, stream(cfg.seed, "probes", n))
    flat_hops, _ = greedy_hops(flat.links, m, src, dst)
    nest_hops = [hierarchy.hierarchical_greedy_search(nested, int(a), int(b)).hops
                 for a, b in zip(src.tolist(), dst.tolist())]
    return [{
        "n": n,
        "depth": h.depth,
        "cache_size": int(nested.cache_sizes.max()),
        "mean_hops": float(np.mean(nest_hops)),
        "flat_mean_hops": float(flat_hops.mean()),
    }]


def run_reach(cfg: ExperimentConfig) -> list[dict]:
    scheme = baselines.OffsetScheme(tuple(cfg.offsets), cfg.modulus, cfg.signed)
    counts = baselines.reach_profile(scheme, cfg.steps)
    return [{"steps": L, "reach": c, "bound": (2 * L + 1) ** scheme.d}
            for L, c in enumerate(counts)]


RUNNERS = {
    "settle": run_settling,
    "scaling": run_scaling,
    "worst_case": run_worst_case,
    "stationary": run_stationary,
    "baseline": run_baseline,
    "hierarchy": run_hierarchy,
    "reach": run_reach,
}


def run(cfg: ExperimentConfig) -> tuple[list[str] | None, list]:
    """Dispatch on ``cfg.experiment``; returns ``(fields, records)``."""
    cfg.validate()
    records = RUNNERS[cfg.experiment](cfg)
    fields = settle_fields(cfg) if cfg.experiment == "settle" else None
    return fields, records
