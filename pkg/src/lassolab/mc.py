"""Deterministic Monte Carlo risk estimation and the Lasso-vs-STOLS sweep.

Seeding
-------
Trial ``t`` of an experiment with master seed ``S`` draws from
``numpy.random.Generator(PCG64(mix64(S, t)))`` where ``mix64`` is the
SplitMix64 finalizer applied to ``S + (t + 1) * 0x9E3779B97F4A7C15``
(mod 2^64).  Normal variates come from ``Generator.standard_normal``
(numpy's ziggurat).  The observation noise is drawn first; the lifted
estimator consumes the same generator afterwards.  Changing any of this
changes the exact numbers, not their distribution.

Trials are processed in fixed-size chunks of consecutive indices, so the
arithmetic performed for each trial does not depend on the number of worker
threads or on scheduling.
"""

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from lassolab.designs import make_alpha_instance, sample_observation
from lassolab.estimators import EstimatorSpec, squared_errors
from lassolab.theory import ProblemParams, alpha_star, worst_theta

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
CHUNK = 64

CSV_HEADER = ["n", "d", "B", "alpha", "p", "estimator", "trials", "mean_err", "stderr", "master_seed"]


def mix64(master_seed, index):
    """SplitMix64 finalizer of ``master_seed + (index + 1) * golden_gamma``."""
    z = (int(master_seed) + (int(index) + 1) * GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_rng(master_seed, index):
    return np.random.Generator(np.random.PCG64(mix64(master_seed, index)))


def default_trials(n):
    return 1000 if n < 1024 else 300


@dataclass
class ExperimentConfig:
    design: object
    theta_star: np.ndarray
    estimators: list
    trials: int
    master_seed: int
    sigma: float = 1.0
    params: ProblemParams = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        self.estimators = [EstimatorSpec.parse(e) if isinstance(e, str) else e for e in self.estimators]
        self.theta_star = np.asarray(self.theta_star, dtype=np.float64)
        for spec in self.estimators:
            spec.check_compatible(self.design)


@dataclass(frozen=True)
class TrialSummary:
    label: str
    mean_err: float
    stderr: float
    trials: int
    seed: int


def _run_chunk(config, start, stop, cache):
    idx = range(start, stop)
    rngs = [trial_rng(config.master_seed, t) for t in idx]
    Y = np.stack([sample_observation(config.design, config.theta_star, config.sigma, g) for g in rngs])
    B = config.params.B if config.params is not None else config.meta.get("B")
    cols = [
        squared_errors(spec, config.design, Y, config.theta_star, params=config.params,
                       sigma=config.sigma, B=B, rngs=rngs, cache=cache)
        for spec in config.estimators
    ]
    return np.column_stack(cols)


def per_trial_errors(config, workers=1):
    """Matrix of squared errors, one row per trial and one column per estimator."""
    bounds = [(a, min(a + CHUNK, config.trials)) for a in range(0, config.trials, CHUNK)]
    cache = {}
    if workers <= 1:
        blocks = [_run_chunk(config, a, b, cache) for a, b in bounds]
    else:
        # Warm the design-level cache once so threads only read it.
        _run_chunk(config, 0, min(1, config.trials), cache)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda ab: _run_chunk(config, ab[0], ab[1], cache), bounds))
    return np.concatenate(blocks, axis=0)


def summarize(errors, labels, seed):
    T = errors.shape[0]
    out = []
    for j, label in enumerate(labels):
        col = np.ascontiguousarray(errors[:, j])
        mean = float(np.sum(col) / T)
        se = float(np.std(col, ddof=1) / math.sqrt(T)) if T > 1 else 0.0
        out.append(TrialSummary(label=label, mean_err=mean, stderr=se, trials=T, seed=seed))
    return out


def run_experiment(config, workers=1):
    """Paired Monte Carlo risk estimates, one :class:`TrialSummary` per estimator."""
    errors = per_trial_errors(config, workers=workers)
    return summarize(errors, [e.label for e in config.estimators], config.master_seed)


def hard_instance_config(n, p, estimators=("lasso:oracle", "stols:auto"), trials=None, master_seed=0):
    """Lower-bound instance with ``d = n``, ``B = sqrt(n)``, ``sigma = R = s = 1`` and ``alpha = alpha*(p)``."""
    B = math.sqrt(n)
    if p == 0:
        params = ProblemParams(p=0, n=n, d=n, sigma=1.0, B=B, s=1)
    else:
        params = ProblemParams(p=p, n=n, d=n, sigma=1.0, B=B, R=1.0)
    alpha = alpha_star(params)
    inst = make_alpha_instance(n, n, B, alpha)
    theta = worst_theta(params, alpha, inst.k)
    return ExperimentConfig(
        design=inst.design,
        theta_star=theta,
        estimators=list(estimators),
        trials=default_trials(n) if trials is None else trials,
        master_seed=master_seed,
        sigma=params.sigma,
        params=params,
        meta={"n": n, "d": n, "B": B, "alpha": alpha, "p": p},
    )


def sweep(n_values, p, estimators=("lasso:oracle", "stols:auto"), trials=None, master_seed=0,
          workers=1, make_config=hard_instance_config):
    """One row per (n, estimator) over the sample sizes in ``n_values``."""
    rows = []
    for n in n_values:
        config = make_config(n, p, estimators=estimators, trials=trials, master_seed=master_seed)
        for summary in run_experiment(config, workers=workers):
            rows.append({
                **config.meta,
                "estimator": summary.label,
                "trials": summary.trials,
                "mean_err": summary.mean_err,
                "stderr": summary.stderr,
                "master_seed": summary.seed,
            })
    return rows


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows, timestamp=None):
    buf = io.StringIO()
    if timestamp is not None:
        buf.write(f"# generated {timestamp}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in CSV_HEADER])
    return buf.getvalue()


def write_csv(rows, path, timestamp=None):
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows, timestamp=timestamp))


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def rows_to_svg(rows, width=480, height=360, title=None):
    """Log-log line plot of ``mean_err`` against ``n``, one polyline per estimator."""
    labels = list(dict.fromkeys(r["estimator"] for r in rows))
    pts = [(r["n"], r["mean_err"]) for r in rows if r["mean_err"] > 0]
    if not pts:
        raise ValueError("nothing to plot")
    lx = [math.log10(x) for x, _ in pts]
    ly = [math.log10(y) for _, y in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1
    ml, mr, mt, mb = 60, 130, 30, 45
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (math.log10(x) - x0) / (x1 - x0) * pw

    def py(y):
        return mt + (1 - (math.log10(y) - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    if title:
        out.append(f'<text x="{ml + pw / 2:.1f}" y="{mt - 10}" text-anchor="middle">{title}</text>')
    for x in sorted({r["n"] for r in rows}):
        out.append(f'<text x="{px(x):.1f}" y="{mt + ph + 15}" text-anchor="middle">{x}</text>')
    for e in range(math.floor(y0), math.ceil(y1) + 1):
        if y0 - 1e-9 <= e <= y1 + 1e-9:
            out.append(f'<text x="{ml - 5}" y="{py(10.0**e) + 4:.1f}" text-anchor="end">1e{e}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">n</text>')
    out.append(f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {mt + ph / 2:.1f})">mean squared error</text>')
    for i, label in enumerate(labels):
        color = _COLORS[i % len(_COLORS)]
        series = sorted((r["n"], r["mean_err"]) for r in rows if r["estimator"] == label and r["mean_err"] > 0)
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in series)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in series:
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>')
        ly_ = mt + 12 + 16 * i
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly_}" x2="{ml + pw + 30}" y2="{ly_}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 35}" y="{ly_ + 4}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(rows, path, title=None):
    with open(path, "w") as fh:
        fh.write(rows_to_svg(rows, title=title))
