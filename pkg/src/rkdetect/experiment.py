"""Monte-Carlo sweep harness: success-rate studies over (s, d, k, W, delta)
grids, bound-vs-empirical overlays, CSV and SVG output.

Determinism contract: a sweep's result table is a pure function of
(spec, master seed). Sub-seeds are keyed by (master, point index, trial),
never by worker identity, so the worker count only changes wall time.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg, systems
from .bounds import (
    BoundInputs,
    compute_k_star,
    max_rounds,
    mrkwor_success_lb,
    mrkworus_success_lb,
    single_round_success_lb,
)
from .detect import METHODS, WITHOUT_REMOVAL, DetectionConfig, detect as _run_detect
from .exceptions import InvalidSpecError, IoError, NoGroundTruthError

CSV_HEADER = "metric,s,d,k,W,delta,value,ci_lo,ci_hi,trials"

METRIC_ONE_ROUND = "one_round_all"
METRIC_ALL_ROUNDS = "all_rounds_all"
METRIC_FRACTION = "fraction_detected"
TRIAL_METRICS = (METRIC_ONE_ROUND, METRIC_ALL_ROUNDS, METRIC_FRACTION)

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class ExperimentSpec:
    m: int
    n: int
    family: str = systems.GAUSSIAN
    corruption: systems.CorruptionLaw = field(
        default_factory=lambda: systems.CorruptionLaw.uniform_int(1, 5))
    system_path: str = None          # when set, overrides the generator
    method: str = WITHOUT_REMOVAL
    s_list: tuple = (10,)
    d_list: tuple = (None,)          # None -> d = s at that grid point
    k_list: tuple = (500,)           # 0 -> k = k_star(delta), needs ground truth
    w_list: tuple = (None,)          # None -> floor((m - n) / d)
    delta_list: tuple = (0.5,)
    trials: int = 100
    master_seed: int = 0
    metrics: tuple = TRIAL_METRICS
    workers: int = 1

    def validate(self):
        if self.trials < 1:
            raise InvalidSpecError("trials must be >= 1")
        if self.method not in METHODS:
            raise InvalidSpecError(f"unknown method {self.method!r}")
        unknown = set(self.metrics) - set(TRIAL_METRICS)
        if unknown:
            raise InvalidSpecError(f"unknown metrics {sorted(unknown)}")
        for point in self.grid():
            if point.d * point.w > self.m - self.n:
                raise InvalidSpecError(
                    f"grid point {point} would remove more than m - n = {self.m - self.n} rows")

    def grid(self):
        points = []
        for s in self.s_list:
            for d in self.d_list:
                d_eff = s if d is None else d
                if d_eff < 1:
                    d_eff = 1
                for k in self.k_list:
                    for w in self.w_list:
                        w_eff = max_rounds(self.m, self.n, d_eff) if w is None else w
                        for delta in self.delta_list:
                            points.append(GridPoint(s=s, d=d_eff, k=k, w=w_eff, delta=delta))
        return points


@dataclass(frozen=True)
class GridPoint:
    s: int
    d: int
    k: int
    w: int
    delta: float


@dataclass
class TrialResult:
    point: GridPoint
    trial: int
    one_round_all: float    # 1.0 / 0.0 / nan (not applicable when d < s)
    all_rounds_all: float
    fraction_detected: float
    wall_time: float
    error: str = None


def _mix_seed(*keys):
    return int(np.random.SeedSequence(tuple(int(k) for k in keys)).generate_state(1)[0])


def _trial_system(spec, point, trial):
    if spec.system_path is not None:
        return systems.load_system(spec.system_path)
    gen = systems.GenSpec(m=spec.m, n=spec.n, family=spec.family, s=point.s,
                          corruption=spec.corruption,
                          seed=_mix_seed(spec.master_seed, hash_point(point), trial, 0))
    return systems.generate(gen)


def hash_point(point):
    """Stable integer key for a grid point, independent of process hashing."""
    return _mix_seed(point.s, point.d, point.k, point.w, int(point.delta * 10**9))


def _resolve_k(spec, point, sys):
    if point.k > 0:
        return point.k
    sys.require_truth()
    A_star, _ = linalg.subsystem(sys.A, sys.b, sys.support)
    inputs = BoundInputs(m=sys.m, n=sys.n, s=sys.s, delta=point.delta,
                         eps_star=sys.eps_star, x_star_norm=float(np.linalg.norm(sys.x_star)),
                         sigma_min_star=linalg.smallest_singular_value(A_star))
    return compute_k_star(inputs)


def run_trial(spec, point_idx, point, trial):
    start = time.perf_counter()
    try:
        sys = _trial_system(spec, point, trial)
        k = _resolve_k(spec, point, sys)
        cfg = DetectionConfig(method=spec.method, k=k, w=point.w, d=point.d,
                              seed=_mix_seed(spec.master_seed, point_idx, trial, 1))
        outcome = _run_detect(sys.A, sys.b, cfg)
    except Exception as exc:  # recorded per-trial, never fatal to the sweep
        return TrialResult(point=point, trial=trial, one_round_all=math.nan,
                           all_rounds_all=math.nan, fraction_detected=math.nan,
                           wall_time=time.perf_counter() - start, error=repr(exc))
    truth = set() if sys.support is None else set(int(i) for i in sys.support)
    s = len(truth)
    if s == 0:
        one_round = 1.0
        all_rounds = 1.0
        fraction = 1.0
    else:
        selected = set(int(i) for i in outcome.selected)
        all_rounds = 1.0 if truth <= selected else 0.0
        fraction = len(truth & selected) / s
        if point.d < s:
            one_round = math.nan
        else:
            one_round = 1.0 if any(truth <= set(int(i) for i in d_r) for d_r in outcome.per_round) else 0.0
    return TrialResult(point=point, trial=trial, one_round_all=one_round,
                       all_rounds_all=all_rounds, fraction_detected=fraction,
                       wall_time=time.perf_counter() - start)


def _run_trial_star(args):
    return run_trial(*args)


def _aggregate(values):
    vals = np.asarray([v for v in values if not math.isnan(v)])
    if vals.size == 0:
        return math.nan, math.nan, math.nan, 0
    mean = float(vals.mean())
    if vals.size > 1:
        se = float(vals.std(ddof=1)) / math.sqrt(vals.size)
    else:
        se = 0.0
    return mean, mean - _Z95 * se, mean + _Z95 * se, int(vals.size)


def run_experiment(spec):
    """Run every grid point; returns a list of aggregated table rows."""
    spec.validate()
    points = spec.grid()
    tasks = [(spec, pi, point, t)
             for pi, point in enumerate(points) for t in range(spec.trials)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_run_trial_star, tasks, chunksize=8))
    else:
        results = [run_trial(*task) for task in tasks]

    table = []
    for pi, point in enumerate(points):
        chunk = results[pi * spec.trials: (pi + 1) * spec.trials]
        for metric in spec.metrics:
            value, lo, hi, count = _aggregate(getattr(r, metric) for r in chunk)
            table.append(_row(metric, point, value, lo, hi, count))
    return table


def _row(metric, point, value, lo, hi, trials):
    return {"metric": metric, "s": point.s, "d": point.d, "k": point.k,
            "W": point.w, "delta": point.delta, "value": value,
            "ci_lo": lo, "ci_hi": hi, "trials": trials}


def bound_overlay(spec):
    """Theoretical lower bounds next to empirical rates, per grid point.

    Requires generated (ground-truthed) systems: the bound inputs are
    measured on a reference system drawn per point with trial index 0.
    """
    spec.validate()
    if spec.system_path is not None:
        ref = systems.load_system(spec.system_path)
        if not ref.has_truth:
            raise NoGroundTruthError("bound overlay needs a system with ground truth")
    table = run_experiment(spec)
    for point in spec.grid():
        sys = _trial_system(spec, point, 0)
        sys.require_truth()
        A_star, _ = linalg.subsystem(sys.A, sys.b, sys.support)
        inputs = BoundInputs(m=sys.m, n=sys.n, s=sys.s, delta=point.delta,
                             eps_star=sys.eps_star,
                             x_star_norm=float(np.linalg.norm(sys.x_star)),
                             sigma_min_star=linalg.smallest_singular_value(A_star))
        k_star = compute_k_star(inputs)
        p = single_round_success_lb(inputs, k_star)
        table.append(_row("k_star", point, float(k_star), math.nan, math.nan, 0))
        table.append(_row("bound_single_round", point, p, math.nan, math.nan, 0))
        table.append(_row("bound_one_success", point, mrkwor_success_lb(p, point.w),
                          math.nan, math.nan, 0))
        table.append(_row("bound_cumulative", point,
                          mrkworus_success_lb(p, point.w, point.s, point.d),
                          math.nan, math.nan, 0))
    return table


# --- output -----------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def emit_csv(table, path):
    """Byte-deterministic CSV with the fixed sweep header."""
    if not table:
        raise IoError("refusing to write an empty result table")
    lines = [CSV_HEADER]
    for row in table:
        lines.append(",".join(_fmt(row[key]) for key in CSV_HEADER.split(",")))
    text = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(text)


_W, _H, _PAD = 640, 420, 56
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def emit_svg(table, path):
    """Static line chart: value vs s, one polyline per (metric, d, k, W, delta)
    series, written deterministically."""
    if not table:
        raise IoError("refusing to write an empty result table")
    series = {}
    for row in table:
        if isinstance(row["value"], float) and math.isnan(row["value"]):
            continue
        key = (row["metric"], row["d"], row["k"], row["W"], row["delta"])
        series.setdefault(key, []).append((row["s"], float(row["value"])))
    if not series:
        raise IoError("result table holds no plottable values")
    xs = sorted({x for pts in series.values() for x, _ in pts})
    ys = [y for pts in series.values() for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys + [0.0]), max(ys + [1.0])
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def px(x):
        return _PAD + (x - x_lo) / x_span * (_W - 2 * _PAD)

    def py(y):
        return _H - _PAD - (y - y_lo) / y_span * (_H - 2 * _PAD)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" stroke="black"/>',
        f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" stroke="black"/>',
        f'<text x="{_W // 2}" y="{_H - 12}" text-anchor="middle" font-size="13">corrupted rows s</text>',
        f'<text x="16" y="{_H // 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {_H // 2})">value</text>',
    ]
    for x in xs:
        parts.append(f'<text x="{px(x):.2f}" y="{_H - _PAD + 18}" text-anchor="middle" '
                     f'font-size="11">{x}</text>')
    for frac in (0.0, 0.5, 1.0):
        y = y_lo + frac * y_span
        parts.append(f'<text x="{_PAD - 8}" y="{py(y):.2f}" text-anchor="end" '
                     f'font-size="11">{y:.2f}</text>')
    for idx, key in enumerate(sorted(series, key=str)):
        pts = sorted(series[key])
        color = _COLORS[idx % len(_COLORS)]
        path_d = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        label = f"{key[0]} d={key[1]} k={key[2]} W={key[3]} delta={key[4]}"
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path_d}"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="{color}"/>')
        parts.append(f'<text x="{_W - _PAD + 4}" y="{_PAD + 14 * idx + 10}" font-size="10" '
                     f'fill="{color}" text-anchor="end">{label}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


# --- plain-text spec files --------------------------------------------------
# key=value lines; repeating a key appends to its sweep list. Unknown keys
# are an error so typos fail loudly.

_LIST_KEYS = {"s": "s_list", "d": "d_list", "k": "k_list", "w": "w_list", "delta": "delta_list"}
_INT_KEYS = {"m", "n", "trials", "seed", "workers"}


def parse_spec_file(path):
    kwargs = {}
    lists = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidSpecError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in _LIST_KEYS:
                if key == "delta":
                    parsed = float(value)
                elif value.lower() in ("auto", "none"):
                    parsed = None
                else:
                    parsed = int(value)
                lists.setdefault(_LIST_KEYS[key], []).append(parsed)
            elif key in _INT_KEYS:
                kwargs["master_seed" if key == "seed" else key] = int(value)
            elif key == "family":
                kwargs["family"] = value
            elif key == "method":
                kwargs["method"] = value
            elif key == "trials_metrics" or key == "metrics":
                kwargs["metrics"] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key == "corruption":
                kwargs["corruption"] = parse_corruption(value)
            elif key == "system":
                kwargs["system_path"] = value
            else:
                raise InvalidSpecError(f"{path}:{lineno}: unknown key {key!r}")
    for name, values in lists.items():
        kwargs[name] = tuple(values)
    if "m" not in kwargs or "n" not in kwargs:
        if kwargs.get("system_path") is None:
            raise InvalidSpecError(f"{path}: spec needs m and n (or a system= path)")
        sys = systems.load_system(kwargs["system_path"])
        kwargs.setdefault("m", sys.m)
        kwargs.setdefault("n", sys.n)
    return ExperimentSpec(**kwargs)


def parse_corruption(text):
    """"uniform:lo:hi" or "constant:value"."""
    parts = text.split(":")
    if parts[0] in ("uniform", "uniform_int") and len(parts) == 3:
        return systems.CorruptionLaw.uniform_int(int(parts[1]), int(parts[2]))
    if parts[0] in ("constant", "const") and len(parts) == 2:
        return systems.CorruptionLaw.constant(float(parts[1]))
    raise InvalidSpecError(f"cannot parse corruption law {text!r}")
