"""Long-time energy-error experiments.

A run integrates the perturbed oscillator with a fixed step, records the
energy ``H_k`` at every step and compares it with a reference solution
computed by a finer integrator at the same sample times. Errors are smoothed
by taking the maximum over consecutive blocks of samples.
"""

from __future__ import annotations

import configparser
import csv
import io
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, EmptyInput, ExtPhaseError
from .integrators import METHODS, TABLE_ONE_IDS, get_method
from .model import PerturbedOscillator, hamiltonian, initial_point

log = logging.getLogger(__name__)

_INT_TOL = 1e-6


def _as_count(ratio: float, what: str) -> int:
    k = round(ratio)
    if k < 1 or abs(ratio - k) > _INT_TOL * max(1.0, abs(ratio)):
        raise ConfigError(f"{what} must be a positive integer, got {ratio!r}")
    return int(k)


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment.

    ``(t_end - t0) / h`` and ``h / reference_h`` must be positive integers.
    The initial ``u0`` is always ``-H(q0, p0, t0)``.
    """

    n: int = 4
    epsilon: float = 0.1
    alpha: float = 0.123
    q0: tuple = (1.0, 2.0, 3.0, 4.0)
    p0: tuple = (4.0, 1.0, 2.0, 3.0)
    t0: float = 0.0
    h: float = 0.3
    # 50000 is not a multiple of 0.3; the interval is rounded up to a whole step
    t_end: float = 50000.1
    method_ids: tuple = TABLE_ONE_IDS
    reference_method: str = "lie_gauss"
    reference_h: float = 0.02
    block_size: int = 500

    def __post_init__(self):
        object.__setattr__(self, "q0", tuple(float(v) for v in self.q0))
        object.__setattr__(self, "p0", tuple(float(v) for v in self.p0))
        object.__setattr__(self, "method_ids", tuple(self.method_ids))
        if len(self.q0) != self.n or len(self.p0) != self.n:
            raise ConfigError(f"q0 and p0 must have length n={self.n}")
        if not self.h > 0 or not self.reference_h > 0:
            raise ConfigError("step sizes must be positive")
        if self.block_size < 1:
            raise ConfigError("block_size must be positive")
        self.num_steps
        self.reference_ratio
        for mid in (*self.method_ids, self.reference_method):
            if mid not in METHODS:
                raise ConfigError(f"unknown method {mid!r}")

    @property
    def num_steps(self) -> int:
        return _as_count((self.t_end - self.t0) / self.h, "(t_end - t0) / h")

    @property
    def reference_ratio(self) -> int:
        return _as_count(self.h / self.reference_h, "h / reference_h")

    def problem(self) -> PerturbedOscillator:
        return PerturbedOscillator(self.n, self.epsilon, self.alpha)

    def initial_point(self):
        return initial_point(self.problem(), self.q0, self.p0, self.t0)


# the configuration of the long-time energy-error table
TABLE_ONE_CONFIG = ExperimentConfig()

# the long-time behaviour run of the Lie-Gauss method
LIE_GAUSS_CONFIG = ExperimentConfig(
    epsilon=0.3, alpha=0.1, t_end=3000.0, method_ids=("lie_gauss",), reference_h=0.03
)


# target maximum smoothed energy errors for TABLE_ONE_CONFIG
EXPECTED_MAX_ERRORS = {
    "lie_gauss": 3.20e-5,
    "lie_midpoint_tj": 1.50e-4,
    "lie_midpoint": 4.56e-3,
    "lie_euler": 2.50e-2,
    "gauss_legendre4": 7.98e-2,
    "midpoint_tj": 1.49e-1,
    "midpoint": 1.49e-1,
    "exp_sym_noncan": 1.49e-1,
    "kahan_tj": 1.50e-1,
    "projection": 1.53e-1,
    "kahan": 1.68e-1,
    "exp_noncan": 2.61,
    "symplectic_euler": 6.44,
    "radau2a": 31.5,
}


@dataclass
class EnergySeries:
    times: np.ndarray
    H_values: np.ndarray
    u_values: Optional[np.ndarray] = None
    K_values: Optional[np.ndarray] = None
    H_reference: Optional[np.ndarray] = None

    def __post_init__(self):
        m = len(self.times)
        for name in ("H_values", "u_values", "K_values", "H_reference"):
            v = getattr(self, name)
            if v is not None and len(v) != m:
                raise ValueError(f"{name} has length {len(v)}, expected {m}")

    def __len__(self) -> int:
        return len(self.times)

    def energy_error(self) -> np.ndarray:
        if self.H_reference is None:
            raise ValueError("series has no reference column")
        return np.abs(self.H_values - self.H_reference)


@dataclass
class SmoothedErrorSeries:
    block_times: np.ndarray
    block_max_errors: np.ndarray

    @property
    def max_error(self) -> float:
        return float(self.block_max_errors.max())


def run_trajectory(config: ExperimentConfig, method_id: str, with_u: Optional[bool] = None, h: Optional[float] = None,
                   record_every: int = 1) -> EnergySeries:
    """Integrate from the configured initial point and record the energy.

    ``u`` and ``K = H + u`` are recorded when the method carries an auxiliary
    update (``with_u=None`` means exactly then). ``h`` overrides the config
    step; samples are kept every ``record_every`` steps.
    """
    method = get_method(method_id)
    if with_u is None:
        with_u = method.descriptor.has_u_update
    with_u = with_u and method.descriptor.has_u_update
    h = config.h if h is None else h
    steps = _as_count((config.t_end - config.t0) / h, "(t_end - t0) / h")
    if steps % record_every:
        raise ConfigError(f"record_every={record_every} does not divide {steps} steps")
    prob = config.problem()
    J = prob.J
    z0 = config.initial_point()
    y, t, u = z0.y.copy(), z0.t, z0.u
    m = steps // record_every + 1
    times = np.empty(m)
    H = np.empty(m)
    us = np.empty(m) if with_u else None
    advance = method.advance
    A = prob.A

    def record(j, y, t, u):
        times[j] = t
        H[j] = -0.5 * float(y @ (J @ (A(t) @ y)))
        if with_u:
            us[j] = u

    record(0, y, t, u)
    j = 0
    for k in range(1, steps + 1):
        try:
            y, u = advance(prob, y, t, u, h, with_u)
        except (ExtPhaseError, ArithmeticError, np.linalg.LinAlgError) as exc:
            raise ExtPhaseError(f"{method_id} failed at step {k} (t = {t:.6g}): {exc}") from exc
        t = t + h
        if k % record_every == 0:
            j += 1
            record(j, y, t, u)
    if not np.all(np.isfinite(H)):
        bad = int(np.argmin(np.isfinite(H)))
        raise ExtPhaseError(f"{method_id} produced non-finite energy at sample {bad} (t = {times[bad]:.6g})")
    K = H + us if with_u else None
    return EnergySeries(times, H, us, K)


def run_reference(config: ExperimentConfig) -> np.ndarray:
    """Reference energies at the coarse sample times.

    The reference method runs at ``reference_h`` and every
    ``h / reference_h``-th sample is kept.
    """
    ratio = config.reference_ratio
    ref = run_trajectory(config, config.reference_method, with_u=False, h=config.reference_h, record_every=ratio)
    return ref.H_values


def smooth_max_error(series: EnergySeries, block_size: int = 500) -> SmoothedErrorSeries:
    """Maximum of ``|H_k - H_ex|`` over consecutive blocks of ``block_size`` samples.

    The last block may be shorter. Each block is stamped with the time of its
    first sample.
    """
    if len(series) == 0:
        raise EmptyInput("cannot smooth an empty series")
    if block_size < 1:
        raise ValueError("block_size must be positive")
    err = series.energy_error()
    starts = np.arange(0, len(err), block_size)
    return SmoothedErrorSeries(series.times[starts].copy(), np.maximum.reduceat(err, starts))


def phase_ceiling(times: np.ndarray, H_ref: np.ndarray, window: float = math.pi, span: Optional[float] = None) -> float:
    """Largest error possible when the fast energy oscillation is fully out of phase.

    Over windows of one fast period (``pi`` for unit frequency) the reference
    energy is detrended by a least-squares line; the peak-to-peak residual is
    the error of an approximation carrying the same oscillation with opposite
    phase. The maximum over windows covering ``span`` (default: the whole
    series) is returned.
    """
    times = np.asarray(times)
    H_ref = np.asarray(H_ref)
    if times.size < 3:
        raise EmptyInput("need at least three samples")
    end = times[-1] if span is None else min(times[-1], times[0] + span)
    best = 0.0
    start = times[0]
    while start + window <= end + 1e-12:
        sel = (times >= start) & (times <= start + window)
        if sel.sum() >= 3:
            tw, Hw = times[sel], H_ref[sel]
            coef = np.polyfit(tw - tw[0], Hw, 1)
            resid = Hw - np.polyval(coef, tw - tw[0])
            best = max(best, float(resid.max() - resid.min()))
        start += window
    return best


@dataclass
class TableRow:
    method_id: str
    label: str
    order: int
    properties: str
    max_error: float = float("nan")
    tier: str = ""
    error: str = ""
    smoothed: Optional[SmoothedErrorSeries] = field(default=None, repr=False)
    series: Optional[EnergySeries] = field(default=None, repr=False)


TIERS = ("top", "middle", "bottom")


def classify_tier(value: float, ceiling: float) -> str:
    """Tier boundaries ``[0, 0.9c)``, ``[0.9c, 2c)``, ``[2c, inf)`` for ceiling ``c``."""
    if not math.isfinite(value):
        return "bottom"
    if value < 0.9 * ceiling:
        return "top"
    if value < 2.0 * ceiling:
        return "middle"
    return "bottom"


@dataclass
class TableResult:
    rows: list
    ceiling: float
    reference: EnergySeries

    def row(self, method_id: str) -> TableRow:
        for r in self.rows:
            if r.method_id == method_id:
                return r
        raise KeyError(method_id)

    def max_errors(self) -> dict:
        return {r.method_id: r.max_error for r in self.rows}


def table_one(config: ExperimentConfig = TABLE_ONE_CONFIG, keep_series: bool = False,
              reference: Optional[np.ndarray] = None) -> TableResult:
    """Run every configured method against one reference and summarise.

    Rows are sorted into tiers by comparison with the phase ceiling (and by
    error inside a tier). A method that fails yields a row with ``error`` set;
    the other rows are still produced.
    """
    log.info("reference: %s at h=%g", config.reference_method, config.reference_h)
    H_ref = run_reference(config) if reference is None else np.asarray(reference)
    times = config.t0 + config.h * np.arange(config.num_steps + 1)
    ref_series = EnergySeries(times, H_ref, H_reference=H_ref)
    # the fast oscillation is largest where the slow modulation is steepest
    ceiling = phase_ceiling(times, H_ref, span=2 * math.pi / config.alpha if config.alpha else None)
    rows = []
    for mid in config.method_ids:
        d = get_method(mid).descriptor
        row = TableRow(mid, d.label, d.order, d.properties)
        log.info("running %s", mid)
        try:
            series = run_trajectory(config, mid, with_u=False)
            series.H_reference = H_ref
            sm = smooth_max_error(series, config.block_size)
            row.max_error = sm.max_error
            row.tier = classify_tier(row.max_error, ceiling)
            row.smoothed = sm
            if keep_series:
                row.series = series
        except ExtPhaseError as exc:
            row.error = str(exc)
            row.tier = "bottom"
        rows.append(row)
    rows.sort(key=lambda r: (TIERS.index(r.tier), r.max_error if math.isfinite(r.max_error) else math.inf))
    return TableResult(rows, ceiling, ref_series)


# -- output -----------------------------------------------------------------

CSV_HEADER = ("t", "H", "u", "K", "H_ref")


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def write_series_csv(series: EnergySeries, dest) -> None:
    """Write ``t,H,u,K,H_ref`` rows; missing columns are left empty.

    Floats use the shortest repr that round-trips exactly.
    """
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", newline="") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        cols = [series.times, series.H_values, series.u_values, series.K_values, series.H_reference]
        for i in range(len(series)):
            w.writerow([_fmt(c[i]) if c is not None else "" for c in cols])
    finally:
        if own:
            fh.close()


def read_series_csv(src) -> EnergySeries:
    own = isinstance(src, (str, Path))
    fh = open(src, newline="") if own else src
    try:
        rows = list(csv.reader(fh))
    finally:
        if own:
            fh.close()
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"expected header {','.join(CSV_HEADER)}")
    body = rows[1:]

    def col(i):
        vals = [r[i] for r in body]
        if all(v == "" for v in vals):
            return None
        return np.array([float(v) for v in vals])

    return EnergySeries(col(0), col(1), col(2), col(3), col(4))


def table_csv(result: TableResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("method", "label", "order", "properties", "max_energy_error", "tier", "error"))
    for r in result.rows:
        w.writerow((r.method_id, r.label, r.order, r.properties, _fmt(r.max_error), r.tier, r.error))
    return buf.getvalue()


def table_text(result: TableResult) -> str:
    lines = [f"{'Method':<32}{'Order':>6}  {'Props':<6}{'Max energy error':>18}  Tier"]
    lines.append("-" * len(lines[0]))
    for r in result.rows:
        err = f"{r.max_error:.2e}" if math.isfinite(r.max_error) else "failed"
        lines.append(f"{r.label:<32}{r.order:>6}  {r.properties:<6}{err:>18}  {r.tier}")
    lines.append(f"phase ceiling: {result.ceiling:.3g}")
    return "\n".join(lines)


# -- config files -----------------------------------------------------------

_FLOAT_KEYS = {"epsilon", "alpha", "t0", "h", "t_end", "reference_h"}
_INT_KEYS = {"n", "block_size"}
_VECTOR_KEYS = {"q0", "p0"}
_LIST_KEYS = {"method_ids"}
_STR_KEYS = {"reference_method"}
CONFIG_SECTION = "experiment"


def parse_config_values(values: dict, base: ExperimentConfig = TABLE_ONE_CONFIG) -> ExperimentConfig:
    """Build a config from string values, falling back to ``base``."""
    known = {f.name for f in fields(ExperimentConfig)}
    updates = {}
    for key, raw in values.items():
        if raw is None:
            continue
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key in _FLOAT_KEYS:
                updates[key] = float(raw)
            elif key in _INT_KEYS:
                updates[key] = int(raw)
            elif key in _VECTOR_KEYS:
                updates[key] = tuple(float(v) for v in _split_list(raw))
            elif key in _LIST_KEYS:
                updates[key] = tuple(_split_list(raw))
            else:
                updates[key] = str(raw).strip()
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return replace(base, **updates)


def _split_list(raw) -> list:
    if isinstance(raw, (list, tuple)):
        return list(raw)
    return [tok for tok in str(raw).replace(",", " ").split() if tok]


def load_config(path, overrides: Optional[dict] = None, base: ExperimentConfig = TABLE_ONE_CONFIG) -> ExperimentConfig:
    """Read an INI-style file with an ``[experiment]`` section.

    Keys are the :class:`ExperimentConfig` field names; vectors and method
    lists are comma- or space-separated. ``overrides`` (e.g. CLI flags) win.
    """
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    if not parser.has_section(CONFIG_SECTION):
        raise ConfigError(f"config file lacks an [{CONFIG_SECTION}] section")
    values = dict(parser.items(CONFIG_SECTION))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return parse_config_values(values, base)


def dump_config(config: ExperimentConfig) -> str:
    parser = configparser.ConfigParser()
    out = {}
    for f in fields(ExperimentConfig):
        v = getattr(config, f.name)
        out[f.name] = ", ".join(str(x) for x in v) if isinstance(v, tuple) else str(v)
    parser[CONFIG_SECTION] = out
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def tier_mismatches(result: TableResult) -> list:
    """Rows whose tier or failure status disagrees with :data:`EXPECTED_MAX_ERRORS`."""
    bad = []
    for r in result.rows:
        if r.error:
            bad.append(f"{r.method_id}: {r.error}")
            continue
        target = EXPECTED_MAX_ERRORS.get(r.method_id)
        if target is None:
            continue
        want = classify_tier(target, result.ceiling)
        if r.tier != want:
            bad.append(f"{r.method_id}: tier {r.tier} ({r.max_error:.3g}), expected {want} ({target:.3g})")
    return bad


def drift_ratio(values: Sequence[float]) -> float:
    """``max |v|`` over the second half divided by that over the first half."""
    v = np.abs(np.asarray(values, dtype=float))
    half = len(v) // 2
    if half == 0:
        raise EmptyInput("need at least two values")
    first = v[:half].max()
    return float(v[half:].max() / first) if first > 0 else (math.inf if v[half:].max() > 0 else 1.0)
