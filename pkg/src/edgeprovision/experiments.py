"""Parameter-sweep engine and serialization layer.

A sweep evaluates a set of model metrics on a grid along one axis
(``lambda_hat``, ``r_min``, ``mse_target`` or ``mse_edge_ratio``),
optionally attaching Monte Carlo estimates with 95% normal-approximation
standard errors, and emits the table as CSV.

All numeric values stored in a ``SweepResult`` are quantized to 12
significant digits at construction time, so the emitted CSV (which prints
exactly 12 significant digits) is a lossless serialization and
emit -> parse round-trips to an identical result.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace

import yaml

from .analytic import (
    AirInterface,
    DeploymentConfig,
    InferenceWorkload,
    Scenario,
    asymptotic_mse,
    average_mse,
    cloud_use_probability,
    critical_ap_density,
    critical_edge_mse,
    delay_cdf,
)
from .errors import (
    InfeasibleTargetError,
    ModelDomainError,
    SpecFileError,
    SpecValidationError,
)
from .geomsim import CANONICAL_SEED, SimConfig, run_trials

__all__ = [
    "AXES",
    "METRICS",
    "SIMULABLE_METRICS",
    "DEFAULT_LAMBDA_HAT_GRID",
    "DEFAULT_RATE_GRID",
    "CSV_HEADER",
    "SimSettings",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "run_sweep",
    "emit_csv",
    "parse_csv",
    "load_spec",
]

AXES = ("lambda_hat", "r_min", "mse_target", "mse_edge_ratio")
METRICS = (
    "avg_mse",
    "asymptotic_mse",
    "critical_density",
    "critical_edge_mse",
    "delay_cdf_at",
    "cloud_use_prob",
)
SIMULABLE_METRICS = frozenset({"avg_mse", "delay_cdf_at", "cloud_use_prob"})
CSV_HEADER = "axis,axis_value,metric,analytic,simulated,sim_stderr,status"

_CRITICAL_METRICS = frozenset({"critical_density", "critical_edge_mse"})


def _log_grid(lo: float, hi: float, n: int) -> tuple[float, ...]:
    ratio = (hi / lo) ** (1.0 / (n - 1))
    return tuple(lo * ratio ** i for i in range(n))


# Spans both limit regimes: load-dominated at small lambda_hat, saturated at
# large; rate grid covers the cloud-always to cloud-never transition.
DEFAULT_LAMBDA_HAT_GRID = _log_grid(0.1, 1000.0, 31)
DEFAULT_RATE_GRID = _log_grid(0.01, 10.0, 31)


def _round12(v: float | None) -> float | None:
    """Quantize to 12 significant digits (the CSV cell precision)."""
    if v is None:
        return None
    return float(f"{v:.12g}")


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.12g}"


# ---------------------------------------------------------------------------
# Sweep specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimSettings:
    """Monte Carlo settings for simulated sweep columns.

    ``window_radius=None`` sizes the window automatically to hold about 150
    expected APs at each grid point's density.
    """

    trials: int = 2000
    window_radius: float | None = None
    seed: int = CANONICAL_SEED
    shadowing_sigma_db: float | None = None
    boundary: str = "torus"


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a base scenario, an axis with its grid, and the outputs."""

    base: Scenario
    axis: str
    grid: tuple[float, ...]
    outputs: tuple[str, ...]
    simulate: bool = False
    sim: SimSettings = field(default_factory=SimSettings)
    mse_target: float | None = None
    delay_query: float | None = None

    def __post_init__(self):
        problems = []
        if self.axis not in AXES:
            problems.append(f"sweep.axis must be one of {AXES} (got {self.axis!r})")
        if not self.grid:
            problems.append("sweep.grid must be non-empty")
        elif any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            problems.append("sweep.grid must be strictly increasing")
        else:
            lo = self.grid[0]
            if self.axis in ("lambda_hat", "r_min", "mse_target") and lo <= 0:
                problems.append(f"sweep.grid values must be > 0 for axis {self.axis}")
            if self.axis == "mse_edge_ratio" and lo < 1.0:
                problems.append("sweep.grid values must be >= 1 for axis mse_edge_ratio")
        if not self.outputs:
            problems.append("sweep.outputs must be non-empty")
        unknown = [m for m in self.outputs if m not in METRICS]
        if unknown:
            problems.append(f"unknown metrics in sweep.outputs: {unknown}")
        if len(set(self.outputs)) != len(self.outputs):
            problems.append("sweep.outputs must not repeat metrics")
        if (
            self.axis != "mse_target"
            and self.mse_target is None
            and _CRITICAL_METRICS.intersection(self.outputs)
        ):
            problems.append(
                "sweep.mse_target is required when critical_density or "
                "critical_edge_mse is requested on a non-mse_target axis"
            )
        if (
            self.delay_query is not None
            and self.delay_query <= self.base.workload.compute_delay
        ):
            problems.append(
                "sweep.delay_d must exceed workload.d_c "
                f"(got {self.delay_query!r})"
            )
        if problems:
            raise SpecValidationError("\n".join(problems))


@dataclass(frozen=True)
class SweepRow:
    """One (grid point, metric) cell; numeric fields hold 12-significant-digit
    values, empty on infeasible points."""

    axis_value: float
    metric: str
    analytic: float | None
    simulated: float | None
    sim_stderr: float | None
    status: str


@dataclass(frozen=True)
class SweepResult:
    axis: str
    rows: tuple[SweepRow, ...]


# ---------------------------------------------------------------------------
# Sweep evaluation
# ---------------------------------------------------------------------------


def _scenario_at(spec: SweepSpec, value: float) -> Scenario:
    base = spec.base
    if spec.axis == "lambda_hat":
        dep = DeploymentConfig(
            lambda_ap=value * base.deployment.lambda_dev,
            lambda_dev=base.deployment.lambda_dev,
        )
        return replace(base, deployment=dep)
    if spec.axis == "r_min":
        w = base.workload
        payload = value * base.air.bandwidth * (w.delay_budget - w.compute_delay)
        return replace(base, workload=replace(w, payload_bits=payload))
    if spec.axis == "mse_edge_ratio":
        w = base.workload
        return replace(
            base, workload=replace(w, mse_edge=value * w.mse_cloud)
        )
    return base  # mse_target axis leaves the scenario untouched


def _auto_radius(dep: DeploymentConfig, boundary: str, target_aps: float = 150.0) -> float:
    area = target_aps / dep.lambda_ap
    if boundary == "torus":
        return math.sqrt(area) / 2.0
    return math.sqrt(area / math.pi)


def _analytic_value(spec: SweepSpec, scenario: Scenario, metric: str, value: float):
    target = value if spec.axis == "mse_target" else spec.mse_target
    if metric == "avg_mse":
        return average_mse(scenario)
    if metric == "asymptotic_mse":
        return asymptotic_mse(scenario.workload, scenario.air)
    if metric == "cloud_use_prob":
        return cloud_use_probability(scenario)
    if metric == "delay_cdf_at":
        d = spec.delay_query
        if d is None:
            d = scenario.workload.delay_budget
        return delay_cdf(scenario, d)
    if metric == "critical_density":
        return critical_ap_density(
            scenario.workload, scenario.air, spec.base.deployment.lambda_dev, target
        )
    if metric == "critical_edge_mse":
        return critical_edge_mse(scenario, target)
    raise ModelDomainError(f"unknown metric {metric!r}")


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate every requested metric at every grid point.

    Points where a metric is undefined (e.g. a target below the asymptotic
    MSE in a critical-density sweep) produce rows with empty numeric cells
    and status ``infeasible`` instead of failing the sweep. When
    ``spec.simulate`` is set, each grid point runs one Monte Carlo
    experiment (same seed at every point, so consecutive points share
    common random numbers) and the simulable metrics gain estimates with
    95% standard errors.
    """
    rows = []
    for value in spec.grid:
        scenario = _scenario_at(spec, value)
        summary = None
        if spec.simulate and SIMULABLE_METRICS.intersection(spec.outputs):
            radius = spec.sim.window_radius
            if radius is None:
                radius = _auto_radius(scenario.deployment, spec.sim.boundary)
            cfg = SimConfig(
                scenario=scenario,
                window_radius=radius,
                trials=spec.sim.trials,
                master_seed=spec.sim.seed,
                shadowing_sigma_db=spec.sim.shadowing_sigma_db,
                boundary=spec.sim.boundary,
            )
            summary = run_trials(cfg, workers=workers)
        for metric in spec.outputs:
            try:
                analytic = _analytic_value(spec, scenario, metric, value)
                status = "ok"
            except (InfeasibleTargetError, ModelDomainError):
                rows.append(
                    SweepRow(_round12(value), metric, None, None, None, "infeasible")
                )
                continue
            simulated = stderr = None
            if summary is not None and metric in SIMULABLE_METRICS:
                n = summary.trial_count
                p = summary.cloud_use_fraction
                if metric == "avg_mse":
                    simulated = summary.mse_estimate
                    w = scenario.workload
                    stderr = (
                        1.96
                        * (w.mse_edge - w.mse_cloud)
                        * math.sqrt(p * (1.0 - p) / n)
                    )
                elif metric == "cloud_use_prob":
                    simulated = p
                    stderr = 1.96 * math.sqrt(p * (1.0 - p) / n)
                else:
                    d = spec.delay_query
                    if d is None:
                        d = scenario.workload.delay_budget
                    f = summary.delay_samples.evaluate(d)
                    simulated = f
                    stderr = 1.96 * math.sqrt(f * (1.0 - f) / n)
            rows.append(
                SweepRow(
                    _round12(value),
                    metric,
                    _round12(analytic),
                    _round12(simulated),
                    _round12(stderr),
                    status,
                )
            )
    return SweepResult(axis=spec.axis, rows=tuple(rows))


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------


def emit_csv(res: SweepResult, dest) -> None:
    """Write a SweepResult as CSV (UTF-8, LF endings, 12 significant digits).

    ``dest`` may be a path or an open text file.
    """
    lines = [CSV_HEADER]
    for r in res.rows:
        lines.append(
            ",".join(
                [
                    res.axis,
                    _fmt(r.axis_value),
                    r.metric,
                    _fmt(r.analytic),
                    _fmt(r.simulated),
                    _fmt(r.sim_stderr),
                    r.status,
                ]
            )
        )
    text = "\n".join(lines) + "\n"
    if isinstance(dest, io.TextIOBase) or hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def parse_csv(src) -> SweepResult:
    """Parse a CSV produced by ``emit_csv`` back into an equal SweepResult."""
    if isinstance(src, io.TextIOBase) or hasattr(src, "read"):
        text = src.read()
    else:
        with open(src, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    lines = [ln for ln in text.split("\n") if ln != ""]
    if not lines or lines[0] != CSV_HEADER:
        raise SpecFileError(
            f"bad CSV header: expected {CSV_HEADER!r}, got {lines[0] if lines else ''!r}"
        )
    axis = None
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 7:
            raise SpecFileError(f"bad CSV row (expected 7 cells): {ln!r}")
        row_axis, value, metric, analytic, simulated, stderr, status = parts
        if axis is None:
            axis = row_axis
        elif axis != row_axis:
            raise SpecFileError(f"mixed axis names in CSV: {axis!r} vs {row_axis!r}")
        if status not in ("ok", "infeasible"):
            raise SpecFileError(f"bad status {status!r} in row {ln!r}")
        rows.append(
            SweepRow(
                axis_value=float(value),
                metric=metric,
                analytic=float(analytic) if analytic else None,
                simulated=float(simulated) if simulated else None,
                sim_stderr=float(stderr) if stderr else None,
                status=status,
            )
        )
    if axis is None:
        raise SpecFileError("CSV holds no data rows")
    return SweepResult(axis=axis, rows=tuple(rows))


# ---------------------------------------------------------------------------
# Spec-file loading (YAML; plain JSON parses too)
# ---------------------------------------------------------------------------

_SECTION_KEYS = {
    "deployment": {"lambda_ap", "lambda_dev"},
    "workload": {"q", "d_t", "d_c", "m_c", "m_d"},
    "air": {"b", "snr"},
    "sweep": {
        "axis",
        "grid",
        "range",
        "outputs",
        "simulate",
        "sim",
        "mse_target",
        "delay_d",
    },
}
_SIM_KEYS = {"trials", "window_radius", "seed", "shadowing", "boundary"}


def _as_number(x) -> float | None:
    """Coerce a scalar to float, or None if it is not numeric.

    YAML 1.1 parses unsigned-exponent literals like ``1.0e6`` as strings,
    so numeric strings are accepted too.
    """
    if isinstance(x, bool):
        return None
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float(x)
        except ValueError:
            return None
    return None


def _is_number(x) -> bool:
    return _as_number(x) is not None


class _SpecReader:
    """Walks the parsed document, collecting every problem before failing."""

    def __init__(self, doc):
        self.doc = doc
        self.problems: list[str] = []

    def fail(self, msg: str) -> None:
        self.problems.append(msg)

    def section(self, name: str) -> dict:
        sec = self.doc.get(name)
        if sec is None:
            self.fail(f"missing required section {name!r}")
            return {}
        if not isinstance(sec, dict):
            self.fail(f"section {name!r} must be a mapping")
            return {}
        for key in sec:
            if key not in _SECTION_KEYS[name]:
                self.fail(f"unknown field {name}.{key}")
        return sec

    def number(self, sec: dict, path: str, required: bool = True, default=None):
        name = path.split(".", 1)[1]
        if name not in sec:
            if required:
                self.fail(f"missing required field {path}")
            return default
        v = _as_number(sec[name])
        if v is None:
            self.fail(f"field {path} must be a number (got {sec[name]!r})")
            return default
        return v


def load_spec(path) -> SweepSpec:
    """Load a sweep specification file.

    The document has sections ``deployment{lambda_ap, lambda_dev}``,
    ``workload{q, d_t, d_c, m_c, m_d?}``, ``air{b, snr|"inf"}`` and
    ``sweep{axis, grid|range{lo,hi,n,scale}, outputs[], simulate, sim{...},
    mse_target?, delay_d?}``. Omitted ``m_d`` defaults to ``1.5 * m_c``;
    omitted ``snr`` to infinite (interference-limited). Raises
    SpecFileError on unparseable documents and SpecValidationError listing
    every schema violation.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            where = f" at line {mark.line + 1}" if mark is not None else ""
            raise SpecFileError(f"cannot parse {path}{where}: {e}") from e
    if not isinstance(doc, dict):
        raise SpecValidationError("spec document must be a mapping of sections")
    for key in doc:
        if key not in _SECTION_KEYS:
            raise SpecValidationError(f"unknown section {key!r}")

    r = _SpecReader(doc)
    dep_sec = r.section("deployment")
    wl_sec = r.section("workload")
    air_sec = r.section("air")
    sweep_sec = r.section("sweep")

    lambda_ap = r.number(dep_sec, "deployment.lambda_ap")
    lambda_dev = r.number(dep_sec, "deployment.lambda_dev")
    q = r.number(wl_sec, "workload.q")
    d_t = r.number(wl_sec, "workload.d_t")
    d_c = r.number(wl_sec, "workload.d_c")
    m_c = r.number(wl_sec, "workload.m_c")
    m_d = r.number(wl_sec, "workload.m_d", required=False)
    if m_d is None and m_c is not None:
        m_d = 1.5 * m_c  # default edge/cloud accuracy ratio
    b = r.number(air_sec, "air.b")

    snr = math.inf
    if "snr" in air_sec:
        raw = air_sec["snr"]
        if isinstance(raw, str) and raw.strip().lower() in ("inf", "infinite"):
            snr = math.inf
        elif _is_number(raw):
            snr = float(raw)
        else:
            r.fail(f'field air.snr must be a positive number or "inf" (got {raw!r})')

    # sweep section
    axis = sweep_sec.get("axis")
    if not isinstance(axis, str):
        r.fail(f"field sweep.axis must be a string (got {axis!r})")
        axis = ""
    grid: tuple[float, ...] = ()
    if ("grid" in sweep_sec) == ("range" in sweep_sec):
        r.fail("sweep needs exactly one of sweep.grid or sweep.range")
    elif "grid" in sweep_sec:
        raw = sweep_sec["grid"]
        if not isinstance(raw, list) or not raw or not all(_is_number(v) for v in raw):
            r.fail(f"field sweep.grid must be a non-empty list of numbers (got {raw!r})")
        else:
            grid = tuple(float(v) for v in raw)
    else:
        rng = sweep_sec["range"]
        if not isinstance(rng, dict):
            r.fail("field sweep.range must be a mapping {lo, hi, n, scale}")
        else:
            for key in rng:
                if key not in {"lo", "hi", "n", "scale"}:
                    r.fail(f"unknown field sweep.range.{key}")
            lo = _as_number(rng.get("lo"))
            hi = _as_number(rng.get("hi"))
            n = rng.get("n")
            scale = rng.get("scale", "linear")
            ok = True
            if lo is None or hi is None:
                r.fail("fields sweep.range.lo and sweep.range.hi must be numbers")
                ok = False
            if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                r.fail(f"field sweep.range.n must be an integer >= 1 (got {n!r})")
                ok = False
            if scale not in ("linear", "log"):
                r.fail(f"field sweep.range.scale must be linear|log (got {scale!r})")
                ok = False
            if ok and n > 1 and not (lo < hi):
                r.fail("sweep.range needs lo < hi")
                ok = False
            if ok and scale == "log" and lo <= 0:
                r.fail("sweep.range with log scale needs lo > 0")
                ok = False
            if ok:
                if n == 1:
                    grid = (float(lo),)
                elif scale == "linear":
                    step = (hi - lo) / (n - 1)
                    grid = tuple(float(lo + step * i) for i in range(n))
                else:
                    grid = _log_grid(float(lo), float(hi), n)

    if axis and axis not in AXES:
        r.fail(f"field sweep.axis must be one of {AXES} (got {axis!r})")

    outputs_raw = sweep_sec.get("outputs")
    outputs: tuple[str, ...] = ()
    if (
        not isinstance(outputs_raw, list)
        or not outputs_raw
        or not all(isinstance(m, str) for m in outputs_raw)
    ):
        r.fail(f"field sweep.outputs must be a non-empty list of metric names (got {outputs_raw!r})")
    else:
        outputs = tuple(outputs_raw)
        unknown = [m for m in outputs if m not in METRICS]
        if unknown:
            r.fail(f"unknown metrics in sweep.outputs: {unknown}")
        if len(set(outputs)) != len(outputs):
            r.fail("sweep.outputs must not repeat metrics")

    simulate = sweep_sec.get("simulate", False)
    if not isinstance(simulate, bool):
        r.fail(f"field sweep.simulate must be a boolean (got {simulate!r})")
        simulate = False

    sim = SimSettings()
    if "sim" in sweep_sec:
        sim_sec = sweep_sec["sim"]
        if not isinstance(sim_sec, dict):
            r.fail("field sweep.sim must be a mapping")
        else:
            for key in sim_sec:
                if key not in _SIM_KEYS:
                    r.fail(f"unknown field sweep.sim.{key}")
            trials = sim_sec.get("trials", 2000)
            if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
                r.fail(f"field sweep.sim.trials must be an integer >= 1 (got {trials!r})")
                trials = 2000
            radius = sim_sec.get("window_radius")
            if radius is not None:
                radius = _as_number(radius)
                if radius is None or radius <= 0:
                    r.fail(
                        "field sweep.sim.window_radius must be > 0 or omitted "
                        f"(got {sim_sec.get('window_radius')!r})"
                    )
                    radius = None
            seed = sim_sec.get("seed", CANONICAL_SEED)
            if not isinstance(seed, int) or isinstance(seed, bool):
                r.fail(f"field sweep.sim.seed must be an integer (got {seed!r})")
                seed = CANONICAL_SEED
            shadowing = sim_sec.get("shadowing", "none")
            sigma: float | None = None
            if shadowing in ("none", None):
                sigma = None
            elif _is_number(shadowing):
                sigma = float(shadowing)
            elif (
                isinstance(shadowing, dict)
                and set(shadowing) == {"lognormal"}
                and _is_number(shadowing["lognormal"])
            ):
                sigma = float(shadowing["lognormal"])
            else:
                r.fail(
                    'field sweep.sim.shadowing must be "none", a sigma in dB, or '
                    f"{{lognormal: sigma}} (got {shadowing!r})"
                )
            boundary = sim_sec.get("boundary", "torus")
            if boundary not in ("torus", "disc"):
                r.fail(f"field sweep.sim.boundary must be torus|disc (got {boundary!r})")
                boundary = "torus"
            sim = SimSettings(
                trials=trials,
                window_radius=float(radius) if radius is not None else None,
                seed=seed,
                shadowing_sigma_db=sigma,
                boundary=boundary,
            )

    mse_target = None
    if "mse_target" in sweep_sec:
        raw = sweep_sec["mse_target"]
        if not _is_number(raw):
            r.fail(f"field sweep.mse_target must be a number (got {raw!r})")
        else:
            mse_target = float(raw)
    delay_query = None
    if "delay_d" in sweep_sec:
        raw = sweep_sec["delay_d"]
        if not _is_number(raw):
            r.fail(f"field sweep.delay_d must be a number (got {raw!r})")
        else:
            delay_query = float(raw)

    if (
        axis in AXES
        and axis != "mse_target"
        and mse_target is None
        and _CRITICAL_METRICS.intersection(outputs)
    ):
        r.fail(
            "sweep.mse_target is required when critical_density or "
            "critical_edge_mse is requested on a non-mse_target axis"
        )

    # Range checks run per section so one bad value does not mask another.
    dep = wl = ai = None
    if None not in (lambda_ap, lambda_dev):
        try:
            dep = DeploymentConfig(lambda_ap=lambda_ap, lambda_dev=lambda_dev)
        except ModelDomainError as e:
            r.fail(f"deployment: {e}")
    if None not in (q, d_t, d_c, m_c, m_d):
        try:
            wl = InferenceWorkload(
                payload_bits=q,
                delay_budget=d_t,
                compute_delay=d_c,
                mse_cloud=m_c,
                mse_edge=m_d,
            )
        except ModelDomainError as e:
            r.fail(f"workload: {e}")
    if b is not None:
        try:
            ai = AirInterface(bandwidth=b, snr=snr)
        except ModelDomainError as e:
            r.fail(f"air: {e}")
    if r.problems:
        raise SpecValidationError("\n".join(r.problems))
    base = Scenario(deployment=dep, workload=wl, air=ai)

    return SweepSpec(
        base=base,
        axis=axis,
        grid=grid,
        outputs=outputs,
        simulate=simulate,
        sim=sim,
        mse_target=mse_target,
        delay_query=delay_query,
    )
