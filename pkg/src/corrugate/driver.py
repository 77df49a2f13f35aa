"""Multi-stage runs: parameter schedules, preset initial data, the q-loop,
Hölder-exponent estimation, and report / mesh export.

The schedule follows the two-parameter family

    delta_q = delta0 * a^(1 - b^q),      lambda_q = lambda0 * a^((b^q - 1) / (2 beta)),

with growth base a > 1 and 1 < b < 1 + tau/2, and per-stage ladder ratio
Lambda_q = K * (delta_q / delta_{q+1})^(1/J).  The exponent

    beta(n, J) = J / (J * (1 + 2 * (n_star - n)) + 4 * n)

is kept as an exact Fraction; it approaches 1/(1 + 2*(n_star - n)) =
1/(1 + n^2 - n) from below as J grows, which is the regularity ceiling of
this construction in codimension one.

Initial data comes from presets that satisfy the stage hypothesis exactly
(a scaled flat map and a target metric built from the h0 cone point); every
report header declares this, since no general short-map preparation is
performed.
"""

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field, fields as dc_fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .basis import build_basis, sym_pack
from .errors import (
    CorrugateError,
    DimensionError,
    DirectionError,
    DomainTooSmall,
    ParamError,
    ResolutionError,
    UnknownPreset,
)
from .fields import (
    Field,
    GridDomain,
    MIN_POINTS,
    SAMPLES_PER_PERIOD,
    grid_coordinates,
    holder_seminorm,
    induced_metric,
    jacobian,
    restrict,
    second_derivative_sup,
    sup_norm,
)
from .stage import StageParams, run_stage

__all__ = [
    "Schedule",
    "RunConfig",
    "RunReport",
    "beta_exponent",
    "alpha_limit",
    "make_preset",
    "read_config",
    "run",
    "run_batch",
    "estimate_holder",
    "export_mesh",
    "read_mesh",
    "export_report",
    "PRESET_NAMES",
    "REPORT_NOTE",
    "DEFAULT_ALPHAS",
]

PRESET_NAMES = ("exact-deficit", "perturbed-deficit", "anisotropic")

#: every emitted report carries this provenance line
REPORT_NOTE = (
    "initial data from a preset that satisfies the stage hypothesis exactly; "
    "no general short-map preparation is performed"
)

DEFAULT_ALPHAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

#: exactly one data row per stage, in this order
CSV_COLUMNS = (
    "q",
    "delta_q",
    "lambda_q",
    "Lambda_q",
    "deficit_before",
    "deficit_after",
    "c1_increment",
    "c2_estimate",
    "wall_ms",
)


# ---------------------------------------------------------------------------
# exponent arithmetic (exact rationals)
# ---------------------------------------------------------------------------

def beta_exponent(n, J):
    """The Hölder exponent secured by depth-J absorption, as a Fraction."""
    if n < 2:
        raise DimensionError("need n >= 2, got %r" % (n,))
    if J < 1:
        raise ParamError("need J >= 1, got %r" % (J,))
    n_star = n * (n + 1) // 2
    return Fraction(J, J * (1 + 2 * (n_star - n)) + 4 * n)


def alpha_limit(n):
    """Supremum of reachable exponents, 1/(1 + n^2 - n)."""
    if n < 2:
        raise DimensionError("need n >= 2, got %r" % (n,))
    return Fraction(1, 1 + n * n - n)


# ---------------------------------------------------------------------------
# schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    """The delta_q / lambda_q / Lambda_q bookkeeping for a Q-stage run."""

    n: int
    stages: int
    delta0: float
    lambda0: float
    growth_base: float
    b_exponent: float
    tau: float
    J: int
    K_factor: float
    alpha_target: float = None

    def __post_init__(self):
        if self.stages < 0:
            raise ParamError("stages must be >= 0")
        if self.delta0 <= 0 or self.lambda0 <= 0:
            raise ParamError("delta0 and lambda0 must be positive")
        if self.growth_base <= 1.0:
            raise ParamError(
                "growth base must exceed 1, got %g" % self.growth_base
            )
        if not 0.0 < self.tau < 1.0:
            raise ParamError("tau must lie in (0, 1), got %g" % self.tau)
        if not 1.0 < self.b_exponent < 1.0 + self.tau / 2.0:
            raise ParamError(
                "need 1 < b < 1 + tau/2 = %g, got b = %g"
                % (1.0 + self.tau / 2.0, self.b_exponent)
            )
        if self.K_factor <= 0:
            raise ParamError("K_factor must be positive")
        beta = self.beta  # also validates n, J
        if beta >= alpha_limit(self.n):
            raise ParamError("beta = %s exceeds the limit %s" % (beta, alpha_limit(self.n)))
        if self.alpha_target is not None and not self.alpha_target < beta:
            raise ParamError(
                "alpha_target %g is not below beta = %s (n=%d, J=%d); raise J"
                % (self.alpha_target, beta, self.n, self.J)
            )

    @property
    def beta(self):
        return beta_exponent(self.n, self.J)

    def delta(self, q):
        return self.delta0 * self.growth_base ** (1.0 - self.b_exponent ** q)

    def lam(self, q):
        expo = (self.b_exponent ** q - 1.0) / (2.0 * float(self.beta))
        return self.lambda0 * self.growth_base ** expo

    def Lambda(self, q):
        ratio = self.delta(q) / self.delta(q + 1)
        return self.K_factor * ratio ** (1.0 / self.J)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def make_preset(name, n, delta0, grid, scale=1.0, epsilon=0.05,
                r_threshold=0.5, basis=None):
    """Initial data (g, u0, seed) satisfying the stage hypothesis exactly.

    u0 is the scaled flat immersion x -> scale * (x, 0) on the unit box and
    g = scale^2 * Id + delta0 * h0 plus the preset's modulation, so the
    starting deficit is delta0 * h0 exactly ("exact-deficit") or within
    r * delta0 / 2 of it (the perturbed flavors).
    """
    if name not in PRESET_NAMES:
        raise UnknownPreset(
            "unknown preset %r; choose one of %s" % (name, ", ".join(PRESET_NAMES))
        )
    if basis is None:
        basis = build_basis(n)
    if delta0 <= 0:
        raise ParamError("delta0 must be positive")
    dom = GridDomain.square(n, grid)
    coords = grid_coordinates(dom)

    u_vals = np.zeros(dom.npts + (n + 1,))
    u_vals[..., :n] = scale * coords
    u0 = Field(dom, u_vals, 0.0)

    g_vals = np.broadcast_to(
        scale * scale * sym_pack(np.eye(n)) + delta0 * basis.h0_packed,
        dom.npts + (basis.n_star,),
    ).copy()
    freq = 0.0
    if name != "exact-deficit":
        if not 0.0 < epsilon <= r_threshold / 2.0:
            raise ParamError(
                "preset modulation needs 0 < epsilon <= r/2 = %g, got %g"
                % (r_threshold / 2.0, epsilon)
            )
        two_pi = 2.0 * math.pi
        if name == "perturbed-deficit":
            mod = epsilon * np.sin(two_pi * coords[..., 0]) * np.sin(
                two_pi * coords[..., 1]
            )
            g_vals += delta0 * mod[..., None] * basis.h0_packed
        else:  # anisotropic
            e11 = np.zeros(n)
            e11[0] = 1.0
            mod = epsilon * np.sin(two_pi * coords[..., 0])
            g_vals += delta0 * mod[..., None] * sym_pack(np.outer(e11, e11))
        freq = two_pi
    g = Field(dom, g_vals, freq)

    seed = {
        "preset": name,
        "n": int(n),
        "grid": tuple(int(k) for k in dom.npts),
        "delta0": float(delta0),
        "scale": float(scale),
        "epsilon": 0.0 if name == "exact-deficit" else float(epsilon),
    }
    return g, u0, seed


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Everything a run needs, mirrored one-to-one by the flat config file.

    depth = 0 means "use J"; alpha_target = 0 means "not requested".
    """

    preset: str = "exact-deficit"
    n: int = 2
    grid: int = 257
    stages: int = 1
    delta0: float = 0.1
    scale: float = 1.0
    epsilon: float = 0.05
    growth_base: float = 4.0
    b_exponent: float = 1.1
    tau: float = 0.5
    J: int = 3
    K_factor: float = 2.0
    lambda0: float = 1.0
    margin0: float = 0.3
    freq_constant: float = 1.0
    moll_constant: float = 4.0
    r_threshold: float = 0.5
    depth: int = 0
    nearness_slack: float = 0.05
    positivity_floor: float = 1e-3
    amplitude_floor: float = 0.0
    immersion_floor: float = 1e-6
    direction_threshold: float = 1e-8
    samples_per_period: int = SAMPLES_PER_PERIOD
    alpha_target: float = 0.0
    deterministic: bool = True
    out_dir: str = "."


def _parse_value(key, text, like):
    if isinstance(like, bool):
        low = text.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ParamError("config key %r wants a boolean, got %r" % (key, text))
    if isinstance(like, int):
        try:
            return int(text)
        except ValueError:
            raise ParamError("config key %r wants an integer, got %r" % (key, text))
    if isinstance(like, float):
        try:
            return float(text)
        except ValueError:
            raise ParamError("config key %r wants a number, got %r" % (key, text))
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def read_config(path):
    """Parse a flat ``key = value`` file into a RunConfig.

    Blank lines and lines starting with # are skipped; unknown keys are
    errors, so typos never silently fall back to defaults.
    """
    defaults = RunConfig()
    known = {f.name: getattr(defaults, f.name) for f in dc_fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParamError(
                "%s:%d: expected 'key = value', got %r" % (path, lineno, raw)
            )
        key, _, text = line.partition("=")
        key = key.strip()
        if key not in known:
            raise ParamError("%s:%d: unknown config key %r" % (path, lineno, key))
        if key in values:
            raise ParamError("%s:%d: duplicate config key %r" % (path, lineno, key))
        values[key] = _parse_value(key, text.strip(), known[key])
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# the q-loop
# ---------------------------------------------------------------------------

@dataclass
class RunReport:
    """Everything a Q-stage run produced; heavy fields keep the iterates."""

    config: RunConfig
    schedule: Schedule
    preset_seed: dict
    stage_reports: list
    stage_settings: list           # per-stage delta/lambda/eta actually used
    deficit_trajectory: list       # sup|g - Gu_q|, q = 0..Q
    c1_increments: list
    holder: dict
    alpha_hat: float
    closeness: float               # sup|u_Q - u_0| on the final domain
    u_final: Field
    iterates: list
    failed_stage: int = None
    error: str = None
    wall_ms_total: float = 0.0


def _schedule_from_config(config):
    return Schedule(
        n=config.n,
        stages=config.stages,
        delta0=config.delta0,
        lambda0=config.lambda0,
        growth_base=config.growth_base,
        b_exponent=config.b_exponent,
        tau=config.tau,
        J=config.J,
        K_factor=config.K_factor,
        alpha_target=config.alpha_target if config.alpha_target > 0 else None,
    )


def _refuse_undersized(config, sched, dom, basis):
    """Up-front feasibility of the whole run, from scheduled quantities.

    Necessary conditions only (the measured lambda floor can raise a stage's
    ladder later; run_stage re-checks with the true numbers): the scheduled
    ladder tops must resolve at the second harmonic, and the grid must afford
    Q rounds of mollification shrinkage.
    """
    n_star = basis.n_star
    n = basis.n
    h = max(dom.spacing)
    crop_total = 0
    for q in range(config.stages):
        eta = config.margin0 * 0.5 ** q
        ell = eta / (config.moll_constant * sched.lam(q))
        top = (config.freq_constant / ell) * sched.Lambda(q) ** (
            config.J * (n_star - n) + n
        )
        limit = 2.0 * math.pi / (config.samples_per_period * h)
        if 2.0 * top > limit * (1.0 + 1e-9):
            raise ResolutionError(
                "scheduled ladder of stage %d tops out at frequency %.4g whose "
                "second harmonic exceeds the grid limit %.4g; refuse to start"
                % (q, top, limit)
            )
        crop_total += 2 * int(math.ceil(ell / h))
    if min(dom.npts) - crop_total < MIN_POINTS:
        raise DomainTooSmall(
            "grid cannot afford %d stages of mollification shrinkage "
            "(would crop %d of %d points per axis); refuse to start"
            % (config.stages, crop_total, min(dom.npts))
        )


def run(config):
    """Run Q stages of the construction and collect every diagnostic.

    A stage error aborts the loop and is recorded (failed_stage, error) on a
    partial report instead of propagating, so long runs always return what
    they measured.
    """
    t0 = time.perf_counter()
    basis = build_basis(config.n)
    for i in range(config.n):
        if abs(basis.directions[i][0]) < config.direction_threshold:
            raise DirectionError(
                "sharper direction %d has |nu . e1| below the configured "
                "threshold %g" % (i, config.direction_threshold)
            )
    sched = _schedule_from_config(config)
    g, u0, seed = make_preset(
        config.preset,
        config.n,
        config.delta0,
        config.grid,
        scale=config.scale,
        epsilon=config.epsilon,
        r_threshold=config.r_threshold,
        basis=basis,
    )
    _refuse_undersized(config, sched, u0.domain, basis)

    u, g_cur = u0, g
    stage_reports, stage_settings = [], []
    iterates = [u0]
    trajectory = [_total_deficit(g_cur, u, basis, config.samples_per_period)]
    c1_increments = []
    failed_stage = error_msg = None

    for q in range(config.stages):
        delta, delta_hat = sched.delta(q), sched.delta(q + 1)
        eta = config.margin0 * 0.5 ** q
        lam_floor = second_derivative_sup(u, config.samples_per_period)
        lam_in = max(sched.lam(q), lam_floor / math.sqrt(delta))
        params = StageParams(
            delta=delta,
            delta_hat=delta_hat,
            lambda_in=lam_in,
            eta=eta,
            J=config.J,
            Lambda=sched.Lambda(q),
            moll_constant=config.moll_constant,
            freq_constant=config.freq_constant,
            r_threshold=config.r_threshold,
            depth=config.depth if config.depth > 0 else None,
            nearness_slack=config.nearness_slack,
            positivity_floor=config.positivity_floor,
            amplitude_floor=config.amplitude_floor,
            immersion_floor=config.immersion_floor,
            spp=config.samples_per_period,
        )
        stage_settings.append(
            {
                "q": q,
                "delta": delta,
                "delta_hat": delta_hat,
                "lambda_scheduled": sched.lam(q),
                "lambda_used": lam_in,
                "Lambda": sched.Lambda(q),
                "eta": eta,
            }
        )
        try:
            rep = run_stage(u, g_cur, params, basis)
        except CorrugateError as exc:
            failed_stage = q
            error_msg = "stage %d: %s" % (q, exc)
            stage_settings.pop()
            break
        u = rep.v
        g_cur = restrict(g_cur, rep.domain_out)
        stage_reports.append(rep)
        iterates.append(u)
        trajectory.append(rep.total_deficit_after)
        c1_increments.append(rep.c1_increment)

    iterates = [restrict(f, u.domain) for f in iterates]
    closeness = float(np.abs(iterates[-1].values - iterates[0].values).max())
    holder = estimate_holder(iterates, DEFAULT_ALPHAS, config.samples_per_period)

    return RunReport(
        config=config,
        schedule=sched,
        preset_seed=seed,
        stage_reports=stage_reports,
        stage_settings=stage_settings,
        deficit_trajectory=trajectory,
        c1_increments=c1_increments,
        holder=holder,
        alpha_hat=holder["alpha_hat"],
        closeness=closeness,
        u_final=u,
        iterates=iterates,
        failed_stage=failed_stage,
        error=error_msg,
        wall_ms_total=(time.perf_counter() - t0) * 1e3,
    )


def _total_deficit(g, u, basis, spp=SAMPLES_PER_PERIOD):
    return float(np.abs(g.values - induced_metric(u, spp).values).max())


def _thread_cap():
    raw = os.environ.get("CORRUGATE_THREADS")
    if raw is None:
        return None
    try:
        cap = int(raw)
    except ValueError:
        raise ParamError("CORRUGATE_THREADS must be an integer, got %r" % raw)
    if cap < 1:
        raise ParamError("CORRUGATE_THREADS must be >= 1, got %d" % cap)
    return cap


def run_batch(configs):
    """Run independent configs concurrently; results keep the input order.

    CORRUGATE_THREADS caps the worker pool; unset means hardware default.
    """
    configs = list(configs)
    if not configs:
        return []
    cap = _thread_cap()
    if cap is None:
        cap = os.cpu_count() or 1
    workers = max(1, min(cap, len(configs)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, configs))


# ---------------------------------------------------------------------------
# Hölder-exponent estimation
# ---------------------------------------------------------------------------

def estimate_holder(iterates, alphas=DEFAULT_ALPHAS, spp=SAMPLES_PER_PERIOD):
    """Empirical C^{1,alpha} diagnostics from a run's iterates.

    For each alpha: the dyadic-pair Hölder seminorm of Du_Q, and the
    per-stage increments |u_{q+1} - u_q| measured in C^{1,alpha} (sup of the
    Jacobian difference plus its seminorm).  alpha_hat is the largest alpha
    whose increment sequence looks summable -- every consecutive ratio below
    0.95.  This is an estimator with a fixed protocol, not a certificate of
    C^{1,alpha} membership.
    """
    if not iterates:
        raise ParamError("need at least one iterate")
    alphas = sorted(float(a) for a in alphas)
    final_dom = iterates[-1].domain
    iterates = [
        f if f.domain == final_dom else restrict(f, final_dom) for f in iterates
    ]
    jacs = [jacobian(f, spp) for f in iterates]
    seminorms = {a: holder_seminorm(jacs[-1], a) for a in alphas}
    out = {
        "alphas": alphas,
        "seminorms": seminorms,
        "increments": {},
        "ratios": {},
        "alpha_hat": None,
    }
    if len(iterates) < 2:
        return out

    diffs = [
        Field(final_dom, jacs[i + 1].values - jacs[i].values,
              max(iterates[i + 1].freq, iterates[i].freq))
        for i in range(len(jacs) - 1)
    ]
    tiny = 1e-15 * (1.0 + sup_norm(jacs[-1]))
    alpha_hat = None
    for a in alphas:
        incs = [sup_norm(d) + holder_seminorm(d, a) for d in diffs]
        out["increments"][a] = incs
        ratios = []
        for prev, cur in zip(incs, incs[1:]):
            ratios.append(cur / prev if prev > tiny else 0.0)
        out["ratios"][a] = ratios
        if all(v <= tiny for v in incs):
            summable = True
        elif ratios:
            summable = all(r < 0.95 for r in ratios)
        else:
            summable = False  # a single nonzero increment proves nothing
        if summable:
            alpha_hat = a
    out["alpha_hat"] = alpha_hat
    return out


# ---------------------------------------------------------------------------
# mesh export (n = 2 immersions into R^3)
# ---------------------------------------------------------------------------

def export_mesh(u, path):
    """Write u as a Wavefront OBJ: row-major vertices, quads split in two."""
    if u.domain.dim != 2 or u.comp_shape != (3,):
        raise DimensionError(
            "mesh export wants a 2-d grid immersed in R^3, got grid dim %d "
            "with component shape %r" % (u.domain.dim, u.comp_shape)
        )
    nx, ny = u.domain.npts
    vals = u.values
    lines = ["# corrugated immersion, %d x %d grid" % (nx, ny)]
    for i in range(nx):
        for j in range(ny):
            lines.append("v %.17g %.17g %.17g" % tuple(vals[i, j]))
    for i in range(nx - 1):
        for j in range(ny - 1):
            v00 = i * ny + j + 1
            v10 = (i + 1) * ny + j + 1
            v11 = (i + 1) * ny + j + 2
            v01 = i * ny + j + 2
            lines.append("f %d %d %d" % (v00, v10, v11))
            lines.append("f %d %d %d" % (v00, v11, v01))
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path):
    """Parse vertices and faces back out of an OBJ file (roundtrip checks)."""
    verts, faces = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            faces.append(tuple(int(x) for x in parts[1:4]))
    return np.asarray(verts), faces


# ---------------------------------------------------------------------------
# report export
# ---------------------------------------------------------------------------

def _plain(obj):
    """Recursively strip numpy types so json sees builtins only."""
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    return str(obj)


def export_report(report, path):
    """Emit <path>.csv (stage summary) and <path>.json (full diagnostics).

    Deterministic field order throughout; CSV floats carry 17 significant
    digits, JSON floats are shortest-roundtrip (parse back bit-identical).
    In deterministic mode wall-clock columns are zeroed so repeated runs are
    byte-identical.
    """
    base = Path(path)
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    det = report.config.deterministic

    rows = []
    for q, (rep, setting) in enumerate(
        zip(report.stage_reports, report.stage_settings)
    ):
        wall = 0.0 if det else rep.wall_ms
        rows.append(
            "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g"
            % (
                q,
                setting["delta"],
                setting["lambda_used"],
                setting["Lambda"],
                rep.total_deficit_before,
                rep.total_deficit_after,
                rep.c1_increment,
                rep.c2_estimate,
                wall,
            )
        )
    csv_text = "\n".join(
        ["# " + REPORT_NOTE, ",".join(CSV_COLUMNS)] + rows
    ) + "\n"
    base.with_suffix(".csv").write_text(csv_text)

    sched = report.schedule
    config_dict = {
        f.name: getattr(report.config, f.name) for f in dc_fields(RunConfig)
    }
    stages_json = []
    for q, (rep, setting) in enumerate(
        zip(report.stage_reports, report.stage_settings)
    ):
        stages_json.append(
            {
                "q": q,
                "delta": setting["delta"],
                "delta_hat": setting["delta_hat"],
                "lambda_scheduled": setting["lambda_scheduled"],
                "lambda_used": setting["lambda_used"],
                "Lambda": setting["Lambda"],
                "eta": setting["eta"],
                "ell": rep.ell,
                "margin": rep.margin,
                "moll_floor": rep.moll_floor,
                "deficit_before_shape": rep.deficit_before,
                "deficit_after_shape": rep.deficit_after,
                "deficit_before_total": rep.total_deficit_before,
                "deficit_after_total": rep.total_deficit_after,
                "c1_increment": rep.c1_increment,
                "c2_estimate": rep.c2_estimate,
                "meets_continuation": rep.meets_continuation,
                "f_span_leading": rep.f_span_leading,
                "f_cancel_residual": rep.f_cancel_residual,
                "kaellen": {
                    "history": rep.kaellen_history,
                    "freq_scale": rep.kaellen_freq_scale,
                },
                "amplitude_range": list(rep.amplitude_range),
                "frequencies": rep.frequencies_used,
                "mu_values": rep.mu_values,
                "wall_ms": 0.0 if det else rep.wall_ms,
                "per_step": rep.per_step,
            }
        )
    doc = {
        "header": {
            "note": REPORT_NOTE,
            "deterministic": det,
            "config": config_dict,
            "schedule": {
                "beta": str(sched.beta),
                "beta_float": float(sched.beta),
                "alpha_limit": str(alpha_limit(sched.n)),
                "deltas": [sched.delta(q) for q in range(sched.stages + 1)],
                "lambdas_scheduled": [sched.lam(q) for q in range(sched.stages + 1)],
                "Lambdas": [sched.Lambda(q) for q in range(sched.stages)],
            },
            "preset": report.preset_seed,
        },
        "stages": stages_json,
        "deficit_trajectory": report.deficit_trajectory,
        "c1_increments": report.c1_increments,
        "closeness": report.closeness,
        "holder": {
            "alphas": report.holder["alphas"],
            "seminorms": {"%g" % a: v for a, v in report.holder["seminorms"].items()},
            "increments": {"%g" % a: v for a, v in report.holder["increments"].items()},
            "ratios": {"%g" % a: v for a, v in report.holder["ratios"].items()},
        },
        "alpha_hat": report.alpha_hat,
        "failed_stage": report.failed_stage,
        "error": report.error,
        "wall_ms_total": 0.0 if det else report.wall_ms_total,
    }
    base.with_suffix(".json").write_text(
        json.dumps(_plain(doc), indent=2, allow_nan=False) + "\n"
    )
    return base.with_suffix(".csv"), base.with_suffix(".json")
