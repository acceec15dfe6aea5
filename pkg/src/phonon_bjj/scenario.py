"""Scenario configuration, preset registry and result emission.

A scenario is a JSON document validated against the bundled schema. Runs
write a trajectory table, an analysis record and a sibling provenance file
whose ``config`` block reproduces the run byte for byte.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .analysis import (
    DEFAULT_WINDOW,
    FrequencyError,
    classify_regime,
    classify_stationary_points,
    critical_g,
    critical_z,
    damping_transition_time,
    energy_contours,
    estimate_frequency,
    linear_frequencies,
    potential,
    potential_curve,
    regime_onset,
)
from .bjj import BjjParams, BjjState, hamiltonian, simulate_bjj, simulate_damped, simulate_rescaled
from .ode import BJJ_OPTIONS, PHYSICAL_OPTIONS, IntegratorOptions
from .optomech import (
    FullSystemParams,
    bjj_state_from_phonons,
    derive_bjj_params,
    effective_params,
    phonon_observables,
    simulate_full,
    simulate_reduced,
    steady_state,
    validity_check,
)

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "ResultBundle",
    "SweepResult",
    "OUT_DIR_ENV",
    "load_config",
    "preset",
    "preset_names",
    "run_scenario",
    "sweep",
    "emit_contours",
    "derive_params",
    "format_number",
]

OUT_DIR_ENV = "PHONON_BJJ_OUT"
BJJ_MODELS = ("bjj", "bjj-damped", "bjj-rescaled")
PHYSICAL_MODELS = ("full", "reduced")
ANALYSES = {
    "bjj": {"regime", "frequency", "potential", "contours", "critical-values", "stationary-points"},
    "physical": {"validity", "bjj-params", "compare"},
}


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the field."""


def _read_json(name: str) -> dict:
    return json.loads(resources.files(__package__).joinpath("data", name).read_text())


_SCHEMA = _read_json("scenario.schema.json")
_VALIDATOR = jsonschema.Draft202012Validator(_SCHEMA)


def _field_path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario document.

    ``data`` keeps the JSON form with defaults filled in; it is what the
    provenance file echoes.
    """

    data: dict

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ConfigError("<root>: scenario must be a JSON object")
        errors = sorted(_VALIDATOR.iter_errors(d), key=lambda e: list(e.absolute_path))
        if errors:
            err = jsonschema.exceptions.best_match(errors)
            raise ConfigError(f"{_field_path(err)}: {err.message}")
        data = _normalise(copy.deepcopy(d))
        _check_semantics(data)
        return cls(data)

    @property
    def model(self) -> str:
        return self.data["model"]

    @property
    def name(self) -> str:
        return self.data.get("name", "scenario")

    @property
    def stem(self) -> str:
        return self.data["output"]["stem"]

    @property
    def analyses(self) -> list[str]:
        return list(self.data["analyses"])

    @property
    def span(self) -> tuple[float, float]:
        a, b = self.data["span"]
        return float(a), float(b)

    @property
    def family(self) -> dict | None:
        return self.data.get("family")

    def integrator_options(self) -> IntegratorOptions:
        base = BJJ_OPTIONS if self.model in BJJ_MODELS else PHYSICAL_OPTIONS
        o = self.data.get("options", {})
        return IntegratorOptions(
            rel_tol=o.get("rel_tol", base.rel_tol),
            abs_tol=o.get("abs_tol", base.abs_tol),
            max_step=o.get("max_step", base.max_step),
        )

    def bjj_params(self) -> BjjParams:
        if self.model not in BJJ_MODELS:
            raise ConfigError(f"model: {self.model!r} has no junction parameter block")
        return BjjParams(**self.data["params"])

    def bjj_init(self) -> BjjState:
        init = self.data["init"]
        phi = init["phi"] if "phi" in init else math.pi * init["phi_pi"]
        return BjjState(float(init["z"]), float(phi))

    def full_params(self) -> FullSystemParams:
        if self.model not in PHYSICAL_MODELS:
            raise ConfigError(f"model: {self.model!r} has no physical parameter block")
        return FullSystemParams.from_dict(self.data["params"])

    def with_value(self, axis: str, value: float) -> "ScenarioConfig":
        """Copy with the scalar at dotted path ``axis`` replaced by ``value``."""
        d = copy.deepcopy(self.data)
        d.pop("family", None)
        parent, key = _locate(d, axis)
        parent[key] = value
        return ScenarioConfig.from_dict(d)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)


def _normalise(d: dict) -> dict:
    d.setdefault("simulate", True)
    d.setdefault("samples", 2001)
    d.setdefault("analyses", [])
    d.setdefault("analysis_options", {})
    out = d.setdefault("output", {})
    out.setdefault("stem", d.get("name", "scenario"))
    out.setdefault("format", "csv")
    if d["model"] in BJJ_MODELS:
        p = d["params"]
        p.setdefault("delta0", 0.0)
        p.setdefault("delta_u", 0.0)
        p.setdefault("gamma", 0.0)
        p.setdefault("J", 1.0)
        p.setdefault("N_T", 1.0)
    if d["model"] == "reduced":
        d.setdefault("reduced_mode", "complex-coefficients")
    if "contours" in d["analyses"]:
        c = d.setdefault("contours", {})
        c.setdefault("z_range", [-1.0, 1.0])
        c.setdefault("phi_range_pi", [0.0, 1.0])
        c.setdefault("n_z", 201)
        c.setdefault("n_phi", 201)
    return d


def _check_semantics(d: dict) -> None:
    model = d["model"]
    if d["simulate"]:
        t0, t1 = d["span"]
        if not t1 > t0:
            raise ConfigError(f"span: end must exceed start, got {d['span']}")
    group = "bjj" if model in BJJ_MODELS else "physical"
    for i, a in enumerate(d["analyses"]):
        if a not in ANALYSES[group]:
            raise ConfigError(f"analyses/{i}: {a!r} does not apply to model {model!r}")
    if "contours" in d:
        c = d["contours"]
        lo, hi = c.get("z_range", [-1.0, 1.0])
        if lo < -1 or hi > 1 or not hi > lo:
            raise ConfigError(f"contours/z_range: must be an increasing interval within [-1, 1], got {[lo, hi]}")
    w = d["analysis_options"].get("window")
    if w is not None and not w[1] > w[0]:
        raise ConfigError(f"analysis_options/window: end must exceed start, got {w}")
    if model in PHYSICAL_MODELS:
        try:
            FullSystemParams.from_dict(d["params"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"params: {exc}") from None
    if d.get("family"):
        try:
            _locate(copy.deepcopy(d), d["family"]["axis"])
        except ConfigError as exc:
            raise ConfigError(f"family/axis: {exc}") from None


def _locate(d: dict, axis: str):
    keys = axis.split(".")
    node = d
    for k in keys[:-1]:
        if not isinstance(node, dict) or k not in node:
            raise ConfigError(f"{axis}: no such field")
        node = node[k]
    last = keys[-1]
    if not isinstance(node, dict) or last not in node:
        raise ConfigError(f"{axis}: no such field")
    val = node[last]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{axis}: sweep axis must address a scalar number, found {type(val).__name__}")
    return node, last


def load_config(path) -> ScenarioConfig:
    """Read a scenario file; a provenance file is accepted and its ``config`` used."""
    try:
        d = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"<file>: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<file>: {path} is not valid JSON: {exc}") from None
    if isinstance(d, dict) and "provenance" in d and "config" in d:
        d = d["config"]
    return ScenarioConfig.from_dict(d)


def _catalogue() -> dict:
    return _read_json("presets.json")["presets"]


def preset_names() -> list[str]:
    return list(_catalogue())


def preset(name: str) -> ScenarioConfig:
    cat = _catalogue()
    if name not in cat:
        raise ConfigError(f"preset: unknown name {name!r}; valid names: {', '.join(cat)}")
    return ScenarioConfig.from_dict(cat[name])


# --- serialisation -----------------------------------------------------------


def format_number(x) -> str:
    """Shortest decimal string that round-trips to the same double."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, complex):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def _table_csv(columns: dict[str, np.ndarray]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in zip(*columns.values()):
        w.writerow([format_number(v) for v in row])
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def resolve_out_dir(out_dir=None, config: ScenarioConfig | None = None) -> Path:
    """Explicit argument, then the environment override, then the config."""
    if out_dir is not None:
        return Path(out_dir)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env)
    if config is not None and config.data["output"].get("dir"):
        return Path(config.data["output"]["dir"])
    return Path(".")


def _provenance(config: ScenarioConfig, files: list[str]) -> dict:
    echo = config.to_dict()
    echo["output"].pop("dir", None)
    opts = config.integrator_options()
    return {
        "provenance": {
            "tool": "phonon-bjj",
            "version": __version__,
            "integrator": {
                "method": "dormand-prince 5(4)",
                "rel_tol": opts.rel_tol,
                "abs_tol": opts.abs_tol,
                "max_step": None if math.isinf(opts.max_step) else opts.max_step,
            },
            "files": files,
        },
        "config": echo,
    }


# --- running -----------------------------------------------------------------


@dataclass
class ResultBundle:
    config: ScenarioConfig
    columns: dict[str, np.ndarray] | None
    analysis: dict
    provenance: dict
    files: list[Path] = field(default_factory=list)
    trajectory: object = None

    @property
    def inconclusive(self) -> bool:
        reg = self.analysis.get("regime")
        return bool(reg and reg.get("inconclusive"))


def _sample_grid(config: ScenarioConfig):
    n = config.data["samples"]
    if n == 0:
        return None
    t0, t1 = config.span
    return np.linspace(t0, t1, max(n, 2))


def _run_bjj(config: ScenarioConfig):
    p = config.bjj_params()
    init = config.bjj_init()
    opts = config.integrator_options()
    grid = _sample_grid(config)
    sim = {"bjj": simulate_bjj, "bjj-damped": simulate_damped, "bjj-rescaled": simulate_rescaled}[config.model]
    traj = sim(p, init, config.span, opts, output_times=grid)
    return traj, traj.columns()


def _amplitude(spec) -> complex:
    if isinstance(spec, dict):
        return math.sqrt(spec["n"]) * complex(math.cos(math.pi * spec.get("theta_pi", 0.0)),
                                              math.sin(math.pi * spec.get("theta_pi", 0.0)))
    return complex(spec[0], spec[1])


def _physical_setup(config: ScenarioConfig):
    fp = config.full_params()
    red = effective_params(fp)
    init = config.data.get("init", {})
    b = (_amplitude(init["b1"]), _amplitude(init["b2"])) if init else (0j, 0j)
    N_T0 = abs(b[0]) ** 2 + abs(b[1]) ** 2
    try:
        bp = derive_bjj_params(red, max(N_T0, 1.0))
    except ValueError as exc:
        log.warning("junction parameters unavailable: %s", exc)
        bp = None
    return fp, red, b, N_T0, bp


def _physical_columns(traj, grid, N_T0, red, bp):
    obs = phonon_observables(traj, N_T0, grid, remove_rotation=red.shifted_freq)
    cols = {"t": obs.t, "z": obs.z, "phi": obs.phi}
    if bp is not None:
        z = np.clip(obs.z, -1.0, 1.0)
        zz, pp = bjj_state_from_phonons(z, obs.phi, bp)
        cols["H"] = hamiltonian(zz, pp, bp)
        cols["I"] = bp.J * bp.N_T**2 * (1 - z**2) * np.sin(2 * pp)
    else:
        cols["H"] = np.full(len(obs.t), np.nan)
        cols["I"] = np.full(len(obs.t), np.nan)
    cols["n1"], cols["n2"], cols["N_T"] = obs.n1, obs.n2, obs.N_T
    return cols, obs


def _run_physical(config: ScenarioConfig):
    fp, red, b, N_T0, bp = _physical_setup(config)
    if not N_T0 > 0:
        raise ConfigError("init: the mechanical modes start empty; z is undefined")
    opts = config.integrator_options()
    if config.model == "full":
        a_spec = config.data["init"].get("a", "steady")
        a0 = steady_state(fp).alpha if a_spec == "steady" else _amplitude(a_spec)
        traj = simulate_full(fp, (a0, b[0], b[1]), config.span, opts)
    else:
        traj = simulate_reduced(red, b, config.span, config.data["reduced_mode"], opts)
    grid = _sample_grid(config)
    if grid is None:
        grid = traj.times
    cols, _ = _physical_columns(traj, grid, N_T0, red, bp)
    return traj, cols


def _window(traj, config: ScenarioConfig) -> tuple[float, float]:
    """Configured window, else the default one, else the whole run."""
    w = config.data["analysis_options"].get("window")
    if w is not None:
        return float(w[0]), float(w[1])
    t0, t1 = traj.raw.t0, traj.raw.t1
    lo, hi = max(DEFAULT_WINDOW[0], t0), min(DEFAULT_WINDOW[1], t1)
    return (lo, hi) if hi > lo else (t0, t1)


def _regime_record(traj, config: ScenarioConfig) -> dict:
    rep = classify_regime(traj, _window(traj, config))
    rec = rep.to_dict()
    width = config.data["analysis_options"].get("onset_width")
    if width is not None:
        rec["onset"] = regime_onset(traj, width)
        rec["onset_width"] = width
    return rec


def _frequency_record(traj, config: ScenarioConfig) -> dict:
    p = config.bjj_params()
    lo, hi = _window(traj, config)
    lo, hi = max(lo, traj.raw.t0), min(hi, traj.raw.t1)
    grid = np.linspace(lo, hi, max(2001, int((hi - lo) * 100) + 1))
    y = traj.raw(grid)
    z = y[:, 0]
    if traj.kind == "damped":
        z = z * np.exp(0.5 * p.gamma * grid)
    lf = linear_frequencies(p.g, p.delta, p.J, p.N_T)
    rec = {"window": [lo, hi], "measured": None, "error": None, "predicted": {
        "omega0": lf.omega0, "omega_L": lf.omega_L, "omega_ac": lf.omega_ac,
        "omega0_phys": lf.omega0_phys, "omega_L_phys": lf.omega_L_phys, "omega_ac_phys": lf.omega_ac_phys,
    }}
    try:
        rec["measured"] = estimate_frequency(grid, z)
    except FrequencyError as exc:
        rec["error"] = str(exc)
    return rec


def _critical_record(config: ScenarioConfig) -> dict:
    p = config.bjj_params()
    st = config.bjj_init()
    H0 = float(hamiltonian(st.z, st.phi, BjjParams(g=p.g, delta0=p.delta)))
    rec = {"H0": H0, "delta": p.delta}
    if p.delta == 0:
        rec["mst"] = H0 > 0.5
        rec["W0_above_H0"] = bool(potential(0.0, H0, p.g) > H0)
    try:
        rec["g_c"] = critical_g(st.z, st.phi)
    except ZeroDivisionError:
        rec["g_c"] = None
    try:
        rec["z_c"] = critical_z(st.phi, p.g)
    except ValueError as exc:
        rec["z_c"] = None
        rec["z_c_note"] = str(exc)
    dcrit = config.data["analysis_options"].get("delta_crit")
    if dcrit is not None and p.gamma > 0:
        tt = damping_transition_time(p.delta0, p.delta_u, dcrit, p.gamma)
        rec["delta_crit"] = dcrit
        rec["tau_star"] = tt.tau
        rec["trapped_from_start"] = tt.trapped_from_start
    return rec


def _potential(config: ScenarioConfig):
    p = config.bjj_params()
    st = config.bjj_init()
    curve = potential_curve(st.z, st.phi, p.g, p.delta)
    rec = {"H0": curve.H0, "g": curve.g, "delta": curve.delta,
           "W0_minus_H0": float(potential(0.0, curve.H0, p.g, p.delta) - curve.H0)}
    return rec, {"z": curve.z, "W_minus_H0": curve.W_minus_H0}


def _contour_table(config: ScenarioConfig) -> dict[str, np.ndarray]:
    p = config.bjj_params()
    c = config.data["contours"]
    lo, hi = c["phi_range_pi"]
    grid = energy_contours(p.g, p.delta, tuple(c["z_range"]), (math.pi * lo, math.pi * hi), c["n_z"], c["n_phi"])
    Z, P = np.meshgrid(grid.z, grid.phi)
    return {"z": Z.ravel(), "phi": P.ravel(), "H": grid.H.ravel()}


def emit_contours(config: ScenarioConfig, out_dir=None) -> Path:
    """Write ``<stem>.contours.csv`` (rows phi-major) and return its path."""
    if config.model not in BJJ_MODELS:
        raise ConfigError(f"model: contours need a junction model, got {config.model!r}")
    if "contours" not in config.data:
        d = config.to_dict()
        d["analyses"] = sorted(set(d["analyses"]) | {"contours"})
        config = ScenarioConfig.from_dict(d)
    out = resolve_out_dir(out_dir, config)
    path = _write(out / f"{config.stem}.contours.csv", _table_csv(_contour_table(config)))
    _write(out / f"{config.stem}.contours.provenance.json", _dumps(_provenance(config, [path.name])))
    return path


def _compare_record(config: ScenarioConfig, full_traj, grid) -> dict:
    fp, red, b, N_T0, bp = _physical_setup(config)
    opts = config.integrator_options()
    tol = config.data["analysis_options"].get("compare_tol", 0.05)
    of = phonon_observables(full_traj, N_T0, grid)
    rec = {"metric": "max over samples and modes of |n_full - n_reduced| / n_reduced",
           "tolerance": tol, "full_N_T_end": float(of.N_T[-1]), "modes": {}}
    for mode in ("complex-coefficients", "hermitian-approx"):
        red_traj = simulate_reduced(red, b, config.span, mode, opts)
        orr = phonon_observables(red_traj, N_T0, grid)
        dev = [float(np.max(np.abs(x - y) / y)) for x, y in ((of.n1, orr.n1), (of.n2, orr.n2))]
        absdev = [float(np.max(np.abs(x - y)) / N_T0) for x, y in ((of.n1, orr.n1), (of.n2, orr.n2))]
        rec["modes"][mode] = {
            "max_rel_dev": dev,
            "max_abs_dev_over_N_T": absdev,
            "N_T_drift": float(np.max(np.abs(orr.N_T / N_T0 - 1))),
            "passed": max(dev) < tol,
        }
    rec["max_rel_dev"] = max(rec["modes"]["complex-coefficients"]["max_rel_dev"])
    rec["passed"] = rec["modes"]["complex-coefficients"]["passed"]
    return rec


def _analyse(config: ScenarioConfig, traj) -> tuple[dict, dict]:
    """Analysis record plus extra tables keyed by file suffix."""
    rec: dict = {}
    tables: dict = {}
    for name in config.analyses:
        if name == "regime":
            rec["regime"] = _regime_record(traj, config)
        elif name == "frequency":
            rec["frequency"] = _frequency_record(traj, config)
        elif name == "critical-values":
            rec["critical_values"] = _critical_record(config)
        elif name == "potential":
            rec["potential"], tables["potential"] = _potential(config)
        elif name == "contours":
            tables["contours"] = _contour_table(config)
        elif name == "stationary-points":
            p = config.bjj_params()
            rec["stationary_points"] = (
                [vars(s) for s in classify_stationary_points(p.g)] if p.delta == 0 else None
            )
        elif name == "validity":
            rec["validity"] = validity_check(config.full_params()).to_dict()
        elif name == "bjj-params":
            rec["bjj_params"] = _derive_record(config)
        elif name == "compare":
            if config.model != "full":
                raise ConfigError("analyses: compare runs the full model against the reduced one; set model to 'full'")
            rec["compare"] = _compare_record(config, traj, _sample_grid(config))
    return rec, tables


def _needs_trajectory(config: ScenarioConfig) -> bool:
    return bool(config.data["simulate"])


def run_scenario(config: ScenarioConfig, out_dir=None, fmt: str | None = None, write: bool = True) -> ResultBundle:
    """Run one scenario and emit its files.

    Files: ``<stem>.csv`` (or ``.json``) with the trajectory,
    ``<stem>.analysis.json``, optional ``<stem>.potential.csv`` and
    ``<stem>.contours.csv``, and ``<stem>.provenance.json``.
    """
    if config.family:
        raise ConfigError("family: this scenario describes a family; run it with sweep")
    fmt = fmt or config.data["output"]["format"]
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format: must be csv or json, got {fmt!r}")
    traj, cols = None, None
    if _needs_trajectory(config):
        if config.model in BJJ_MODELS:
            traj, cols = _run_bjj(config)
        else:
            traj, cols = _run_physical(config)
    analysis, tables = _analyse(config, traj)
    bundle = ResultBundle(config, cols, analysis, {}, [], traj)
    if not write:
        bundle.provenance = _provenance(config, [])
        return bundle

    out = resolve_out_dir(out_dir, config)
    stem = config.stem
    files: list[Path] = []
    if cols is not None:
        if fmt == "csv":
            files.append(_write(out / f"{stem}.csv", _table_csv(cols)))
        else:
            files.append(_write(out / f"{stem}.json", _dumps({"columns": cols})))
    for suffix, table in tables.items():
        files.append(_write(out / f"{stem}.{suffix}.csv", _table_csv(table)))
    files.append(_write(out / f"{stem}.analysis.json", _dumps(analysis)))
    prov = _provenance(config, [f.name for f in files])
    files.append(_write(out / f"{stem}.provenance.json", _dumps(prov)))
    bundle.provenance = prov
    bundle.files = files
    return bundle


# --- sweeps ------------------------------------------------------------------


SUMMARY_FIELDS = (
    "index", "value", "H0", "mst", "phase_mode", "self_trapped", "mean_z",
    "sign_changes", "winding", "dominant_freq", "inconclusive",
)


@dataclass
class SweepResult:
    axis: str
    rows: list[dict]
    bundles: list[ResultBundle]
    summary_path: Path | None = None

    @property
    def inconclusive(self) -> bool:
        return any(b.inconclusive for b in self.bundles)


def _member(config: ScenarioConfig, axis: str, i: int, value: float) -> ScenarioConfig:
    cfg = config.with_value(axis, value)
    d = cfg.to_dict()
    d["output"]["stem"] = f"{config.stem}-{i:02d}"
    if d["model"] in BJJ_MODELS and d["simulate"] and "regime" not in d["analyses"]:
        d["analyses"].append("regime")
    if d["model"] in BJJ_MODELS and "critical-values" not in d["analyses"]:
        d["analyses"].append("critical-values")
    return ScenarioConfig.from_dict(d)


def _run_member(args):
    data, out_dir, fmt, write = args
    b = run_scenario(ScenarioConfig(data), out_dir, fmt, write)
    b.trajectory = None if write else b.trajectory
    return b


def _summary_row(i: int, value: float, b: ResultBundle) -> dict:
    crit = b.analysis.get("critical_values", {})
    reg = b.analysis.get("regime", {})
    return {
        "index": i,
        "value": value,
        "H0": crit.get("H0"),
        "mst": crit.get("mst"),
        "phase_mode": reg.get("phase_mode"),
        "self_trapped": reg.get("self_trapped"),
        "mean_z": reg.get("mean_z"),
        "sign_changes": reg.get("sign_changes"),
        "winding": reg.get("winding"),
        "dominant_freq": reg.get("dominant_freq"),
        "inconclusive": reg.get("inconclusive"),
    }


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_number(v)
    return str(v)


def sweep(
    config: ScenarioConfig,
    axis: str,
    values,
    out_dir=None,
    fmt: str | None = None,
    jobs: int = 1,
    write: bool = True,
) -> SweepResult:
    """Run one scenario per value of the scalar at ``axis``.

    Members are written as ``<stem>-NN.*``; the summary table
    ``<stem>.sweep.csv`` lists regime labels and the initial energy.
    Members may run in ``jobs`` worker processes; each writes only its
    own files.
    """
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("values: at least one value is required")
    members = [_member(config, axis, i, v) for i, v in enumerate(values)]
    out = resolve_out_dir(out_dir, config)
    tasks = [(m.data, out, fmt, write) for m in members]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            bundles = list(pool.map(_run_member, tasks))
    else:
        bundles = [_run_member(t) for t in tasks]
    rows = [_summary_row(i, v, b) for i, (v, b) in enumerate(zip(values, bundles))]
    res = SweepResult(axis, rows, bundles)
    if write:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_FIELDS)
        for r in rows:
            w.writerow([_cell(r[k]) for k in SUMMARY_FIELDS])
        res.summary_path = _write(out / f"{config.stem}.sweep.csv", buf.getvalue())
        prov = _provenance(config, [res.summary_path.name] + [f.name for b in bundles for f in b.files])
        prov["provenance"]["sweep"] = {"axis": axis, "values": values}
        _write(out / f"{config.stem}.sweep.provenance.json", _dumps(prov))
    return res


# --- parameter derivation ----------------------------------------------------


def _derive_record(config: ScenarioConfig) -> dict:
    fp, red, b, N_T0, bp = _physical_setup(config)
    rec = {
        "steady_state_alpha": red.alpha,
        "reduced": {
            "shifted_freq": red.shifted_freq,
            "eff_coupling": red.eff_coupling,
            "detuning": red.detuning,
            "kerr": red.kerr,
            "exchange": red.exchange,
            "kerr_approx": red.kerr_approx,
            "exchange_approx": red.exchange_approx,
        },
        "N_T": N_T0,
        "bjj": None,
    }
    if bp is not None:
        rec["bjj"] = {"g": bp.g, "delta0": bp.delta0, "delta_u": bp.delta_u, "gamma": bp.gamma,
                      "J": bp.J, "N_T": bp.N_T}
        if b[0] != 0 and b[1] != 0:
            z = (abs(b[0]) ** 2 - abs(b[1]) ** 2) / N_T0
            phi = math.atan2(b[1].imag, b[1].real) - math.atan2(b[0].imag, b[0].real)
            rec["bjj_init"] = dict(zip(("z", "phi"), bjj_state_from_phonons(z, phi, bp)))
    return rec


def derive_params(config: ScenarioConfig) -> dict:
    """Reduced parameters, junction parameters and the validity report."""
    if config.model not in PHYSICAL_MODELS:
        raise ConfigError(f"model: derive-params needs physical parameters (full or reduced), got {config.model!r}")
    rec = _derive_record(config)
    rec["validity"] = validity_check(config.full_params()).to_dict()
    return _jsonable(rec)
