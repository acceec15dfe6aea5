"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, repeated in the terminal summary.
"""

import math
import time

import numpy as np

from phonon_bjj.analysis import (
    classify_regime,
    critical_delta,
    critical_g,
    estimate_frequency,
    mst_condition,
    potential,
    regime_onset,
)
from phonon_bjj.bjj import BjjParams, hamiltonian, simulate_bjj, simulate_rescaled, symmetry_transform
from phonon_bjj.ode import IntegratorOptions
from phonon_bjj.optomech import effective_params, phonon_observables, simulate_reduced
from phonon_bjj.scenario import ScenarioConfig, preset, preset_names, run_scenario

TIGHT = IntegratorOptions(rel_tol=1e-11, abs_tol=1e-14)


def _z_frequency(g, delta, z0, span=(0.0, 50.0)):
    traj = simulate_bjj(BjjParams(g=g, delta0=delta), (z0, 0.0), span)
    t = np.linspace(*span, 20001)
    z = traj.raw(t)[:, 0]
    return t, z, estimate_frequency(t, z)


def test_c1_linear_frequency_omega0(record):
    _, _, w = _z_frequency(0.0, 0.0, 0.01)
    err = abs(w - math.sqrt(2)) / math.sqrt(2)
    assert record("1", err < 0.01, f"omega={w:.6f} target sqrt(2), rel err {err:.2e} (tol 1e-2)")


def test_c2_linear_frequency_omega_L(record):
    _, _, w1 = _z_frequency(0.5, 0.0, 0.01)
    _, _, w2 = _z_frequency(0.75, 0.0, 0.01)
    e1 = abs(w1 - 1.0)
    e2 = abs(w2 - math.sqrt(0.5)) / math.sqrt(0.5)
    ok = e1 < 0.01 and e2 < 0.01
    assert record("2", ok, f"g=0.5 omega={w1:.6f} (err {e1:.2e}); g=0.75 omega={w2:.6f} (err {e2:.2e}); tol 1e-2")


def test_c3_ac_josephson(record):
    delta = 1.0
    t, z, w = _z_frequency(0.1, delta, 0.001)
    amp = 0.5 * float(np.ptp(z))
    ef = abs(w - 2 * delta) / (2 * delta)
    ea = abs(amp - 1 / (2 * delta)) / (1 / (2 * delta))
    ok = ef < 0.02 and ea < 0.05
    assert record("3", ok, f"omega={w:.4f} target 2 (err {ef:.2e}, tol 2e-2); amplitude={amp:.4f} target 0.5 (err {ea:.2e}, tol 5e-2)")


def _family_reports(name):
    cfg = preset(name)
    out = []
    values = cfg.family["values"] if cfg.family else [cfg.data["init"]["z"]]
    for v in values:
        member = cfg.with_value("init.z", v) if cfg.family else cfg
        b = run_scenario(member, write=False)
        out.append((v, b.analysis["regime"]))
    return out


def test_c4_g_transition(record):
    below = _family_reports("fig3a") + _family_reports("fig3b")
    above = _family_reports("fig3c") + _family_reports("fig3d")
    ok_below = all(r["phase_mode"] == "zero-phase" and not r["self_trapped"] for _, r in below)
    ok_above = all(r["phase_mode"] == "running-phase" and r["self_trapped"] for _, r in above)
    detail = "; ".join(
        f"g={g} z0={v}: {r['phase_mode']}/{'trapped' if r['self_trapped'] else 'untrapped'}"
        for g, rows in (("0.99", below), ("1.01", above)) for v, r in rows
    )
    assert record("4", ok_below and ok_above, detail)


def _fig4(z0):
    traj = simulate_bjj(BjjParams(g=7.0), (z0, math.pi / 2), (0.0, 200.0), TIGHT)
    rep = classify_regime(traj, (20.0, 200.0))
    grid = np.linspace(20.0, 200.0, 18001)
    z = traj.raw(grid)[:, 0]
    return rep, 2 * math.pi / rep.dominant_freq, float(np.ptp(z))


def test_c5_z_transition(record):
    r02, T02, _ = _fig4(0.2)
    r4999, T4999, _ = _fig4(0.4999)
    r5001, T5001, x5001 = _fig4(0.5001)
    r07, T07, x07 = _fig4(0.7)
    ok = (
        not r4999.self_trapped and T4999 > T02
        and r5001.self_trapped
        and r07.self_trapped and T07 < T5001 and x07 < x5001
    )
    detail = (
        f"z0=0.2 T={T02:.3f}; z0=0.4999 {'trapped' if r4999.self_trapped else 'untrapped'} T={T4999:.3f}; "
        f"z0=0.5001 {'trapped' if r5001.self_trapped else 'untrapped'} T={T5001:.3f} excursion={x5001:.4f}; "
        f"z0=0.7 {'trapped' if r07.self_trapped else 'untrapped'} T={T07:.3f} excursion={x07:.4f}"
    )
    assert record("5", ok, detail)


def test_c6a_critical_asymmetry_zero_phase(record):
    res = critical_delta(0.5, 0.0, 0.9)
    ok = abs(res.delta_crit - 0.05) <= 0.01
    assert record("6a", ok, f"critical_delta(0.5, 0, 0.9)={res.delta_crit:.4f} target 0.05 +- 0.01")


def test_c6b_critical_asymmetry_half_pi(record):
    res = critical_delta(0.5, math.pi / 2, 6.0, opts=TIGHT)
    ok = abs(res.delta_crit - 0.24) <= 0.02
    assert record("6b", ok, f"critical_delta(0.5, pi/2, 6)={res.delta_crit:.4f} target 0.24 +- 0.02")


def test_c7_damping_induced_transition(record):
    p = BjjParams(g=0.9, delta0=0.03, delta_u=0.01, gamma=0.01)
    traj = simulate_rescaled(p, (0.5, 0.0), (0.0, 190.0))
    early = classify_regime(traj, (0.0, 35.0))
    late = classify_regime(traj, (65.0, 190.0))
    onset = regime_onset(traj, width=30.0)
    ok = (not early.self_trapped) and late.self_trapped and abs(onset - 50.0) <= 10.0
    detail = (
        f"tau in [0,35]: {'trapped' if early.self_trapped else 'untrapped'} "
        f"(sign changes {early.sign_changes}, mean z' {early.mean_z:.3f}); "
        f"tau in [65,190]: {'trapped' if late.self_trapped else 'untrapped'}; onset={onset:.1f} target 50 +- 10"
    )
    assert record("7", ok, detail)


def _undamped_members():
    for name in preset_names():
        cfg = preset(name)
        if cfg.model != "bjj" or not cfg.data["simulate"]:
            continue
        if cfg.family:
            for i, v in enumerate(cfg.family["values"]):
                yield f"{name}-{i:02d}", cfg.with_value(cfg.family["axis"], v)
        else:
            yield name, cfg


def test_c8_energy_conservation(record):
    worst = {}
    for label, cfg in _undamped_members():
        p = cfg.bjj_params()
        traj = simulate_bjj(p, cfg.bjj_init(), cfg.span, cfg.integrator_options())
        H = hamiltonian(traj.raw.states[:, 0], traj.raw.states[:, 1], p)
        worst[label] = float(np.max(np.abs(H - H[0])))
    label = max(worst, key=worst.get)
    ok = all(v <= 1e-8 for v in worst.values())
    assert record("8", ok, f"{len(worst)} undamped preset runs; max |H - H0| = {worst[label]:.2e} ({label}); tol 1e-8")


def test_c9_symmetry(record):
    rng = np.random.default_rng(11)
    worst = 0.0
    grid = np.linspace(0.0, 50.0, 2001)
    for _ in range(20):
        p = BjjParams(g=rng.uniform(-3, 8), delta0=rng.uniform(-0.5, 0.5))
        z0, phi0 = rng.uniform(-0.9, 0.9), rng.uniform(0, math.pi)
        a = simulate_bjj(p, (z0, phi0), (0.0, 50.0), TIGHT, output_times=grid)
        p2, s2 = symmetry_transform(p, (z0, phi0))
        b = simulate_bjj(p2, s2, (0.0, 50.0), TIGHT, output_times=grid)
        dev = max(np.max(np.abs(b.z - a.z)), np.max(np.abs(b.phi - (math.pi / 2 - a.phi))))
        worst = max(worst, float(dev))
    assert record("9", worst <= 1e-6, f"20 random sets, max deviation {worst:.2e}; tol 1e-6")


def test_c10_mst_predictor(record):
    rng = np.random.default_rng(7)
    cases = []
    while len(cases) < 100:
        z0 = rng.uniform(-0.95, 0.95)
        if abs(z0) < 0.05:
            continue
        phi0 = rng.uniform(0, math.pi)
        g = rng.uniform(0, 8)
        if abs(g - critical_g(z0, phi0)) < 0.02:
            continue
        cases.append((z0, phi0, g))
    mism, pot_mism, inconclusive = [], [], 0
    for z0, phi0, g in cases:
        H0, mst = mst_condition(z0, phi0, g)
        traj = simulate_bjj(BjjParams(g=g), (z0, phi0), (0.0, 200.0))
        rep = classify_regime(traj)
        inconclusive += rep.inconclusive
        if rep.self_trapped != mst:
            mism.append((z0, phi0, g))
        if bool(potential(0.0, H0, g) > H0) != rep.self_trapped:
            pot_mism.append((z0, phi0, g))
    ok = not mism and not pot_mism
    detail = (
        f"100 cases outside |g-g_c|<0.02: {len(mism)} classifier/H0 mismatches, "
        f"{len(pot_mism)} W(0)>H0 mismatches, {inconclusive} inconclusive"
    )
    assert record("10", ok, detail)


def test_c11_reduction_oracle(record):
    cfg = preset("oracle-compare")
    start = time.perf_counter()
    bundle = run_scenario(cfg, write=False)
    elapsed = time.perf_counter() - start
    cmp = bundle.analysis["compare"]
    validity = bundle.analysis["validity"]
    ratios = {c["name"]: c["ratio"] for c in validity["conditions"]}
    ok = cmp["max_rel_dev"] < 0.05 and validity["all_passed"] and elapsed <= 600
    detail = (
        f"max relative deviation {cmp['max_rel_dev']:.4f} (tol 0.05); validity ratios "
        + ", ".join(f"{k}={v:.3g}" for k, v in ratios.items())
        + f"; runtime {elapsed:.0f} s (budget 600 s)"
    )
    assert record("11", ok, detail)


def test_c12_reduced_conservation(record):
    d = preset("oracle-compare").to_dict()
    d["model"] = "reduced"
    d["reduced_mode"] = "hermitian-approx"
    d["init"].pop("a")
    d["analyses"] = []
    cfg = ScenarioConfig.from_dict(d)
    red = effective_params(cfg.full_params())
    b1 = math.sqrt(75.0)
    b2 = 5.0 * complex(math.cos(math.pi / 2), math.sin(math.pi / 2))
    traj = simulate_reduced(red, (b1, b2), cfg.span, "hermitian-approx")
    obs = phonon_observables(traj, 100.0)
    drift = float(np.max(np.abs(obs.N_T / obs.N_T[0] - 1)))
    assert record("12", drift <= 1e-8, f"max |N_T(t)/N_T(0) - 1| = {drift:.2e} over one Josephson period; tol 1e-8")
