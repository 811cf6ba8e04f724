"""Acceptance suite: one test per criterion, at the stated tolerances.

The four expensive trajectories are computed once as module fixtures and
shared. Every criterion prints a PASS/FAIL line; the lines are also written
to acceptance_report.txt next to this file's parent directory.

Criteria 2 and 4 are implemented exactly as stated and are expected to fail:
the minimizer of the discrete energy carries first-order Bogomolny residuals
(||eta||, ||v|| = O(h), measured to halve under grid doubling), so they
converge exponentially to those plateaus rather than to zero. The printed
diagnostics quantify this; see the failure messages.
"""

import time
from pathlib import Path

import numpy as np
import pytest

import glflow
from glflow import cli, diagnostics, flow, io, recipes
from glflow.state import FlowState

L_SUPER = 2 * np.pi * np.sqrt(2)   # area 8 pi^2, supercritical for N = 1
L_N2 = 4 * np.pi                   # area 16 pi^2, supercritical for N = 2

REPORT = []
REPORT_PATH = Path(__file__).resolve().parent.parent / "acceptance_report.txt"


def report(num, passed, text):
    line = f"[criterion {num:02d}] {'PASS' if passed else 'FAIL'} {text}"
    REPORT.append(line)
    print(line)
    with open(REPORT_PATH, "w") as f:
        f.write("\n".join(REPORT) + "\n")
    return passed


def series(records, name):
    return np.array([getattr(r, name) for r in records])


def run_problem(L, n, N, recipe, seed, t_max, record_every=20,
                phi_amplitude=1.0, a_amplitude=1.0, target=None):
    geom = glflow.make_geometry(L, L, n, n)
    bundle = glflow.make_bundle(N, geom)
    init = recipes.build_initial_state(
        recipe, geom, bundle, seed, phi_amplitude=phi_amplitude,
        a_amplitude=a_amplitude, smoothing=20, target_epsilon0=target)
    policy = flow.StepPolicy(t_max=t_max, grad_tol=1e-8,
                             record_every=record_every)
    t0 = time.time()
    result = glflow.run(init, policy, geom, bundle)
    result.wall = time.time() - t0
    return geom, bundle, result


@pytest.fixture(scope="module")
def sc128():
    """Criterion 1 configuration: N=1, L=2 pi sqrt(2), 128^2,
    perturbed-minimizer init with energy excess 0.1, grad_tol 1e-8."""
    return run_problem(L_SUPER, 128, 1, "perturbed_minimizer", 1,
                       t_max=120.0, target=0.1)


@pytest.fixture(scope="module")
def sc256():
    """Criterion 1 rerun at 256^2."""
    return run_problem(L_SUPER, 256, 1, "perturbed_minimizer", 1,
                       t_max=120.0, target=0.1)


@pytest.fixture(scope="module")
def sub128():
    """Criterion 6 configuration: N=1, L=3, 128^2, random init with
    phi amplitude 0.3."""
    return run_problem(3.0, 128, 1, "random", 2, t_max=120.0,
                       record_every=50, phi_amplitude=0.3, a_amplitude=0.1)


N2_CONFIG = f"""
geometry.L1 = {L_N2!r}
geometry.L2 = {L_N2!r}
geometry.n1 = 128
geometry.n2 = 128
bundle.N = 2
init.recipe = perturbed_minimizer
init.seed = 1
init.target_epsilon0 = 0.1
step.t_max = 30.0
step.grad_tol = 1e-8
step.record_every = 20
output.series = series.csv
"""


@pytest.fixture(scope="module")
def n2_cli(tmp_path_factory):
    """N=2 acceptance run executed twice through the CLI (the second copy
    feeds the determinism criterion). t_max = 30: with two vortices the
    moduli directions are nearly flat and the gradient creeps at ~1e-5
    essentially forever; windings and all conservation checks are settled
    long before."""
    base = tmp_path_factory.mktemp("n2")
    cfg = base / "n2.cfg"
    cfg.write_text(N2_CONFIG)
    outputs = []
    for name in ("a", "b"):
        out = base / name
        out.mkdir()
        code = cli.main(["run", "--config", str(cfg), "--out-dir", str(out),
                         "--quiet"])
        assert code in (cli.EXIT_OK, cli.EXIT_TMAX)
        outputs.append(out / "series.csv")
    return outputs


# ---- criterion 1: supercritical convergence to the self-dual bound ----

def test_criterion_01_supercritical_energy(sc128, sc256):
    _, _, r128 = sc128
    _, _, r256 = sc256
    gap128 = abs(r128.records[-1].energy - np.pi)
    gap256 = abs(r256.records[-1].energy - np.pi)
    factor = gap128 / gap256 if gap256 > 0 else np.inf
    ok = (r128.status == "converged" and gap128 <= 5e-3 and factor >= 1.7)
    assert report(1, ok,
                  f"|V - pi| = {gap128:.3e} <= 5e-3 at 128^2 "
                  f"(status {r128.status}); 256^2 gives {gap256:.3e}, "
                  f"refinement factor {factor:.2f} >= 1.7")


# ---- criterion 2: Bogomolny equations at the limit ----

def test_criterion_02_bogomolny_residuals(sc128):
    _, _, r = sc128
    last = r.records[-1]
    ok = last.eta_l2 <= 1e-5 and last.v_l2 <= 1e-5
    report(2, ok,
           f"final ||eta|| = {last.eta_l2:.3e}, ||v|| = {last.v_l2:.3e} "
           f"(required <= 1e-5 each; grad_norm = {last.grad_norm:.1e}). "
           "The discrete minimizer carries O(h) self-dual residuals, so "
           "these plateau instead of tracking grad_norm; they halve under "
           "grid doubling (see criterion 4 report and the ledger).")
    assert ok, ("final ||eta||, ||v|| sit at their O(h) discretization "
                "plateaus, far above 1e-5; unattainable for this "
                "discretization at 128^2")


# ---- criterion 3: vortex count ----

def test_criterion_03_vortex_count(sc128, n2_cli):
    geom, bundle, r = sc128
    rep = glflow.locate_vortices(r.final, geom, bundle)
    data = io.read_series(n2_cli[0])
    w2 = int(data["vortex_total"][-1])
    ok = (rep.total == 1 and w2 == 2)
    assert report(3, ok,
                  f"N=1 run: total winding {rep.total} (expect 1), "
                  f"vortex plaquettes {rep.plaquettes}; "
                  f"N=2 run: total winding {w2} (expect 2)")


# ---- criterion 4: exponential rate, supercritical ----

def test_criterion_04_supercritical_rates(sc128, sc256):
    _, _, r128 = sc128
    _, _, r256 = sc256
    results = {}
    for tag, r in (("128", r128), ("256", r256)):
        t = series(r.records, "t")
        for col in ("eta_l2", "v_l2"):
            vals = series(r.records, col)
            fit = diagnostics.fit_rate(t, vals)
            plateau = vals.min()
            try:
                aware = diagnostics.fit_rate(t, vals, floor=2.0 * plateau)
                aware_txt = f"delta={aware.delta:.3f} R2={aware.r2:.3f}"
            except glflow.InsufficientDataError as exc:
                aware_txt = f"unavailable ({exc})"
            results[(tag, col)] = (fit, plateau, aware_txt)
    f128e = results[("128", "eta_l2")][0]
    f256e = results[("256", "eta_l2")][0]
    stable = (f128e.delta > 0 and f256e.delta > 0
              and abs(f128e.delta - f256e.delta) <= 0.1 * abs(f128e.delta))
    ok = all(results[(tag, col)][0].delta > 0
             and results[(tag, col)][0].r2 >= 0.99
             for tag in ("128", "256") for col in ("eta_l2", "v_l2")) and stable
    detail = "; ".join(
        f"{tag}^2 {col}: delta={results[(tag, col)][0].delta:.4f} "
        f"R2={results[(tag, col)][0].r2:.3f} "
        f"(plateau {results[(tag, col)][1]:.2e}, plateau-aware fit "
        f"{results[(tag, col)][2]})"
        for tag in ("128", "256") for col in ("eta_l2", "v_l2"))
    report(4, ok, f"default-window fits: {detail}")
    assert ok, ("||eta(t)||, ||v(t)|| converge exponentially to O(h) "
                "plateaus, not to zero, so the default fit window is "
                "plateau-dominated and R^2 >= 0.99 is unattainable; "
                "see the ledger analysis")


# ---- criterion 5: temporal potential vanishes ----

def test_criterion_05_a0_decay(sc128):
    _, _, r = sc128
    t = series(r.records, "t")
    a0 = series(r.records, "a0_l2")
    fit = diagnostics.fit_rate(t, a0)
    ok = (a0[-1] <= 1e-6 and fit.delta > 0 and fit.r2 >= 0.95)
    assert report(5, ok,
                  f"final ||A0|| = {a0[-1]:.3e} <= 1e-6; decay "
                  f"delta = {fit.delta:.3f}, R2 = {fit.r2:.4f} >= 0.95")


# ---- criterion 6: subcritical minimum ----

def test_criterion_06_subcritical_minimum(sub128):
    geom, bundle, r = sub128
    target = np.pi + (4 * np.pi - 9) ** 2 / 72
    last = r.records[-1]
    gap = abs(last.energy - target)
    B = glflow.magnetic_field(r.final.A, bundle, geom)
    bdev = float(np.max(np.abs(B - 2 * np.pi / 9)))
    ok = (r.status == "converged" and gap <= 5e-3
          and last.phi_l2 <= 1e-6 and bdev <= 1e-5)
    assert report(6, ok,
                  f"|V - (pi + (4pi-9)^2/72)| = {gap:.3e} <= 5e-3; "
                  f"final ||phi|| = {last.phi_l2:.3e} <= 1e-6; "
                  f"sup|B - 2pi/9| = {bdev:.3e} <= 1e-5 "
                  f"(status {r.status})")


# ---- criterion 7: exponential rate, subcritical ----

def test_criterion_07_subcritical_rates(sub128):
    _, _, r = sub128
    t = series(r.records, "t")
    fits = {}
    for col in ("phi_l2", "y_l2"):
        fits[col] = diagnostics.fit_rate(t, series(r.records, col))
    ok = all(f.delta > 0 and f.r2 >= 0.99 for f in fits.values())
    detail = "; ".join(f"{c}: delta={f.delta:.4f} R2={f.r2:.4f}"
                       for c, f in fits.items())
    assert report(7, ok, detail + " (both R2 >= 0.99, default windows)")


# ---- criterion 8: flux quantization on every recorded step ----

def test_criterion_08_flux_quantization(sc128, sc256, sub128, n2_cli):
    worst = 0.0
    for (label, recs, N) in (("sc128", sc128[2].records, 1),
                             ("sc256", sc256[2].records, 1),
                             ("sub128", sub128[2].records, 1)):
        dev = float(np.max(np.abs(series(recs, "flux") - 2 * np.pi * N)))
        worst = max(worst, dev)
    data = io.read_series(n2_cli[0])
    worst = max(worst, float(np.max(np.abs(data["flux"] - 4 * np.pi))))
    ok = worst <= 1e-10
    assert report(8, ok,
                  f"max |flux - 2 pi N| over every recorded step of all "
                  f"acceptance runs = {worst:.3e} <= 1e-10")


# ---- criterion 9: energy never increases ----

def test_criterion_09_energy_monotone(sc128, sc256, sub128, n2_cli):
    worst = -np.inf
    for recs in (sc128[2].records, sc256[2].records, sub128[2].records):
        e = series(recs, "energy")
        if len(e) > 1:
            worst = max(worst, float(np.max(
                np.diff(e) - 1e-10 * (1 + np.abs(e[1:])))))
    data = io.read_series(n2_cli[0])
    e = data["energy"]
    worst = max(worst, float(np.max(np.diff(e) - 1e-10 * (1 + np.abs(e[1:])))))
    ok = worst <= 0
    assert report(9, ok,
                  f"max (E_k+1 - E_k - 1e-10 (1+|E|)) over all recorded "
                  f"steps = {worst:.3e} <= 0")


# ---- criterion 10: dissipation identity ----

def test_criterion_10_dissipation_identity():
    g = glflow.make_geometry(L_SUPER, L_SUPER, 64, 64)
    b = glflow.make_bundle(1, g)
    pol = flow.StepPolicy()
    dt0 = flow.auto_dt(pol, g)

    def max_residual(dt, nsteps=100):
        st = recipes.build_initial_state("random", g, b, 9,
                                         phi_amplitude=1.0, a_amplitude=0.3)
        worst = 0.0
        e = glflow.energy(st, g, b)
        for _ in range(nsteps):
            f = flow._Forces(st, g, b)
            st = flow._advance(st, f, dt, pol, g, b)
            e_new = glflow.energy(st, g, b)
            worst = max(worst, abs(e_new - e + dt * f.gn2))
            e = e_new
        return worst

    m1 = max_residual(dt0)
    m2 = max_residual(dt0 / 2)
    ratio = m1 / m2
    ok = 3.0 <= ratio <= 5.0
    assert report(10, ok,
                  f"max |dE + dt ||G||^2| = {m1:.3e} at dt = {dt0:.2e}, "
                  f"{m2:.3e} at dt/2; ratio {ratio:.2f} in [3, 5]")


# ---- criterion 11: gradient matches finite differences ----

def test_criterion_11_gradient_oracle():
    cases = [(0, 2 * np.pi), (1, 3.0), (1, L_SUPER), (2, 4.0), (2, L_N2)]
    worst = 0.0
    eps = 1e-6
    for N, L in cases:
        g = glflow.make_geometry(L, L, 32, 32)
        b = glflow.make_bundle(N, g)
        rng = np.random.default_rng(200 + N)
        phi = glflow.random_section(b, g, 300 + N, smoothing_steps=10)
        phi = phi / np.max(np.abs(phi))
        a = glflow.random_divfree_oneform(g, 400 + N, 0.3)
        st = FlowState(0.0, a[0] + 0.02 * rng.standard_normal(g.shape),
                       a[1] + 0.02 * rng.standard_normal(g.shape), phi)
        (ga1, ga2), gphi = glflow.energy_gradient(st, g, b)
        ha = g.h1 * g.h2
        gn = np.sqrt(np.sum(ga1 ** 2 + ga2 ** 2) * ha
                     + np.sum(np.abs(gphi) ** 2 * g.weights))
        for _ in range(10):
            da1, da2 = rng.standard_normal((2,) + g.shape)
            dphi = (rng.standard_normal(g.shape)
                    + 1j * rng.standard_normal(g.shape))
            dn = np.sqrt(np.sum(da1 ** 2 + da2 ** 2) * ha
                         + np.sum(np.abs(dphi) ** 2 * g.weights))
            pred = (np.sum(ga1 * da1 + ga2 * da2) * ha
                    + np.sum((np.conj(gphi) * dphi).real * g.weights))
            plus = FlowState(0, st.a1 + eps * da1, st.a2 + eps * da2,
                             st.phi + eps * dphi)
            minus = FlowState(0, st.a1 - eps * da1, st.a2 - eps * da2,
                              st.phi - eps * dphi)
            fd = (glflow.energy(plus, g, b)
                  - glflow.energy(minus, g, b)) / (2 * eps)
            worst = max(worst, abs(pred - fd) / (gn * dn))
    ok = worst <= 1e-6
    assert report(11, ok,
                  f"max relative gradient/finite-difference mismatch over "
                  f"10 directions x {len(cases)} configs = {worst:.2e} <= 1e-6")


# ---- criterion 12: gauge invariance of every record field ----

def test_criterion_12_gauge_invariance():
    g = glflow.make_geometry(L_SUPER, L_SUPER, 64, 64)
    b = glflow.make_bundle(1, g)
    phi = glflow.random_section(b, g, 501, smoothing_steps=10)
    phi = phi / np.max(np.abs(phi))
    a = glflow.random_divfree_oneform(g, 502, 0.4)
    st = FlowState(0.0, a[0], a[1], phi)
    rec0 = diagnostics.record_from_state(st, g, b)
    rng = np.random.default_rng(503)
    worst = 0.0
    for _ in range(5):
        chi = rng.standard_normal(g.shape)
        rec = diagnostics.record_from_state(glflow.apply_gauge(st, chi, g),
                                            g, b)
        for name in diagnostics.CSV_FIELDS:
            a0v, a1v = getattr(rec0, name), getattr(rec, name)
            worst = max(worst, abs(a1v - a0v) / max(1.0, abs(a0v)))
    ok = worst <= 1e-10
    assert report(12, ok,
                  f"max relative change of any DiagnosticsRecord field over "
                  f"5 random gauge transformations = {worst:.2e} <= 1e-10")


# ---- criterion 13: decomposition consistency under refinement ----

def test_criterion_13_decomposition_refinement():
    gaps = []
    for n in (64, 128, 256):
        g = glflow.make_geometry(L_SUPER, L_SUPER, n, n)
        b = glflow.make_bundle(1, g)
        x1 = np.broadcast_to(g.x1(), g.shape)
        x2 = np.broadcast_to(g.x2(), g.shape)
        mod = (1.0 + 0.3 * np.cos(2 * np.pi * x1 / g.L1)
               * np.cos(2 * np.pi * x2 / g.L2)
               + 0.2 * np.sin(2 * np.pi * x2 / g.L2))
        phi = glflow.holomorphic_section(b, g) * mod
        a = (0.3 * np.sin(2 * np.pi * x2 / g.L2),
             0.2 * np.cos(2 * np.pi * x1 / g.L1))
        st = FlowState(0.0, a[0], a[1], phi)
        gaps.append(abs(glflow.energy(st, g, b)
                        - glflow.energy_bogomolny(st, g, b)))
    r1 = gaps[0] / gaps[1]
    r2 = gaps[1] / gaps[2]
    ok = 1.5 <= r1 <= 2.5 and 1.5 <= r2 <= 2.5
    assert report(13, ok,
                  f"|energy - energy_bogomolny| = {gaps[0]:.3e} (64^2) -> "
                  f"{gaps[1]:.3e} (128^2) -> {gaps[2]:.3e} (256^2); "
                  f"halving ratios {r1:.2f}, {r2:.2f} in [1.5, 2.5]")


# ---- criterion 14: determinism ----

def test_criterion_14_determinism(n2_cli):
    b1 = n2_cli[0].read_bytes()
    b2 = n2_cli[1].read_bytes()
    ok = b1 == b2
    assert report(14, ok,
                  f"two executions of the N=2 acceptance config produced "
                  f"byte-identical series CSVs ({len(b1)} bytes)")
