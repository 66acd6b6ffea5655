"""Experiment drivers. Each returns a summary dict and writes its artifacts to ``out``."""

from __future__ import annotations

import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ..dressing import dress, dress_derivative, symplectic_form
from ..fields import (
    ExternalPotential,
    band_limited_state,
    dressing_functional,
    energy_dressed,
    kernels,
    random_state,
)
from ..flow import FlowConfig, evolve_dressed, evolve_yukawa
from ..fock import correspondence_experiment
from ..polysym import ModeSet
from ..renorm import (
    INF,
    r_sigma_norms,
    self_energy,
    self_energy_asymptotic_slope,
    v2_bound_constant,
    v_sigma,
)
from .config import RunConfig
from .output import svg_line_plot, write_csv, write_json

RENORM_COLUMNS = ["sigma", "E_sigma", "norm_w12_r", "norm_w14_r"]
CLASSICAL_COLUMNS = ["t", "mass", "energy", "energy_dressed", "conj_residual"]
QUANTUM_COLUMNS = ["epsilon", "t", "re_Q", "im_Q", "re_C", "im_C", "err", "basis_dim", "cap_violation"]


def _check(value, threshold, passed, **extra):
    return {"value": value, "threshold": threshold, "passed": bool(passed), **extra}


def versions() -> dict:
    import numpy
    import pydantic
    import scipy

    from .. import __version__

    return {"python": platform.python_version(), "numpy": numpy.__version__, "scipy": scipy.__version__,
            "pydantic": pydantic.__version__, "skg": __version__}


# renormalization scan

def renorm_scan(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    p = cfg.physics.params()
    sc = cfg.scan
    rows = []
    for s in sc.sigma_grid:
        ps = p.with_sigma(float(s))
        n12, n14 = r_sigma_norms(ps)
        rows.append({"sigma": float(s), "E_sigma": self_energy(ps), "norm_w12_r": n12, "norm_w14_r": n14})
    write_csv(out / "renorm_scan.csv", RENORM_COLUMNS, rows)

    fit_e = [self_energy(p.with_sigma(float(s))) for s in sc.fit_sigmas]
    slope = float(np.polyfit(np.log(sc.fit_sigmas), fit_e, 1)[0])
    target = self_energy_asymptotic_slope(p.M)
    rel = abs(slope / target - 1.0)

    tail = [r["E_sigma"] for r in rows if r["sigma"] >= 4.0 * p.sigma0]
    monotone = all(b < a for a, b in zip(tail, tail[1:]))

    p_inf = p.with_sigma(INF)
    c_tilde = v2_bound_constant(p_inf)
    radii = np.geomspace(sc.r_min, sc.r_max, sc.v2_radii)
    ratios = [abs(v_sigma(r, p_inf, return_parts=True, part="v2")[1]) * r / c_tilde for r in radii]
    violations = int(sum(q > 1.0 for q in ratios))

    checks = {
        "self_energy_slope": _check(rel, 0.05, rel <= 0.05, slope=slope, asymptote=target),
        "self_energy_monotone": _check(len(tail), None, monotone),
        "v2_decay_bound": _check(violations, 0, violations == 0, c_tilde=c_tilde, worst_ratio=max(ratios)),
    }
    files = ["renorm_scan.csv"]
    if cfg.plots:
        svg_line_plot(out / "renorm_scan.svg", [("E_sigma", [r["sigma"] for r in rows],
                                                 [r["E_sigma"] for r in rows])],
                      title="Self-energy versus cutoff", xlabel="sigma", ylabel="E_sigma", logx=True)
        files.append("renorm_scan.svg")
    return {"checks": checks, "files": files}


# classical dynamics

def _initial_state(cfg: RunConfig, grid, rng):
    s = cfg.state
    if s.kind == "band":
        return band_limited_state(grid, rng, u_band=s.u_band, alpha_band=s.alpha_band,
                                  alpha_scale=s.alpha_scale)
    return random_state(grid, rng, width=s.width, u_modes=s.u_modes, alpha_scale=s.alpha_scale, kmax=s.kmax)


def classical_run(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    grid = cfg.grid.grid()
    V = cfg.potential.potential()
    p = cfg.physics.params()
    lam = cfg.physics.coupling
    rng = np.random.default_rng(cfg.seed)
    z = _initial_state(cfg, grid, rng)
    f = cfg.flow
    fc = FlowConfig(f.dt, f.t_final, "strang", f.energy_guard, f.record_every)
    g = kernels(grid, p.with_sigma(INF), V, lam).g

    traj = evolve_yukawa(z, fc, V, p, lam)
    rows = []
    if f.conj_residual:
        dtraj = evolve_dressed(dress(z, g, -1.0), fc, V, p, "direct", coupling=lam)
        for t, s, m, e, sd, ed in zip(traj.times, traj.states, traj.mass, traj.energy,
                                      dtraj.states, dtraj.energy):
            res = (s - dress(sd, g, 1.0)).norm()
            rows.append({"t": t, "mass": m, "energy": e, "energy_dressed": ed, "conj_residual": res})
        columns = CLASSICAL_COLUMNS
    else:
        for t, s, m, e in zip(traj.times, traj.states, traj.mass, traj.energy):
            rows.append({"t": t, "mass": m, "energy": e,
                         "energy_dressed": energy_dressed(dress(s, g, -1.0), V, p, lam)})
        columns = CLASSICAL_COLUMNS[:-1]
    write_csv(out / "classical_run.csv", columns, rows)

    back = evolve_yukawa(traj.final, FlowConfig(f.dt, -f.t_final, "strang", f.energy_guard,
                                                 max(1, fc.n_steps)), V, p, lam).final
    reversal = (back - z).norm()
    mass_drift = traj.max_mass_drift()
    energy_drift = traj.max_energy_drift()
    checks = {
        "mass_drift": _check(mass_drift, 1e-10 * max(1.0, abs(f.t_final)), mass_drift <= 1e-10 * max(1.0, abs(f.t_final))),
        "energy_drift": _check(energy_drift, 1e-6, energy_drift <= 1e-6),
        "time_reversal": _check(reversal, 1e-9, reversal <= 1e-9),
    }
    if f.conj_residual:
        checks["dressed_energy_drift"] = _check(
            float(np.max(np.abs(np.array([r["energy_dressed"] for r in rows]) - rows[0]["energy_dressed"]))
                  / max(1.0, abs(rows[0]["energy_dressed"]))), 1e-8, None)
        checks["dressed_energy_drift"]["passed"] = checks["dressed_energy_drift"]["value"] <= 1e-8
    files = ["classical_run.csv"]
    if cfg.plots:
        t = [r["t"] for r in rows]
        e0 = rows[0]["energy"]
        svg_line_plot(out / "classical_run.svg",
                      [("energy drift", t, [abs(r["energy"] - e0) + 1e-300 for r in rows])]
                      + ([("conj residual", t, [r["conj_residual"] + 1e-300 for r in rows])]
                         if f.conj_residual else []),
                      title="Classical run diagnostics", xlabel="t", ylabel="magnitude", logy=True)
        files.append("classical_run.svg")
    return {"checks": checks, "files": files}


# dressing invariants

def dress_check(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    dc = cfg.dress
    grid = dc.grid.grid()
    p = cfg.physics.params().with_sigma(INF)
    g = kernels(grid, p, ExternalPotential(), cfg.physics.coupling).g
    rng = np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()
    inv = mod = grp = gen = 0.0
    for _ in range(dc.n_states):
        z = random_state(grid, rng, alpha_scale=dc.alpha_scale)
        th1, th2 = rng.uniform(-1.5, 1.5, size=2)
        d1 = dress(z, g, 1.0)
        inv = max(inv, (dress(d1, g, -1.0) - z).norm())
        mod = max(mod, float(np.max(np.abs(np.abs(d1.u) - np.abs(z.u)))))
        grp = max(grp, (dress(dress(z, g, th1), g, th2) - dress(z, g, th1 + th2)).norm())
        d0 = dressing_functional(z, g)
        gen = max(gen, abs(dressing_functional(d1, g) - d0) / max(1.0, abs(d0)))
    symp = 0.0
    fd_orders = []
    for i in range(dc.n_symplectic):
        z = random_state(grid, rng, alpha_scale=dc.alpha_scale)
        t1 = random_state(grid, rng, alpha_scale=dc.alpha_scale)
        t2 = random_state(grid, rng, alpha_scale=dc.alpha_scale)
        th = float(rng.uniform(-2.0, 2.0))
        a = symplectic_form(grid, dress_derivative(z, g, th, (t1.u, t1.alpha)),
                            dress_derivative(z, g, th, (t2.u, t2.alpha)))
        b = symplectic_form(grid, (t1.u, t1.alpha), (t2.u, t2.alpha))
        symp = max(symp, abs(a - b))
        if i < 5:
            dv, db = dress_derivative(z, g, th, (t1.u, t1.alpha))
            errs = []
            for h in (1e-2, 1e-3):
                fd = (dress(z + t1.scale(h), g, th) - dress(z - t1.scale(h), g, th)).scale(0.5 / h)
                errs.append(math.hypot(grid.norm_x(fd.u - dv), grid.norm_k(fd.alpha - db)))
            fd_orders.append(math.log10(errs[0] / errs[1]))
    elapsed = time.perf_counter() - t0
    order = min(fd_orders)
    checks = {
        "involution": _check(inv, 1e-12, inv <= 1e-12),
        "modulus": _check(mod, 1e-13, mod <= 1e-13),
        "group_property": _check(grp, 1e-12, grp <= 1e-12),
        "generator_conserved": _check(gen, 1e-10, gen <= 1e-10),
        "symplectic": _check(symp, 1e-10, symp <= 1e-10),
        "derivative_fd_order": _check(order, 1.8, order >= 1.8),
    }
    write_json(out / "dress_check.json", {"checks": checks, "elapsed_s": elapsed,
                                          "n_states": dc.n_states, "n_symplectic": dc.n_symplectic})
    return {"checks": checks, "files": ["dress_check.json"]}


# quantum-classical correspondence

def _quantum_rows(qc, modes, V, p, z0, xi, coupling, eps_list, threads):
    def one(eps):
        return correspondence_experiment(modes, V, p, z0, xi, qc.t_grid, [eps], n_max=qc.n_max, K=qc.K,
                                         ordering=qc.ordering, coupling=coupling)

    if threads > 1 and len(eps_list) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, eps_list))
    else:
        parts = [one(e) for e in eps_list]
    return [r for part in parts for r in part]


def _quantum_table(rows):
    return [{"epsilon": r["epsilon"], "t": r["t"], "re_Q": r["Q"].real, "im_Q": r["Q"].imag,
             "re_C": r["C"].real, "im_C": r["C"].imag, "err": r["err"], "basis_dim": r["basis_dim"],
             "cap_violation": r["cap_violation"]} for r in rows]


def quantum_correspond(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    qc = cfg.quantum
    grid = qc.grid.grid()
    p = cfg.physics.params()
    V = ExternalPotential("harmonic", qc.omega_trap)
    modes = ModeSet.harmonic(grid, qc.n_nuc, [tuple(w) for w in qc.meson_waves], p.M, qc.omega_trap)
    z0 = np.array([complex(a, b) for a, b in qc.z0])
    xi = np.array([complex(a, b) for a, b in qc.xi])
    eps_list = sorted(qc.eps_list, reverse=True)

    rows = _quantum_rows(qc, modes, V, p, z0, xi, cfg.physics.coupling, eps_list, threads)
    write_csv(out / "quantum_correspond.csv", QUANTUM_COLUMNS, _quantum_table(rows))
    files = ["quantum_correspond.csv"]

    err = {(r["epsilon"], r["t"]): r["err"] for r in rows}
    monotone = all(err[(a, t)] > err[(b, t)] for t in qc.t_grid for a, b in zip(eps_list, eps_list[1:]))
    ratios = [err[(eps_list[-1], t)] / err[(eps_list[0], t)] for t in qc.t_grid]
    worst_cap = max(r["cap_violation"] for r in rows)
    checks = {
        "err_decreasing_in_eps": _check(None, None, monotone),
        "err_halved": _check(max(ratios), 0.5, len(eps_list) > 1 and max(ratios) <= 0.5,
                             eps_pair=[eps_list[-1], eps_list[0]]),
        "cap_violation": _check(worst_cap, 1e-4, worst_cap <= 1e-4),
    }
    if qc.zero_coupling_control:
        ctrl = _quantum_rows(qc, modes, V, p, z0, xi, 0.0, eps_list, threads)
        write_csv(out / "quantum_control.csv", QUANTUM_COLUMNS, _quantum_table(ctrl))
        files.append("quantum_control.csv")
        nxi = float(np.vdot(xi, xi).real)
        dev = max(abs(r["err"] - abs(math.exp(-r["epsilon"] * nxi / 4.0) - 1.0)) for r in ctrl)
        checks["zero_coupling_control"] = _check(dev, 1e-6, dev <= 1e-6)
    if cfg.plots:
        series = [(f"t={t:g}", eps_list, [err[(e, t)] for e in eps_list]) for t in qc.t_grid]
        svg_line_plot(out / "quantum_correspond.svg", series, title="Quantum-classical deviation",
                      xlabel="epsilon", ylabel="err", logx=True, logy=True)
        files.append("quantum_correspond.svg")
    return {"checks": checks, "files": files}


def verify_all(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    """Every experiment on a reduced default suite; checks are prefixed by experiment."""
    small = cfg.model_copy(update={
        "flow": cfg.flow.model_copy(update={"t_final": min(cfg.flow.t_final, 0.25)}),
        "dress": cfg.dress.model_copy(update={"n_states": min(cfg.dress.n_states, 20),
                                              "n_symplectic": min(cfg.dress.n_symplectic, 10)}),
    })
    checks, files = {}, []
    for name, fn in (("renorm_scan", renorm_scan), ("dress_check", dress_check),
                     ("classical_run", classical_run), ("quantum_correspond", quantum_correspond)):
        sub = out / name
        rep = fn(small, sub, threads)
        checks.update({f"{name}.{k}": v for k, v in rep["checks"].items()})
        files += [f"{name}/{f}" for f in rep["files"]]
    return {"checks": checks, "files": files}


EXPERIMENTS = {
    "renorm_scan": renorm_scan,
    "classical_run": classical_run,
    "dress_check": dress_check,
    "quantum_correspond": quantum_correspond,
    "verify_all": verify_all,
}


def run(cfg: RunConfig, out, threads: int = 1) -> dict:
    """Execute ``cfg.kind`` and write ``summary.json`` next to its artifacts."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    rep = EXPERIMENTS[cfg.kind](cfg, out, threads)
    summary = {
        "kind": cfg.kind,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "versions": versions(),
        "checks": rep["checks"],
        "passed": all(c["passed"] for c in rep["checks"].values()),
        "files": rep["files"],
        "wall_time_s": time.perf_counter() - t0,
    }
    write_json(out / "summary.json", summary)
    return summary
