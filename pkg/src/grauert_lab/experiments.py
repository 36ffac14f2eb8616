"""Verification suites run by the command line tool.

Each experiment is split into independent tasks (plain top-level functions
with keyword arguments, so they pickle for process pools) and a reduction
that turns the task results into report rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import eigenbasis as eb
from . import geometry as geo
from . import kernels as kn
from . import projector as pj
from . import zeros as zr
from .errors import GrauertLabError
from .fits import fit_loglog


@dataclass(frozen=True)
class Check:
    """Raw outcome of one comparison, before it becomes a report row."""

    name: str
    param_name: str
    param_value: float
    measured: float
    reference: float
    tolerance: float
    metric: str  # "abs" or "rel"
    flagged: bool = False


@dataclass(frozen=True)
class Task:
    fn: Callable
    kwargs: dict
    key: tuple


def check_status(c: Check) -> str:
    if c.flagged or not np.isfinite(c.measured):
        return "flagged"
    err = abs(c.measured - c.reference)
    bound = c.tolerance * abs(c.reference) if c.metric == "rel" else c.tolerance
    return "pass" if err <= bound else "fail"


def _flag(name, pname, pval, reference, tol, metric="abs"):
    return Check(name, pname, float(pval), math.nan, reference, tol, metric, flagged=True)


# ------------------------------------------------------------ sample points


def random_tangent(model: geo.ModelManifold, length: float, rng: np.random.Generator):
    """Random real base point and tangent vector of the given length."""
    n = model.dim
    if model.is_flat:
        x = rng.uniform(0, model.period, n)
        v = rng.standard_normal(n)
        return x, length * v / np.linalg.norm(v)
    if model.kind == "sphere":
        x = rng.standard_normal(n + 1)
        x /= np.linalg.norm(x)
    else:
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        a = rng.uniform(0, 1.5)
        x = np.append(math.sinh(a) * u, math.cosh(a))
    frame = geo.tangent_frame(model, x)
    c = rng.standard_normal(n)
    c /= np.linalg.norm(c)
    return x, length * (c @ frame)


def base_point(model: geo.ModelManifold, rho: float) -> geo.ComplexPoint:
    """A fixed tube point with sqrt(rho) = rho used by the projection suites."""
    if model.is_flat:
        x = np.full(model.dim, 0.7 * model.period / (2 * math.pi))
        xi = np.zeros(model.dim)
        xi[0] = rho
        return geo.exp_imaginary(model, x, xi)
    x = np.array([math.sin(1.0), 0.0, math.cos(1.0)])
    v = np.array([0.0, 1.0, 0.0])
    return geo.exp_imaginary(model, x, rho * v)


# ---------------------------------------------------------- geometry-check


def task_geometry(model, tau, n_points, seed, times):
    rng = np.random.default_rng(seed)
    pull = conoid = flow = 0.0
    for _ in range(n_points):
        x, xi = random_tangent(model, tau, rng)
        z = geo.exp_imaginary(model, x, xi)
        rho = geo.grauert_rho(model, z)
        pull = max(pull, abs(rho - tau))
        r2 = geo.r2_complex(model, z, z.conj())
        conoid = max(conoid, abs(r2 + 4 * rho * rho))
        p = geo.lift(model, x, xi)
        for t in times:
            q = geo.geodesic_flow_complex(model, p, t)
            moved = geo.ComplexPoint(model, q.position)
            flow = max(flow, abs(geo.grauert_rho(model, moved) - rho))
    return {"pullback": pull, "conoid": conoid, "flow": flow}


def geometry_tasks(cfg):
    p = cfg.params
    seeds = cfg.task_seeds(len(p["tau_values"]))
    return [
        Task(task_geometry, dict(model=cfg.model, tau=t, n_points=p["n_points"], seed=s, times=p["flow_times"]), ("tau", t))
        for t, s in zip(p["tau_values"], seeds)
    ]


def geometry_reduce(cfg, results):
    tol = cfg.tolerances
    out = []
    for task, res in results:
        tau = task.kwargs["tau"]
        out.append(Check("pullback", "tau", tau, res["pullback"], 0.0, tol["pullback"], "abs"))
        out.append(Check("conoid", "tau", tau, res["conoid"], 0.0, tol["conoid"], "abs"))
        out.append(Check("flow", "tau", tau, res["flow"], 0.0, tol["flow"], "abs"))
    return out


# -------------------------------------------------------------------- weyl


def task_weyl(model, tau, lambdas):
    basis = eb.EigenbasisSpec(model, float(max(lambdas)))
    zeta = base_point(model, tau)
    fit = pj.weyl_fit(basis, zeta, lambdas, tau_rule=tau)
    return {"slope": fit.slope, "residual": fit.residual, "prefactor": fit.prefactor}


def weyl_tasks(cfg):
    p = cfg.params
    lams = np.geomspace(p["lambda_min"], p["lambda_max"], p["n_lambda"]).tolist()
    return [Task(task_weyl, dict(model=cfg.model, tau=t, lambdas=lams), ("tau", t)) for t in p["tau_values"]]


def weyl_reduce(cfg, results):
    n = cfg.model.dim
    out = []
    for task, res in results:
        tau = task.kwargs["tau"]
        ref = n if tau == 0 else (n + 1) / 2
        out.append(Check("slope", "tau", tau, res["slope"], ref, cfg.tolerances["slope"], "abs"))
        out.append(Check("fit-residual", "tau", tau, res["residual"], 0.0, cfg.tolerances["fit-residual"], "abs"))
    return out


# ------------------------------------------------------------------ siciak


def task_siciak(lam, rho, n_samples, seed):
    model = geo.ModelManifold.circle()
    basis = eb.Eigenbasis(eb.EigenbasisSpec(model, lam))
    zeta = geo.ComplexPoint(model, [0.4 + 1j * rho])
    out = {"log": 2 * pj.siciak_extremal(basis, lam, zeta)}
    if n_samples:
        # the extremal identity is checked on a window small enough to synthesize
        small = pj.SpectralWindow.upto(min(lam, 10.0))
        pi = pj.pi_complex(basis, small, zeta)
        coh = pj.coherent_state(basis, small, zeta)
        attained = abs(pj.synthesize(basis, small, coh, zeta)) ** 2
        best = pj.siciak_bruteforce(basis, small, zeta, n_samples, seed)
        out.update(pi=pi, attained=attained, best=best)
    return out


def siciak_tasks(cfg):
    p = cfg.params
    rhos = np.linspace(p["rho_min"], p["rho_max"], p["n_rho"]).tolist()
    seeds = cfg.task_seeds(len(rhos))
    return [
        Task(task_siciak, dict(lam=p["lambda"], rho=r, n_samples=p["n_samples"], seed=s), ("rho", r))
        for r, s in zip(rhos, seeds)
    ]


def siciak_reduce(cfg, results):
    lam = cfg.params["lambda"]
    tol = cfg.tolerances["siciak"] if "siciak" in cfg.overrides else 10 * math.log(lam) / lam
    out = []
    for task, res in results:
        rho = task.kwargs["rho"]
        out.append(Check("siciak", "rho", rho, res["log"], 2 * rho, tol, "abs"))
        if "pi" in res:
            out.append(Check("coherent", "rho", rho, res["attained"], res["pi"], cfg.tolerances["coherent"], "rel"))
            excess = max(res["best"] / res["pi"] - 1, 0.0)
            out.append(Check("cauchy-schwarz", "rho", rho, excess, 0.0, cfg.tolerances["cauchy-schwarz"], "abs"))
    return out


# ---------------------------------------------------------- kernel-compare


def task_sphere_kernel(tau, rs):
    errs = []
    for r in rs:
        spec = kn.poisson_sphere_spectral(tau, math.cos(r)).value.real
        closed = float(kn.poisson_sphere_closed(2, tau, r))
        errs.append(abs(spec / closed - 1))
    return {"errors": errs}


def task_subordination(gammas, taus, dists):
    scal = [abs(kn.subordinate(kn.scalar_heat(g), 1.0, 0.0, 0.0) / math.exp(-g) - 1) for g in gammas]
    flat = []
    for t in taus:
        for d in dists:
            flat.append(abs(kn.subordinate(kn.heat_flat(1), t, 0.0, d) / kn.poisson_flat(1, t, 0.0, d) - 1))
    quad = []
    for im in (0.0, 0.3, 0.6):
        q = kn.poisson_flat_complex(0.0, 1.0, 0.25 + 1j * im, 0.0)
        c = kn.poisson_flat_closed_complex(0.0, 1.0, 0.25 + 1j * im, 0.0)
        quad.append(abs(q / c - 1))
    return {"scalar": scal, "flat": max(flat), "quadrature": quad}


def kernel_tasks(cfg):
    p = cfg.params
    taus = np.linspace(p["tau_min"], p["tau_max"], p["n_tau"]).tolist()
    rs = np.linspace(p["r_min"], p["r_max"], p["n_r"]).tolist()
    tasks = [Task(task_sphere_kernel, dict(tau=t, rs=rs), ("tau", t)) for t in taus]
    gammas = np.geomspace(0.1, 10, 5).tolist()
    grid = np.linspace(0.1, 3.0, 4).tolist()
    tasks.append(Task(task_subordination, dict(gammas=gammas, taus=grid, dists=grid), ("subordination", 0)))
    return tasks


def kernel_reduce(cfg, results):
    tol = cfg.tolerances
    out = [Check("calibration", "tau", 0.5, kn.calibrate_sphere(0.5, 1.0), 1.0, tol["sphere"], "rel")]
    for task, res in results:
        if task.fn is task_sphere_kernel:
            out.append(Check("sphere-closed-vs-spectral", "tau", task.kwargs["tau"], max(res["errors"]), 0.0, tol["sphere"], "abs"))
        else:
            for g, e in zip(task.kwargs["gammas"], res["scalar"]):
                out.append(Check("subordination-scalar", "gamma", g, e, 0.0, tol["subordination"], "abs"))
            out.append(Check("subordination-flat", "grid", 0, res["flat"], 0.0, tol["subordination"], "abs"))
            for im, e in zip((0.0, 0.3, 0.6), res["quadrature"]):
                out.append(Check("flat-quadrature", "im_zeta", im, e, 0.0, tol["quadrature"], "abs"))
    return out


# ----------------------------------------------------------------- hadamard


def task_hadamard(model, J, r_min, r_max, n_r, potential):
    rs = np.linspace(r_min, r_max, n_r)
    series = kn.hadamard_coeffs(model, rs, J, potential=potential)
    res = [float(np.max(np.abs(kn.transport_residual(series, j, rs)))) for j in range(1, J + 1)]
    finer = kn.hadamard_coeffs(model, rs, J, potential=potential, n_gauss=128)
    refine = float(np.max(np.abs(finer.coeffs - series.coeffs)))
    return {"residuals": res, "max_higher": float(np.max(np.abs(series.coeffs[1:]))) if J else 0.0, "refine": refine}


def task_conoid(rs, rel_offset):
    return {"ratios": [kn.conoid_amplitude(2, r * (1 + rel_offset), r) / kn.hadamard_u0(geo.ModelManifold.sphere(), r) for r in rs]}


def hadamard_tasks(cfg):
    p = cfg.params
    tasks = [
        Task(task_hadamard, dict(model=cfg.model, J=p["J"], r_min=p["r_min"], r_max=p["r_max"], n_r=p["n_r"], potential=p["potential"]), ("model", 0)),
        Task(task_hadamard, dict(model=geo.ModelManifold.torus(cfg.model.dim), J=p["J"], r_min=p["r_min"], r_max=min(p["r_max"], 0.45), n_r=p["n_r"], potential=0.0), ("flat", 0)),
    ]
    if cfg.model.kind == "sphere" and cfg.model.dim == 2:
        rs = np.linspace(p["r_min"], p["r_max"], 5).tolist()
        tasks.append(Task(task_conoid, dict(rs=rs, rel_offset=p["conoid_offset"]), ("conoid", 0)))
    return tasks


def hadamard_reduce(cfg, results):
    tol = cfg.tolerances
    out = []
    for task, res in results:
        if task.fn is task_conoid:
            for r, ratio in zip(task.kwargs["rs"], res["ratios"]):
                out.append(Check("conoid-amplitude", "r", r, ratio, 1.0, tol["conoid-amplitude"], "rel"))
        elif task.key[0] == "flat":
            out.append(Check("flat-termination", "J", task.kwargs["J"], res["max_higher"], 0.0, 0.0, "abs"))
        else:
            for j, r in enumerate(res["residuals"], start=1):
                out.append(Check("transport-residual", "j", j, r, 0.0, tol["transport-residual"], "abs"))
            out.append(Check("quadrature-refinement", "J", task.kwargs["J"], res["refine"], 0.0, tol["quadrature-refinement"], "abs"))
    return out


# -------------------------------------------------------------------- zeros


def task_zero_seed(N, seed, xi0, pairing_grid):
    poly = zr.gaussian_trig(N, seed)
    zs = zr.complex_zeros(poly.a, poly.b)
    f = zr.product_test_function(xi0)
    out = {
        "count": len(zs),
        "pairing": zr.zero_current_pairing(zs, N, f),
        "imag": float(np.sum(np.abs(zs.zeros.imag)) / N),
        "residual": float(np.max(zs.residuals)),
    }
    if pairing_grid:
        out["ddbar"] = zr.ddbar_log_pairing(poly.log_abs2, N, f, tuple(pairing_grid))
    return out


def zeros_tasks(cfg):
    p = cfg.params
    tasks = []
    seeds = cfg.task_seeds(p["n_seeds"])
    for N in p["degrees"]:
        for i, s in enumerate(seeds):
            grid = [p["grid_x"], p["grid_xi"]] if (N == p["pairing_degree"] and i == 0) else None
            tasks.append(Task(task_zero_seed, dict(N=N, seed=s, xi0=p["xi0"], pairing_grid=grid), ("N", N, i)))
    return tasks


def zeros_reduce(cfg, results):
    tol = cfg.tolerances
    f = zr.product_test_function(cfg.params["xi0"])
    ref = zr.reference_current(f)
    by_n: dict[int, list] = {}
    out = []
    for task, res in results:
        by_n.setdefault(task.kwargs["N"], []).append(res)
        if "ddbar" in res:
            out.append(Check("pairing-agreement", "N", task.kwargs["N"], res["ddbar"], res["pairing"], tol["pairing-agreement"], "abs"))
    degrees = sorted(by_n)
    means = []
    for N in degrees:
        rs = by_n[N]
        out.append(Check("zero-count", "N", N, sum(r["count"] for r in rs) / (2 * N * len(rs)), 1.0, 0.0, "abs"))
        out.append(Check("root-residual", "N", N, max(r["residual"] for r in rs), 0.0, tol["root-residual"], "abs"))
        out.append(Check("limit-current", "N", N, float(np.mean([r["pairing"] for r in rs])), ref, tol["limit-current"], "rel"))
        means.append(float(np.mean([r["imag"] for r in rs])))
    if len(degrees) >= 2:
        fit = fit_loglog(degrees, means)
        out.append(Check("imag-scaling-slope", "N_max", max(degrees), fit.slope, -1.0, tol["imag-scaling-slope"], "abs"))
    return out


# -------------------------------------------------------------------- decay


def task_decay(strip, k_max):
    q = math.exp(-strip)
    scan = pj.analytic_decay_scan(lambda x: (1 / (1 - q * np.exp(1j * x))).real, k_max)
    return {"tau_hat": scan.tau_hat, "truncated": scan.truncated}


def task_selection(k):
    tp = pj.triple_products(k, 4 * k + 4)
    return {"selection": float(np.max(np.abs(tp[2 * k + 1 :])))}


def decay_tasks(cfg):
    p = cfg.params
    tasks = [Task(task_decay, dict(strip=s, k_max=p["k_max"]), ("strip", s)) for s in p["strips"]]
    tasks.append(Task(task_selection, dict(k=p["selection_k"]), ("k", p["selection_k"])))
    return tasks


def decay_reduce(cfg, results):
    tol = cfg.tolerances
    out = []
    for task, res in results:
        if task.fn is task_selection:
            out.append(Check("selection-rule", "k", task.kwargs["k"], res["selection"], 0.0, tol["selection-rule"], "abs"))
        else:
            s = task.kwargs["strip"]
            out.append(Check("decay-rate", "strip", s, res["tau_hat"], s, tol["decay-rate"], "abs"))
    return out


# ------------------------------------------------------------------ registry


@dataclass(frozen=True)
class Experiment:
    models: tuple
    params: dict  # name -> (parser, default); default None means required
    tolerances: dict
    tasks: Callable
    reduce: Callable


def _float(v):
    return float(v)


def _pos(v):
    x = float(v)
    if not x > 0:
        raise ValueError("must be positive")
    return x


def _nonneg(v):
    x = float(v)
    if x < 0:
        raise ValueError("must be nonnegative")
    return x


def _posint(v):
    x = int(v)
    if x < 1:
        raise ValueError("must be a positive integer")
    return x


def _nonnegint(v):
    x = int(v)
    if x < 0:
        raise ValueError("must be a nonnegative integer")
    return x


def _list(parser):
    def parse(v):
        items = [s for s in str(v).replace(",", " ").split() if s]
        if not items:
            raise ValueError("empty list")
        return [parser(s) for s in items]

    return parse


EXPERIMENTS: dict[str, Experiment] = {
    "geometry-check": Experiment(
        ("circle", "torus", "sphere", "hyperbolic"),
        {"tau_values": (_list(_nonneg), "0.1 0.5 1.0"), "n_points": (_posint, "20"), "flow_times": (_list(_float), "0.5 1.7 -2.3")},
        {"pullback": 1e-10, "conoid": 1e-10, "flow": 1e-8},
        geometry_tasks,
        geometry_reduce,
    ),
    "weyl": Experiment(
        ("circle", "torus", "sphere"),
        {"tau_values": (_list(_nonneg), "0.3"), "lambda_min": (_pos, "50"), "lambda_max": (_pos, "400"), "n_lambda": (_posint, "12")},
        {"slope": 0.1, "fit-residual": 0.05},
        weyl_tasks,
        weyl_reduce,
    ),
    "siciak": Experiment(
        ("circle",),
        {"lambda": (_pos, "200"), "rho_min": (_pos, "0.1"), "rho_max": (_pos, "0.5"), "n_rho": (_posint, "5"), "n_samples": (_nonnegint, "10000")},
        {"siciak": math.nan, "coherent": 1e-10, "cauchy-schwarz": 1e-10},
        siciak_tasks,
        siciak_reduce,
    ),
    "kernel-compare": Experiment(
        ("sphere",),
        {"tau_min": (_pos, "0.2"), "tau_max": (_pos, "1.0"), "n_tau": (_posint, "5"), "r_min": (_pos, "0.2"), "r_max": (_pos, "2.9415926535897931"), "n_r": (_posint, "7")},
        {"sphere": 1e-6, "subordination": 1e-8, "quadrature": 1e-6},
        kernel_tasks,
        kernel_reduce,
    ),
    "hadamard": Experiment(
        ("sphere", "hyperbolic"),
        {"J": (_nonnegint, "2"), "r_min": (_pos, "0.1"), "r_max": (_pos, "2.0"), "n_r": (_posint, "40"), "potential": (_float, "0.0"), "conoid_offset": (_pos, "1e-4")},
        {"transport-residual": 1e-6, "quadrature-refinement": 1e-8, "conoid-amplitude": 0.02},
        hadamard_tasks,
        hadamard_reduce,
    ),
    "zeros": Experiment(
        ("circle",),
        {
            "degrees": (_list(_posint), "25 50 100 200"),
            "n_seeds": (_posint, "50"),
            "xi0": (_pos, "0.5"),
            "pairing_degree": (_posint, "50"),
            "grid_x": (_posint, "2048"),
            "grid_xi": (_posint, "512"),
        },
        {"pairing-agreement": 1e-3, "root-residual": 1e-8, "limit-current": 0.15, "imag-scaling-slope": 0.15},
        zeros_tasks,
        zeros_reduce,
    ),
    "decay": Experiment(
        ("circle",),
        {"strips": (_list(_pos), "0.5"), "k_max": (_posint, "48"), "selection_k": (_posint, "5")},
        {"decay-rate": 1e-3, "selection-rule": 1e-12},
        decay_tasks,
        decay_reduce,
    ),
}


def run_task(task: Task) -> Any:
    """Execute one task; numerical errors come back as values, not exceptions."""
    try:
        return task.fn(**task.kwargs)
    except GrauertLabError as exc:
        return exc
