"""Numerical probes of the long-time behaviour.

Every probe simulates, reduces the trajectories to a handful of raw series
and then calls a pure ``assess_*`` function on those series.  The
:class:`ProbeReport` stores the series and the assessment parameters, so
:func:`reassess` regenerates the verdict from a stored report alone.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.optimize import linprog
from scipy.stats import qmc

from .dynamics import ModalState, StepperConfig, difference_metrics, simulate
from .errors import AssumptionGateError, ConfigError, StepFailure
from .model import check_assumptions, criticality_class

_EPS = np.finfo(float).eps


@dataclass
class ProbeReport:
    kind: str
    passed: bool | None
    constants: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return {True: "pass", False: "fail", None: "inconclusive"}[self.passed]

    def to_dict(self, series_path: str | None = None) -> dict:
        out = {
            "kind": self.kind,
            "status": self.status,
            "constants": _jsonable(self.constants),
            "diagnostics": _jsonable(self.diagnostics),
            "params": _jsonable(self.params),
        }
        if series_path is not None:
            out["series"] = series_path
        return out

    def to_json(self, series_path: str | None = None) -> str:
        return json.dumps(self.to_dict(series_path), indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _fan_out(fn, items, workers: int = 1):
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _gate(coeffs, basis, names, probe):
    report = check_assumptions(coeffs, basis.dim, lambda1=float(basis.lam[0]))
    bad = report.failed(*names)
    if bad:
        raise AssumptionGateError(f"{probe} probe refused: {', '.join(bad)} not satisfied", report, bad)
    return report


def loglinear_fit(t, y, tail_fraction: float = 0.5):
    """Fit log y = c + slope t over the trailing part of the series.

    Samples below ``100 eps`` times the series maximum are dropped.
    Returns ``(slope, intercept, r2, (t_start, t_end), n_used)``.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    start = int(len(t) * (1.0 - tail_fraction))
    t, y = t[start:], y[start:]
    ymax = np.max(y, initial=0.0)
    keep = y > 100 * _EPS * ymax
    t, y = t[keep], y[keep]
    if len(t) < 3:
        return float("nan"), float("nan"), float("nan"), (float("nan"), float("nan")), int(len(t))
    logy = np.log(y)
    slope, intercept = np.polyfit(t, logy, 1)
    pred = intercept + slope * t
    ss_res = float(np.sum((logy - pred) ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2, (float(t[0]), float(t[-1])), int(len(t))


def _supercritical_power(coeffs, dim):
    p = float(coeffs.f.growth)
    return p if criticality_class(p, dim) == "supercritical" else None


def energy_space_norm(basis, coeffs, u, v, p_super=False) -> float:
    """sqrt(|grad u|^2 + alpha |u|_{p+1}^2 + |v|^2), alpha = 1 only if supercritical."""
    if p_super is False:
        p_super = _supercritical_power(coeffs, basis.dim)
    val = basis.grad_sq(u) + basis.l2_sq(v)
    if p_super is not None:
        val += basis.lp_norm(u, p_super + 1) ** 2
    return math.sqrt(val)


# ---------------------------------------------------------------------------
# absorbing ball
# ---------------------------------------------------------------------------


def assess_absorbing(t, norms, radii, settle_fraction: float = 0.5) -> dict:
    """Smallest candidate radius that every norm series enters and never leaves.

    Entry must happen before ``settle_fraction`` of the horizon so that
    "remains inside" is checked over a nontrivial window.
    """
    t = np.asarray(t)
    norms = np.atleast_2d(np.asarray(norms))
    radii = np.sort(np.asarray(radii, dtype=float))
    deadline = t[0] + settle_fraction * (t[-1] - t[0])
    # the ball of radius r is never left after index i iff tail_max[i] <= r
    tail_max = np.maximum.accumulate(norms[:, ::-1], axis=1)[:, ::-1]
    for r in radii:
        inside = tail_max <= r
        if not np.all(inside[:, -1]):
            continue
        entry_idx = np.argmax(inside, axis=1)
        if np.all(t[entry_idx] <= deadline):
            return {"R_star": float(r), "entry_times": t[entry_idx].tolist(), "absorbed": True}
    return {"R_star": float("nan"), "entry_times": [], "absorbed": False}


def _norm_series(ic, basis, coeffs, cfg, T, stride):
    tr = simulate(basis, ic, T, coeffs, cfg, stride)
    p_super = _supercritical_power(coeffs, basis.dim)
    return tr.t, np.array([energy_space_norm(basis, coeffs, u, v, p_super) for u, v in zip(tr.u, tr.v)])


def absorbing_probe(basis, ics, coeffs, cfg: StepperConfig, T: float, candidate_radii=None,
                    settle_fraction: float = 0.5, stride: int = 1, workers: int = 1) -> ProbeReport:
    """Estimate the radius of an absorbing ball from an ensemble of initial states.

    For every candidate radius (ascending) the probe checks that each
    trajectory enters the ball before ``settle_fraction * T`` and stays in it
    up to the horizon; the first radius that works is reported as ``R_star``.
    Refuses with :class:`AssumptionGateError` unless the dissipativity
    hypotheses hold.
    """
    _gate(coeffs, basis, ["A1(i)", "A1(ii)", "A:dis"], "absorbing")
    radii = np.geomspace(1e-3, 1e4, 1401) if candidate_radii is None else np.asarray(candidate_radii, dtype=float)
    results = _fan_out(partial(_norm_series, basis=basis, coeffs=coeffs, cfg=cfg, T=T, stride=stride),
                       list(ics), workers)
    series = {"t": results[0][0], "norms": np.array([r[1] for r in results])}
    return _report_absorbing(series, {"radii": radii, "settle_fraction": settle_fraction})


def _report_absorbing(series, params):
    res = assess_absorbing(series["t"], series["norms"], params["radii"], params["settle_fraction"])
    return ProbeReport(
        "absorbing", res["absorbed"],
        constants={"R_star": res["R_star"], "max_entry_time": max(res["entry_times"], default=float("nan"))},
        diagnostics={"entry_times": res["entry_times"], "initial_norms": series["norms"][:, 0],
                     "ensemble_size": int(series["norms"].shape[0])},
        params=params, series=series,
    )


# ---------------------------------------------------------------------------
# splitting u = w + v
# ---------------------------------------------------------------------------


def _parabolic_trapezoid(basis, coeffs, nu, sig, phi, forcing, x0, dt, shift=None, tol=1e-12, max_iters=25):
    """Integrate sigma_n K x' + phi_n K x + nu x + N_n(x) = forcing_n with the trapezoidal rule.

    ``N_n(x) = f(x + shift_n) - f(shift_n)`` when ``shift`` is given, else
    ``f(x)``.  The residual is multiplied through by ``sigma_{n+1} K`` so the
    Newton matrix is ``sigma K + dt/2 (phi K + nu + J_f)``.
    """
    f = coeffs.f
    xs = np.zeros((len(sig), len(x0)))
    xs[0] = x0
    half = 0.5 * dt

    def rate(x, i):
        nl = basis.force(f, x) if shift is None else basis.force(f, x + shift[i]) - basis.force(f, shift[i])
        return forcing[i] - phi[i] * basis.apply_K(x) - nu * x - nl

    for i in range(len(sig) - 1):
        j = i + 1
        x = xs[i]
        r0 = rate(x, i)
        x1 = x + dt * basis.solve(0.0, sig[i], 0.0, f, x, r0)
        for _ in range(max_iters):
            res = sig[j] * basis.apply_K(x1 - x) - half * (sig[j] / sig[i]) * r0 - half * rate(x1, j)
            if np.max(np.abs(res)) <= tol * (1.0 + np.max(np.abs(sig[j] * basis.apply_K(x1)))):
                break
            at = x1 if shift is None else x1 + shift[j]
            x1 = x1 + basis.solve(half * nu, sig[j] + half * phi[j], half, f, at, -res)
        else:
            raise StepFailure(f"splitting solve did not converge at step {i}", float(np.max(np.abs(res))), max_iters)
        xs[j] = x1
    return xs


def splitting_probe(basis, ic: ModalState, coeffs, cfg: StepperConfig, T: float, nu: float = 2.0,
                    reference_refinement: bool = True) -> ProbeReport:
    """Co-integrate u with the parabolic pair (w, v) of the splitting u = w + v.

    ``w`` solves ``sigma K w' + phi K w + nu w + f(w) = h_u`` from ``w(0) = 0``
    where ``h_u = -u'' + nu u + h`` is evaluated algebraically from the
    equation of motion, and ``v`` solves
    ``sigma K v' + phi K v + nu v + f(w + v) - f(w) = 0`` from ``v(0) = u(0)``.
    The nonlocal coefficients are frozen along the computed ``u``.

    The report carries the decay fit of ``|grad v|^2``, ``sup |Lap w|^2`` and
    the gap ``max |grad(u - w - v)|`` next to the integrator tolerance,
    estimated as ``max |grad(u_dt - u_dt/2)|``.
    """
    if not nu > 0:
        raise ConfigError(f"nu must be positive, got {nu}")
    _gate(coeffs, basis, ["A1(i)", "A1(ii)", "A-super(i)"], "splitting")
    tr = simulate(basis, ic, T, coeffs, cfg, 1)
    s = np.array([basis.grad_sq(u) for u in tr.u])
    sig = coeffs.sigma.value(s)
    phi = coeffs.phi.value(s)
    ku, kv = tr.u * basis.lam, tr.v * basis.lam
    fu = np.array([basis.force(coeffs.f, u) for u in tr.u])
    h_u = sig[:, None] * kv + phi[:, None] * ku + fu + nu * tr.u
    w = _parabolic_trapezoid(basis, coeffs, nu, sig, phi, h_u, np.zeros(basis.n), cfg.dt)
    v = _parabolic_trapezoid(basis, coeffs, nu, sig, phi, np.zeros_like(h_u), tr.u[0], cfg.dt, shift=w)
    lam = basis.lam
    series = {
        "t": tr.t,
        "grad_v2": np.sum(lam * v * v, axis=1),
        "lap_w2": np.sum(lam**2 * w * w, axis=1),
        "gap": np.sqrt(np.sum(lam * (tr.u - w - v) ** 2, axis=1)),
    }
    tol_int = float("nan")
    if reference_refinement:
        fine_cfg = StepperConfig(**{**cfg.to_dict(), "dt": cfg.dt / 2})
        fine = simulate(basis, ic, T, coeffs, fine_cfg, 2)
        tol_int = float(np.max(np.sqrt(np.sum(lam * (fine.u - tr.u) ** 2, axis=1))))
    return _report_splitting(series, {"nu": nu, "integrator_tolerance": tol_int, "tail_fraction": 0.5,
                                      "r2_min": 0.95, "gap_factor": 10.0})


def _report_splitting(series, params):
    slope, intercept, r2, window, n_used = loglinear_fit(series["t"], series["grad_v2"], params["tail_fraction"])
    sup_lap_w = float(np.max(series["lap_w2"]))
    gap = float(np.max(series["gap"]))
    tol = params["integrator_tolerance"]
    zero_run = float(np.max(series["grad_v2"])) == 0.0 and sup_lap_w == 0.0
    decay_ok = zero_run or (slope < 0 and r2 >= params["r2_min"])
    gap_ok = gap == 0.0 or (np.isfinite(tol) and gap <= params["gap_factor"] * tol)
    passed = bool(decay_ok and np.isfinite(sup_lap_w) and gap_ok)
    return ProbeReport(
        "splitting", passed,
        constants={"decay_slope": slope, "gamma": -slope / 2 if np.isfinite(slope) else slope,
                   "prefactor": math.exp(intercept) if np.isfinite(intercept) else intercept,
                   "sup_lap_w2": sup_lap_w},
        diagnostics={"r2": r2, "fit_window": window, "fit_samples": n_used, "max_gap": gap,
                     "integrator_tolerance": tol, "decay_ok": decay_ok, "gap_ok": gap_ok},
        params=params, series=series,
    )


# ---------------------------------------------------------------------------
# quasi-stability
# ---------------------------------------------------------------------------


def _pair_series(pair, basis, coeffs, cfg, T, stride, mode, order_l):
    ic1, ic2 = pair
    tr1 = simulate(basis, ic1, T, coeffs, cfg, stride)
    tr2 = simulate(basis, ic2, T, coeffs, cfg, stride)
    dm = difference_metrics(basis, tr1, tr2)
    if mode == "strong":
        x, q = dm.energy_sq, dm.z_l2
    else:
        zt = tr1.v - tr2.v
        x = dm.weak_sq
        q = dm.z_l2 + np.sum(basis.lam ** (-2 * order_l) * zt * zt, axis=1)
    return dm.t, x, q, dm


def discounted_integral(t, q, gamma: float) -> np.ndarray:
    """I(t) = int_0^t exp(-gamma (t - s)) q(s) ds by the trapezoidal rule."""
    out = np.zeros_like(q, dtype=float)
    for n in range(1, len(t)):
        dt = t[n] - t[n - 1]
        e = math.exp(-gamma * dt)
        out[n] = e * out[n - 1] + 0.5 * dt * (e * q[n - 1] + q[n])
    return out


def assess_quasi_stability(t, xs, qs, gammas, slack: float = 0.05) -> dict:
    """Search (a, b, gamma) with X(t) <= (1 + slack)[a X(0) e^{-gamma t} + b I_gamma(t)] on every pair.

    For each gamma a two-variable linear programme minimises ``a + b`` under
    the constraints of all pairs jointly (each pair's rows scaled by its
    maximum of X).  Returns per-gamma feasibility and constants and the
    index of the largest feasible gamma.
    """
    t = np.asarray(t, dtype=float)
    rows_scale = [float(np.max(x)) for x in xs]
    out = {"gammas": list(map(float, gammas)), "feasible": [], "a": [], "b": []}
    for g in gammas:
        a_rows, b_rows = [], []
        for x, q, sc in zip(xs, qs, rows_scale):
            if sc == 0.0:
                continue
            big_a = x[0] * np.exp(-g * (t - t[0]))
            big_b = discounted_integral(t, q, g)
            a_rows.append(np.column_stack([-(1 + slack) * big_a / sc, -(1 + slack) * big_b / sc]))
            b_rows.append(-x / sc)
        if not a_rows:
            out["feasible"].append(True)
            out["a"].append(0.0)
            out["b"].append(0.0)
            continue
        res = linprog([1.0, 1.0], A_ub=np.vstack(a_rows), b_ub=np.concatenate(b_rows),
                      bounds=[(0, None), (0, None)], method="highs")
        ok = res.status == 0
        out["feasible"].append(bool(ok))
        out["a"].append(float(res.x[0]) if ok else float("nan"))
        out["b"].append(float(res.x[1]) if ok else float("nan"))
    # the largest feasible rate is the most informative certificate
    best = None
    for i, g in enumerate(gammas):
        if out["feasible"][i] and g > 0 and (best is None or g > gammas[best]):
            best = i
    out["best"] = best
    return out


def quasi_stability_probe(basis, pairs, coeffs, cfg: StepperConfig, T: float, mode: str = "strong",
                          stride: int = 1, gammas=None, slack: float = 0.05, order_l: float = 1.0,
                          workers: int = 1) -> ProbeReport:
    """Certify feasibility of the quasi-stability inequality for trajectory pairs.

    ``mode="strong"`` uses X = |z_t|^2 + |grad z|^2 with lower-order term
    |z|^2 and requires A3-crit; ``mode="weak"`` uses X = |z_t|_{-1}^2 +
    |grad z|^2 with |z|^2 + |A^{-l} z_t|^2 and requires A-super.
    """
    if mode not in ("strong", "weak"):
        raise ConfigError(f"mode must be 'strong' or 'weak', got {mode!r}")
    if mode == "strong":
        _gate(coeffs, basis, ["A1(ii)", "A3-crit"], "strong quasi-stability")
    else:
        _gate(coeffs, basis, ["A1(ii)", "A-super(i)", "A-super(ii)"], "weak quasi-stability")
    gammas = np.geomspace(1e-3, 1e2, 32) if gammas is None else np.asarray(gammas, dtype=float)
    results = _fan_out(partial(_pair_series, basis=basis, coeffs=coeffs, cfg=cfg, T=T, stride=stride,
                               mode=mode, order_l=order_l), list(pairs), workers)
    series = {"t": results[0][0], "X": np.array([r[1] for r in results]), "q": np.array([r[2] for r in results])}
    return _report_quasi(series, {"mode": mode, "gammas": gammas, "slack": slack, "order_l": order_l})


def _report_quasi(series, params):
    res = assess_quasi_stability(series["t"], series["X"], series["q"], params["gammas"], params["slack"])
    best = res["best"]
    xs = series["X"]
    separated = [bool(np.max(x) > 0 and x[-1] > 1e-6 * np.max(x)) for x in xs]
    constants = {"a": float("nan"), "b": float("nan"), "gamma": float("nan")}
    if best is not None:
        constants = {"a": res["a"][best], "b": res["b"][best], "gamma": res["gammas"][best]}
    return ProbeReport(
        "quasistab", best is not None, constants=constants,
        diagnostics={"feasible_gammas": [g for g, ok in zip(res["gammas"], res["feasible"]) if ok],
                     "per_gamma_a": res["a"], "per_gamma_b": res["b"],
                     "separated_limits": separated, "any_separated_limits": any(separated)},
        params=params, series=series,
    )


# ---------------------------------------------------------------------------
# determining modes
# ---------------------------------------------------------------------------


def completeness_defect(lam, n_low: int) -> float:
    """Completeness defect of the first ``n_low`` modal functionals: lambda_{n_low+1}^{-1/2}."""
    lam = np.asarray(lam)
    if not 0 <= n_low < len(lam):
        raise ConfigError(f"n_low must be in [0, {len(lam) - 1}], got {n_low}")
    return float(lam[n_low] ** -0.5)


def windowed_integrals(t, y, window_samples: int) -> np.ndarray:
    """int_t^{t+window} y(s) ds at every sample whose window fits in the series.

    Summed directly from trapezoid increments rather than as a difference of
    cumulative integrals, which would cancel tiny tails to zero.
    """
    y, t = np.asarray(y, dtype=float), np.asarray(t, dtype=float)
    incr = 0.5 * np.diff(t) * (y[1:] + y[:-1])
    return np.convolve(incr, np.ones(window_samples), mode="valid")


def _determining_series(pair, basis, coeffs, cfg, T, stride, n_low, window_samples):
    ic1, ic2 = pair
    tr1 = simulate(basis, ic1, T, coeffs, cfg, stride)
    tr2 = simulate(basis, ic2, T, coeffs, cfg, stride)
    dm = difference_metrics(basis, tr1, tr2)
    z = tr1.u[:, :n_low] - tr2.u[:, :n_low]
    wins = np.array([windowed_integrals(dm.t, z[:, j] ** 2, window_samples) for j in range(n_low)])
    hyp = wins.max(axis=0) if n_low > 0 else np.zeros(len(dm.t) - window_samples)
    return dm.t, hyp, np.sqrt(dm.energy_sq)


def assess_determining(hyps, concs, window_samples: int, hyp_tol: float = 1e-12, conc_tol: float = 1e-6) -> dict:
    hyp_tail = [float(h[-1]) for h in hyps]
    conc_tail = [float(np.max(c[-window_samples - 1:])) for c in concs]
    triggered = [h <= hyp_tol for h in hyp_tail]
    holds = [(not trig) or c <= conc_tol for trig, c in zip(triggered, conc_tail)]
    return {"hyp_tail": hyp_tail, "conc_tail": conc_tail, "triggered": triggered, "holds": holds}


def determining_probe(basis, pairs, coeffs, cfg: StepperConfig, T: float, n_low: int, window: float = 1.0,
                      stride: int = 1, workers: int = 1) -> ProbeReport:
    """Check that agreement of the first ``n_low`` modes forces full agreement.

    The hypothesis series is ``max_j int_t^{t+window} |z_j|^2`` over the low
    modes; the conclusion series is the energy norm of the difference.  The
    probe passes when, for every pair whose hypothesis tail falls below
    1e-12, the conclusion tail is below 1e-6.
    """
    eps_l = completeness_defect(basis.lam, n_low)
    dt_s = cfg.dt * max(1, int(stride))
    window_samples = int(round(window / dt_s))
    if window_samples < 1 or window >= T:
        raise ConfigError("window must cover at least one sample and be shorter than T")
    results = _fan_out(partial(_determining_series, basis=basis, coeffs=coeffs, cfg=cfg, T=T, stride=stride,
                               n_low=n_low, window_samples=window_samples), list(pairs), workers)
    series = {"t": results[0][0], "hypothesis": np.array([r[1] for r in results]),
              "conclusion": np.array([r[2] for r in results])}
    return _report_determining(series, {"n_low": n_low, "epsilon_L": eps_l, "window": window,
                                        "window_samples": window_samples, "hyp_tol": 1e-12, "conc_tol": 1e-6})


def _report_determining(series, params):
    res = assess_determining(series["hypothesis"], series["conclusion"], params["window_samples"],
                             params["hyp_tol"], params["conc_tol"])
    return ProbeReport(
        "determining", all(res["holds"]),
        constants={"epsilon_L": params["epsilon_L"], "n_low": params["n_low"]},
        diagnostics={**res, "vacuous": not any(res["triggered"])},
        params=params, series=series,
    )


# ---------------------------------------------------------------------------
# box-counting dimension
# ---------------------------------------------------------------------------


def embed(u_samples, v_samples, lam, m: int) -> np.ndarray:
    """Points (sqrt(lam_k) u_k, v_k) for the first m modes: energy-norm coordinates."""
    u = np.asarray(u_samples)[:, :m]
    v = np.asarray(v_samples)[:, :m]
    return np.hstack([np.sqrt(np.asarray(lam)[:m]) * u, v])


def box_count(points, eps: float) -> int:
    return int(np.unique(np.floor(np.asarray(points) / eps), axis=0).shape[0])


def box_counting_slope(points, scales):
    scales = np.sort(np.asarray(scales, dtype=float))[::-1]
    counts = np.array([box_count(points, e) for e in scales])
    k = len(scales)
    lo, hi = (k // 4, k - k // 4) if k >= 5 else (0, k)
    x = np.log(1.0 / scales[lo:hi])
    y = np.log(counts[lo:hi])
    slope = float(np.polyfit(x, y, 1)[0]) if len(x) >= 2 else float("nan")
    return slope, counts, (float(scales[lo]), float(scales[hi - 1]))


def dimension_probe(u_samples, v_samples, lam, embed_modes: int, scales, extra_modes: int = 2,
                    stability_tol: float = 0.3) -> ProbeReport:
    """Box-counting slope of the sampled set in the first ``embed_modes`` modes.

    The slope is also computed with ``embed_modes + extra_modes`` modes;
    the report passes when both are finite and differ by at most
    ``stability_tol``.  Too few samples for the coarsest box count gives
    an inconclusive report.
    """
    u_samples = np.asarray(u_samples, dtype=float)
    if len(u_samples) < 1000:
        raise ConfigError(f"dimension probe needs at least 1000 samples, got {len(u_samples)}")
    series = {"u": u_samples, "v": np.asarray(v_samples, dtype=float)}
    params = {"lam": np.asarray(lam, dtype=float), "embed_modes": int(embed_modes),
              "extra_modes": int(extra_modes), "scales": np.asarray(scales, dtype=float),
              "stability_tol": stability_tol}
    return _report_dimension(series, params)


def _report_dimension(series, params):
    m, m2 = params["embed_modes"], min(params["embed_modes"] + params["extra_modes"], series["u"].shape[1])
    pts = embed(series["u"], series["v"], params["lam"], m)
    slope, counts, window = box_counting_slope(pts, params["scales"])
    slope2, counts2, _ = box_counting_slope(embed(series["u"], series["v"], params["lam"], m2), params["scales"])
    n = len(pts)
    enough = n >= 10 * counts[0]
    diff = abs(slope - slope2)
    passed = None if not enough else bool(np.isfinite(slope) and diff <= params["stability_tol"])
    return ProbeReport(
        "dimension", passed,
        constants={"dimension": slope, "dimension_extra_modes": slope2, "stability": diff},
        diagnostics={"counts": counts, "counts_extra_modes": counts2, "fit_window": window,
                     "samples": n, "embed_modes": [m, m2], "enough_samples": bool(enough)},
        params=params, series={},
    )


def sample_attractor(basis, coeffs, cfg: StepperConfig, n_traj: int, radius: float, burn_in: float,
                     T_sample: float, stride: int = 1, seed: int = 0, lh_modes: int = 4):
    """Launch trajectories from a Latin hypercube in the ball of given energy radius.

    The hypercube lives in the first ``lh_modes`` modes of (u, v) and is
    scaled so every start has energy norm at most ``radius``.  States after
    ``burn_in`` are returned as ``(U, V)`` arrays.
    """
    lh_modes = min(lh_modes, basis.n)
    pts = qmc.LatinHypercube(d=2 * lh_modes, seed=seed).random(n_traj) * 2.0 - 1.0
    scale = radius / math.sqrt(2 * lh_modes)
    lam = basis.lam[:lh_modes]
    us, vs = [], []
    skip = int(round(burn_in / (cfg.dt * stride)))
    for p in pts:
        u = np.zeros(basis.n)
        v = np.zeros(basis.n)
        u[:lh_modes] = scale * p[:lh_modes] / np.sqrt(lam)
        v[:lh_modes] = scale * p[lh_modes:]
        tr = simulate(basis, ModalState(0.0, u, v), burn_in + T_sample, coeffs, cfg, stride)
        us.append(tr.u[skip:])
        vs.append(tr.v[skip:])
    return np.vstack(us), np.vstack(vs)


_REPORTERS = {
    "absorbing": _report_absorbing,
    "splitting": _report_splitting,
    "quasistab": _report_quasi,
    "determining": _report_determining,
    "dimension": _report_dimension,
}


def reassess(report: ProbeReport) -> ProbeReport:
    """Recompute a report from its stored series and parameters."""
    if report.kind == "dimension":
        raise ConfigError("dimension reports do not store raw samples; rerun dimension_probe")
    return _REPORTERS[report.kind](report.series, report.params)
