"""Batch verification suites and the equidistribution demo.

Each suite expands a small config into a deterministic instance list,
runs every instance (inline or on a process pool), and assembles a
JSON-ready report: one record per instance with both sides of the
identity, the residual, pass/fail at the configured tolerance, and the
resources used.  A record whose computation raises becomes status
"error" rather than aborting the batch; the exit-code mapping keeps
residual exceedance (1) distinct from computation failure (2).

Every instance starts by certifying the truncation policy: the signed
series is evaluated once under the height-doubling schedule, and the
achieved height (never below the command's floor) becomes the series
bound for the main computation.  A policy that cannot stabilize raises,
which is what the forced-cap fault injection exercises.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

from .cycles import homogenized_identity_report, single_period_identity_report
from .errors import NonConvergenceError
from .geodesics import GeodesicError, enumerate_closed_intersections
from .lfun import fourier_coefficients, theorem2_report
from .periods import verify_period_formulas
from .poincare import SeriesHandle, TruncationPolicy, eval_series
from .qforms import (FormClass, GroupElement, QForm, class_representatives,
                     stabilizer_automorph)

log = logging.getLogger("modgeo.experiments")

_CERT_POINT = 0.37 + 1.13j
_BOUND_FLOORS = {"thm1": 1200, "katok": 1200, "thm2": 2400,
                 "periods": 2400, "coeffs": 1200}


def default_settings(command: str) -> dict:
    base = {"tol": 1e-4, "height": 64, "series_tol": 1e-6,
            "max_doublings": 12, "jobs": 1}
    if command == "katok":
        base["tol"] = 1e-5
    if command == "periods":
        base["radius"] = 600
    return base


def certify_truncation(k: int, cls: FormClass, settings: dict) -> int:
    """Run the doubling schedule once and return the series bound to use.

    Raises NonConvergenceError when the schedule cannot stabilize; the
    achieved height is floored at the command's default bound so a loose
    policy never degrades accuracy below the shipped defaults.
    """
    policy = TruncationPolicy(height=int(settings["height"]),
                              tol=float(settings["series_tol"]),
                              max_doublings=int(settings["max_doublings"]))
    handle = SeriesHandle(k=k, cls=cls, policy=policy, flavor="parson")
    eval_series(handle, _CERT_POINT)
    achieved = handle.achieved_height or policy.height
    floor = _BOUND_FLOORS.get(settings.get("command", ""), 1200)
    log.debug("certified k=%d class=%s achieved=%d", k, cls.key()[0],
              achieved)
    return max(achieved, floor)


# ---------------------------------------------------------------------------
# single-instance runners (module level so a process pool can pickle them)
# ---------------------------------------------------------------------------

def _gamma_from_seed(seed) -> FormClass:
    return FormClass.from_form(QForm(*seed))


def run_instance(command: str, payload: dict, settings: dict) -> dict:
    """One instance record; exceptions become status="error" records."""
    t0 = time.perf_counter()
    rec = {"command": command, **payload, "status": "ok", "error": None}
    try:
        settings = {**settings, "command": command}
        if command in ("thm1", "katok"):
            cls = _gamma_from_seed(payload["gamma_seed"])
            sigma = GroupElement(*payload["sigma"])
            bound = certify_truncation(payload["k"], cls, settings)
            if command == "thm1":
                rep = homogenized_identity_report(
                    payload["k"], cls, sigma,
                    tol=min(1e-8, 0.01 * settings["tol"]), bound=bound)
            else:
                rep = single_period_identity_report(payload["k"], cls, sigma)
            rec.update(lhs=rep.lhs, rhs=rep.rhs, residual=rep.residual,
                       resources={"bound": bound, "n_used": rep.n_used,
                                  "heights_used": list(rep.heights_used)})
        elif command == "thm2":
            cls = _gamma_from_seed(payload["seed"])
            bound = certify_truncation(payload["k"], cls, settings)
            rep = theorem2_report(payload["k"], cls, payload["d"],
                                  payload["c"], bound=bound,
                                  max_doublings=max(
                                      6, int(settings["max_doublings"])))
            rec.update(lhs=rep["lhs"], rhs=rep["rhs"],
                       residual=rep["residual"],
                       n_crossings=rep["n_crossings"],
                       resources={"bound": bound})
        elif command == "periods":
            k, D = payload["k"], payload["D"]
            cls = [c for c in class_representatives(D) if c.content == 1][0]
            bound = certify_truncation(k, cls, settings)
            rep = verify_period_formulas(
                k, D, bound=bound, radius=int(settings.get("radius", 600)))
            sym = max(rep["symmetry_residuals"], default=0.0)
            rec.update(report=rep,
                       residual=max(rep["max_ratio_deviation"], sym),
                       recognized=len(rep["recognized_periods"]),
                       resources={"bound": bound,
                                  "radius": settings.get("radius", 600)})
        else:
            raise ValueError(f"unknown command {command!r}")
        rec["pass"] = rec["residual"] < settings["tol"]
    except NonConvergenceError as exc:
        rec.update(status="error", error=f"non-convergence: {exc}",
                   **{"pass": False})
    except (ValueError, GeodesicError, ZeroDivisionError,
            OverflowError) as exc:
        rec.update(status="error", error=f"{type(exc).__name__}: {exc}",
                   **{"pass": False})
    rec.setdefault("resources", {})
    rec["resources"]["seconds"] = round(time.perf_counter() - t0, 3)
    return rec


def _pool_entry(args) -> dict:
    command, payload, settings = args
    return run_instance(command, payload, settings)


# ---------------------------------------------------------------------------
# suite assembly
# ---------------------------------------------------------------------------

def _finish(command: str, instances: list[dict], settings: dict) -> dict:
    counts = {
        "pass": sum(1 for r in instances if r.get("pass")),
        "fail": sum(1 for r in instances
                    if r["status"] == "ok" and not r.get("pass")),
        "error": sum(1 for r in instances if r["status"] == "error"),
    }
    return {
        "command": command,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "settings": {k: v for k, v in sorted(settings.items())},
        "instances": instances,
        "counts": counts,
        "all_pass": counts["fail"] == 0 and counts["error"] == 0
        and counts["pass"] == len(instances),
    }


def run_suite(command: str, payloads: list[dict], settings: dict) -> dict:
    """Run the expanded instance list and assemble the report.

    The payload list order is the report order regardless of worker
    scheduling, so identical configs produce identical reports (the
    timestamp field aside).
    """
    if not payloads:
        raise ValueError("instance list is empty")
    jobs = int(settings.get("jobs", 1))
    log.info("running %s: %d instance(s), jobs=%d", command, len(payloads),
             jobs)
    if jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            instances = list(pool.map(
                _pool_entry,
                [(command, p, settings) for p in payloads]))
    else:
        instances = [run_instance(command, p, settings) for p in payloads]
    return _finish(command, instances, settings)


def exit_code_for(report: dict) -> int:
    """0 all pass; 1 residual exceedance; 2 any computation failure."""
    if report["counts"]["error"]:
        return 2
    if report["counts"]["fail"]:
        return 1
    return 0


# ---------------------------------------------------------------------------
# instance expansion per command
# ---------------------------------------------------------------------------

def sigma_from_trace(t: int) -> GroupElement:
    """Canonical primitive hyperbolic of trace t >= 3."""
    if t < 3:
        raise ValueError(f"need trace >= 3, got {t}")
    return GroupElement(t - 1, 1, t - 2, 1)


def expand_pair_instances(k_list, gamma_cls: FormClass,
                          sigmas: list[GroupElement]) -> list[dict]:
    seed = list(gamma_cls.seed.as_tuple())
    return [{"k": k, "gamma_seed": seed, "sigma": list(s.as_tuple())}
            for k in k_list for s in sigmas]


def expand_cusp_instances(k_list, discs, dcs) -> list[dict]:
    out = []
    for k in k_list:
        for D in discs:
            for cls in class_representatives(D):
                if cls.content != 1:
                    continue
                for (d, c) in dcs:
                    out.append({"k": k, "seed": list(cls.seed.as_tuple()),
                                "disc": D, "d": d, "c": c})
    return out


def expand_period_instances(k_list, discs) -> list[dict]:
    return [{"k": k, "D": D} for k in k_list for D in discs]


# ---------------------------------------------------------------------------
# coefficient tables
# ---------------------------------------------------------------------------

def run_coeffs(k: int, gamma_cls: FormClass, *, n_max: int = 10,
               y: float = 1.0, settings: dict | None = None) -> dict:
    settings = {**default_settings("coeffs"), **(settings or {}),
                "command": "coeffs"}
    bound = certify_truncation(k, gamma_cls, settings)
    table = fourier_coefficients(k, gamma_cls, n_max, y, bound=bound)
    out = table.as_dict()
    out["resources"] = {"bound": bound}
    return out


# ---------------------------------------------------------------------------
# equidistribution demo
# ---------------------------------------------------------------------------

def ks_distance_to_uniform(values: list[float]) -> float:
    """One-sample Kolmogorov-Smirnov distance to the uniform law on
    [-1, 1] (the pushforward of (1/2) sin theta d theta under cos)."""
    if not values:
        return 1.0
    xs = sorted(values)
    n = len(xs)
    dist = 0.0
    for i, x in enumerate(xs):
        cdf = (x + 1.0) / 2.0
        dist = max(dist, abs(cdf - i / n), abs(cdf - (i + 1) / n))
    return dist


def run_histogram(gamma_cls: FormClass, discs: list[int], *,
                  bins: int = 20) -> dict:
    """Crossings of the fixed closed geodesic with every primitive class
    of each listed discriminant: per-crossing rows plus per-discriminant
    binned cosine histograms and KS distances.

    Classes sharing the fixed geodesic admit no transversal crossings
    and are skipped (reported under skipped_classes).
    """
    if not discs:
        raise ValueError("discriminant list is empty")
    if bins < 1:
        raise ValueError(f"need bins >= 1, got {bins}")
    gamma_elt = stabilizer_automorph(gamma_cls.seed)
    rows: list[dict] = []
    summaries = []
    for D in discs:
        cos_values: list[float] = []
        skipped = []
        for cls in class_representatives(D):
            if cls.content != 1:
                continue
            try:
                records = enumerate_closed_intersections(cls, gamma_elt)
            except GeodesicError:
                skipped.append(list(cls.seed.as_tuple()))
                continue
            for rec in records:
                rows.append({
                    "disc": D, "seed": list(cls.seed.as_tuple()),
                    "x": rec.point.real, "y": rec.point.imag,
                    "cos_angle": rec.cos_angle, "angle": rec.angle,
                    "sign": rec.sign,
                })
                cos_values.append(rec.cos_angle)
        counts = [0] * bins
        for v in cos_values:
            idx = min(int((v + 1.0) / 2.0 * bins), bins - 1)
            counts[idx] += 1
        summaries.append({
            "disc": D,
            "count": len(cos_values),
            "bin_edges": [-1.0 + 2.0 * i / bins for i in range(bins + 1)],
            "bin_counts": counts,
            "ks_distance": ks_distance_to_uniform(cos_values),
            "skipped_classes": skipped,
        })
    ks = [s["ks_distance"] for s in summaries]
    return {
        "command": "histogram",
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "gamma_seed": list(gamma_cls.seed.as_tuple()),
        "bins": bins,
        "rows": rows,
        "summaries": summaries,
        "trend": {
            "discs": list(discs),
            "ks_distances": ks,
            "decreased_overall": bool(ks and ks[-1] <= ks[0]),
            "note": "reported as a demo statistic, not asserted",
        },
    }


def histogram_csv(report: dict) -> str:
    """Plot-ready CSV: one row per crossing."""
    lines = ["disc,seed_a,seed_b,seed_c,x,y,cos_angle,angle,sign"]
    for r in report["rows"]:
        a, b, c = r["seed"]
        lines.append(f"{r['disc']},{a},{b},{c},{r['x']!r},{r['y']!r},"
                     f"{r['cos_angle']!r},{r['angle']!r},{r['sign']}")
    return "\n".join(lines) + "\n"
