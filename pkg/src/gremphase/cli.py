"""Command-line surface: model files in, CSV/JSON grids out.

Subcommands: ``pressure`` (one row per (beta, Gamma, h) grid point),
``critical`` (transition-line samples with an optional exponent-fit footer),
``verify`` (finite-N verification campaigns with pass/fail summaries).

The ``--gamma`` and ``--h`` axes act as field strengths: every grid value
scales the corresponding law declared in the model file (a point mass of
value 1 therefore sweeps the literal field strength).

Exit codes: 0 ok, 1 verification failure, 2 invalid model file,
3 model-capability mismatch, 4 resource/size guard.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import (
    BudgetExceededError,
    DistributionFn,
    FieldLaw,
    FiniteMixture,
    GaussianLaw,
    Hierarchical,
    IidField,
    LongitudinalMode,
    MagneticEta,
    ModelSpec,
    PointMass,
    Sampled,
    SizeGuardError,
    SkCaricature,
    Step,
    StepEta,
    SymmetricTwoPoint,
    UnsupportedModelError,
    validate,
)
from . import critical as critical_mod
from . import hull as hull_mod
from . import pressure as pressure_mod
from . import solve, verify

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_SPEC = 2
EXIT_MODEL = 3
EXIT_RESOURCE = 4


# ---------------------------------------------------------------------------
# model-file (de)serialization
# ---------------------------------------------------------------------------

def law_to_dict(law: FieldLaw) -> dict:
    if isinstance(law, PointMass):
        return {"type": "pointMass", "value": law.value}
    if isinstance(law, SymmetricTwoPoint):
        return {"type": "symmetricTwoPoint", "magnitude": law.magnitude}
    if isinstance(law, FiniteMixture):
        return {"type": "finiteMixture", "atoms": [list(a) for a in law.atoms]}
    if isinstance(law, GaussianLaw):
        return {
            "type": "gaussian",
            "mean": law.mean,
            "std": law.std,
            "nodes": law.quadrature_nodes,
        }
    raise TypeError(f"unknown law {type(law).__name__}")


def law_from_dict(d: dict) -> FieldLaw:
    kind = d.get("type")
    if kind == "pointMass":
        return PointMass(value=float(d["value"]))
    if kind == "symmetricTwoPoint":
        return SymmetricTwoPoint(magnitude=float(d["magnitude"]))
    if kind == "finiteMixture":
        return FiniteMixture(atoms=tuple((float(v), float(w)) for v, w in d["atoms"]))
    if kind == "gaussian":
        return GaussianLaw(
            mean=float(d["mean"]),
            std=float(d["std"]),
            quadrature_nodes=int(d.get("nodes", 64)),
        )
    raise ValueError(f"unknown field law type {kind!r}")


def distribution_to_dict(a: DistributionFn) -> dict:
    if isinstance(a, Step):
        return {"type": "step", "points": list(a.points), "increments": list(a.increments)}
    if isinstance(a, SkCaricature):
        return {"type": "sk"}
    if isinstance(a, Sampled):
        return {"type": "sampled", "grid": [list(p) for p in a.grid]}
    raise TypeError(f"unknown distribution {type(a).__name__}")


def distribution_from_dict(d: dict) -> DistributionFn:
    kind = d.get("type")
    if kind == "step":
        return Step(
            points=tuple(float(x) for x in d["points"]),
            increments=tuple(float(x) for x in d["increments"]),
        )
    if kind == "sk":
        return SkCaricature()
    if kind == "sampled":
        return Sampled(grid=tuple((float(x), float(v)) for x, v in d["grid"]))
    raise ValueError(f"unknown distribution type {kind!r}")


def longitudinal_to_dict(mode: LongitudinalMode) -> dict:
    if isinstance(mode, IidField):
        return {"type": "iid", "law": law_to_dict(mode.law)}
    ov = mode.overlap
    if isinstance(ov, StepEta):
        overlap = {"type": "stepEta", "points": list(ov.points), "values": list(ov.values)}
    else:
        overlap = {"type": "magneticEta", "strength": ov.strength}
    return {"type": "hierarchical", "overlap": overlap}


def longitudinal_from_dict(d: dict) -> LongitudinalMode:
    kind = d.get("type")
    if kind == "iid":
        return IidField(law=law_from_dict(d["law"]))
    if kind == "hierarchical":
        ov = d["overlap"]
        if ov.get("type") == "stepEta":
            return Hierarchical(
                StepEta(
                    points=tuple(float(x) for x in ov["points"]),
                    values=tuple(float(x) for x in ov["values"]),
                )
            )
        if ov.get("type") == "magneticEta":
            return Hierarchical(MagneticEta(strength=float(ov["strength"])))
        raise ValueError(f"unknown overlap type {ov.get('type')!r}")
    raise ValueError(f"unknown longitudinal type {kind!r}")


def spec_to_dict(spec: ModelSpec) -> dict:
    return {
        "distribution": distribution_to_dict(spec.distribution),
        "longitudinal": longitudinal_to_dict(spec.longitudinal),
        "transversal": law_to_dict(spec.transversal),
    }


def spec_from_dict(d: dict) -> ModelSpec:
    return ModelSpec(
        distribution=distribution_from_dict(d["distribution"]),
        longitudinal=longitudinal_from_dict(d["longitudinal"]),
        transversal=law_from_dict(d["transversal"]),
    )


def load_spec(path: str) -> ModelSpec:
    with open(path, "r", encoding="utf-8") as f:
        return spec_from_dict(json.load(f))


# ---------------------------------------------------------------------------
# field-strength scaling
# ---------------------------------------------------------------------------

def scale_law(law: FieldLaw, s: float) -> FieldLaw:
    if isinstance(law, PointMass):
        return PointMass(law.value * s)
    if isinstance(law, SymmetricTwoPoint):
        return SymmetricTwoPoint(law.magnitude * abs(s))
    if isinstance(law, FiniteMixture):
        return FiniteMixture(tuple((v * s, w) for v, w in law.atoms))
    if isinstance(law, GaussianLaw):
        return GaussianLaw(law.mean * s, law.std * abs(s), law.quadrature_nodes)
    raise TypeError(f"unknown law {type(law).__name__}")


def scale_longitudinal(mode: LongitudinalMode, s: float) -> LongitudinalMode:
    if isinstance(mode, IidField):
        return IidField(scale_law(mode.law, s))
    ov = mode.overlap
    if isinstance(ov, StepEta):
        return Hierarchical(StepEta(ov.points, tuple(v * s for v in ov.values)))
    return Hierarchical(MagneticEta(ov.strength * s))


# ---------------------------------------------------------------------------
# grids and output
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    count: int
    log: bool = False

    def values(self) -> list[float]:
        if self.count == 1:
            return [self.lo]
        if self.log:
            if self.lo <= 0.0 or self.hi <= 0.0:
                raise ValueError("log-spaced axis needs positive endpoints")
            return list(np.logspace(math.log10(self.lo), math.log10(self.hi), self.count))
        return list(np.linspace(self.lo, self.hi, self.count))


@dataclass(frozen=True)
class RunManifest:
    command: str
    spec_path: str
    beta: Axis
    gamma: Axis
    h: Axis
    seeds: int
    out: str | None
    fmt: str


def parse_axis(text: str, log: bool) -> Axis:
    parts = text.split(":")
    if len(parts) == 1:
        v = float(parts[0])
        return Axis(v, v, 1, log)
    if len(parts) != 3:
        raise ValueError(f"axis must be 'value' or 'lo:hi:count', got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError("axis count must be >= 1")
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("axis endpoints must be finite")
    return Axis(lo, hi, count, log)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _round12(value):
    if isinstance(value, float):
        if math.isnan(value):
            return None
        return float(f"{value:.12g}")
    return value


def write_rows(rows: list[dict], header: list[str], out: str | None, fmt: str) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row.get(col, "")) for col in header])
        text = buf.getvalue()
    else:
        text = json.dumps(
            [{k: _round12(v) for k, v in row.items()} for row in rows], indent=1
        )
        text += "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _pool_size() -> int:
    env = os.environ.get("GREMPHASE_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _map_ordered(fn, items):
    workers = _pool_size()
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# pressure command
# ---------------------------------------------------------------------------

def _is_point_rem(spec: ModelSpec) -> bool:
    return (
        isinstance(spec.distribution, Step)
        and len(spec.distribution.points) == 1
        and isinstance(spec.longitudinal, IidField)
        and isinstance(spec.longitudinal.law, PointMass)
        and isinstance(spec.transversal, PointMass)
    )


def evaluate_pressure_point(
    spec: ModelSpec, beta: float, g: float, h: float
) -> pressure_mod.PressureResult:
    eff = ModelSpec(
        distribution=spec.distribution,
        longitudinal=scale_longitudinal(spec.longitudinal, h),
        transversal=scale_law(spec.transversal, g),
    )
    if isinstance(eff.longitudinal, IidField):
        if _is_point_rem(eff) and eff.longitudinal.law.value >= 0 and eff.transversal.value >= 0:
            return pressure_mod.pressure_qrem(
                eff.longitudinal.law.value, eff.transversal.value, beta
            )
        return pressure_mod.pressure_qcremh(eff, beta)
    ov = eff.longitudinal.overlap
    if (
        isinstance(ov, MagneticEta)
        and isinstance(eff.transversal, PointMass)
        and ov.strength > 0.0
        and eff.transversal.value > 0.0
        and beta > 0.0
    ):
        full = hull_mod.build_concave_hull(eff.distribution)
        if full.smooth:
            return pressure_mod.pressure_hier_closed(
                ov.strength, eff.transversal.value, beta, full
            )
    return pressure_mod.pressure_hier(eff, beta)


def cmd_pressure(manifest: RunManifest, spec: ModelSpec) -> int:
    points = [
        (b, g, h)
        for b in manifest.beta.values()
        for g in manifest.gamma.values()
        for h in manifest.h.values()
    ]

    def one(pt):
        b, g, h = pt
        res = evaluate_pressure_point(spec, b, g, h)
        return {
            "beta": b,
            "gamma": g,
            "h": h,
            "phi": res.phi,
            "y_star": res.y_star,
            "z_star": res.z_star,
            "phase": res.phase.value,
            "m_x": res.m_x,
            "m_z": res.m_z,
        }

    rows = _map_ordered(one, points)
    header = ["beta", "gamma", "h", "phi", "y_star", "z_star", "phase", "m_x", "m_z"]
    write_rows(rows, header, manifest.out, manifest.fmt)
    return EXIT_OK


# ---------------------------------------------------------------------------
# critical command
# ---------------------------------------------------------------------------

def cmd_critical(manifest: RunManifest, spec: ModelSpec, line: str, fit: bool) -> int:
    rows: list[dict] = []
    header: list[str]
    full = hull_mod.build_concave_hull(spec.distribution)
    if line in ("atLine", "gammaHier") and not full.smooth:
        raise UnsupportedModelError(
            f"{line} requires continuously differentiable concave A"
        )
    if line == "atLine":
        header = ["h", "beta_c", "t_c"]
        hs = manifest.h.values()
        betas = _map_ordered(lambda h: solve.at_line(full, h), hs)
        for h, bc in zip(hs, betas):
            rows.append({"h": h, "beta_c": bc, "t_c": 1.0 / bc if bc > 0 else math.inf})
        if fit:
            t_c0 = 1.0 / solve.at_line(full, 1e-7)
            curve = [(r["h"], t_c0 - r["t_c"]) for r in rows]
            exp_, pre, r2 = critical_mod.exponent_fit(
                curve, (min(hs), max(hs))
            )
            rows.append({"h": "fit", "beta_c": exp_, "t_c": r2})
    elif line == "gammaRem":
        header = ["beta", "h", "gamma_c"]
        for b in manifest.beta.values():
            for h in manifest.h.values():
                rows.append({"beta": b, "h": h, "gamma_c": critical_mod.gamma_c_rem(b, h)})
    elif line == "gammaHier":
        header = ["beta", "h", "gamma_c"]
        for b in manifest.beta.values():
            for h in manifest.h.values():
                rows.append(
                    {"beta": b, "h": h, "gamma_c": critical_mod.gamma_c_hier(full, b, h)}
                )
        if fit:
            if manifest.beta.count != 1:
                raise ValueError("exponent fit needs a single beta value")
            b = manifest.beta.values()[0]
            g0 = critical_mod.gamma_c_hier(full, b, 0.0)
            curve = [(r["h"], g0 - r["gamma_c"]) for r in rows if r["h"] > 0]
            exp_, pre, r2 = critical_mod.exponent_fit(
                curve, (min(h for h, _ in curve), max(h for h, _ in curve))
            )
            rows.append({"beta": "fit", "h": exp_, "gamma_c": r2})
    elif line == "gammaSecondary":
        header = ["beta", "gamma_c1"]
        for b in manifest.beta.values():
            rows.append({"beta": b, "gamma_c1": critical_mod.gamma_c_secondary(full, b)})
    else:
        raise ValueError(f"unknown line {line!r}")
    write_rows(rows, header, manifest.out, manifest.fmt)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify command
# ---------------------------------------------------------------------------

def _parse_sizes(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def cmd_verify(
    manifest: RunManifest,
    spec: ModelSpec,
    campaign: str,
    sizes: list[int],
    tol: float,
    trials: int,
) -> int:
    b = manifest.beta.values()[0]
    g = manifest.gamma.values()[0]
    h = manifest.h.values()[0]
    seeds = list(range(1, manifest.seeds + 1))
    eff = ModelSpec(
        distribution=spec.distribution,
        longitudinal=scale_longitudinal(spec.longitudinal, h),
        transversal=scale_law(spec.transversal, g),
    )
    rows: list[dict] = []
    ok = True

    if campaign == "edTrend":
        header = ["n", "seed", "phi_n", "limit", "abs_err", "kind"]
        limit = evaluate_pressure_point(spec, b, g, h).phi
        prev_err = math.inf
        for n in sizes:
            errs = []
            for seed in seeds:
                real = verify.sample_realization(eff, n, seed)
                phi_n = verify.quantum_pressure_ed(real, b).phi
                errs.append(abs(phi_n - limit))
                rows.append(
                    {"n": n, "seed": seed, "phi_n": phi_n, "limit": limit,
                     "abs_err": errs[-1], "kind": "sample"}
                )
            mean_err = float(np.mean(errs))
            rows.append(
                {"n": n, "seed": "mean", "phi_n": float("nan"), "limit": limit,
                 "abs_err": mean_err, "kind": "summary"}
            )
            if mean_err > prev_err + 1e-12:
                ok = False
            prev_err = mean_err
        if prev_err > tol:
            ok = False
    elif campaign == "classicalTrend":
        header = ["n", "seed", "phi_n", "limit", "abs_err", "kind"]
        if isinstance(eff.longitudinal, IidField):
            limit = pressure_mod.pressure_grem_classical(
                eff.distribution, eff.longitudinal.law, b
            )
        else:
            limit = pressure_mod.pressure_hier(
                ModelSpec(eff.distribution, eff.longitudinal, PointMass(0.0)), b
            ).phi
        for n in sizes:
            errs = []
            for seed in seeds:
                real = verify.sample_realization(eff, n, seed)
                phi_n = verify.classical_pressure_exact(real, b)
                errs.append(abs(phi_n - limit))
                rows.append(
                    {"n": n, "seed": seed, "phi_n": phi_n, "limit": limit,
                     "abs_err": errs[-1], "kind": "sample"}
                )
            rows.append(
                {"n": n, "seed": "mean", "phi_n": float("nan"), "limit": limit,
                 "abs_err": float(np.mean(errs)), "kind": "summary"}
            )
        if float(np.mean(errs)) > tol:
            ok = False
    elif campaign == "oracleEquiv":
        header = ["trial", "levels", "beta", "law", "oracle", "formula", "abs_diff"]
        rng = np.random.default_rng(2024)
        worst = 0.0
        for trial in range(trials):
            n = int(rng.integers(1, 4))
            pts = tuple(sorted(rng.uniform(0.15, 0.85, size=n - 1))) + (1.0,)
            inc = rng.uniform(0.1, 1.0, size=n)
            inc = tuple(inc / inc.sum())
            law = (
                PointMass(float(rng.uniform(0.0, 1.5)))
                if trial % 2 == 0
                else SymmetricTwoPoint(float(rng.uniform(0.0, 1.5)))
            )
            beta_t = float(rng.choice([0.7, 1.3, 2.5]))
            a = Step(pts, inc)
            vo = verify.variational_oracle(a, law, beta_t)
            pc = pressure_mod.pressure_grem_classical(a, law, beta_t)
            diff = abs(vo - pc)
            worst = max(worst, diff)
            rows.append(
                {"trial": trial, "levels": n, "beta": beta_t,
                 "law": type(law).__name__, "oracle": vo, "formula": pc,
                 "abs_diff": diff}
            )
        rows.append(
            {"trial": "max", "levels": "", "beta": "", "law": "",
             "oracle": "", "formula": "", "abs_diff": worst}
        )
        ok = worst < tol
    elif campaign == "occupation":
        header = ["case", "n", "seed", "empirical", "analytic", "feasible", "count_zero"]
        feas_pt = verify.LDPoint((0.15,) * 1, (0.08,))
        infeas_pt = verify.LDPoint((1.1,), (0.8,))
        if len(eff.distribution.points) != 1:
            raise UnsupportedModelError("occupation campaign runs on single-level profiles")
        n_feas = sizes[0] if sizes else 24
        n_infeas = 20
        emps = []
        analytic = None
        for seed in seeds:
            real = verify.sample_realization(eff, n_feas, seed)
            emp, ana, feas = verify.occupation_entropy_check(real, feas_pt)
            analytic = ana
            emps.append(emp if emp is not None else math.nan)
            rows.append(
                {"case": "feasible", "n": n_feas, "seed": seed, "empirical": emp,
                 "analytic": ana, "feasible": feas, "count_zero": emp is None}
            )
        if any(math.isnan(e) for e in emps) or abs(float(np.mean(emps)) - analytic) > tol:
            ok = False
        for seed in seeds:
            real = verify.sample_realization(eff, n_infeas, seed)
            emp, ana, feas = verify.occupation_entropy_check(real, infeas_pt)
            rows.append(
                {"case": "infeasible", "n": n_infeas, "seed": seed, "empirical": emp,
                 "analytic": ana, "feasible": feas, "count_zero": emp is None}
            )
            if emp is not None or feas:
                ok = False
    else:
        raise ValueError(f"unknown campaign {campaign!r}")

    rows.append({header[0]: "pass" if ok else "fail"})
    write_rows(rows, header, manifest.out, manifest.fmt)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gremphase",
        description="Quantum REM/GREM pressure, critical lines, and finite-N checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("pressure", "critical", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--spec", required=True, help="model file (JSON)")
        p.add_argument("--beta", default="1", help="axis 'value' or 'lo:hi:count'")
        p.add_argument("--gamma", default="0", help="axis 'value' or 'lo:hi:count'")
        p.add_argument("--h", default="0", help="axis 'value' or 'lo:hi:count'")
        p.add_argument(
            "--log",
            default="",
            help="comma-separated axes with log spacing (beta,gamma,h)",
        )
        p.add_argument("--seeds", type=int, default=3, help="number of seeds (1..k)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    sub.choices["critical"].add_argument(
        "--line",
        required=True,
        choices=("atLine", "gammaRem", "gammaHier", "gammaSecondary"),
    )
    sub.choices["critical"].add_argument(
        "--fit", action="store_true", help="append an exponent-fit footer row"
    )
    sub.choices["verify"].add_argument(
        "--campaign",
        required=True,
        choices=("edTrend", "classicalTrend", "oracleEquiv", "occupation"),
    )
    sub.choices["verify"].add_argument(
        "--sizes", default="", help="comma-separated system sizes"
    )
    sub.choices["verify"].add_argument(
        "--tol", type=float, default=None,
        help="pass/fail tolerance (default 0.1, oracleEquiv 1e-6)",
    )
    sub.choices["verify"].add_argument("--trials", type=int, default=20)
    return parser


_DEFAULT_SIZES = {
    "edTrend": "6,8,10,12",
    "classicalTrend": "12,16,20",
    "oracleEquiv": "",
    "occupation": "24",
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        log_axes = {a.strip() for a in args.log.split(",") if a.strip()}
        manifest = RunManifest(
            command=args.command,
            spec_path=args.spec,
            beta=parse_axis(args.beta, "beta" in log_axes),
            gamma=parse_axis(args.gamma, "gamma" in log_axes),
            h=parse_axis(args.h, "h" in log_axes),
            seeds=args.seeds,
            out=args.out,
            fmt=args.fmt,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC

    try:
        spec = load_spec(manifest.spec_path)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read model file: {exc}", file=sys.stderr)
        return EXIT_SPEC
    violations = validate(spec)
    if violations:
        for v in violations:
            print(f"invalid model: {v}", file=sys.stderr)
        return EXIT_SPEC

    try:
        if args.command == "pressure":
            return cmd_pressure(manifest, spec)
        if args.command == "critical":
            return cmd_critical(manifest, spec, args.line, args.fit)
        sizes = _parse_sizes(args.sizes or _DEFAULT_SIZES[args.campaign])
        if args.tol is not None:
            tol = args.tol
        else:
            tol = {"oracleEquiv": 1e-6}.get(args.campaign, 0.1)
        return cmd_verify(manifest, spec, args.campaign, sizes, tol, args.trials)
    except UnsupportedModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (SizeGuardError, BudgetExceededError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
