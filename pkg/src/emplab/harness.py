"""Batch experiment runner: config, seeded parallel trials, artifacts.

Five experiments (``widths``, ``multiplier``, ``recovery``, ``gelfand``,
``moments``) share one execution model: a config defines a grid of cells;
each (cell, trial) is a pure function of (config, master_seed, cell index,
trial index); per-trial records are aggregated into CSV rows in a fixed
order.  Reruns with the same config and seed produce byte-identical CSVs
at any worker count, because seeds derive from indices and rows are merged
in deterministic key order.

Artifacts per run: ``<experiment>.csv`` (canonical formatting: fixed
column order, repr floats, '.' decimal, '\\n' newlines), ``summary.json``
(derived, deterministic) and ``manifest.json`` (config hash, version,
timestamps, per-file checksums, seed ledger).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from itertools import product
from pathlib import Path

import numpy as np

from ._version import __version__
from .distributions import (
    ConfigurationError,
    DistributionSpec,
    NoiseSpec,
    moment_growth_profile,
    sample_batch,
)
from .gelfand import kernel_section_diameter, r_G_fixed_point, r_X_fixed_point
from .geometry import IndexSetSpec, gaussian_mean_width, index_set_from_dict
from .process import multiplier_stats
from .recovery import (
    DEFAULT_LASSO_C1,
    basis_pursuit,
    rate_penalty,
    lasso,
    make_recovery_problem,
    recovery_success,
)
from .streams import child_path

EXPERIMENTS = ("widths", "multiplier", "recovery", "gelfand", "moments")


class IntegrityError(RuntimeError):
    """A result file does not match its recorded checksum."""


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class ExperimentConfig:
    """One batch run: experiment name, parameter grids, trials, seed, output."""

    experiment: str
    grids: dict
    trials: int
    master_seed: int
    output_dir: str
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(
                f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}"
            )
        if self.trials < 0:
            raise ConfigurationError("trials must be >= 0")
        if not (0 <= self.master_seed < 2**64):
            raise ConfigurationError("master_seed must fit in 64 bits")

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "grids": self.grids,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "output_dir": self.output_dir,
            "tolerances": self.tolerances,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            return cls(
                experiment=d["experiment"],
                grids=dict(d.get("grids", {})),
                trials=int(d["trials"]),
                master_seed=int(d["master_seed"]),
                output_dir=str(d.get("output_dir", "results")),
                tolerances=dict(d.get("tolerances", {})),
            )
        except KeyError as exc:
            raise ConfigurationError(f"config missing required key: {exc.args[0]}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical (sorted-keys) JSON form, key-order invariant.

    The output directory is excluded: two runs of the same experiment to
    different locations are the same content.
    """
    d = config.to_dict()
    d.pop("output_dir")
    canon = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _grid_value(config: ExperimentConfig, key, default=None):
    return config.grids.get(key, default)


# ---------------------------------------------------------------------------
# experiment adapters
#
# Each adapter provides:
#   cells(config)                      -> list of cell dicts
#   trial(config, cell, ci, ti)       -> per-trial record dict
#   rows(config, cell, ci, records)    -> list of CSV row dicts
#   columns                            -> CSV header
#   row_key_is_cell                    -> rows are per cell (vs per trial)

def _x_spec(family: str, n: int, nu) -> DistributionSpec:
    if family == "student_t" and nu is None:
        nu = 2.0 * math.log(n)
    if family == "symmetric_pareto" and nu is None:
        nu = 4.0
    if family == "symmetric_weibull" and nu is None:
        nu = 1.0
    return DistributionSpec(family, n, tail_param=nu)


class _WidthsAdapter:
    columns = ["cell", "trial", "family", "n", "r", "mean", "stderr", "draws", "d2", "D"]
    row_key_is_cell = False

    @staticmethod
    def cells(config):
        sets = _grid_value(config, "sets")
        if not sets:
            raise ConfigurationError("widths experiment needs grids.sets")
        radii = _grid_value(config, "radii", [None])
        return [{"set": s, "radius": r} for s, r in product(sets, radii)]

    @staticmethod
    def trial(config, cell, ci, ti):
        spec = index_set_from_dict(cell["set"])
        draws = int(_grid_value(config, "draws", 10000))
        est = gaussian_mean_width(
            spec,
            draws,
            localized_radius=cell["radius"],
            seed_path=child_path(config.master_seed, ci, ti),
        )
        return {
            "family": spec.label(),
            "n": spec.dim,
            "r": cell["radius"] if cell["radius"] is not None else "",
            "mean": est.mean,
            "stderr": est.std_error,
            "draws": est.draws,
            "d2": est.d2,
            "D": est.complexity_ratio,
        }

    @staticmethod
    def rows(config, cell, ci, records):
        return [dict(cell=ci, trial=ti, **rec) for ti, rec in records]


class _MultiplierAdapter:
    columns = [
        "cell", "trial", "n", "N", "x_family", "noise_family", "u_grid",
        "A_u", "sup_centred", "sup_symmetrized", "C_hat", "ratio",
    ]
    row_key_is_cell = False

    @staticmethod
    def cells(config):
        g = config.grids
        for key in ("n", "N", "x_family", "noise_family"):
            if key not in g:
                raise ConfigurationError(f"multiplier experiment needs grids.{key}")
        return [
            {"n": int(n), "N": int(N), "x_family": xf, "noise_family": nf}
            for n, N, xf, nf in product(g["n"], g["N"], g["x_family"], g["noise_family"])
        ]

    @staticmethod
    def _set_spec(config, n) -> IndexSetSpec:
        d = dict(_grid_value(config, "set", {"family": "l1_ball", "rho": 1.0}))
        d["dim"] = n
        return index_set_from_dict(d)

    @staticmethod
    def trial(config, cell, ci, ti):
        spec = _MultiplierAdapter._set_spec(config, cell["n"])
        dist = _x_spec(cell["x_family"], cell["n"], _grid_value(config, "nu"))
        noise = NoiseSpec(cell["noise_family"], q0=float(_grid_value(config, "q0", 3.0)))
        u_grid = [float(u) for u in _grid_value(config, "u_grid", [2.0, 4.0, 8.0])]
        batch = sample_batch(dist, noise, cell["N"], child_path(config.master_seed, ci, ti))
        stats = multiplier_stats(batch, spec, noise, u_grid=u_grid)
        return {
            "n": cell["n"],
            "N": cell["N"],
            "x_family": cell["x_family"],
            "noise_family": cell["noise_family"],
            "u_grid": "|".join(f"{u:g}" for u in u_grid),
            "A_u": "|".join(str(int(stats.A_u_holds[u])) for u in u_grid),
            "sup_centred": stats.sup_centred,
            "sup_symmetrized": stats.sup_symmetrized,
            "C_hat": stats.envelope_constant,
            "lq_norm": noise.lq_norm,
        }

    @staticmethod
    def rows(config, cell, ci, records):
        spec = _MultiplierAdapter._set_spec(config, cell["n"])
        width = gaussian_mean_width(
            spec,
            int(_grid_value(config, "width_draws", 20000)),
            seed_path=child_path(config.master_seed, ci, 1_000_000),
        )
        rows = []
        for ti, rec in records:
            rec = dict(rec)
            lq = rec.pop("lq_norm")
            denom = lq * width.mean
            rec["ratio"] = rec["sup_centred"] / denom if denom > 0 else math.nan
            rows.append(dict(cell=ci, trial=ti, **rec))
        return rows


class _RecoveryAdapter:
    columns = [
        "cell", "n", "s", "N", "family", "nu", "q0", "lambda",
        "success_rate", "err_l1_med", "err_l2_med", "trials",
        "bp_unconverged", "lasso_unconverged",
    ]
    row_key_is_cell = True

    @staticmethod
    def cells(config):
        g = config.grids
        for key in ("n", "s", "N", "x_family"):
            if key not in g:
                raise ConfigurationError(f"recovery experiment needs grids.{key}")
        return [
            {"n": int(n), "s": int(s), "N": int(N), "x_family": xf}
            for n, s, N, xf in product(g["n"], g["s"], g["N"], g["x_family"])
        ]

    @staticmethod
    def trial(config, cell, ci, ti):
        dist = _x_spec(cell["x_family"], cell["n"], _grid_value(config, "nu"))
        noise_family = _grid_value(config, "noise_family", "symmetric_pareto")
        q0 = float(_grid_value(config, "q0", 3.0))
        noise = NoiseSpec(noise_family, q0=q0) if noise_family != "none" else None
        c1 = float(_grid_value(config, "c1", DEFAULT_LASSO_C1))
        lam = rate_penalty(noise, cell["N"], cell["n"], c1) if noise else 0.0
        path = child_path(config.master_seed, ci, ti)

        clean = make_recovery_problem(dist, cell["N"], cell["s"], path)
        bp = basis_pursuit(clean, tol=float(_grid_value(config, "bp_tol", 1e-8)))
        if noise is not None:
            noisy = make_recovery_problem(dist, cell["N"], cell["s"], path, noise=noise, lam=lam)
        else:
            noisy = clean
            noisy.lam = lam
        la = lasso(noisy, tol=float(_grid_value(config, "lasso_tol", 1e-8)))
        return {
            "nu": dist.tail_param if dist.tail_param is not None else "",
            "q0": q0 if noise is not None else "",
            "lambda": lam,
            "bp_success": int(recovery_success(bp, clean.v0)),
            "bp_unconverged": int(not bp.converged),
            "lasso_unconverged": int(not la.converged),
            "err_l1": la.errors_lp[1.0],
            "err_l2": la.errors_lp[2.0],
        }

    @staticmethod
    def rows(config, cell, ci, records):
        recs = [rec for _, rec in records]
        if not recs:
            return []
        return [{
            "cell": ci,
            "n": cell["n"],
            "s": cell["s"],
            "N": cell["N"],
            "family": cell["x_family"],
            "nu": recs[0]["nu"],
            "q0": recs[0]["q0"],
            "lambda": recs[0]["lambda"],
            "success_rate": sum(r["bp_success"] for r in recs) / len(recs),
            "err_l1_med": float(np.median([r["err_l1"] for r in recs])),
            "err_l2_med": float(np.median([r["err_l2"] for r in recs])),
            "trials": len(recs),
            "bp_unconverged": sum(r["bp_unconverged"] for r in recs),
            "lasso_unconverged": sum(r["lasso_unconverged"] for r in recs),
        }]


class _GelfandAdapter:
    columns = [
        "cell", "trial", "n", "m", "family", "x_family",
        "r_G", "r_G_confident", "r_X", "r_X_confident", "diam_lb",
    ]
    row_key_is_cell = False

    @staticmethod
    def cells(config):
        g = config.grids
        for key in ("sets", "m", "x_family"):
            if key not in g:
                raise ConfigurationError(f"gelfand experiment needs grids.{key}")
        return [
            {"set": s, "m": int(m), "x_family": xf}
            for s, m, xf in product(g["sets"], g["m"], g["x_family"])
        ]

    @staticmethod
    def trial(config, cell, ci, ti):
        spec = index_set_from_dict(cell["set"])
        dist = _x_spec(cell["x_family"], spec.dim, _grid_value(config, "nu"))
        probes = int(_grid_value(config, "probes", 200))
        res = kernel_section_diameter(
            dist, spec, cell["m"], probes, child_path(config.master_seed, ci, ti)
        )
        return {"diam_lb": res.lower_bound, "kernel_dim": res.kernel_dim}

    @staticmethod
    def rows(config, cell, ci, records):
        if not records:
            return []
        spec = index_set_from_dict(cell["set"])
        dist = _x_spec(cell["x_family"], spec.dim, _grid_value(config, "nu"))
        gamma = float(_grid_value(config, "gamma", 1.0))
        draws = int(_grid_value(config, "width_draws", 2000))
        tol = float(_grid_value(config, "fp_tol", 1e-2))
        path = child_path(config.master_seed, ci, 1_000_000)
        rg = r_G_fixed_point(spec, gamma, cell["m"], tol, draws, child_path(path, 0))
        rx = r_X_fixed_point(dist, spec, gamma, cell["m"], tol, draws, child_path(path, 1))
        rows = []
        for ti, rec in records:
            rows.append({
                "cell": ci,
                "trial": ti,
                "n": spec.dim,
                "m": cell["m"],
                "family": spec.label(),
                "x_family": cell["x_family"],
                "r_G": rg.r_star,
                "r_G_confident": int(rg.confident),
                "r_X": rx.r_star,
                "r_X_confident": int(rx.confident),
                "diam_lb": rec["diam_lb"],
            })
        return rows


class _MomentsAdapter:
    columns = ["cell", "trial", "family", "tail_param", "n_samples", "q", "ratio"]
    row_key_is_cell = False

    @staticmethod
    def cells(config):
        laws = _grid_value(config, "laws")
        if not laws:
            raise ConfigurationError("moments experiment needs grids.laws")
        return [dict(law) for law in laws]

    @staticmethod
    def trial(config, cell, ci, ti):
        dist = DistributionSpec(cell["family"], 1, tail_param=cell.get("tail_param"))
        p = int(_grid_value(config, "p", 20))
        n_samples = int(_grid_value(config, "n_samples", 100000))
        profile = moment_growth_profile(
            dist, p, n_samples, child_path(config.master_seed, ci, ti)
        )
        return {"profile": profile, "n_samples": n_samples}

    @staticmethod
    def rows(config, cell, ci, records):
        rows = []
        for ti, rec in records:
            for q, ratio in rec["profile"]:
                rows.append({
                    "cell": ci,
                    "trial": ti,
                    "family": cell["family"],
                    "tail_param": cell.get("tail_param", ""),
                    "n_samples": rec["n_samples"],
                    "q": q,
                    "ratio": ratio,
                })
        return rows


_ADAPTERS = {
    "widths": _WidthsAdapter,
    "multiplier": _MultiplierAdapter,
    "recovery": _RecoveryAdapter,
    "gelfand": _GelfandAdapter,
    "moments": _MomentsAdapter,
}


# ---------------------------------------------------------------------------
# execution

@dataclass
class ExperimentManifest:
    config_hash: str
    experiment: str
    version: str
    started: str
    finished: str
    checksums: dict
    seed_ledger: dict
    failed: list
    rows: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _run_task(config: ExperimentConfig, cell, ci: int, ti: int):
    adapter = _ADAPTERS[config.experiment]
    return ci, ti, adapter.trial(config, cell, ci, ti)


def _format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        return repr(f)
    return str(v)


def _write_csv(path: Path, columns, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_value(row.get(c, "")) for c in columns])


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run(config: ExperimentConfig, workers: int = 1) -> ExperimentManifest:
    """Execute all grid cells x trials and write CSV + summary + manifest."""
    adapter = _ADAPTERS[config.experiment]
    cells = adapter.cells(config)
    started = _utc_now()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = [(ci, ti) for ci in range(len(cells)) for ti in range(config.trials)]
    results: dict[tuple[int, int], dict] = {}
    failed: list[dict] = []

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_run_task, config, cells[ci], ci, ti): (ci, ti)
                for ci, ti in tasks
            }
            for fut, key in futures.items():
                try:
                    ci, ti, rec = fut.result()
                    results[(ci, ti)] = rec
                except Exception as exc:  # noqa: BLE001 - recorded, not fatal
                    failed.append({"cell": key[0], "trial": key[1], "error": repr(exc)})
    else:
        for ci, ti in tasks:
            try:
                _, _, rec = _run_task(config, cells[ci], ci, ti)
                results[(ci, ti)] = rec
            except Exception as exc:  # noqa: BLE001
                failed.append({"cell": ci, "trial": ti, "error": repr(exc)})

    failed_cells = {f["cell"] for f in failed}
    rows: list[dict] = []
    seed_ledger: dict[str, list[int]] = {}
    for ci, cell in enumerate(cells):
        if ci in failed_cells:
            continue
        records = sorted(
            ((ti, rec) for (c, ti), rec in results.items() if c == ci),
            key=lambda item: item[0],
        )
        if config.trials > 0 and not records:
            continue
        cell_rows = adapter.rows(config, cell, ci, records)
        rows.extend(cell_rows)
        if adapter.row_key_is_cell:
            if cell_rows:
                seed_ledger[f"cell{ci}"] = [config.master_seed, ci]
        else:
            for ti, _ in records:
                seed_ledger[f"cell{ci}/trial{ti}"] = [config.master_seed, ci, ti]

    csv_path = out_dir / f"{config.experiment}.csv"
    _write_csv(csv_path, adapter.columns, rows)

    summary = {
        "experiment": config.experiment,
        "config_hash": config_hash(config),
        "cells": len(cells),
        "trials": config.trials,
        "rows": len(rows),
        "columns": adapter.columns,
    }
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, sort_keys=True, indent=1) + "\n")

    manifest = ExperimentManifest(
        config_hash=config_hash(config),
        experiment=config.experiment,
        version=__version__,
        started=started,
        finished=_utc_now(),
        checksums={
            csv_path.name: _sha256_file(csv_path),
            summary_path.name: _sha256_file(summary_path),
        },
        seed_ledger=seed_ledger,
        failed=failed,
        rows=len(rows),
    )
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest.to_dict(), sort_keys=True, indent=1) + "\n"
    )
    return manifest


# ---------------------------------------------------------------------------
# summaries

def loglog_slope(xs, ys) -> tuple[float, float, float]:
    """OLS slope of log(y) on log(x): (slope, intercept, stderr of slope)."""
    lx = np.log(np.asarray(xs, dtype=np.float64))
    ly = np.log(np.asarray(ys, dtype=np.float64))
    if lx.size < 2:
        raise ValueError("need at least two points")
    mx, my = lx.mean(), ly.mean()
    sxx = float(((lx - mx) ** 2).sum())
    slope = float(((lx - mx) * (ly - my)).sum() / sxx)
    intercept = float(my - slope * mx)
    dof = lx.size - 2
    if dof > 0:
        resid = ly - (intercept + slope * lx)
        se = math.sqrt(float((resid**2).sum()) / dof / sxx)
    else:
        se = math.nan
    return slope, intercept, se


def _read_rows(csv_path: Path) -> list[dict]:
    with csv_path.open(newline="", encoding="utf-8") as fh:
        rows = []
        for raw in csv.DictReader(fh):
            row = {}
            for k, v in raw.items():
                try:
                    row[k] = int(v)
                except (TypeError, ValueError):
                    try:
                        row[k] = float(v)
                    except (TypeError, ValueError):
                        row[k] = v
            rows.append(row)
    return rows


@dataclass
class SummaryReport:
    experiment: str
    aggregates: list
    criteria: list

    def format_lines(self) -> list[str]:
        lines = [f"experiment: {self.experiment}"]
        for agg in self.aggregates:
            desc = ", ".join(f"{k}={v}" for k, v in agg.items())
            lines.append("  " + desc)
        lines.append("criteria:")
        for crit in self.criteria:
            lines.append(f"  [{crit['status']:>17}] {crit['name']}: {crit['detail']}")
        return lines


def _aggregate(rows: list[dict], group_cols: list[str], value_cols: list[str]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = tuple(row.get(c) for c in group_cols)
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups, key=repr):
        rows_g = groups[key]
        agg = dict(zip(group_cols, key))
        agg["count"] = len(rows_g)
        for col in value_cols:
            vals = np.array(
                [r[col] for r in rows_g if isinstance(r.get(col), (int, float))],
                dtype=np.float64,
            )
            if vals.size == 0 or not np.all(np.isfinite(vals)):
                continue
            agg[f"{col}_mean"] = float(vals.mean())
            agg[f"{col}_median"] = float(np.median(vals))
            if vals.size > 1:
                agg[f"{col}_stderr"] = float(vals.std(ddof=1) / math.sqrt(vals.size))
        out.append(agg)
    return out


def _recovery_criteria(rows: list[dict]) -> list[dict]:
    crits = []
    # rate: slope of log median l2 error vs log N, per (n, s, family)
    series: dict[tuple, list[tuple[float, float]]] = {}
    for r in rows:
        key = (r["n"], r["s"], r["family"])
        if isinstance(r.get("err_l2_med"), (int, float)) and r["err_l2_med"] > 0:
            series.setdefault(key, []).append((r["N"], r["err_l2_med"]))
    rated = False
    for key, pts in series.items():
        if len(pts) < 3:
            continue
        rated = True
        pts.sort()
        slope, _, se = loglog_slope([p[0] for p in pts], [p[1] for p in pts])
        ok = abs(slope + 0.5) <= 0.15
        crits.append({
            "name": f"lasso_error_rate n={key[0]} s={key[1]} {key[2]}",
            "status": "pass" if ok else "fail",
            "detail": f"log-log slope {slope:.3f} (se {se:.3f}), target -0.5 +/- 0.15",
        })
    if not rated:
        crits.append({
            "name": "lasso_error_rate",
            "status": "insufficient-data",
            "detail": "need >= 3 N values for a fixed (n, s, family)",
        })
    # monotone success in N
    mono_checked = False
    by_ns: dict[tuple, list[dict]] = {}
    for r in rows:
        by_ns.setdefault((r["n"], r["s"], r["family"]), []).append(r)
    for key, rs in by_ns.items():
        if len(rs) < 2:
            continue
        mono_checked = True
        rs.sort(key=lambda r: r["N"])
        ok = True
        for a, b in zip(rs, rs[1:]):
            pa, pb = a["success_rate"], b["success_rate"]
            ta, tb = a["trials"], b["trials"]
            se = math.sqrt(pa * (1 - pa) / max(ta, 1) + pb * (1 - pb) / max(tb, 1))
            if pb < pa - 3.0 * se - 1e-12:
                ok = False
        crits.append({
            "name": f"bp_success_monotone n={key[0]} s={key[1]} {key[2]}",
            "status": "pass" if ok else "fail",
            "detail": "success rate nondecreasing in N within 3 se",
        })
    if not mono_checked:
        crits.append({
            "name": "bp_success_monotone",
            "status": "insufficient-data",
            "detail": "need >= 2 N values for a fixed (n, s, family)",
        })
    return crits


def _multiplier_criteria(rows: list[dict]) -> list[dict]:
    crits = []
    by_n: dict[int, list[float]] = {}
    for r in rows:
        if isinstance(r.get("ratio"), (int, float)) and math.isfinite(r["ratio"]):
            by_n.setdefault(r["n"], []).append(r["ratio"])
    if len(by_n) >= 2:
        lo_n, hi_n = min(by_n), max(by_n)
        lo, hi = np.mean(by_n[lo_n]), np.mean(by_n[hi_n])
        ok = hi <= 1.5 * lo and hi <= 10.0
        crits.append({
            "name": f"ratio_two_scale n={lo_n}->{hi_n}",
            "status": "pass" if ok else "fail",
            "detail": f"mean ratio {lo:.3f} -> {hi:.3f}; bound 1.5x and <= 10",
        })
    else:
        crits.append({
            "name": "ratio_two_scale",
            "status": "insufficient-data",
            "detail": "need >= 2 distinct n",
        })
    return crits


def _gelfand_criteria(rows: list[dict]) -> list[dict]:
    crits = []
    by_cell: dict[int, list[dict]] = {}
    for r in rows:
        by_cell.setdefault(r["cell"], []).append(r)
    for ci, rs in sorted(by_cell.items()):
        if len(rs) < 20:
            crits.append({
                "name": f"kernel_diameter_bound cell{ci}",
                "status": "insufficient-data",
                "detail": f"{len(rs)} draws (< 20)",
            })
            continue
        exceed = sum(r["diam_lb"] > 2.0 * r["r_G"] for r in rs) / len(rs)
        crits.append({
            "name": f"kernel_diameter_bound cell{ci}",
            "status": "pass" if exceed <= 0.05 else "fail",
            "detail": f"fraction above 2*r_G = {exceed:.3f} (allowed 0.05)",
        })
    return crits


def _moments_criteria(rows: list[dict]) -> list[dict]:
    crits = []
    q2 = [r["ratio"] for r in rows if r.get("q") == 2]
    if q2:
        worst = max(abs(v * math.sqrt(2.0) - 1.0) for v in q2)
        crits.append({
            "name": "unit_variance_normalization",
            "status": "pass" if worst <= 0.05 else "fail",
            "detail": f"max |sqrt(2)*ratio(q=2) - 1| = {worst:.4f} (allowed 0.05)",
        })
    else:
        crits.append({
            "name": "unit_variance_normalization",
            "status": "insufficient-data",
            "detail": "no q=2 rows",
        })
    return crits


def _widths_criteria(rows: list[dict]) -> list[dict]:
    crits = []
    # phi(r) = mean/r nonincreasing in r for a fixed set, within 3 se bands
    by_set: dict[str, list[dict]] = {}
    for r in rows:
        if isinstance(r.get("r"), (int, float)):
            by_set.setdefault(r["family"], []).append(r)
    checked = False
    for fam, rs in by_set.items():
        radii = sorted({r["r"] for r in rs})
        if len(radii) < 2:
            continue
        checked = True
        ok = True
        stats = []
        for rad in radii:
            vals = np.array([r["mean"] for r in rs if r["r"] == rad])
            ses = np.array([r["stderr"] for r in rs if r["r"] == rad])
            se = float(np.sqrt((ses**2).sum()) / len(ses))
            stats.append((rad, float(vals.mean()) / rad, se / rad))
        for (r1, p1, s1), (r2, p2, s2) in zip(stats, stats[1:]):
            if p2 > p1 + 3.0 * (s1 + s2) + 1e-12:
                ok = False
        crits.append({
            "name": f"localized_width_ratio_monotone {fam}",
            "status": "pass" if ok else "fail",
            "detail": "mean/r nonincreasing in r within 3 se",
        })
    if not checked:
        crits.append({
            "name": "localized_width_ratio_monotone",
            "status": "insufficient-data",
            "detail": "need >= 2 radii for one set",
        })
    return crits


_CRITERIA = {
    "recovery": _recovery_criteria,
    "multiplier": _multiplier_criteria,
    "gelfand": _gelfand_criteria,
    "moments": _moments_criteria,
    "widths": _widths_criteria,
}

_AGG_COLUMNS = {
    "widths": (["family", "n", "r"], ["mean", "stderr", "D"]),
    "multiplier": (["n", "N", "x_family", "noise_family"],
                   ["sup_centred", "sup_symmetrized", "C_hat", "ratio"]),
    "recovery": (["n", "s", "N", "family"], ["success_rate", "err_l1_med", "err_l2_med"]),
    "gelfand": (["n", "m", "family", "x_family"], ["r_G", "r_X", "diam_lb"]),
    "moments": (["family", "q"], ["ratio"]),
}


def summarize(results_dir: str | Path) -> SummaryReport:
    """Verify checksums, aggregate per cell, and evaluate data-level criteria."""
    out_dir = Path(results_dir)
    manifest_path = out_dir / "manifest.json"
    if not manifest_path.exists():
        raise ConfigurationError(f"no manifest.json in {out_dir}")
    manifest = json.loads(manifest_path.read_text())
    for name, digest in manifest["checksums"].items():
        path = out_dir / name
        if not path.exists():
            raise IntegrityError(f"missing result file {name}")
        if _sha256_file(path) != digest:
            raise IntegrityError(f"checksum mismatch for {name}")

    experiment = manifest["experiment"]
    rows = _read_rows(out_dir / f"{experiment}.csv")
    group_cols, value_cols = _AGG_COLUMNS[experiment]
    aggregates = _aggregate(rows, group_cols, value_cols)
    criteria = _CRITERIA[experiment](rows) if rows else [{
        "name": "any",
        "status": "insufficient-data",
        "detail": "no rows",
    }]
    return SummaryReport(experiment=experiment, aggregates=aggregates, criteria=criteria)
