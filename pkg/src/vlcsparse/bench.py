"""Benchmark sweeps, baselines and the versioned CSV report schema.

The capped solver is compared against the plain l1 relaxation (the p = 1.0
column of the experimental tables) and against an iteratively reweighted
l1 approximation of Lp minimization for 0 < p < 1 (the original tables used
an external active-set NLP solver for Lp; rows produced by the reweighted
scheme are labeled ``irl1`` and must be read as an approximate Lp baseline).

CSV schema (version 1): a ``# schema_version=1`` comment line, then

    instance_id,method,param,nnz_true,zeros_recovered,matched_zeros,res,
    phi_value,outer_iters,wall_ms,stationarity_class

one data row per (instance seed x method x param) and trailing per-method
summary rows (instance_id ``mean_all`` / ``mean_conv``).  Everything except
wall_ms is deterministic given the configuration and seeds.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .alm import AlmConfig
from .core import VlcsProblem, count_zeros, read_problem, read_truth, zero_pattern
from .errors import ParameterError, VlcsparseError
from .generators import MarketSpec, RandomVlcsSpec, gen_market_vlcs, gen_random_vlcs
from .outer import OuterConfig, SolveReport, solve_sparse
from .stationarity import class_label

CSV_HEADER = [
    "instance_id", "method", "param", "nnz_true", "zeros_recovered",
    "matched_zeros", "res", "phi_value", "outer_iters", "wall_ms",
    "stationarity_class",
]
SCHEMA_LINE = "# schema_version=1"
NU_GRID_DEFAULT = (0.0004, 0.004, 0.04, 0.1)
P_GRID_DEFAULT = (0.1, 0.3, 0.5, 1.0)


def baseline_l1(p: VlcsProblem, cfg: OuterConfig, alm_cfg: AlmConfig = None,
                x_true=None, opts=None) -> SolveReport:
    """Minimize ||x||_1 over the relaxed sets with the capped schedules.

    Convex at every stage: the concave part of the DC split is disabled, so
    each sigma stage is a plain l1 program handled by the same machinery.
    """
    rep = solve_sparse(p, cfg, alm_cfg, x_true=x_true, mode="l1",
                       method_label="l1", opts=opts)
    rep.param = 1.0
    return rep


def baseline_irl1(p_exp: float, p: VlcsProblem, cfg: OuterConfig,
                  alm_cfg: AlmConfig = None, x_true=None, opts=None,
                  eps_w: float = 1e-6, max_reweights: int = 8) -> SolveReport:
    """Approximate Lp baseline via iteratively reweighted l1 (0 < p_exp < 1).

    Each pass solves the full sigma-relaxation pipeline with weights
    w_i = p_exp (|x_i| + eps_w)^(p_exp - 1) from the previous solution and
    stops when the zero pattern (at the report threshold) stabilizes.
    p_exp = 1 is redirected to the exact l1 baseline.
    """
    if p_exp == 1.0:
        return baseline_l1(p, cfg, alm_cfg, x_true=x_true, opts=opts)
    if not (0 < p_exp < 1):
        raise ParameterError(f"p_exp must lie in (0, 1], got {p_exp}")
    w = np.ones(p.n)
    rep = None
    pattern = None
    total_inner = 0
    wall = 0.0
    passes = 0
    for _ in range(max_reweights):
        rep = solve_sparse(p, cfg, alm_cfg, x_true=x_true, mode="weighted",
                           weights=w, method_label="irl1", opts=opts)
        total_inner += rep.total_inner_iters
        wall += rep.wall_time
        passes += 1
        new_pattern = zero_pattern(rep.x_star, cfg.zero_tol)
        if pattern is not None and np.array_equal(new_pattern, pattern):
            break
        pattern = new_pattern
        w = p_exp * (np.abs(rep.x_star) + eps_w) ** (p_exp - 1.0)
    rep.param = p_exp
    rep.total_inner_iters = total_inner
    rep.wall_time = wall
    rep.trace.append({"irl1_passes": passes})
    return rep


@dataclass(frozen=True)
class BenchConfig:
    """One benchmark sweep: instance family x seeds x methods x parameters."""

    instance: dict                       # {"kind": "random"|"market"|"file", ...}
    seeds: tuple
    nu_list: tuple = NU_GRID_DEFAULT
    K: int = 20
    baselines: tuple = ("l1",)           # subset of {"l1", "irl1"}
    p_list: tuple = (0.5,)               # exponents for irl1
    sigma_cap: float = 1e3
    max_outer_k: int = 20
    methods: tuple = ("capped",)
    compat_paper_bd: bool = False
    act_tol: float = 1e-6
    zero_tol: float = 1e-6

    def __post_init__(self):
        if not self.seeds:
            raise ParameterError("seeds must be nonempty")
        if not (set(self.methods) | set(self.baselines)):
            raise ParameterError("at least one solver must be selected")
        for b in self.baselines:
            if b not in ("l1", "irl1"):
                raise ParameterError(f"unknown baseline {b!r}")


def _instantiate(cfg: BenchConfig, seed):
    kind = cfg.instance["kind"]
    if kind == "random":
        spec = RandomVlcsSpec(
            m=cfg.instance["m"], n=cfg.instance["n"], nnz=cfg.instance["nnz"],
            s_active=cfg.instance["s_active"], overlap=cfg.instance["overlap"],
            seed=seed,
        )
        p, x_true = gen_random_vlcs(spec, compat_paper_bd=cfg.compat_paper_bd)
        iid = f"random-m{spec.m}n{spec.n}nnz{spec.nnz}-seed{seed}"
        return p, x_true, iid
    if kind == "market":
        spec = MarketSpec.sample(cfg.instance["n1"], cfg.instance["m1"], seed=seed)
        p = gen_market_vlcs(spec)
        iid = f"market-n1{spec.n1}m1{spec.m1}-seed{seed}"
        return p, None, iid
    if kind == "file":
        p = read_problem(cfg.instance["path"])
        truth = cfg.instance.get("truth")
        x_true = read_truth(truth) if truth else None
        iid = f"file-{cfg.instance['path']}-seed{seed}"
        return p, x_true, iid
    raise ParameterError(f"unknown instance kind {kind!r}")


def _cells(cfg: BenchConfig):
    for seed in cfg.seeds:
        if "capped" in cfg.methods:
            for nu in cfg.nu_list:
                yield (seed, "capped", float(nu))
        if "l1" in cfg.baselines or "l1" in cfg.methods:
            yield (seed, "l1", 1.0)
        if "irl1" in cfg.baselines or "irl1" in cfg.methods:
            for pe in cfg.p_list:
                if pe == 1.0:
                    continue  # covered by the l1 column
                yield (seed, "irl1", float(pe))


def run_cell(cfg: BenchConfig, seed, method, param):
    """Run one (seed, method, param) cell; returns (row dict, report or None)."""
    p, x_true, iid = _instantiate(cfg, seed)
    ocfg_kwargs = dict(
        K=cfg.K, sigma_cap=cfg.sigma_cap, max_outer_k=cfg.max_outer_k,
        act_tol=cfg.act_tol, zero_tol=cfg.zero_tol,
    )
    try:
        if method == "capped":
            ocfg = OuterConfig(nu_final=param, **ocfg_kwargs)
            rep = solve_sparse(p, ocfg, x_true=x_true)
        elif method == "l1":
            ocfg = OuterConfig(nu_final=0.004, **ocfg_kwargs)
            rep = baseline_l1(p, ocfg, x_true=x_true)
        elif method == "irl1":
            ocfg = OuterConfig(nu_final=0.004, **ocfg_kwargs)
            rep = baseline_irl1(param, p, ocfg, x_true=x_true)
        else:
            raise ParameterError(f"unknown method {method!r}")
    except VlcsparseError as exc:
        row = {k: "" for k in CSV_HEADER}
        row.update(
            instance_id=iid,
            method=f"{method}[error:{type(exc).__name__}]",
            param=repr(float(param)),
        )
        return row, None
    label = rep.method if rep.converged else f"{rep.method}[nonconv]"
    row = {
        "instance_id": iid,
        "method": label,
        "param": repr(float(param)),
        "nnz_true": "" if rep.nnz_true is None else str(rep.nnz_true),
        "zeros_recovered": str(rep.zeros_recovered),
        "matched_zeros": "" if rep.matched_zeros is None else str(rep.matched_zeros),
        "res": repr(float(rep.res)),
        "phi_value": repr(float(rep.phi_value)),
        "outer_iters": str(rep.outer_iters),
        "wall_ms": f"{1000.0 * rep.wall_time:.3f}",
        "stationarity_class": class_label(rep.stationarity) if rep.stationarity else "",
    }
    return row, rep


def _base_method(label):
    return label.split("[", 1)[0]


def summary_rows(rows):
    """Per-(method, param) means over seeds, with and without failed runs."""
    groups = {}
    for row in rows:
        key = (_base_method(row["method"]), row["param"])
        groups.setdefault(key, []).append(row)
    out = []
    for (method, param) in sorted(groups):
        grp = groups[(method, param)]
        for tag, sel in (
            ("mean_all", [r for r in grp if r["zeros_recovered"] != ""]),
            ("mean_conv", [r for r in grp if r["zeros_recovered"] != "" and "[" not in r["method"]]),
        ):
            row = {k: "" for k in CSV_HEADER}
            row.update(instance_id=tag, method=method, param=param)
            if sel:
                def mean_of(field_name):
                    vals = [float(r[field_name]) for r in sel if r[field_name] != ""]
                    return repr(float(np.mean(vals))) if vals else ""

                row["zeros_recovered"] = mean_of("zeros_recovered")
                row["matched_zeros"] = mean_of("matched_zeros")
                row["res"] = mean_of("res")
                row["phi_value"] = mean_of("phi_value")
                row["outer_iters"] = mean_of("outer_iters")
                row["nnz_true"] = mean_of("nnz_true")
            out.append(row)
    return out


def run_bench(cfg: BenchConfig, jobs: int = 1):
    """Run the sweep; returns (data_rows, summary_rows, reports by cell key).

    Cells are independent; with jobs > 1 they run in a process pool and the
    rows are sorted before any aggregation so the output is order-free.
    """
    cells = list(_cells(cfg))
    if jobs > 1:
        import multiprocessing as mp

        with mp.Pool(jobs) as pool:
            results = pool.starmap(_cell_entry, [(cfg, s, m, q) for (s, m, q) in cells])
    else:
        results = [run_cell(cfg, s, m, q) for (s, m, q) in cells]
    rows = [r for r, _rep in results]
    reports = {cell: rep for cell, (_row, rep) in zip(cells, results)}
    rows.sort(key=lambda r: (_base_method(r["method"]), r["param"], r["instance_id"]))
    return rows, summary_rows(rows), reports


def _cell_entry(cfg, seed, method, param):
    return run_cell(cfg, seed, method, param)


def write_csv(path_or_fh, rows, summaries=None):
    """Write schema line, header, data rows and summary rows."""
    own = isinstance(path_or_fh, (str, bytes)) or hasattr(path_or_fh, "__fspath__")
    fh = open(path_or_fh, "w", newline="", encoding="ascii") if own else path_or_fh
    try:
        fh.write(SCHEMA_LINE + "\n")
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        for row in summaries or []:
            writer.writerow(row)
    finally:
        if own:
            fh.close()


def rows_to_csv_text(rows, summaries=None) -> str:
    buf = io.StringIO()
    write_csv(buf, rows, summaries)
    return buf.getvalue()


def report_row(report: SolveReport, instance_id: str) -> dict:
    """CsvRow for an already-computed report (used by the solve subcommand)."""
    label = report.method if report.converged else f"{report.method}[nonconv]"
    return {
        "instance_id": instance_id,
        "method": label,
        "param": "" if np.isnan(report.param) else repr(float(report.param)),
        "nnz_true": "" if report.nnz_true is None else str(report.nnz_true),
        "zeros_recovered": str(report.zeros_recovered),
        "matched_zeros": "" if report.matched_zeros is None else str(report.matched_zeros),
        "res": repr(float(report.res)),
        "phi_value": repr(float(report.phi_value)),
        "outer_iters": str(report.outer_iters),
        "wall_ms": f"{1000.0 * report.wall_time:.3f}",
        "stationarity_class": class_label(report.stationarity) if report.stationarity else "",
    }
