"""Command-line front end: ``csmm <command> [options]``.

Exit codes: 0 when every check passes, 1 when a mathematical check fails
(the report carries a witness), 2 for usage or configuration errors.
Reports are JSON with a versioned schema; every number is an exact string.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import click

from . import ddca, hilbert, moments, observables, symfun
from .cache import CACHE_ENV, ResultCache, config_hash
from .fock import ModelParams
from .relations import FAMILIES, T_FAMILIES, relation_instances

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Parameter types and settings
# ---------------------------------------------------------------------------


class IntList(click.ParamType):
    """``4..8``, ``4,6,8`` or a single integer; every entry must be ≥ minimum."""

    name = "int-list"

    def __init__(self, minimum: int = 1):
        self.minimum = minimum

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        text = str(value).strip()
        try:
            if ".." in text:
                lo, hi = text.split("..", 1)
                vals = list(range(int(lo), int(hi) + 1))
            else:
                vals = [int(v) for v in text.split(",") if v.strip()]
        except ValueError:
            self.fail(f"{value!r} is not an integer list (use 4..8 or 4,5,6)", param, ctx)
        if not vals:
            self.fail("empty list", param, ctx)
        if min(vals) < self.minimum:
            self.fail(f"values must be ≥ {self.minimum}, got {min(vals)}", param, ctx)
        return sorted(set(vals))


@dataclass
class Settings:
    cache: ResultCache
    out: Optional[Path]
    fmt: str


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(ctx: click.Context, name: str, args: Dict[str, Any], checks: List[dict], started: float,
          csv_text: Optional[str] = None, extra: Optional[dict] = None, cache: Optional[str] = None) -> None:
    """Write the report (and CSV) and exit with the contract code."""
    st: Settings = ctx.obj
    passed = all(c.get("passed", True) for c in checks)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": {"name": name, "args": args},
        "passed": passed,
        "checks": checks,
    }
    if extra:
        report.update(extra)
    # timing and cache status are the only fields that may differ between identical runs
    report["timing"] = {"seconds": round(time.perf_counter() - started, 3)}
    if cache is not None:
        report["timing"]["cache"] = cache
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if st.out is not None:
        if st.fmt in ("json", "both"):
            _atomic_write(st.out / f"{name}.json", text)
        if st.fmt in ("csv", "both") and csv_text is not None:
            _atomic_write(st.out / f"{name}.csv", csv_text)
        click.echo(f"{name}: {'PASS' if passed else 'FAIL'} ({st.out})")
    else:
        if st.fmt in ("json", "both"):
            click.echo(text, nl=False)
        if st.fmt in ("csv", "both") and csv_text is not None:
            click.echo(csv_text, nl=False)
    ctx.exit(0 if passed else 1)


def _usage(msg: str):
    raise click.UsageError(msg)


@click.group()
@click.option("--cache-dir", type=click.Path(file_okay=False), envvar=CACHE_ENV, default=None,
              help=f"Result cache directory (env {CACHE_ENV}; default: user cache dir).")
@click.option("--no-cache", is_flag=True, help="Disable the result cache.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for <command>.json / <command>.csv; default is stdout.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "both"]), default="json", show_default=True,
              help="Which artifacts to emit.")
@click.pass_context
def main(ctx, cache_dir, no_cache, out, fmt):
    """Exact verification suites for the flavored Chern-Simons matrix model algebra."""
    ctx.obj = Settings(ResultCache(cache_dir, enabled=not no_cache), Path(out) if out else None, fmt)


# ---------------------------------------------------------------------------
# verify-relations
# ---------------------------------------------------------------------------


@main.command("verify-relations")
@click.option("--N", "N", type=click.IntRange(min=1), required=True, help="Gauge rank N ≥ 1.")
@click.option("--p", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--k", type=click.IntRange(min=0), default=1, show_default=True)
@click.option("--E", "E", type=click.IntRange(min=0), default=3, show_default=True,
              help="Energy cap of the physical spanning set.")
@click.option("--families", default="all", show_default=True, help="Comma-separated family names or 'all'.")
@click.option("--max-index", type=click.IntRange(min=0), default=3, show_default=True,
              help="Index cap m+n for e-relations.")
@click.option("--max-t-index", type=click.IntRange(min=0), default=None,
              help="Index cap for t-relations (default: max-index + 1).")
@click.option("--indices", default=None, help="Restrict to one index pair, e.g. 1,0.")
@click.option("--flavors", default=None, help="Restrict to one flavor tuple, e.g. 1,2.")
@click.pass_context
def verify_relations(ctx, N, p, k, E, families, max_index, max_t_index, indices, flavors):
    """Check every relation family on a physical spanning set (exact zero residuals)."""
    started = time.perf_counter()
    fams = list(FAMILIES) if families == "all" else [f.strip() for f in families.split(",") if f.strip()]
    unknown = [f for f in fams if f not in FAMILIES]
    if unknown:
        _usage(f"unknown families: {', '.join(unknown)}; known: {', '.join(FAMILIES)}")
    try:
        idx = tuple(int(v) for v in indices.split(",")) if indices else None
        fl = tuple(int(v) for v in flavors.split(",")) if flavors else None
    except ValueError:
        _usage("--indices and --flavors take comma-separated integers")
    if idx is not None and len(idx) != 2:
        _usage("--indices takes exactly two integers")
    if fl is not None and any(not 1 <= f <= p for f in fl):
        _usage(f"flavors must lie in 1..{p}")
    t_cap = max_index + 1 if max_t_index is None else max_t_index
    params = ModelParams(N, p, k)
    try:
        states = observables.physical_spanning_set(params, E)
    except ValueError as exc:
        _usage(str(exc))
    ev = observables.OpEvaluator()
    checks = []
    for fam in fams:
        cap = t_cap if fam in T_FAMILIES else max_index
        if idx is not None:
            cap = max(cap, sum(idx))
        for inst in relation_instances(fam, p, cap):
            if idx is not None and tuple(inst.indices) != idx:
                continue
            if fl is not None and tuple(inst.flavors) != fl:
                continue
            rep = observables.verify_relation(inst, params, states, ev)
            row = rep.to_json()
            row["name"] = inst.label()
            row["passed"] = rep.passed
            checks.append(row)
    if not checks:
        _usage("no relation instance matches the selection")
    args = {"N": N, "p": p, "k": k, "E": E, "families": fams, "max_index": max_index, "max_t_index": t_cap,
            "indices": list(idx) if idx else None, "flavors": list(fl) if fl else None}
    _emit(ctx, "verify-relations", args, checks, started, extra={"states": len(states)})


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------


@main.command("scaling")
@click.option("--m", type=click.IntRange(min=0), default=1, show_default=True, help="Power of Z.")
@click.option("--n", type=click.IntRange(min=0), default=1, show_default=True, help="Power of Z†.")
@click.option("--k", type=click.IntRange(min=0), default=1, show_default=True)
@click.option("--E", "E", type=click.IntRange(min=0), default=4, show_default=True)
@click.option("--N", "N_range", type=IntList(1), default="4..8", show_default=True, help="N range, e.g. 4..8.")
@click.option("--current-algebra", is_flag=True, help="Run the rescaled current-algebra report instead.")
@click.option("--rate", type=click.Choice(["t21", "t12"]), default=None,
              help="Run the commutator-rate check for [t_{2,1}, ·] or [t_{1,2}, ·] on t_{m,n}.")
@click.pass_context
def scaling(ctx, m, n, k, E, N_range, current_algebra, rate):
    """Exact t_{m,n} matrices on the truncated trace basis with large-N residuals.

    CSV columns: m, n, k, E, N, row_state, col_state, raw_num, raw_den,
    ledger_halfpower (power of √N of the normalized entry), predicted
    (leading form), residual.
    """
    started = time.perf_counter()
    args = {"m": m, "n": n, "k": k, "E": E, "N": N_range, "current_algebra": current_algebra, "rate": rate}
    key = config_hash({"cmd": "scaling", **args, "v": SCHEMA_VERSION})
    hit = ctx.obj.cache.load("scaling", key)
    if hit is not None and "checks" in hit and "csv" in hit:
        _emit(ctx, "scaling", args, hit["checks"], started, hit["csv"], cache="hit")
    try:
        if current_algebra:
            rep = hilbert.current_algebra_report(k, E, N_range)
        elif rate:
            rep = hilbert.commutator_rate_check(rate, m, n, k, E, N_range)
        else:
            rep = hilbert.asymptotic_check(m, n, k, E, N_range)
    except ValueError as exc:
        _usage(str(exc))
    row = rep.to_json()
    row["name"] = "current-algebra" if current_algebra else (f"rate-{rate}" if rate else f"asymptotic-{m},{n}")
    row["passed"] = rep.passed
    parts = []
    for i, N in enumerate(N_range):
        text = hilbert.export_csv(m, n, k, E, N)
        parts.append(text if i == 0 else text.split("\n", 1)[1])
    csv_text = "".join(parts)
    ctx.obj.cache.store("scaling", key, {"checks": [row], "csv": csv_text})
    _emit(ctx, "scaling", args, [row], started, csv_text, cache="miss")


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


@main.command("moments")
@click.option("--p", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--k", type=click.IntRange(min=0), default=1, show_default=True)
@click.option("--M", "M_range", type=IntList(1), default=None, help="N/p values, e.g. 2 or 1..4.")
@click.option("--N", "N_range", type=IntList(1), default=None, help="N range at p = 1 (default 2..8).")
@click.option("--n-max", type=click.IntRange(min=0), default=3, show_default=True)
@click.option("--B", "B", type=str, default="1", show_default=True, help="Magnetic field (rational).")
@click.option("--lemma-c1", is_flag=True, help="Check t_{1,2}|g> = (k(M-1)+N) t_{0,1}|g> for each M.")
@click.pass_context
def moments_cmd(ctx, p, k, M_range, N_range, n_max, B, lemma_c1):
    """Ground-state moments: Catalan limits, moment recursion, filling factor.

    CSV columns (p = 1): n, catalan, target_limit, N, moment, rescaled,
    residual, residual_float (labelled decimal convenience column).
    """
    started = time.perf_counter()
    try:
        Bq = Fraction(B)
    except ValueError:
        _usage(f"--B must be rational, got {B!r}")
    if Bq <= 0:
        _usage("--B must be positive")
    if M_range is not None and N_range is not None:
        _usage("give either --M or --N")
    args = {"p": p, "k": k, "M": M_range, "N": N_range, "n_max": n_max, "B": str(Bq), "lemma_c1": lemma_c1}
    checks: List[dict] = []
    csv_text = None
    if lemma_c1:
        for M in (M_range or [2]):
            rep = moments.lemma_c1_check(p, M, k)
            row = rep.to_json()
            row["name"] = f"lemma-c1 p={p} M={M} k={k}"
            checks.append(row)
    elif p == 1:
        Ns = N_range or (M_range if M_range else list(range(2, 9)))
        rep = moments.catalan_check(k, n_max, Ns, p=1, B=Bq)
        row = rep.to_json()
        row["name"] = "catalan"
        checks.append(row)
        ff = moments.filling_factor_report(p, k, Bq, rep)
        ff["name"] = "filling-factor"
        ff["passed"] = bool(ff["condition_met"])
        checks.append(ff)
        csv_text = rep.to_csv()
    else:
        if N_range is not None:
            _usage("use --M for p > 1 (N = pM)")
        Ms = M_range or [1, 2, 3, 4]
        rep = moments.prop_c2_recursion_check(p, k, Ms, n_max)
        row = rep.to_json()
        row["name"] = "moment-recursion"
        checks.append(row)
        ff = moments.filling_factor_report(p, k, Bq)
        ff["name"] = "filling-factor"
        ff["condition_met"] = rep.passed
        ff["passed"] = rep.passed
        checks.append(ff)
    _emit(ctx, "moments", args, checks, started, csv_text)


# ---------------------------------------------------------------------------
# ddca
# ---------------------------------------------------------------------------


def _load_engine(ctx, p: int, degree_cap: int) -> Tuple[ddca.DDCA, ddca.CommutatorTable, str]:
    eng = ddca.DDCA(p)
    probe = ddca.CommutatorTable(p, degree_cap, {}, {})
    key = probe.cache_key()
    data = ctx.obj.cache.load("ddca", key)
    if data is not None:
        try:
            table = ddca.CommutatorTable.from_json(data)
            if table.seed_hash == probe.seed_hash:
                eng.preload(table)
                return eng, table, "hit"
        except (KeyError, TypeError, ValueError) as exc:
            click.echo(f"warning: cached table {key} is corrupt ({exc}); recomputing", err=True)
    table = ddca.build_table(p, degree_cap, eng)
    ctx.obj.cache.store("ddca", key, table.to_json())
    return eng, table, "miss"


@main.command("ddca")
@click.option("--p", type=click.IntRange(min=1), default=2, show_default=True)
@click.option("--degree-cap", type=click.IntRange(min=2), default=6, show_default=True)
@click.option("--finite-N", "finite_N", type=IntList(1), default=None,
              help="Also compare with finite-N commutators at these N (N divisible by p).")
@click.option("--k", type=click.IntRange(min=0), default=1, show_default=True, help="Level for --finite-N.")
@click.option("--E", "E", type=click.IntRange(min=0), default=3, show_default=True, help="Energy cap for --finite-N.")
@click.option("--finite-degree", type=click.IntRange(min=2), default=5, show_default=True)
@click.option("--lie-index", type=click.IntRange(min=0), default=4, show_default=True,
              help="Index cap (n, m ≤ cap) of the Lie Jacobi and affine checks.")
@click.option("--degeneration-index", type=click.IntRange(min=0), default=2, show_default=True,
              help="Index cap of the table-degeneration check.")
@click.pass_context
def ddca_cmd(ctx, p, degree_cap, finite_N, k, E, finite_degree, lie_index, degeneration_index):
    """Commutator table of the large-N algebra and its scaling limit.

    CSV columns: g1, g2, provenance, commutator (normal form).
    """
    started = time.perf_counter()
    args = {"p": p, "degree_cap": degree_cap, "finite_N": finite_N, "k": k, "E": E,
            "finite_degree": finite_degree, "lie_index": lie_index, "degeneration_index": degeneration_index}
    if lie_index < 2:
        _usage("--lie-index must be at least 2")
    if finite_N and any(N % p for N in finite_N):
        _usage("--finite-N values must be divisible by p")
    eng, table, cache_state = _load_engine(ctx, p, degree_cap)
    checks = [ddca.antisymmetry_check(eng, table).to_json(), ddca.jacobi_check(eng, p, degree_cap).to_json()]
    lead_fail = []
    derived = [key for key, tag in sorted(table.provenance.items()) if tag == "derived"]
    for g1, g2 in derived:
        r = ddca.leading_check(g1, g2, eng)
        if not r.passed:
            lead_fail.append(r.to_json())
    checks.append({"name": "leading-law", "checked": len(derived), "failures": lead_fail[:20],
                   "passed": not lead_fail})
    for N in finite_N or []:
        params = ModelParams(N, p, k)
        states = observables.physical_spanning_set(params, E)
        checks.append(ddca.finite_N_check(eng, params, states, finite_degree).to_json())
    checks.append(ddca.lie_jacobi_check(p, lie_index).to_json())
    checks.append(ddca.affine_map_check(p, lie_index).to_json())
    checks.append(ddca.degeneration_check(p, degeneration_index, eng).to_json())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["g1", "g2", "provenance", "commutator"])
    for (g1, g2), val in sorted(table.entries.items()):
        w.writerow([g1.label(), g2.label(), table.provenance[(g1, g2)], str(val)])
    _emit(ctx, "ddca", args, checks, started, buf.getvalue(),
          cache=cache_state, extra={"table_size": len(table.entries), "seed_hash": table.seed_hash})


# ---------------------------------------------------------------------------
# mn-table
# ---------------------------------------------------------------------------


@main.command("mn-table")
@click.option("--n", type=click.IntRange(min=1, max=12), required=True, help="Symmetric group S_n.")
@click.pass_context
def mn_table(ctx, n):
    """S_n character table from the Murnaghan-Nakayama rule.

    CSV: first column the irreducible nu, then one column per cycle type mu.
    """
    started = time.perf_counter()
    ok = symfun.character_orthogonality(n)
    checks = [{"name": f"orthogonality S_{n}", "passed": ok}]
    _emit(ctx, "mn-table", {"n": n}, checks, started, symfun.character_table_csv(n))


if __name__ == "__main__":  # pragma: no cover
    main()
