"""Command-line front end.

Exit codes: 0 success, 2 invalid input or schema violation, 3 resource limit,
4 integrity failure (including corrupted caches).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Sequence

from rankone.accc import accc_check, odometer_clause_a, odometer_clause_b
from rankone.config import (
    ConfigError,
    load_config,
    load_or_build_table,
    params_from_config,
    resolve_cache_path,
)
from rankone.errors import RankOneError
from rankone.katok import KatokParams, condition_report
from rankone.klr import KlrQuery, klr_admissible, klr_best_offset, klr_record
from rankone.mobius import DEFAULT_SEGMENT_SIZE, chowla_sum, mertens
from rankone.sarnak import CylinderFunction, decay_curve
from rankone.words import (
    build_stage,
    canonical_prefix,
    expand_schedule,
    expand_schedule_rows,
    params_report,
    zero_count,
)

log = logging.getLogger("rankone")


# ------------------------------------------------------------------ parsing


def parse_int(text: str) -> int:
    """Integers, also written as 1e6 or 10_000."""
    try:
        value = Decimal(text.replace("_", ""))
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value != value.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def parse_int_list(text: str) -> list[int]:
    return [parse_int(t) for t in text.split(",") if t.strip()]


def parse_float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def parse_schedule(text: str) -> Any:
    """``2,4,8`` or ``affine:a,b``."""
    if text.startswith("affine:"):
        return {"affine": parse_int_list(text[len("affine:") :])}
    return parse_int_list(text)


def parse_rows(text: str) -> list[list[int]]:
    """Rows separated by ``;``, entries by ``,``."""
    return [parse_int_list(row) for row in text.split(";") if row.strip()]


# ------------------------------------------------------------------ output


def emit(args, payload: Any, one_line: bool = False) -> None:
    if args.json or one_line:
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    else:
        text = json.dumps(payload, sort_keys=True, indent=2)
    print(text)


def write_csv(rows: list[list[Any]], path: str | None) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    text = buf.getvalue()
    if path:
        Path(path).write_text(text)
    return text


def _table(args, limit: int, cfg=None):
    path = resolve_cache_path(args.cache, cfg)
    table, reused = load_or_build_table(path, limit, args.segment_size, args.threads)
    return table, path, reused


def _config(args):
    cfg = load_config(args.config)
    return cfg, params_from_config(cfg)


# ------------------------------------------------------------------ commands


def cmd_build_word(args) -> int:
    _, params = _config(args)
    word = build_stage(params, args.stage, args.max_length)
    if args.emit_bits:
        Path(args.emit_bits).write_bytes(word.to_bytes())
    report = params_report(params, args.stage)
    payload = {
        "stage": args.stage,
        "length": word.length,
        "zeros": word.count_zeros(),
        "zeros_formula": zero_count(params, args.stage),
        "emit_bits": args.emit_bits,
        "report": report.to_dict(),
    }
    if word.length <= args.show:
        payload["word"] = str(word)
    emit(args, payload)
    return 0


def cmd_mobius_cache(args) -> int:
    path = resolve_cache_path(args.cache)
    table, reused = load_or_build_table(path, args.limit, args.segment_size, args.threads)
    emit(args, {"path": str(path), "limit": table.limit, "reused": reused})
    return 0


def cmd_mertens(args) -> int:
    table, _, _ = _table(args, max(args.N))
    rows = []
    for n in args.N:
        rep = mertens(table, n)
        rows.append({
            "N": n,
            "mertens": rep.mertens,
            "density": rep.density,
            "riemann_ratio": {str(e): rep.riemann_ratio(e) for e in args.epsilon},
        })
    emit(args, rows)
    return 0


def cmd_chowla(args) -> int:
    table, _, _ = _table(args, args.N + len(args.exponents))
    value = chowla_sum(table, args.exponents, args.N)
    emit(args, {"exponents": args.exponents, "N": args.N, "sum": value, "sum_over_N": value / args.N})
    return 0


def cmd_klr_eval(args) -> int:
    if args.epsilon is not None:
        klr_admissible(args.q, args.L, args.epsilon)  # validates epsilon and L up front
    block = args.L * args.q
    table, _, _ = _table(args, max(args.N + 2 * block, 1))
    if args.z is not None:
        query = KlrQuery(args.q, args.L, args.N, args.z, args.epsilon)
        rec = klr_record(table, query)
    else:
        mode, _, step = args.search.partition(":")
        found = klr_best_offset(table, args.q, args.L, args.N, mode, parse_int(step) if step else 1)
        query = KlrQuery(args.q, args.L, args.N, found.z, args.epsilon)
        rec = klr_record(table, query, found.value)
        rec["search"] = args.search
    emit(args, rec, one_line=True)
    return 0


def cmd_accc_check(args) -> int:
    cfg, params = _config(args)
    epsilon = args.epsilon if args.epsilon is not None else cfg.epsilon
    if epsilon is None:
        raise ConfigError("epsilon: required (flag --epsilon or config field)")
    ks = args.k_set if args.k_set is not None else cfg.k_set
    targets = args.n_targets if args.n_targets is not None else (cfg.n_targets or [10, 100, 1000])
    report = accc_check(params, epsilon, ks, targets, args.max_length)
    emit(args, report.to_dict())
    return 0


def cmd_odometer_check(args) -> int:
    _, params = _config(args)
    a = odometer_clause_a(params, args.m, args.n, args.k)
    b = odometer_clause_b(params, args.l, args.m, args.k)
    emit(args, {
        "l": args.l, "m": args.m, "n": args.n, "k": args.k,
        "clause_a": {"j": a.residue, "fraction": float(a.fraction),
                     "fraction_exact": f"{a.fraction.numerator}/{a.fraction.denominator}"},
        "clause_b": {"D": b.residues.sorted(), "discrepancy": float(b.discrepancy),
                     "discrepancy_exact": f"{b.discrepancy.numerator}/{b.discrepancy.denominator}"},
    })
    return 0


def cmd_katok_gen(args) -> int:
    kp = KatokParams(
        m=args.m,
        r_schedule=tuple(expand_schedule(args.r_schedule, args.depth)),
        t_table=tuple(tuple(r) for r in expand_schedule_rows(args.t_table, args.depth)),
    )
    text = json.dumps(kp.to_params().to_dict(), sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def cmd_cond_check(args) -> int:
    cfg, params = _config(args)
    horizon = args.horizon if args.horizon is not None else (cfg.horizon or params.depth)
    report = condition_report(params, horizon, args.m_candidates, args.epsilon, args.tail)
    if args.csv:
        write_csv(report.csv_rows(), args.csv)
    emit(args, report.to_dict())
    return 0


def cmd_sarnak_sum(args) -> int:
    cfg, params = _config(args)
    offsets = args.offsets if args.offsets is not None else (cfg.offsets or [0])
    checkpoints = args.checkpoints if args.checkpoints is not None else cfg.checkpoints
    if not checkpoints:
        raise ConfigError("checkpoints: required (flag --checkpoints or config field)")
    f = CylinderFunction(tuple(offsets))
    needed = max(checkpoints) + f.delta
    limit = args.sieve_limit if args.sieve_limit is not None else cfg.sieve_limit
    if limit is None:
        limit = needed
    elif limit < needed:
        raise ConfigError(
            f"sieve_limit: {limit} < max checkpoint + max |offset| = {max(checkpoints)} + {f.delta} = {needed}"
        )
    table, _, _ = _table(args, limit, cfg)
    prefix = canonical_prefix(params, max(checkpoints) + f.delta + 1, args.max_length)
    rows = decay_curve(table, prefix, f, checkpoints)
    csv_rows = [["N", "S", "S_over_N", "mask_density"]]
    csv_rows += [[r.N, r.S, repr(r.S_over_N), repr(r.mask_density)] for r in rows]
    write_csv(csv_rows, args.out)
    emit(args, {
        "offsets": list(f.offsets),
        "range_start": f.start,
        "out": args.out,
        "rows": [{"N": r.N, "S": r.S, "S_over_N": r.S_over_N, "mask_density": r.mask_density} for r in rows],
    })
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="compact machine-readable output")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--cache", help="Mobius cache file (default: $RQ_CACHE_DIR or config cache_path)")
    common.add_argument("--segment-size", type=parse_int, default=DEFAULT_SEGMENT_SIZE)
    common.add_argument("--max-length", type=parse_int, default=1 << 27, help="word length budget")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rankone", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-word", parents=[common], help="materialize a stage word")
    p.add_argument("--config", required=True)
    p.add_argument("--stage", type=parse_int, required=True)
    p.add_argument("--emit-bits", help="write packed bits (8 symbols/byte, first symbol in the LSB)")
    p.add_argument("--show", type=parse_int, default=256, help="print the word when at most this long")
    p.set_defaults(func=cmd_build_word)

    p = sub.add_parser("mobius-cache", parents=[common], help="create or reuse the Mobius cache")
    p.add_argument("--limit", type=parse_int, required=True)
    p.set_defaults(func=cmd_mobius_cache)

    p = sub.add_parser("mertens", parents=[common], help="Mertens sums and ratios")
    p.add_argument("--N", type=parse_int_list, required=True)
    p.add_argument("--epsilon", type=parse_float_list, default=[0.01])
    p.set_defaults(func=cmd_mertens)

    p = sub.add_parser("chowla", parents=[common], help="Chowla-type correlation of mu")
    p.add_argument("--exponents", type=parse_int_list, required=True)
    p.add_argument("--N", type=parse_int, required=True)
    p.set_defaults(func=cmd_chowla)

    p = sub.add_parser("klr-eval", parents=[common], help="short-interval progression double sum")
    p.add_argument("--q", type=parse_int, required=True)
    p.add_argument("--L", type=parse_int, required=True)
    p.add_argument("--N", type=parse_int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--z", type=parse_int)
    g.add_argument("--search", default="exhaustive", help="exhaustive or stride:K")
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_klr_eval)

    p = sub.add_parser("accc-check", parents=[common], help="finite-data evidence for P(M, eps, k)")
    p.add_argument("--config", required=True)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--k-set", type=parse_int_list)
    p.add_argument("--n-targets", type=parse_int_list)
    p.set_defaults(func=cmd_accc_check)

    p = sub.add_parser("odometer-check", parents=[common], help="odometer clauses (a) and (b)")
    p.add_argument("--config", required=True)
    p.add_argument("--l", type=parse_int, required=True)
    p.add_argument("--m", type=parse_int, required=True)
    p.add_argument("--n", type=parse_int, required=True)
    p.add_argument("--k", type=parse_int, required=True)
    p.set_defaults(func=cmd_odometer_check)

    p = sub.add_parser("katok-gen", parents=[common], help="emit generalized Katok parameters")
    p.add_argument("--m", type=parse_int, required=True)
    p.add_argument("--r-schedule", type=parse_schedule, required=True, help="2,4,8 or affine:a,b")
    p.add_argument("--t-table", type=parse_rows, required=True, help="rows split by ';', e.g. 0,1;1,0")
    p.add_argument("--depth", type=parse_int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_katok_gen)

    p = sub.add_parser("cond-check", parents=[common], help="growth-condition report")
    p.add_argument("--config", required=True)
    p.add_argument("--horizon", type=parse_int)
    p.add_argument("--m-candidates", type=parse_int_list, default=[1, 2, 3, 4])
    p.add_argument("--epsilon", type=parse_float_list, default=[0.1, 0.01])
    p.add_argument("--tail", type=parse_int, default=3)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_cond_check)

    p = sub.add_parser("sarnak-sum", parents=[common], help="correlation-sum decay curve")
    p.add_argument("--config", required=True)
    p.add_argument("--offsets", type=parse_int_list)
    p.add_argument("--checkpoints", type=parse_int_list)
    p.add_argument("--sieve-limit", type=parse_int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sarnak_sum)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except RankOneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
