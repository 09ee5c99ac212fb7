"""Command-line front end.

Records go to standard output (or ``--output``) as JSON lines; progress and
diagnostics go to standard error.  Exit status: 0 on success, 2 when the
search aborted for some theta block (abort records are written), 3 when a
basis could not be provisioned, 1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .borcherds import bp_expand
from .pipeline import (BASIS_DIR_ENV, STRATEGIES, BasisProvider, BasisShortfall, SearchConfig,
                       confirm_candidate, cusp_check, default_basis_sources, run_search)
from .records import (ResultRecord, abort_record, dump_number, error_record,
                      psi_to_json)
from .theta import ct_bounds, tb_enumerate, tb_invariants, tb_ord

__all__ = ["main", "build_parser", "run_command", "load_config"]

log = logging.getLogger("paramodular")

EXIT_ABORT = 2
EXIT_BASIS = 3


def _pairs(text: str) -> list[tuple[int, int]]:
    """Parse ``"1,0 2,0"`` or ``"1,0;2,0"`` into (c, t) pairs."""
    out = []
    for tok in text.replace(";", " ").split():
        c, t = tok.split(",")
        out.append((int(c), int(t)))
    if not out:
        raise argparse.ArgumentTypeError("empty (c,t) list")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paramodular",
                                description="Borcherds products from theta blocks")
    p.add_argument("-v", "--verbose", action="count", default=0,
                   help="progress on stderr (-vv for debug)")
    sub = p.add_subparsers(dest="command", required=True)

    tb = sub.add_parser("tb", help="theta block tools")
    tbs = tb.add_subparsers(dest="tb_command", required=True)
    en = tbs.add_parser("enum", help="enumerate basic theta blocks")
    en.add_argument("--weight", type=int, required=True)
    en.add_argument("--index", type=int, required=True)
    en.add_argument("--qpow", type=int, required=True)
    en.add_argument("--denominator", action="store_true",
                    help="also list blocks with denominator")
    en.add_argument("--include-noncusp", action="store_true",
                    help="list holomorphic blocks that are not cusp forms too")

    s = sub.add_parser("search", help="run the Borcherds product search")
    s.add_argument("--config", type=Path, help="JSON file with SearchConfig fields")
    s.add_argument("--weight", type=int)
    s.add_argument("--level", type=int)
    s.add_argument("--c", type=int)
    s.add_argument("--t", type=int)
    s.add_argument("--seed-pairs", type=_pairs,
                   help="explicit (c,t) list, e.g. '1,0 2,0' (needed for N > 5 "
                        "without --c/--t)")
    s.add_argument("--nextra", type=int)
    s.add_argument("--cap", type=int)
    s.add_argument("--basis-dir", type=Path,
                   help=f"directory of basis files (default ${BASIS_DIR_ENV})")
    s.add_argument("--no-generators", action="store_true",
                   help="use only basis files, not the weak-generator construction")
    s.add_argument("--threads", type=int)
    s.add_argument("--assume-complete-basis", action="store_true", default=None)
    s.add_argument("--skip-cusp-test", action="store_true", default=None)
    s.add_argument("--step5-policy", choices=("eschew", "abort", "flag"))
    s.add_argument("--strategies", help=f"comma list from {','.join(STRATEGIES)}")
    s.add_argument("--block", action="append", dest="blocks",
                   help="restrict to this theta block (repeatable)")
    s.add_argument("--output", type=Path, help="write records here instead of stdout")

    for name, hlp in (("confirm", "re-run confirmation on stored records"),
                      ("cusp-check", "cusp test on stored records")):
        q = sub.add_parser(name, help=hlp)
        q.add_argument("records", type=Path, help="JSONL file of result records")
        q.add_argument("--line", type=int, help="only this record (1-based)")
        q.add_argument("--basis-dir", type=Path)
        if name == "cusp-check":
            q.add_argument("--nextra", type=int,
                           help="recompute psi with this nextra first (second run)")
        else:
            q.add_argument("--strategies", help=f"comma list from {','.join(STRATEGIES)}")

    bp = sub.add_parser("bp", help="Borcherds product expansion")
    bps = bp.add_subparsers(dest="bp_command", required=True)
    ex = bps.add_parser("expand", help="Fourier-Jacobi coefficients of a stored record")
    ex.add_argument("records", type=Path)
    ex.add_argument("--line", type=int, default=1)
    ex.add_argument("--xi-order", type=int, required=True)
    ex.add_argument("--q-order", type=int, required=True)
    ex.add_argument("--route", choices=("exp", "product"), default="exp")
    return p


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    d = json.loads(Path(path).read_text())
    if not isinstance(d, dict):
        raise ValueError("config file must hold a JSON object")
    return d


def _sources(basis_dir, generators: bool = True, extra=()) -> tuple:
    src = default_basis_sources(basis_dir)
    if not generators:
        src = src[1:]
    return tuple(extra) + src


def _read_records(path: Path, line: int | None) -> list[ResultRecord]:
    out = []
    for i, text in enumerate(Path(path).read_text().splitlines(), 1):
        if not text.strip() or (line is not None and i != line):
            continue
        d = json.loads(text)
        if d.get("type") == "record":
            out.append(ResultRecord.from_json(text))
    if not out:
        raise ValueError(f"no result records in {path}" + (f" at line {line}" if line else ""))
    return out


class _Writer:
    def __init__(self, path: Path | None):
        self.fh = open(path, "w") if path else sys.stdout

    def __call__(self, line: str):
        self.fh.write(line + "\n")
        self.fh.flush()

    def close(self):
        if self.fh is not sys.stdout:
            self.fh.close()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_tb_enum(a, out) -> int:
    blocks = tb_enumerate(a.weight, a.index, a.qpow, allow_denominator=a.denominator,
                          cusp_only=not a.include_noncusp)
    for b in blocks:
        out(json.dumps({"type": "theta_block", "block": str(b), "weight": a.weight,
                        "index": a.index, "qpow": a.qpow, "cusp": tb_ord(b).is_cusp,
                        "denominator": b.has_denominator}, sort_keys=True,
                       separators=(",", ":")))
    plain = sum(1 for b in blocks if not b.has_denominator)
    log.info("%d blocks (%d without, %d with denominator)", len(blocks), plain,
             len(blocks) - plain)
    return 0


_CFG_KEYS = {"weight": "k", "level": "N", "c": "c", "t": "t", "nextra": "nextra",
             "cap": "cap", "threads": "threads", "assume_complete_basis": "assume_complete_basis",
             "skip_cusp_test": "skip_cusp_test", "step5_policy": "step5_policy"}


def _search_configs(a) -> list[SearchConfig]:
    base = load_config(a.config)
    base = {("k" if k == "weight" else "N" if k == "level" else k): v for k, v in base.items()}
    for flag, key in _CFG_KEYS.items():
        v = getattr(a, flag, None)
        if v is not None:
            base[key] = v
    if a.strategies:
        base["strategies"] = tuple(x.strip() for x in a.strategies.split(","))
    if a.blocks:
        base["blocks"] = tuple(a.blocks)
    srcs = base.pop("basis_sources", ())
    base_dir = a.basis_dir or base.pop("basis_dir", None)
    base["basis_sources"] = _sources(base_dir, not a.no_generators, srcs)
    if "k" not in base or "N" not in base:
        raise ValueError("search needs --weight and --level (or a config file)")
    pairs = a.seed_pairs or base.pop("seed_pairs", None)
    if "c" in base and "t" in base:
        pairs = [(base.pop("c"), base.pop("t"))]
    elif pairs is None:
        N = base["N"]
        if N > 5:
            raise ValueError("for N > 5 give --c/--t or --seed-pairs; the (c,t) bounds are "
                             "only established for N <= 5")
        pairs = ct_bounds(base["k"], N)
    else:
        pairs = [tuple(p) for p in pairs]
    return [SearchConfig(c=c, t=t, **base) for c, t in pairs]


def _cmd_search(a, out) -> int:
    cfgs = _search_configs(a)
    status = 0
    for cfg in cfgs:
        log.info("search k=%d N=%d c=%d t=%d nextra=%d", cfg.k, cfg.N, cfg.c, cfg.t,
                 cfg.nextra)
        try:
            res = run_search(cfg)
        except BasisShortfall as e:
            out(error_record("basis-shortfall", str(e), k=e.k, m=e.m, qorder=e.q_order,
                             remedy=e.remedy))
            return EXIT_BASIS
        diags = {d.block: d.as_dict() for d in res.diagnostics}
        for rec in res.records:
            out(ResultRecord.from_record(rec, diags.get(str(rec.theta_block))).to_json())
        for ab in res.aborts:
            out(abort_record(ab, cfg))
            status = EXIT_ABORT
        log.info("%d records, %d aborts", len(res.records), len(res.aborts))
    return status


def _cmd_confirm(a, out) -> int:
    for rr in _read_records(a.records, a.line):
        kw = {}
        if a.strategies:
            kw["strategies"] = tuple(x.strip() for x in a.strategies.split(","))
        cfg = SearchConfig(rr.k, rr.N, rr.c, rr.t, nextra=max(0, rr.psi["prec"] - rr.N // 4),
                           basis_sources=_sources(a.basis_dir), **kw)
        rec = rr.borcherds_record()
        rec.confirmation = confirm_candidate(rec.psi, tb_invariants(rr.theta_block), cfg)
        rec.cusp = None
        rec.extra = dict(rr.extra)
        new = ResultRecord.from_record(rec, rr.diagnostics)
        new.cusp, new.cusp_nextra = rr.cusp, rr.cusp_nextra
        out(new.to_json())
    return 0


def _cmd_cusp_check(a, out) -> int:
    for rr in _read_records(a.records, a.line):
        rec = rr.borcherds_record()
        if a.nextra is not None and a.nextra > rr.psi["prec"] - rr.N // 4:
            cfg = SearchConfig(rr.k, rr.N, rr.c, rr.t, nextra=a.nextra,
                               basis_sources=_sources(a.basis_dir), blocks=(rr.theta_block,),
                               skip_cusp_test=True, strategies=("divisibility-bound",))
            try:
                res = run_search(cfg)
            except BasisShortfall as e:
                out(error_record("basis-shortfall", str(e), k=e.k, m=e.m, qorder=e.q_order,
                                 remedy=e.remedy))
                return EXIT_BASIS
            if res.aborts:
                for ab in res.aborts:
                    out(abort_record(ab, cfg))
                return EXIT_ABORT
            sv = tuple(x[2] for x in rr.singular)
            match = [r for r in res.records
                     if tuple(dump_number(v) for v in r.psi.singular_vector[:len(sv)]) == sv]
            if len(match) != 1:
                out(error_record("record-not-found", "the longer run did not reproduce the "
                                 "stored candidate", theta_block=rr.theta_block))
                return 1
            rec.psi = match[0].psi
        v = cusp_check(rec)
        rec.cusp = v
        if v.deferred:
            rec.extra["cusp_deferred_nextra"] = max(0, (v.required_q or 0) - rr.N // 4)
        rec.confirmation = None
        new = ResultRecord.from_record(rec, rr.diagnostics)
        new.confirmation = rr.confirmation
        out(new.to_json())
    return 0


def _cmd_bp_expand(a, out) -> int:
    rr = _read_records(a.records, a.line)[0]
    rec = rr.borcherds_record()
    fj = bp_expand(rec, a.xi_order, a.q_order, route=a.route)
    for j, f in enumerate(fj):
        d = {"type": "fourier_jacobi", "theta_block": rr.theta_block, "xi_power": (rr.c + j) * rr.N,
             "weight": f.k, "index": f.m, "series": psi_to_json(f.series)}
        out(json.dumps(d, sort_keys=True, separators=(",", ":")))
    return 0


def run_command(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(a.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(name)s: %(message)s")
    out = _Writer(getattr(a, "output", None))
    try:
        if a.command == "tb":
            return _cmd_tb_enum(a, out)
        if a.command == "search":
            return _cmd_search(a, out)
        if a.command == "confirm":
            return _cmd_confirm(a, out)
        if a.command == "cusp-check":
            return _cmd_cusp_check(a, out)
        if a.command == "bp":
            return _cmd_bp_expand(a, out)
    except (ValueError, OSError) as e:
        out(error_record("input", str(e)))
        print(f"error: {e}", file=sys.stderr)
        return 1
    finally:
        out.close()
    return 1  # pragma: no cover


def main(argv=None):
    sys.exit(run_command(argv))
