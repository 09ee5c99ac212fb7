"""Flat, JSON-serializable result records.

One record per line (JSONL).  Rational numbers are written as integers or
``"p/q"`` strings; keys are sorted, so equal records serialize to equal
bytes.  Schema (all keys always present)::

    type            "record"
    k, N, c, t      integers
    theta_block     theta block in exponent notation, e.g. "0^18 1^7 2^3 3^5"
    symmetry        +1 / -1
    eps, D0         Fricke sign and the D0 statistic
    cusp            true / false / null (not run) / "deferred"
    cusp_nextra     nextra that the deferred cusp test needs, or null
    confirmation    {"status", "method", "i", "witnesses", "detail"}
    singular        [[n, r, c(n, r)], ...] over the singular index classes
    humbert         [[n, r, multiplicity], ...] (nonzero contributions only)
    psi             {"n_min", "prec", "coeffs": [[n, r, c], ...]}
    diagnostics     per-block diagnostics of the search
    extra           free-form integers/lists (ILP solution, scan counts)
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .borcherds import BorcherdsRecord, PsiCandidate, classify, singular_keys
from .jacobi import Confirmed, Refuted
from .series import QSeriesTrunc

__all__ = ["ResultRecord", "dump_number", "load_number", "psi_to_json", "psi_from_json",
           "abort_record", "error_record", "check_record"]


def dump_number(v):
    f = Fraction(v)
    return int(f) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def load_number(v):
    if isinstance(v, int):
        return v
    f = Fraction(v)
    return int(f) if f.denominator == 1 else f


def psi_to_json(series: QSeriesTrunc) -> dict:
    coeffs = sorted((int(n), r, dump_number(c)) for n, r, c in series.items())
    return {"n_min": int(series.offset), "prec": int(series.prec),
            "coeffs": [list(x) for x in coeffs]}


def psi_from_json(d: dict) -> QSeriesTrunc:
    coeffs = {(n, r): load_number(c) for n, r, c in d["coeffs"]}
    lo = d["n_min"]
    return QSeriesTrunc.from_dict(lo, coeffs, d["prec"] - lo)


def _confirmation_json(conf) -> dict:
    if conf is None:
        return {"status": "none", "method": None, "i": None, "witnesses": [], "detail": ""}
    if isinstance(conf, Confirmed):
        return {"status": "confirmed", "method": conf.method, "i": conf.i,
                "witnesses": sorted(set(conf.witnesses)), "detail": conf.detail}
    status = "refuted" if isinstance(conf, Refuted) else "inconclusive"
    return {"status": status, "method": None, "i": conf.i, "witnesses": [],
            "detail": conf.reason}


def _cusp_json(verdict):
    if verdict is None:
        return None
    if verdict.is_cusp is None:
        return "deferred"
    return bool(verdict.is_cusp)


@dataclass
class ResultRecord:
    k: int
    N: int
    c: int
    t: int
    theta_block: str
    symmetry: int
    eps: int
    D0: int
    cusp: object
    cusp_nextra: int | None
    confirmation: dict
    singular: list
    humbert: list
    psi: dict
    diagnostics: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    type: str = "record"

    @classmethod
    def from_record(cls, rec: BorcherdsRecord, diagnostics: dict | None = None
                    ) -> "ResultRecord":
        psi = rec.psi
        keys = singular_keys(psi.N, psi.n_min)
        sing = [[n, r, dump_number(v)] for (n, r), v in zip(keys, psi.singular_vector)]
        hum = [[n, r, dump_number(v)] for (n, r), v in rec.humbert]
        extra = {k: v for k, v in sorted(rec.extra.items())
                 if isinstance(v, (int, bool, list, str))}
        return cls(rec.k, psi.N, rec.c, rec.t, str(rec.theta_block), rec.symmetry, rec.eps,
                   rec.D0, _cusp_json(rec.cusp), rec.extra.get("cusp_deferred_nextra"),
                   _confirmation_json(rec.confirmation), sing, hum, psi_to_json(psi.coeffs),
                   dict(diagnostics or {}), extra)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "ResultRecord":
        d = json.loads(line)
        if d.get("type") != "record":
            raise ValueError(f"not a result record: type={d.get('type')!r}")
        return cls(**d)

    def psi_candidate(self) -> PsiCandidate:
        return PsiCandidate.from_series(self.N, psi_from_json(self.psi))

    def borcherds_record(self) -> BorcherdsRecord:
        rec = BorcherdsRecord.build(self.theta_block, self.psi_candidate(), self.c, self.t)
        if (rec.k, rec.symmetry) != (self.k, self.symmetry):
            raise ValueError("stored classification disagrees with the stored psi")
        return rec


def abort_record(abort, cfg) -> str:
    d = {"type": "abort", "k": cfg.k, "N": cfg.N, "c": cfg.c, "t": cfg.t,
         "nextra": cfg.nextra, "cap": cfg.cap, "theta_block": abort.block,
         "step": abort.step, "reason": abort.reason, "remedy": abort.remedy}
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


def error_record(kind: str, message: str, **fields) -> str:
    d = {"type": "error", "error": kind, "message": message, **fields}
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


def check_record(rec: ResultRecord) -> None:
    """Recompute the classification and singular vector from the stored psi."""
    psi = rec.psi_candidate()
    k, D0, eps, sym = classify(psi)
    if (k, D0, eps, sym) != (rec.k, rec.D0, rec.eps, rec.symmetry):
        raise ValueError("classification mismatch")
    keys = singular_keys(psi.N, psi.n_min)
    if [[n, r, dump_number(v)] for (n, r), v in zip(keys, psi.singular_vector)] != rec.singular:
        raise ValueError("singular vector mismatch")
