"""Certificate emission and replay.

A certificate lists every oracle query a detector made together with the
value it saw, the reconstruction it accepted, and the parameters used.
Replaying it re-asks the oracle each query and re-evaluates the
reconstruction there; both must agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .detect1d import DetectOutcome, Reconstruction1D
from .detectnd import nd_certificate
from .polyfun import HullError, PolyhedralFunction, strictly_inside_hull
from .ratfun import format_rat, functional_from_json, point, rat

DEFAULTS = {"budget": 64, "step": "1/2", "resolution": "1/8", "ray_length": "4"}


def build_certificate(out: DetectOutcome, kind: str, oracle_spec: str, **params) -> dict:
    merged = dict(DEFAULTS)
    merged.update({k: format_rat(v) if isinstance(v, Fraction) else v for k, v in params.items()})
    if isinstance(out.reconstruction, Reconstruction1D):
        cert = out.certificate(**merged)
    else:
        cert = nd_certificate(out, **merged)
        cert["kind"] = kind
    cert["oracle"] = oracle_spec
    return cert


@dataclass
class ReplayReport:
    checked: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": self.checked, "mismatches": self.mismatches}


def _model(cert: dict) -> Callable:
    if "function" in cert:
        f = PolyhedralFunction.from_json(cert["function"])
        return f
    pieces = [(rat(p["slope"]) if isinstance(p["slope"], str) else Fraction(p["slope"]), rat(p["const"]))
              for p in cert["pieces"]]
    if not pieces:
        raise ValueError("pieces: certificate has no pieces")

    def g(x):
        return max(s * x[0] + c for s, c in pieces)

    return g


def _query_point(q) -> tuple:
    return point(q if isinstance(q, list) else [q])


def verify_certificate(cert: dict, oracle: Callable) -> ReplayReport:
    """Replay all logged queries and any per-cell checks against ``oracle``."""
    try:
        queries = cert["queries"]
    except (KeyError, TypeError):
        raise ValueError("queries: certificate has no query log") from None
    model = _model(cert)
    report = ReplayReport()
    for q, v in queries:
        x = _query_point(q)
        v = rat(v)
        got = oracle(x)
        report.checked += 1
        if got != v:
            report.mismatches.append({"point": [format_rat(c) for c in x], "logged": format_rat(v),
                                      "oracle": format_rat(got)})
        elif model(x) != v:
            report.mismatches.append({"point": [format_rat(c) for c in x], "logged": format_rat(v),
                                      "model": format_rat(model(x))})
    for rec in cert.get("cell_checks", []):
        lam = functional_from_json(rec["ambient"])
        verts = [point(v) for v in rec["vertices"]]
        center = point(rec["center"])
        try:
            interior = strictly_inside_hull(verts, center)
        except HullError:
            interior = False
        if not interior:
            report.mismatches.append({"cell": rec["ambient"], "reason": "center not interior"})
            continue
        for x in verts + [center]:
            report.checked += 1
            if oracle(x) != lam(x):
                report.mismatches.append({"cell": rec["ambient"], "point": [format_rat(c) for c in x],
                                          "oracle": format_rat(oracle(x)), "ambient": format_rat(lam(x))})
    return report
