"""Experiment reports: certified quantities, sweep tables, serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

SIG_DIGITS = 12
RERUN = "rerun"

# name -> pure function returning a float; filled in by the experiments module
CALL_REGISTRY: dict = {}


def register(name):
    def deco(fn):
        CALL_REGISTRY[name] = fn
        return fn
    return deco


@dataclass
class Quantity:
    label: str
    value: float
    cert: str | None = None
    exact: bool = True


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ExperimentReport:
    name: str
    params: dict
    quantities: list = field(default_factory=list)
    table: dict | None = None
    provenance: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def add(self, label, value, cert=None, exact=True):
        self.quantities.append(Quantity(label, float(value), cert, exact))
        return float(value)

    def check(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    def certify(self, ref, cert: dict):
        self.certificates[ref] = cert
        return ref

    def quantity(self, label) -> float:
        for q in self.quantities:
            if q.label == label:
                return q.value
        raise KeyError(label)

    @property
    def failed_checks(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        certs = dict(self.certificates)
        if any(q.cert is None for q in self.quantities):
            # quantities without a witness of their own are re-derived by rerunning
            certs[RERUN] = {"kind": "experiment", "experiment": self.name, "params": self.params}
        return clean({
            "name": self.name,
            "params": self.params,
            "provenance": self.provenance,
            "quantities": [
                {"label": q.label, "value": q.value, "exact": q.exact,
                 "certificate": q.cert if q.cert is not None else RERUN}
                for q in self.quantities
            ],
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
            "table": self.table,
            "certificates": certs,
        })

    def to_json(self) -> str:
        return dumps(self.to_dict())


def _round(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{SIG_DIGITS}g}")


def clean(obj):
    """Plain JSON types with floats rounded to a fixed number of significant digits."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, complex):
        return {"re": _round(obj.real), "im": _round(obj.imag)}
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=1, allow_nan=False)


def table_csv(table: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table["columns"])
    for row in table["rows"]:
        w.writerow([_fmt_cell(v) for v in row])
    return buf.getvalue()


def _fmt_cell(v):
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    return v


def table_svg(table: dict, x_col: str | None = None, width: int = 640, height: int = 400) -> str:
    """Log-log line plot of every numeric column against the first one."""
    cols = table["columns"]
    x_col = x_col or cols[0]
    xi = cols.index(x_col)
    rows = [r for r in table["rows"] if isinstance(r[xi], (int, float)) and r[xi] > 0]
    series = []
    for j, name in enumerate(cols):
        if j == xi:
            continue
        pts = [(r[xi], r[j]) for r in rows
               if isinstance(r[j], (int, float)) and not isinstance(r[j], bool) and r[j] > 0]
        if len(pts) >= 2:
            series.append((name, pts))
    pad = 50
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    if not series:
        out.append("</svg>")
        return "\n".join(out)
    xs = [math.log10(x) for _, pts in series for x, _ in pts]
    ys = [math.log10(y) for _, pts in series for _, y in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def px(x):
        return pad + (math.log10(x) - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (math.log10(y) - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]
    out.append(f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>')
    out.append(f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>')
    out.append(f'<text x="{width // 2}" y="{height - 10}" font-size="12">{x_col} (log)</text>')
    for k, (name, pts) in enumerate(series):
        c = colors[k % len(colors)]
        path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="{c}"/>')
        out.append(f'<text x="{width - pad - 150}" y="{pad + 14 * k}" font-size="11" fill="{c}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out)


# ------------------------------------------------------------------ verification


def evaluate_certificate(cert: dict, label: str | None = None) -> float:
    """Re-derive the value a serialised certificate stands for."""
    from .operators import LinearMap
    from .summing import PietschCertificate, WeakFamily, check_pietsch, family_ratio

    kind = cert["kind"]
    if kind == "family":
        T = LinearMap.from_dict(cert["operator"])
        fam = WeakFamily.from_dict(cert["family"])
        p = math.inf if cert["p"] == "inf" else cert["p"]
        return family_ratio(T, fam, p)
    if kind == "pietsch":
        T = LinearMap.from_dict(cert["operator"])
        pc = PietschCertificate.from_dict(cert["certificate"])
        if not check_pietsch(T, pc, rtol=1e-6):
            raise ValueError("Pietsch certificate fails its domination inequality")
        return pc.constant
    if kind == "call":
        fn = CALL_REGISTRY[cert["fn"]]
        return float(fn(**cert["kwargs"]))
    if kind == "experiment":
        from .experiments import rerun
        return rerun(cert["experiment"], json.dumps(cert["params"], sort_keys=True)).quantity(label)
    raise ValueError(f"unknown certificate kind {kind!r}")


def verify_report(report: dict, rtol: float = 1e-9) -> list[tuple[str, bool]]:
    """Recompute every certified quantity of a serialised report."""
    from . import experiments  # noqa: F401  (fills the call registry)

    out = []
    certs = report["certificates"]
    for q in report["quantities"]:
        ref = q.get("certificate")
        if ref is None:
            continue
        val = evaluate_certificate(certs[ref], q["label"])
        ok = abs(val - q["value"]) <= rtol * max(1.0, abs(val)) + 1e-11
        out.append((q["label"], bool(ok)))
    return out
