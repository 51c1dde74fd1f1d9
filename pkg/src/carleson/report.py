"""Assemble engine results into JSON/CSV documents.

Serialization is deterministic: keys keep a fixed order, floats are
written with 17 significant digits, infinities as the strings "inf" /
"-inf", complex numbers as ``[re, im]`` pairs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from enum import Enum

import numpy as np

from . import __version__
from . import criteria as cr
from . import measure as mm
from . import oracle as orc
from .instance import Instance
from .space import admissibility_report, sparseness_report

COMMANDS = ("validate", "check", "compact", "hs", "oracle", "report", "sweep")


def _num(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0:
        return "0.0"
    out = format(x, ".17g")
    return out if any(c in out for c in ".en") else out + ".0"


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, Enum):
        obj = obj.value
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, complex):
        return f"[{_num(obj.real)}, {_num(obj.imag)}]"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def meta(inst: Instance, command: str) -> dict:
    o = inst.options
    return {
        "tool": "carleson",
        "version": __version__,
        "command": command,
        "N": inst.space.N,
        "gamma_generator": inst.space.gamma.generator,
        "v_generator": inst.space.v.generator,
        "tolerances": {
            "power_iteration_residual": o.tol,
            "lower_bound": orc.LOWER_BOUND_TOL,
            "hs_identity_rel": 1e-10,
            "decay_margin": o.decay_margin,
            "liminf_floor": o.liminf_floor,
            "admissibility_margin": 1e-6,
        },
        "window": o.window,
        "discretize": o.discretize,
        "tail_monotone": o.tail_monotone,
        "index_normalization": cr.INDEX_NORMALIZATION,
    }


def hypotheses(inst: Instance) -> dict:
    space = inst.space
    out = {"N": space.N}
    if space.N >= 2:
        sp = sparseness_report(space.gamma)
        out["sparseness"] = {"ratio": sp.ratio, "satisfied": sp.satisfied}
    else:
        out["sparseness"] = {"ratio": None, "satisfied": False}
    adm = admissibility_report(space)
    out["admissibility"] = {"partial": adm.partial, "tail_ratio": adm.tail_ratio,
                            "flag": adm.flag}
    reg = cr.corollary_regime(space)
    out["corollaries"] = {"cor_exp_weights": reg.cor_exp_weights,
                          "cor_summable": reg.cor_summable}
    return out


def quantities_doc(q: cr.QuantitySequences) -> dict:
    return {"A": q.A, "tau_sq": q.tau_sq, "mass": q.mass, "Vhat": q.Vhat,
            "P": q.P, "D": q.D, "P_upper": q.P_upper, "D_upper": q.D_upper}


def certificate_doc(c: cr.Certificate) -> dict:
    return {
        "verdict": c.verdict,
        "sup_A": c.sup_A,
        "sup_D": c.sup_D,
        "witness_A": c.witness_A,
        "witness_D": c.witness_D,
        "C_star": c.C_star,
        "window": {"lo": c.window[0], "hi": c.window[1]},
        "trend_A": c.trend_A,
        "trend_D": c.trend_D,
        "last_A": c.last_A,
        "last_D": c.last_D,
        "support_exhausted": c.support_exhausted,
        "notes": c.notes,
    }


def hs_doc(h: cr.HSReport) -> dict:
    return {"hs_exact": h.hs_exact, "hs_finite": h.hs_finite,
            "local_sum": h.local_sum, "global_sum": h.global_sum,
            "condition_value": h.condition_value,
            "condition_finite": h.condition_finite}


def spectral_doc(s: orc.SpectralSummary) -> dict:
    return {"op_norm": s.op_norm, "op_norm_sq": s.op_norm ** 2, "top_k": s.top_k,
            "frobenius": s.frobenius, "frobenius_sq": s.frobenius ** 2,
            "tail_norms": {str(k): v for k, v in sorted(s.tail_norms.items())},
            "iterations": s.iterations, "residual": s.residual,
            "converged": s.converged}


def consistency_doc(r: orc.ConsistencyRecord) -> dict:
    return {"op_norm_sq": r.op_norm_sq, "max_q_energy": r.max_q_energy,
            "lower_bound_ok": r.lower_bound_ok, "q_dominates_A": r.q_dominates_A,
            "ratio_to_C_star": r.ratio_to_C_star, "hs_exact": r.hs_exact,
            "frobenius_sq": r.frobenius_sq, "hs_identity_ok": r.hs_identity_ok,
            "compact_verdict": r.compact_verdict, "tail_trend_ok": r.tail_trend_ok,
            "consistent": r.consistent, "findings": r.findings}


class Analysis:
    """Lazily computed engine results for one instance."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.opts = inst.options.check_options()
        self._cache = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def q(self):
        return self._get("q", lambda: cr.quantity_sequences(self.inst.space, self.inst.measure))

    @property
    def carleson(self):
        return self._get("carleson", lambda: cr.carleson_check(
            self.inst.space, self.inst.measure, self.opts, self.q))

    @property
    def compact(self):
        return self._get("compact", lambda: cr.compactness_check(
            self.inst.space, self.inst.measure, self.opts, self.q))

    @property
    def hs(self):
        return self._get("hs", lambda: cr.hs_check(self.inst.space, self.inst.measure, self.q))

    @property
    def consistency(self):
        o = self.inst.options
        return self._get("oracle", lambda: orc.validate(
            self.inst.space, self.inst.measure, self.carleson, self.compact,
            hs=self.hs if self.inst.measure.is_atomic else None, K=o.discretize,
            power_tol=o.tol))


def build_document(inst: Instance, command: str):
    """Return (document, converged) for one non-sweep command."""
    an = Analysis(inst)
    doc = {"meta": meta(inst, command)}
    converged = True
    if command in ("validate", "report"):
        doc["hypotheses"] = hypotheses(inst)
    if command in ("check", "report"):
        doc["quantities"] = quantities_doc(an.q)
        doc["carleson"] = certificate_doc(an.carleson)
    if command in ("compact", "report"):
        doc["compactness"] = certificate_doc(an.compact)
    if command in ("hs", "report"):
        doc["hs"] = hs_doc(an.hs)
    if command in ("oracle", "report"):
        rec = an.consistency
        doc["spectral"] = spectral_doc(rec.summary)
        doc["consistency"] = consistency_doc(rec)
        converged = rec.summary.converged
    return doc, converged


SWEEP_COLUMNS = ("param", "sup_A", "sup_D", "op_norm_sq", "hs_exact",
                 "carleson_verdict", "compactness_verdict")


def sweep_row(value, inst: Instance):
    an = Analysis(inst)
    atomic = inst.measure if inst.measure.is_atomic else \
        mm.discretize(inst.measure, inst.options.discretize)
    E = orc.build_embedding(inst.space, atomic)
    summ = orc.spectral_summary(E, tail_grid=(), tol=inst.options.tol)
    row = {"param": value, "sup_A": an.carleson.sup_A, "sup_D": an.carleson.sup_D,
           "op_norm_sq": summ.op_norm ** 2, "hs_exact": an.hs.hs_exact,
           "carleson_verdict": an.carleson.verdict.value,
           "compactness_verdict": an.compact.verdict.value}
    return row, summ.converged


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        cells = []
        for k in SWEEP_COLUMNS:
            v = row[k]
            if isinstance(v, float):
                v = _num(v).strip('"')
            cells.append(v)
        writer.writerow(cells)
    return buf.getvalue()
