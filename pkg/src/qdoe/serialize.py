"""JSON and CSV encodings shared by the library and the CLI.

Floats are rounded to 12 significant digits on the way out so identical
invocations produce byte-identical output.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .criteria import Criterion
from .errors import WrongDimension
from .fisher import DesignMeasure
from .quantum import (
    AffineModel,
    Bloch3Model,
    BlochSubModel,
    ParametricModel,
    PhaseAmplitudeModel,
    Povm,
)

SIGNIFICANT_DIGITS = 12


def round_float(x: float) -> float:
    """Round to 12 significant digits; infinities survive as-is."""
    x = float(x)
    if not math.isfinite(x):
        return x
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def _rounded(obj):
    if isinstance(obj, float):
        return round_float(obj)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def dumps(payload) -> str:
    """Deterministic JSON text with rounded floats and a trailing newline."""

    def default(o):
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        raise TypeError(f"not JSON serializable: {type(o)}")

    return json.dumps(_rounded(payload), indent=2, default=default) + "\n"


def matrix_to_json(matrix: np.ndarray) -> dict:
    a = np.asarray(matrix, dtype=complex)
    return {
        "dim": a.shape[0],
        "re": [[float(v) for v in row] for row in a.real],
        "im": [[float(v) for v in row] for row in a.imag],
    }


def matrix_from_json(payload: dict) -> np.ndarray:
    re = np.asarray(payload["re"], dtype=float)
    im = np.asarray(payload["im"], dtype=float)
    if re.shape != im.shape or re.shape != (payload["dim"], payload["dim"]):
        raise WrongDimension("matrix JSON parts disagree with the declared dim")
    return re + 1j * im


def fisher_to_json(info: np.ndarray) -> dict:
    a = np.asarray(info, dtype=float)
    return {"n": a.shape[0], "entries": [[float(v) for v in row] for row in a]}


def fisher_from_json(payload: dict) -> np.ndarray:
    a = np.asarray(payload["entries"], dtype=float)
    if a.shape != (payload["n"], payload["n"]):
        raise WrongDimension("matrix JSON entries disagree with the declared size")
    return a


def povm_to_json(povm: Povm) -> dict:
    out = {"elements": [matrix_to_json(e) for e in povm.elements]}
    if povm.labels is not None:
        out["labels"] = list(povm.labels)
    return out


def povm_from_json(payload: dict) -> Povm:
    elements = [matrix_from_json(e) for e in payload["elements"]]
    return Povm(elements, labels=payload.get("labels"))


def design_to_json(design: DesignMeasure) -> dict:
    return {
        "weights": [float(w) for w in design.weights],
        "povms": [povm_to_json(p) for p in design.povms],
    }


def design_from_json(payload: dict) -> DesignMeasure:
    return DesignMeasure(
        payload["weights"], [povm_from_json(p) for p in payload["povms"]]
    )


def model_to_json(model: ParametricModel) -> dict:
    if isinstance(model, Bloch3Model):
        return {"variant": "bloch3"}
    if isinstance(model, BlochSubModel):
        return {"variant": "bloch_sub", "axes": list(model.axes)}
    if isinstance(model, PhaseAmplitudeModel):
        return {"variant": "phase_amplitude"}
    if isinstance(model, AffineModel):
        return {
            "variant": "affine",
            "a0": matrix_to_json(model.a0),
            "generators": [matrix_to_json(g) for g in model.generators],
        }
    raise WrongDimension(f"cannot serialize model {model!r}")


def model_from_json(payload: dict) -> ParametricModel:
    variant = payload.get("variant")
    if variant == "bloch3":
        return Bloch3Model()
    if variant == "bloch_sub":
        return BlochSubModel(payload["axes"])
    if variant == "phase_amplitude":
        return PhaseAmplitudeModel()
    if variant == "affine":
        return AffineModel(
            matrix_from_json(payload["a0"]),
            [matrix_from_json(g) for g in payload["generators"]],
        )
    raise WrongDimension(f"unknown model variant {variant!r}")


def parse_model(text: str) -> ParametricModel:
    """Model from a CLI token: a builtin name, bloch_sub:axes, or a JSON path."""
    token = text.strip()
    if token == "bloch3":
        return Bloch3Model()
    if token == "phase_amplitude":
        return PhaseAmplitudeModel()
    if token.startswith("bloch_sub:"):
        axes = [int(a) for a in token.split(":", 1)[1].split(",") if a]
        return BlochSubModel(axes)
    path = Path(token)
    if path.exists():
        return model_from_json(json.loads(path.read_text()))
    raise WrongDimension(f"unknown model {text!r}")


_SIMPLE_CRITERIA = {
    "a": Criterion.a,
    "d": Criterion.d,
    "logd": Criterion.log_d,
    "e": Criterion.e,
}


def parse_criterion(text: str) -> Criterion:
    """Criterion from its CLI syntax.

    Accepted forms: ``A``, ``A:W.json`` (weight in Fisher-matrix JSON),
    ``D``, ``LogD``, ``E``, ``c:1,0,0``, ``gamma:0.5`` and
    ``compound:0.5,A,D`` (components restricted to the simple tags).
    """
    token = text.strip()
    lowered = token.lower()
    if lowered in _SIMPLE_CRITERIA:
        return _SIMPLE_CRITERIA[lowered]()
    if lowered.startswith("a:"):
        payload = json.loads(Path(token[2:]).read_text())
        return Criterion.a(fisher_from_json(payload))
    if lowered.startswith("c:"):
        vec = [float(v) for v in token[2:].split(",") if v]
        return Criterion.c(vec)
    if lowered.startswith("gamma:"):
        return Criterion.gamma(float(token.split(":", 1)[1]))
    if lowered.startswith("compound:"):
        parts = token.split(":", 1)[1].split(",")
        if len(parts) != 3:
            raise WrongDimension("compound syntax is compound:nu,first,second")
        nu = float(parts[0])
        subs = []
        for p in parts[1:]:
            key = p.strip().lower()
            if key not in _SIMPLE_CRITERIA:
                raise WrongDimension("compound components must be A, D, LogD or E")
            subs.append(_SIMPLE_CRITERIA[key]())
        return Criterion.compound(nu, subs[0], subs[1])
    raise WrongDimension(f"cannot parse criterion {text!r}")


def criterion_to_string(crit: Criterion) -> str:
    if crit.kind == "A":
        return "A" if crit.weight is None else "A:weighted"
    if crit.kind in ("D", "LogD", "E"):
        return crit.kind if crit.kind != "LogD" else "LogD"
    if crit.kind == "C":
        return "c:" + ",".join(f"{round_float(v):g}" for v in crit.direction)
    if crit.kind == "Gamma":
        return f"gamma:{round_float(crit.exponent):g}"
    if crit.kind == "Compound":
        return (
            f"compound:{round_float(crit.nu):g},"
            f"{criterion_to_string(crit.first)},{criterion_to_string(crit.second)}"
        )
    raise WrongDimension(f"unknown criterion kind {crit.kind!r}")


def criterion_to_json(crit: Criterion) -> dict:
    out: dict = {"kind": crit.kind}
    if crit.weight is not None:
        out["weight"] = fisher_to_json(crit.weight)
    if crit.direction is not None:
        out["direction"] = [float(v) for v in crit.direction]
    if crit.exponent is not None:
        out["exponent"] = float(crit.exponent)
    if crit.nu is not None:
        out["nu"] = float(crit.nu)
        out["first"] = criterion_to_json(crit.first)
        out["second"] = criterion_to_json(crit.second)
    return out


def _fmt(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf"
    return f"{x:.{SIGNIFICANT_DIGITS}g}"


def curves_to_csv(rows: np.ndarray) -> str:
    lines = ["r2,eta_A,eta_D,eta_E,eta_ST"]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def efficiency_report_to_csv(report) -> str:
    lines = ["design,criterion,value,efficiency"]
    for row in report.rows:
        lines.append(
            f"{row.design},{row.criterion},{_fmt(row.value)},{_fmt(row.efficiency)}"
        )
    return "\n".join(lines) + "\n"


def efficiency_report_to_json(report) -> dict:
    return {
        "rows": [
            {
                "design": row.design,
                "criterion": row.criterion,
                "value": row.value,
                "efficiency": row.efficiency,
            }
            for row in report.rows
        ]
    }


def optimal_result_to_json(result) -> dict:
    return {
        "criterion": criterion_to_json(result.criterion),
        "value": result.value,
        "fisher": fisher_to_json(result.fisher),
        "design": design_to_json(result.design),
    }


def solve_report_to_json(report) -> dict:
    out = {
        "value": report.result.value,
        "gap": report.gap,
        "iterations": report.iterations,
        "converged": report.converged,
        "design": design_to_json(report.result.design),
    }
    if report.exact_gap is not None:
        out["exact_gap"] = report.exact_gap
    return out
