from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..common.errors import ValidationError
from ..common.io import matrix_from_pairs, matrix_to_pairs, vector_from_pairs
from ..common.logging import get_logger
from ..controller.effects import (
    FACTOR_RESIDUAL_TOL,
    below,
    dominating_scale_bisection,
    douglas_scale,
    factor_contraction,
    random_effect,
    random_ordered_pair,
    weak_atom_bound,
    weak_atom_bound_bisection,
)
from ..controller.scenario_manager import ScenarioContext, ScenarioManager

logger = get_logger(__name__)

SCALE_AGREEMENT = 1e-6


class CheckOrderParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    M: Optional[List[List[Any]]] = Field(None, description="Given M; random pairs when omitted")
    K: Optional[List[List[Any]]] = None
    trials: int = Field(20, ge=1, le=5000)
    dim_min: int = Field(2, ge=1)
    dim_max: int = Field(8, ge=1, le=64)


class WeakAtomParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    effect: List[List[Any]] = Field(default_factory=lambda: [[1.0, 0.0], [0.0, 0.25]])
    phi: List[Any] = Field(default_factory=lambda: [2 ** -0.5, 2 ** -0.5])
    random_trials: int = Field(0, ge=0, le=5000)
    dim_max: int = Field(8, ge=2, le=64)


def _factor_row(M: np.ndarray, K: np.ndarray, ctx: ScenarioContext) -> Dict[str, Any]:
    C = factor_contraction(M, K, ctx.policy)
    norm_sq = C.norm ** 2
    bisection = dominating_scale_bisection(M, K)
    return {
        "dim": int(K.shape[1]),
        "residual": float(np.linalg.norm(C.matrix @ K - M, "fro")),
        "norm_sq": float(norm_sq),
        "bisection": float(bisection),
        "gap": float(abs(norm_sq - bisection)),
    }


def run_check_order(params: CheckOrderParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Factor M = CK and compare ||C||^2 with the bisection infimum."""
    if params.M is not None or params.K is not None:
        if params.M is None or params.K is None:
            raise ValidationError("give both M and K, or neither")
        M, K = matrix_from_pairs(params.M), matrix_from_pairs(params.K)
        row = _factor_row(M, K, ctx)
        C = factor_contraction(M, K, ctx.policy)
        return {
            "values": {**row, "douglas_scale": douglas_scale(M, K, ctx.policy)},
            "verdicts": {
                "ordered": below(M.conj().T @ M, K.conj().T @ K, ctx.policy),
                "factorised": row["residual"] <= FACTOR_RESIDUAL_TOL,
                "scale_agrees": row["gap"] <= SCALE_AGREEMENT,
            },
            "certificates": {"C": matrix_to_pairs(C.matrix)},
        }

    rows = []
    for _ in range(params.trials):
        dim = int(ctx.rng.integers(params.dim_min, max(params.dim_min, params.dim_max) + 1))
        M, K = random_ordered_pair(dim, ctx.rng)
        rows.append(_factor_row(M, K, ctx))
    series = {key: [r[key] for r in rows] for key in rows[0]}
    return {
        "values": {
            "trials": len(rows),
            "max_residual": max(series["residual"]),
            "max_gap": max(series["gap"]),
        },
        "verdicts": {
            "factorised": max(series["residual"]) <= FACTOR_RESIDUAL_TOL,
            "scale_agrees": max(series["gap"]) <= SCALE_AGREEMENT,
        },
        "series": series,
    }


def run_weak_atom(params: WeakAtomParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Closed-form weak-atom bound against the bisection oracle."""
    E = matrix_from_pairs(params.effect)
    phi = vector_from_pairs(params.phi)
    value = weak_atom_bound(E, phi, ctx.policy)
    oracle = weak_atom_bound_bisection(E, phi)
    values: Dict[str, Any] = {"value": value, "bisection": oracle}
    verdicts = {"agrees": abs(value - oracle) <= SCALE_AGREEMENT}
    series = None
    if params.random_trials:
        gaps = []
        dims = []
        for _ in range(params.random_trials):
            dim = int(ctx.rng.integers(2, params.dim_max + 1))
            F = random_effect(dim, ctx.rng)
            v = ctx.rng.standard_normal(dim) + 1j * ctx.rng.standard_normal(dim)
            v /= np.linalg.norm(v)
            gaps.append(abs(weak_atom_bound(F, v, ctx.policy) - weak_atom_bound_bisection(F, v)))
            dims.append(dim)
        values["max_random_gap"] = max(gaps)
        verdicts["random_agree"] = max(gaps) <= SCALE_AGREEMENT
        series = {"dim": dims, "gap": gaps}
    return {"values": values, "verdicts": verdicts, "series": series}


def register_scenarios(manager: ScenarioManager) -> None:
    """Register effect-order scenarios with the manager"""
    manager.register(
        "check-order",
        "factorisation M = CK with ||C||^2 against the dominating-scale bisection",
        CheckOrderParams,
        run_check_order,
    )
    manager.register(
        "weak-atom",
        "largest weak atom below an effect, closed form against bisection",
        WeakAtomParams,
        run_weak_atom,
    )
    logger.debug("Effect scenarios registered")
