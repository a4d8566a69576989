from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..common.io import matrix_to_pairs
from ..common.logging import get_logger
from ..controller.incompat import (
    QUBIT_SLACK_TOL,
    binary_joint_effects,
    binary_joint_feasibility,
    jm_threshold,
    qubit_compat_slack,
    region_sample,
)
from ..controller.lattice_models import cyclic_lattice
from ..controller.observables import coarse_grain, random_povm, smeared_qubit_observable
from ..controller.scenario_manager import ScenarioContext, ScenarioManager
from ..models.observables import BinaryObservable

logger = get_logger(__name__)

Oracle = Literal["auto", "closed_form", "dykstra"]


class JmFeasibleParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pair: Literal["smeared", "random"] = "smeared"
    sharpness: float = Field(1.0, ge=0.0, le=1.0, description="Sharpness of both qubit observables")
    second_sharpness: Optional[float] = Field(None, ge=0.0, le=1.0)
    dim: int = Field(2, ge=2, le=32, description="Dimension for random pairs")


class QubitRegionParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid: int = Field(21, ge=2, le=401)
    trivial_grid: int = Field(7, ge=2, le=41)
    oracle: Oracle = "auto"


class NoiseThresholdParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: Literal["qubit", "lattice"] = "qubit"
    d: int = Field(2, ge=2, le=16, description="Lattice size for the lattice model")
    trivial_grid: int = Field(11, ge=2, le=41)
    oracle: Oracle = "auto"
    precision: float = Field(1e-4, gt=0, le=0.1)


def _sharp_qubit_pair() -> Tuple[BinaryObservable, BinaryObservable]:
    Z = smeared_qubit_observable("z", 1.0)
    X = smeared_qubit_observable("x", 1.0)
    return BinaryObservable(yes_effect=Z.effects[0]), BinaryObservable(yes_effect=X.effects[0])


def run_jm_feasible(params: JmFeasibleParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Binary joint measurability by Dykstra, cross-checked by the qubit closed form."""
    if params.pair == "smeared":
        mu = params.sharpness if params.second_sharpness is None else params.second_sharpness
        Q1 = BinaryObservable(yes_effect=smeared_qubit_observable("z", params.sharpness).effects[0])
        Q2 = BinaryObservable(yes_effect=smeared_qubit_observable("x", mu).effects[0])
    else:
        Q1 = coarse_grain(random_povm(params.dim, 2, ctx.rng), [0])
        Q2 = coarse_grain(random_povm(params.dim, 2, ctx.rng), [0])

    result = binary_joint_feasibility(Q1, Q2, ctx.oracle)
    values: Dict[str, Any] = {"oracle": result.stats()}
    verdicts: Dict[str, Any] = {"jointly_measurable": result.feasible if result.status.decisive else None}
    certificates: Dict[str, Any] = {}
    if result.feasible:
        joint = binary_joint_effects(Q1.yes_effect.matrix, Q2.yes_effect.matrix, result.iterate, result.tol)
        certificates["joint"] = {f"{a}{b}": matrix_to_pairs(M) for (a, b), M in joint.items()}
    if Q1.dim == 2:
        slack = qubit_compat_slack(Q1.yes_effect, Q2.yes_effect)
        values["closed_form_slack"] = slack
        compatible = slack >= -QUBIT_SLACK_TOL
        verdicts["closed_form"] = compatible
        if result.status.decisive:
            verdicts["oracles_agree"] = compatible == result.feasible or abs(slack) <= 1e-6
    return {
        "values": values,
        "verdicts": verdicts,
        "certificates": certificates,
        "status": "ok" if result.status.decisive else "inconclusive",
    }


def run_qubit_region(params: QubitRegionParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Joint-measurability region of noisy sharp sigma_z / sigma_x."""
    Q1, Q2 = _sharp_qubit_pair()
    region = region_sample(Q1, Q2, params.grid, params.trivial_grid, params.oracle, ctx.oracle)
    status = np.array(region.status)
    lambdas = np.array(region.lambdas)
    diagonal = [lam for i, lam in enumerate(lambdas) if status[i, i] == 1]
    below_diagonal = status[np.add.outer(lambdas, lambdas) <= 1 + 1e-12]
    frame = region.to_frame()
    return {
        "values": {
            "grid": params.grid,
            "diagonal_edge": float(max(diagonal)),
            "inconclusive_cells": int(region.inconclusive.sum()),
            "oracle": region.oracle,
        },
        "verdicts": {"triangle_feasible": bool(np.all(below_diagonal == 1))},
        "series": {col: frame[col].tolist() for col in frame.columns},
        "status": "inconclusive" if region.inconclusive.any() else "ok",
    }


def _threshold_pair(params: NoiseThresholdParams):
    if params.model == "qubit":
        return _sharp_qubit_pair()
    lattice = cyclic_lattice(params.d)
    return coarse_grain(lattice.position, [0]), coarse_grain(lattice.momentum, [0])


def run_noise_threshold(params: NoiseThresholdParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Largest equal noise parameter at which the pair becomes jointly measurable."""
    Q1, Q2 = _threshold_pair(params)
    result = jm_threshold(Q1, Q2, params.trivial_grid, params.oracle, ctx.oracle, params.precision)
    return {
        "values": result.model_dump(mode="json"),
        "verdicts": {"maximally_incompatible": result.bracket[1] <= 0.5 + params.precision},
        "status": "ok" if result.status == "decided" else "inconclusive",
    }


def register_scenarios(manager: ScenarioManager) -> None:
    """Register incompatibility scenarios with the manager"""
    manager.register(
        "jm-feasible",
        "binary joint measurability, Dykstra oracle against the qubit inequality",
        JmFeasibleParams,
        run_jm_feasible,
    )
    manager.register(
        "qubit-region",
        "(lambda, mu) region where noisy sigma_z and sigma_x are jointly measurable",
        QubitRegionParams,
        run_qubit_region,
    )
    manager.register(
        "noise-threshold",
        "j(E1, E2): largest noise parameter with jointly measurable noisy versions",
        NoiseThresholdParams,
        run_noise_threshold,
    )
    logger.debug("Incompatibility scenarios registered")
