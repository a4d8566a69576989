from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..common.logging import get_logger
from ..controller.effects import effects_disjoint
from ..controller.incompat import joint_lower_bound, noise_add
from ..controller.lattice_models import cyclic_lattice, multislit
from ..controller.numerics import numerical_rank
from ..controller.observables import (
    coarse_grain,
    com_observables,
    complementary_family,
    dilation_complementarity,
    direct_sum_observable,
    minimal_dilation,
    random_povm,
    strong_complementarity,
)
from ..controller.scenario_manager import ScenarioContext, ScenarioManager
from ..models.observables import DiscreteObservable, OutcomeFamily

logger = get_logger(__name__)

RECONSTRUCTION_TOL = 1e-9


class ComplementarityParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: Literal["lattice", "random"] = "lattice"
    d: int = Field(3, ge=2, le=64)
    n_outcomes: int = Field(3, ge=2, le=16)
    k_max: Optional[int] = Field(None, ge=1, description="Largest subset size in the outcome family")
    strong: bool = Field(False, description="Also check against complements")


class DilationCheckParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pairs: int = Field(20, ge=1, le=2000)
    dim_min: int = Field(2, ge=2)
    dim_max: int = Field(6, ge=2, le=32)
    n_outcomes: int = Field(3, ge=2, le=8)
    low_rank: bool = Field(True, description="Draw rank-1 effects so that disjoint pairs occur")


class MultislitParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    s: int = Field(3, ge=2, le=16)
    m: int = Field(4, ge=1, le=16)
    direct_sum: bool = True
    noise_levels: List[float] = Field(default_factory=lambda: [0.01, 0.1, 0.5])
    noise_lower_bound: bool = Field(False, description="Also bound the joint lower bound of one noisy pair")


def _pair(params: ComplementarityParams, ctx: ScenarioContext):
    if params.model == "lattice":
        lattice = cyclic_lattice(params.d)
        return lattice.position, lattice.momentum
    E = random_povm(params.d, params.n_outcomes, ctx.rng, rank=1)
    F = random_povm(params.d, params.n_outcomes, ctx.rng, rank=1)
    return E, F


def run_complementarity(params: ComplementarityParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Disjointness verdicts for every pair of the default outcome families."""
    E, F = _pair(params, ctx)
    k_max = params.k_max or ctx.settings.OUTCOME_FAMILY_K_MAX
    A0 = OutcomeFamily.default(E.labels, k_max)
    B0 = OutcomeFamily.default(F.labels, k_max)
    verdicts = complementary_family(E, F, A0, B0, ctx.policy)
    result: Dict[str, Any] = {"complementary": all(v.disjoint for v in verdicts)}
    if params.strong:
        result["strongly_complementary"] = all(
            all(strong_complementarity(E, F, v.pair[0], v.pair[1], ctx.policy)) for v in verdicts
        )
    return {
        "values": {
            "pairs": len(verdicts),
            "disjoint_pairs": sum(v.disjoint for v in verdicts),
            "boundary_pairs": sum(v.boundary for v in verdicts),
        },
        "verdicts": result,
        "certificates": {"pairs": [v.model_dump(mode="json") for v in verdicts]},
    }


def _minimal_rank(F: DiscreteObservable, ctx: ScenarioContext) -> int:
    return sum(numerical_rank(e, ctx.policy) for e in F.effects)


def run_dilation_check(params: DilationCheckParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Support-intersection verdicts against the dilation criterion on random pairs."""
    rank = 1 if params.low_rank else None
    series: Dict[str, List[Any]] = {
        "dim": [], "agree": [], "disjoint_pairs": [], "reconstruction_error": [], "minimal": []
    }
    for _ in range(params.pairs):
        dim = int(ctx.rng.integers(params.dim_min, max(params.dim_min, params.dim_max) + 1))
        n = max(params.n_outcomes, dim)
        E = random_povm(dim, n, ctx.rng, rank=rank)
        F = random_povm(dim, n, ctx.rng, rank=rank)
        dil_E, dil_F = minimal_dilation(E, ctx.policy), minimal_dilation(F, ctx.policy)
        singles_E, singles_F = OutcomeFamily.singletons(E.labels), OutcomeFamily.singletons(F.labels)
        support = complementary_family(E, F, singles_E, singles_F, ctx.policy)
        agree = all(
            dilation_complementarity(E, F, v.pair[0], v.pair[1], dil_E, dil_F, ctx.policy).disjoint == v.disjoint
            for v in support
        )
        series["dim"].append(dim)
        series["agree"].append(agree)
        series["disjoint_pairs"].append(sum(v.disjoint for v in support))
        series["reconstruction_error"].append(
            max(dil_E.reconstruction_error(E), dil_F.reconstruction_error(F))
        )
        series["minimal"].append(
            dil_E.dilation_dim == _minimal_rank(E, ctx) and dil_F.dilation_dim == _minimal_rank(F, ctx)
        )
    return {
        "values": {
            "pairs": params.pairs,
            "max_reconstruction_error": max(series["reconstruction_error"]),
            "disjoint_pairs": int(sum(series["disjoint_pairs"])),
        },
        "verdicts": {
            "criteria_agree": all(series["agree"]),
            "reconstructs": max(series["reconstruction_error"]) <= RECONSTRUCTION_TOL,
            "minimal": all(series["minimal"]),
        },
        "series": series,
    }


def run_multislit(params: MultislitParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Slit index against periodic momentum class, with direct sums and noise."""
    Q, P = multislit(params.s, params.m)
    singles = OutcomeFamily.singletons(Q.labels)
    verdicts = complementary_family(Q, P, singles, singles, ctx.policy)
    com = com_observables(Q, P, ctx.policy)
    result: Dict[str, Any] = {
        "all_disjoint": all(v.disjoint for v in verdicts),
        "totally_noncommuting": com.rank == 0,
    }
    values: Dict[str, Any] = {"dim": Q.dim, "pairs": len(verdicts), "com_rank": com.rank}

    if params.direct_sum:
        Q2, P2 = direct_sum_observable(Q, Q), direct_sum_observable(P, P)
        doubled = complementary_family(Q2, P2, singles, singles, ctx.policy)
        result["direct_sum_disjoint"] = all(v.disjoint for v in doubled)

    broken = []
    for lam in params.noise_levels:
        for p in params.noise_levels:
            E = noise_add(coarse_grain(Q, [0]).yes_effect, lam, p)
            F = noise_add(coarse_grain(P, [0]).yes_effect, lam, p)
            broken.append(not effects_disjoint(E, F, ctx.policy))
    result["noise_breaks_disjointness"] = all(broken)

    if params.noise_lower_bound and params.noise_levels:
        lam = p = params.noise_levels[0]
        E = noise_add(coarse_grain(Q, [0]).yes_effect, lam, p)
        F = noise_add(coarse_grain(P, [0]).yes_effect, lam, p)
        bound = joint_lower_bound(E, F, 1e-3, ctx.policy, ctx.oracle, strict=False)
        values["noisy_lower_bound"] = bound.value
        result["noisy_lower_bound_positive"] = bound.value >= lam * min(p, 1 - p) * Q.dim * 0.5

    return {
        "values": values,
        "verdicts": result,
        "certificates": {"max_overlap_cosine": max(v.overlap_cosine for v in verdicts)},
    }


def register_scenarios(manager: ScenarioManager) -> None:
    """Register observable scenarios with the manager"""
    manager.register(
        "complementarity",
        "disjointness of coarse-grained effects over outcome families",
        ComplementarityParams,
        run_complementarity,
    )
    manager.register(
        "dilation-check",
        "support-intersection verdicts against minimal Naimark dilations",
        DilationCheckParams,
        run_dilation_check,
    )
    manager.register(
        "multislit",
        "slit index vs periodic momentum class: complementarity and total noncommutativity",
        MultislitParams,
        run_multislit,
    )
    logger.debug("Observable scenarios registered")
