from itertools import chain, combinations
from typing import Any, Dict, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..common.errors import ValidationError
from ..common.logging import get_logger
from ..controller.lattice_models import (
    CONTROL_FACTOR,
    OSCILLATOR_MAX_TRUNCATION,
    convolution_jauch,
    haversine_trend,
    is_prime,
    number_phase_trend,
    oscillator_trend,
    periodic_commutation,
    periodic_sets,
    support_uncertainty_dimension,
    support_uncertainty_rule,
    trend_non_increasing,
)
from ..controller.scenario_manager import ScenarioContext, ScenarioManager
from ..models.lattice import FunctionOnGrid, TrendReport

logger = get_logger(__name__)


class HaversineTrendParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    d_list: List[int] = Field(default_factory=lambda: [32, 40, 58, 70, 116, 184])
    tol: float = Field(1e-4, gt=0, le=0.1, description="Bisection width for c_d")
    include_control: bool = True


class NumberPhaseTrendParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    N_list: List[int] = Field(default_factory=lambda: [8, 16, 32, 64])
    interval: Tuple[float, float] = (0.0, 3.141592653589793)
    n: int = Field(0, ge=0)


class OscillatorTrendParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    N_list: List[int] = Field(default_factory=lambda: [8, 16, 32, 64])
    interval: Tuple[float, float] = (-1.0, 1.0)
    n: int = Field(0, ge=0)


class ConvolutionJauchParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    d: int = Field(7, ge=2, le=64)
    mu: List[float] = Field(default_factory=lambda: [0.5, 0.5], description="pmf on 0, 1, ...; zero-padded to d")
    X: List[int] = Field(default_factory=lambda: [0, 1])
    Y: List[int] = Field(default_factory=lambda: [0, 1, 2])

    @field_validator("mu")
    @classmethod
    def check_pmf(cls, v: List[float]) -> List[float]:
        if not v or any(x < 0 for x in v):
            raise ValueError("mu must be a non-empty list of non-negative weights")
        return v


class PrimeUncertaintyParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    d: int = Field(5, ge=2, le=11)


class PeriodicCommutationParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    a: int = Field(2, ge=1, le=32)
    b: int = Field(3, ge=1, le=32)


def _trend_outcome(report: TrendReport) -> Dict[str, Any]:
    return {
        "values": {"measurements": report.measurements, "notes": report.notes},
        "verdicts": {"non_increasing": report.verdict},
        "series": report.series(),
    }


def run_haversine_trend(params: HaversineTrendParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Compressed haversine pair: overlapping supports, shrinking joint lower bound."""
    report = haversine_trend(params.d_list, params.tol, ctx.policy, ctx.oracle, params.include_control)
    outcome = _trend_outcome(report)
    outcome["verdicts"]["overlap_nontrivial"] = all(k > 0 for k in report.extra["overlap_dim"])
    decided = [v for v, ok in zip(report.measurements, report.extra["decided"]) if ok]
    outcome["verdicts"]["non_increasing"] = trend_non_increasing(decided)
    if params.include_control:
        outcome["verdicts"]["control_dominates"] = (
            min(report.extra["control"]) >= CONTROL_FACTOR * report.measurements[-1]
        )
    outcome["verdicts"]["trend"] = report.verdict
    if any("undecided" in note for note in report.notes):
        outcome["status"] = "inconclusive"
    return outcome


def run_number_phase_trend(params: NumberPhaseTrendParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Weak-atom bound of a number state under a truncated phase interval."""
    report = number_phase_trend(params.N_list, params.interval, params.n, ctx.policy)
    outcome = _trend_outcome(report)
    a, b = params.interval
    ceiling = (b - a) / (2 * 3.141592653589793)
    outcome["verdicts"]["below_diagonal"] = all(v <= ceiling + 1e-12 for v in report.measurements)
    return outcome


def run_oscillator_trend(params: OscillatorTrendParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Weak-atom bound of a number state under a position interval, by quadrature."""
    cap = ctx.settings.OSCILLATOR_MAX_TRUNCATION or OSCILLATOR_MAX_TRUNCATION
    report = oscillator_trend(params.N_list, params.interval, params.n, ctx.policy, cap)
    outcome = _trend_outcome(report)
    outcome["verdicts"]["below_diagonal"] = all(
        v <= diag + 1e-9 for v, diag in zip(report.measurements, report.extra["diagonal"])
    )
    return outcome


def run_convolution_jauch(params: ConvolutionJauchParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Smeared position cell vs momentum cell on Z_d."""
    if len(params.mu) > params.d:
        raise ValidationError(f"pmf has {len(params.mu)} weights for d = {params.d}")
    values = params.mu + [0.0] * (params.d - len(params.mu))
    mu = FunctionOnGrid(values=values, grid="cyclic")
    check = convolution_jauch(params.d, mu, params.X, params.Y, ctx.policy)
    return {
        "values": check.model_dump(mode="json"),
        "verdicts": {
            "support_bound": check.support_bound,
            "disjoint": check.disjoint,
            "rule_agrees": None if check.predicted_disjoint is None else check.predicted_disjoint == check.disjoint,
        },
    }


def _subsets(d: int):
    return chain.from_iterable(combinations(range(d), r) for r in range(d + 1))


def run_prime_uncertainty(params: PrimeUncertaintyParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """Exhaustive check of the prime-d support rule for Q(X) ∧ P(Y)."""
    d = params.d
    nonzero = 0
    dimension_matches = True
    pairs = 0
    for X in _subsets(d):
        for Y in _subsets(d):
            pairs += 1
            nonzero += support_uncertainty_rule(d, X, Y, ctx.policy)
            if is_prime(d):
                dim = support_uncertainty_dimension(d, X, Y, ctx.policy)
                dimension_matches &= dim == max(0, len(X) + len(Y) - d)
    return {
        "values": {"d": d, "pairs": pairs, "nonzero_meets": nonzero, "prime": is_prime(d)},
        "verdicts": {
            "rule_holds": True if is_prime(d) else None,
            "dimension_matches": dimension_matches if is_prime(d) else None,
        },
    }


def run_periodic_commutation(params: PeriodicCommutationParams, ctx: ScenarioContext) -> Dict[str, Any]:
    """All a-periodic position sets against all b-periodic momentum sets on Z_ab."""
    d = params.a * params.b
    results = [
        periodic_commutation(d, params.a, params.b, X, Y)
        for X in periodic_sets(d, params.a)
        for Y in periodic_sets(d, params.b)
    ]
    return {
        "values": {"d": d, "pairs": len(results)},
        "verdicts": {"all_commute": all(results)},
    }


def register_scenarios(manager: ScenarioManager) -> None:
    """Register lattice and trend scenarios with the manager"""
    manager.register(
        "haversine-trend",
        "compressed haversine pair along d: support overlap and joint lower bound",
        HaversineTrendParams,
        run_haversine_trend,
    )
    manager.register(
        "number-phase-trend",
        "number state weak-atom bound under a truncated phase interval",
        NumberPhaseTrendParams,
        run_number_phase_trend,
    )
    manager.register(
        "convolution-jauch",
        "smeared position cell vs momentum cell: support bound and disjointness",
        ConvolutionJauchParams,
        run_convolution_jauch,
    )
    manager.register(
        "prime-uncertainty",
        "prime-d support rule |X| + |Y| >= d + 1 for Q(X) ∧ P(Y), exhaustive",
        PrimeUncertaintyParams,
        run_prime_uncertainty,
    )
    manager.register(
        "periodic-commutation",
        "periodic position and momentum sets on Z_ab commute",
        PeriodicCommutationParams,
        run_periodic_commutation,
    )
    manager.register(
        "oscillator-trend",
        "oscillator number state weak-atom bound under a position interval",
        OscillatorTrendParams,
        run_oscillator_trend,
    )
    logger.debug("Lattice scenarios registered")
