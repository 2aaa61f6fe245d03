import hashlib
import json
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import config

Regularizer = Literal["tv", "fetgv", "lapfetgv", "gridtgv"]


class TgvParams(BaseModel):
    """Regularization weights of the second-order functionals."""
    model_config = ConfigDict(frozen=True)

    alpha0: float = Field(0.0, ge=0.0, description="Weight of the second-order (auxiliary field) terms")
    alpha1: float = Field(..., ge=0.0, description="Weight of the first-order (jump) term")


class PenaltyParams(BaseModel):
    """Augmented Lagrangian penalties, one per split variable."""
    model_config = ConfigDict(frozen=True)

    lambda0: float = Field(config.DEFAULT_PENALTY, gt=0.0, description="Penalty of the d0 (jump) constraint")
    lambda1: float = Field(config.DEFAULT_PENALTY, gt=0.0, description="Penalty of the D1 (cell gradient) constraint")
    lambda2: float = Field(config.DEFAULT_PENALTY, gt=0.0, description="Penalty of the d2 (edge jump of w) constraint")

    @classmethod
    def uniform(cls, value: float) -> "PenaltyParams":
        return cls(lambda0=value, lambda1=value, lambda2=value)

    def slot(self, index: int) -> float:
        return (self.lambda0, self.lambda1, self.lambda2)[index]


class StopCriteria(BaseModel):
    """Residual-based stopping rule of the split Bregman loop."""
    model_config = ConfigDict(frozen=True)

    tol_primal: float = Field(config.DEFAULT_TOL, gt=0.0, description="Threshold on the quadrature-weighted primal residual")
    tol_dual: float = Field(config.DEFAULT_TOL, gt=0.0, description="Threshold on the dual residual")
    max_iter: int = Field(config.DEFAULT_MAX_ITER, ge=1, description="Iteration budget")
    log_every: int = Field(100, ge=1, description="Debug log cadence in iterations")

    @classmethod
    def uniform(cls, tol: float, max_iter: int = config.DEFAULT_MAX_ITER) -> "StopCriteria":
        return cls(tol_primal=tol, tol_dual=tol, max_iter=max_iter)


class SsimConfig(BaseModel):
    """Stabilization constants and window of the (M)SSIM score."""
    model_config = ConfigDict(frozen=True)

    c1: float = Field(config.DEFAULT_SSIM_C1, gt=0.0, description="Luminance stabilizer C1")
    c2: float = Field(config.DEFAULT_SSIM_C2, gt=0.0, description="Contrast stabilizer C2 (C3 = C2/2 implied)")
    mode: Literal["mesh", "grid"] = Field("mesh", description="Dual-graph hop windows or pixel squares")
    radius: int = Field(config.DEFAULT_SSIM_RADIUS, ge=0, description="Hop radius in the dual graph (mesh mode)")
    window: int = Field(config.DEFAULT_SSIM_WINDOW, ge=1, description="Square side in pixels (grid mode)")

    @field_validator("window")
    @classmethod
    def _odd_window(cls, v: int) -> int:
        if v % 2 != 1:
            raise ValueError("window side must be odd")
        return v

    def fingerprint(self) -> str:
        """Stable hash of the settings that change the score."""
        payload = {"c1": self.c1, "c2": self.c2, "mode": self.mode}
        payload["size"] = self.radius if self.mode == "mesh" else self.window
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


class SolveReport(BaseModel):
    """Diagnostics of one split Bregman run."""

    mode: str = Field(..., description="Problem variant that was solved")
    iterations: int = Field(0, ge=0)
    converged: bool = False
    primal_residual_norm: float = float("nan")
    dual_residual_norm: float = float("nan")
    final_objective: float = float("nan")
    primal_history: List[float] = Field(default_factory=list)
    dual_history: List[float] = Field(default_factory=list)
    objective_history: List[float] = Field(default_factory=list)
    objective_trend: Optional[float] = Field(None, description="Mean objective change per iteration over the last 10% of iterations")
    residual_norm: str = Field("quadrature-weighted l2 (primal), euclidean l2 in coefficient space (dual)")
    wall_time: float = 0.0
    penalties: Optional[PenaltyParams] = None
    stop: Optional[StopCriteria] = None
    config_fingerprint: str = ""

    @model_validator(mode="after")
    def _histories_match(self):
        if len(self.primal_history) != self.iterations or len(self.dual_history) != self.iterations:
            raise ValueError("residual histories must have one entry per iteration")
        return self


class ParamSearchSpec(BaseModel):
    """Search box and budget for MSSIM-driven parameter tuning."""

    regularizer: Regularizer = "fetgv"
    alpha1_bounds: Tuple[float, float] = Field((1e-3, 1.0), description="Search interval for alpha1 (searched on log10 scale)")
    alpha0_bounds: Tuple[float, float] = Field((1e-3, 1.0), description="Search interval for alpha0 (searched on log10 scale)")
    max_evaluations: int = Field(20, ge=1)
    min_width_log10: float = Field(0.05, gt=0.0, description="Stop once every log10 interval is narrower than this")
    penalties: PenaltyParams = Field(default_factory=PenaltyParams)
    stop: StopCriteria = Field(default_factory=StopCriteria)
    ssim: SsimConfig = Field(default_factory=SsimConfig)

    @field_validator("alpha1_bounds", "alpha0_bounds")
    @classmethod
    def _ordered(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        lo, hi = v
        if not (0.0 < lo < hi):
            raise ValueError("bounds must satisfy 0 < lower < upper")
        return v

    def fingerprint(self) -> str:
        blob = self.model_dump_json().encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


class TuneEvaluation(BaseModel):
    """One point of the tuning trace."""

    alpha1: float
    alpha0: float
    mssim: Optional[float] = None
    iterations: int = 0
    converged: bool = False
    error: Optional[str] = None


class TuneResult(BaseModel):
    alpha1: float
    alpha0: float
    best_mssim: float
    trace: List[TuneEvaluation] = Field(default_factory=list)
    ssim_fingerprint: str = ""


__all__ = [
    "Regularizer",
    "TgvParams",
    "PenaltyParams",
    "StopCriteria",
    "SsimConfig",
    "SolveReport",
    "ParamSearchSpec",
    "TuneEvaluation",
    "TuneResult",
]
