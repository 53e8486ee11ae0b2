"""
Numerical settings shared by the components. The defaults are the values the
library is tested with; pass a modified copy to override single values, e.g.,
``DEFAULT_SETTINGS.model_copy(update={"gram_max_n": 50_000})``.
"""

from pydantic import BaseModel, Field


class Settings(BaseModel):
    """
    Tolerances and limits of the numerical components.
    """

    gram_max_n: int = Field(
        default=30_000,
        ge=1,
        description="Largest number of observations for which a dense Gram matrix is built.",
    )
    smo_tolerance: float = Field(
        default=1e-6,
        gt=0,
        description="Stopping tolerance on the maximal KKT violation of the SVDD dual.",
    )
    smo_max_updates: int = Field(
        default=1_000_000,
        ge=1,
        description="Maximal number of pairwise updates of the SMO solver.",
    )
    support_threshold: float = Field(
        default=1e-8,
        ge=0,
        description="Dual weights below this value are treated as zero.",
    )
    prediction_tolerance: float = Field(
        default=1e-9,
        ge=0,
        description="An observation is predicted 'in' if its margin is at least minus this value.",
    )
    recompute_interval: int = Field(
        default=256,
        ge=1,
        description="RAPID recomputes its density vector from scratch every this many iterations.",
    )
    sop_max_inliers: int = Field(
        default=15,
        ge=1,
        description="Largest inlier set the exhaustive SOP solver enumerates.",
    )
    feasibility_tolerance: float = Field(
        default=1e-9,
        ge=0,
        description="Tolerance used when checking floating-point samples for SOP feasibility.",
    )

    class Config:
        frozen = True


DEFAULT_SETTINGS = Settings()
