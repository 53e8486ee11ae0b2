import typing

from pydantic import BaseModel, Field, model_validator

from .data_schema import IndexSet
from .prefilter import PrefilterResult


class SampleSelection(BaseModel):
    """
    A sample S of the inliers together with its provenance.
    """

    sample: IndexSet
    prefilter: PrefilterResult
    method: str = Field(..., description="Identifier of the sampling method, e.g., 'rapid'.")
    seed: typing.Optional[int] = None
    t_samp: float = Field(default=0.0, ge=0, description="Wall-clock seconds spent sampling.")
    parameters: typing.Dict[str, typing.Any] = Field(default_factory=dict)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def _sample_of_inliers(self):
        if len(self.sample) == 0:
            msg = "A sample must contain at least one observation."
            raise ValueError(msg)
        if not self.sample.issubset(self.prefilter.inliers):
            msg = f"Sample {self.sample} is not a subset of the inliers {self.prefilter.inliers}."
            raise ValueError(msg)
        return self

    @property
    def size(self) -> int:
        return len(self.sample)

    @property
    def ratio(self) -> float:
        """
        |S| / N.
        """
        return self.size / self.sample.n

    def with_timing(self, t_samp: float) -> "SampleSelection":
        return self.model_copy(update={"t_samp": t_samp})
