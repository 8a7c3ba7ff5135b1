from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ServiceConfig:
    """Which models to serve and how.

    One instance serves one fluency model and one semantic model; run two
    instances to give filtering and evaluation different fluency models.
    """

    fluency_model_id: str
    semantic_model_id: str
    device: str = "cpu"
    max_batch: int = 64
    port: int = 8081

    def __post_init__(self) -> None:
        if not self.fluency_model_id or not self.semantic_model_id:
            raise ValueError("both model ids are required")
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
