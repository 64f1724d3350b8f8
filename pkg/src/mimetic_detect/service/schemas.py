"""Pydantic request/response models for the detection service.

Image payloads travel as base64-encoded PNG or PGM bytes; numeric results
mirror the dataclasses of the core package one-to-one so CLI and service
clients see identical JSON.
"""

from pydantic import BaseModel, Field

ORDERS = (2, 4, 6, 8)


class DetectRequest(BaseModel):
    image_b64: str
    order: int = Field(2, description="mimetic order k")
    tau: float | None = Field(None, gt=0.0, description="detection threshold")


class DetectResponse(BaseModel):
    k: int
    e_h1: float
    e_l2: float
    t: float
    tau: float | None
    verdict: str


class CalibrateRequest(BaseModel):
    images_b64: list[str]
    order: int = 2
    alpha: float = Field(..., gt=0.0, lt=1.0)


class CalibrationModel(BaseModel):
    k: int
    alpha: float
    tau: float
    n: int
    ts: list[float]


class Table1Request(BaseModel):
    image_b64: str
    eps: float = Field(16.0 / 255.0, ge=0.0)
    seeds: list[int] = [1, 2, 3, 4, 5]
    orders: list[int] = [2, 4, 6, 8]


class Table1RowModel(BaseModel):
    k: int
    t_clean: float
    t_adv_mean: float
    t_adv_std: float
    t_low: float
    ratio_adv: float
    ratio_low: float
    seeds: list[int]


class Table1Response(BaseModel):
    rows: list[Table1RowModel]
    csv: str


class GradmapRequest(BaseModel):
    image_b64: str
    order: int = 2
    eps: float = Field(16.0 / 255.0, gt=0.0)
    seed: int = 1


class MapModel(BaseModel):
    pgm_b64: str
    scale: float
    offset: float = 0.0


class GradmapResponse(BaseModel):
    order: int
    eps: float
    seed: int
    clean: MapModel
    adversarial: MapModel
    excess: MapModel


class ScoredImage(BaseModel):
    name: str
    image_b64: str


class EvalRequest(BaseModel):
    clean: list[ScoredImage]
    adversarial: list[ScoredImage]
    order: int = 2
    tau: float | None = Field(None, gt=0.0)


class ScoreModel(BaseModel):
    label: str
    name: str
    t: float


class EvalResponse(BaseModel):
    scores: list[ScoreModel]
    auc: float
    tau: float | None
    fpr: float | None
    tpr: float | None


class HealthResponse(BaseModel):
    status: str
    version: str
