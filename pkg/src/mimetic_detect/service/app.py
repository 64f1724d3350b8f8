"""FastAPI wrapper around the detector core.

A resident service amortizes operator construction across requests: the
per-shape gradient/weight pairs are built once and shared read-only, so
detection cost stays a single sparse mat-vec per image.
"""

import base64
import binascii

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..detector import calibrate, gradient_magnitude_map, statistic
from ..evaluate import evaluate_corpus
from ..experiments import prepare_image, rows_to_csv, table1_rows
from ..imaging import ImageDecodeError, decode_image, encode_pgm, to_grayscale
from ..perturb import apply_and_clip, sign_noise
from . import schemas

ORDERS = schemas.ORDERS


def _require_order(k: int) -> int:
    if k not in ORDERS:
        raise HTTPException(422, f"order must be one of {list(ORDERS)}, got {k}")
    return k


def _decode_b64_image(payload: str, grayscale: bool = True):
    try:
        data = base64.b64decode(payload, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise HTTPException(400, f"invalid base64 image payload: {exc}") from exc
    try:
        img = decode_image(data)
    except ImageDecodeError as exc:
        raise HTTPException(400, f"cannot decode image: {exc}") from exc
    if grayscale and img.ndim == 3:
        img = to_grayscale(img)
    return img


def _b64_pgm(img) -> str:
    return base64.b64encode(encode_pgm(img)).decode("ascii")


def create_app() -> FastAPI:
    app = FastAPI(
        title="mimetic-detect",
        version=__version__,
        description="Gradient-energy screening of adversarially perturbed images",
    )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/detect", response_model=schemas.DetectResponse)
    def detect(req: schemas.DetectRequest):
        _require_order(req.order)
        img = _decode_b64_image(req.image_b64)
        try:
            report = statistic(img, req.order, tau=req.tau)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        return schemas.DetectResponse(**report.to_dict())

    @app.post("/calibrate", response_model=schemas.CalibrationModel)
    def run_calibration(req: schemas.CalibrateRequest):
        _require_order(req.order)
        ts = []
        for payload in req.images_b64:
            img = _decode_b64_image(payload)
            try:
                ts.append(statistic(img, req.order).t)
            except ValueError as exc:
                raise HTTPException(422, str(exc)) from exc
        try:
            cal = calibrate(ts, req.alpha, req.order)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        return schemas.CalibrationModel(**cal.to_dict())

    @app.post("/table1", response_model=schemas.Table1Response)
    def reproduce_table1(req: schemas.Table1Request):
        for k in req.orders:
            _require_order(k)
        img = prepare_image(_decode_b64_image(req.image_b64))
        try:
            rows = table1_rows(img, eps=req.eps, seeds=req.seeds, orders=req.orders)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        return schemas.Table1Response(
            rows=[schemas.Table1RowModel(**r.to_dict()) for r in rows],
            csv=rows_to_csv(rows),
        )

    @app.post("/gradmap", response_model=schemas.GradmapResponse)
    def gradmap(req: schemas.GradmapRequest):
        _require_order(req.order)
        img = _decode_b64_image(req.image_b64)
        h, w = img.shape
        adv = apply_and_clip(img, sign_noise(h, w, req.eps, req.seed))
        try:
            clean01, clean_scale = gradient_magnitude_map(img, req.order)
            adv01, adv_scale = gradient_magnitude_map(adv, req.order)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        excess = adv01 * adv_scale - clean01 * clean_scale
        lo, hi = float(excess.min()), float(excess.max())
        span = hi - lo
        excess01 = (excess - lo) / span if span > 0 else excess * 0.0
        return schemas.GradmapResponse(
            order=req.order,
            eps=req.eps,
            seed=req.seed,
            clean=schemas.MapModel(pgm_b64=_b64_pgm(clean01), scale=clean_scale),
            adversarial=schemas.MapModel(pgm_b64=_b64_pgm(adv01), scale=adv_scale),
            excess=schemas.MapModel(pgm_b64=_b64_pgm(excess01), scale=span, offset=lo),
        )

    @app.post("/eval", response_model=schemas.EvalResponse)
    def evaluate(req: schemas.EvalRequest):
        _require_order(req.order)
        if not req.clean or not req.adversarial:
            raise HTTPException(422, "both corpora must be non-empty")

        def score(items):
            out = []
            for item in items:
                img = _decode_b64_image(item.image_b64)
                try:
                    out.append((item.name, statistic(img, req.order).t))
                except ValueError as exc:
                    raise HTTPException(422, f"{item.name}: {exc}") from exc
            return out

        summary = evaluate_corpus(score(req.clean), score(req.adversarial), tau=req.tau)
        return schemas.EvalResponse(
            scores=[
                schemas.ScoreModel(label=label, name=name, t=t)
                for label, name, t in summary.scores
            ],
            auc=summary.auc,
            tau=summary.tau,
            fpr=summary.fpr,
            tpr=summary.tpr,
        )

    return app


app = create_app()
