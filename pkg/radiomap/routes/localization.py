from flask import Blueprint, current_app, request, jsonify
from pydantic import BaseModel, Field, ValidationError
from typing import Literal, Optional
import logging

from radiomap.config import LocalizerConfig
from radiomap.evaluation import summarize_map
from radiomap.exceptions import AlgorithmError
from radiomap.localizer import bayes_posterior, estimate
from radiomap.models import Fingerprint

# Initialize logger
logger = logging.getLogger(__name__)

bp = Blueprint('localization', __name__)


class LocalizeRequest(BaseModel):
    readings: dict[str, float] = Field(..., description="MAC address -> RSS in dBm of one scan")
    algorithm: Literal["nn", "knn", "wknn", "bayes"] = Field("wknn", description="Position estimator")
    k: Optional[int] = Field(None, ge=1, description="Number of nearest reference points")


class PosteriorRequest(BaseModel):
    readings: dict[str, float] = Field(..., description="MAC address -> RSS in dBm of one scan")


def _radio_map():
    return current_app.config["RADIO_MAP"]


@bp.route('/localize', methods=['POST'])
def localize_endpoint():
    logger.info("Received localization request.")

    try:
        data = LocalizeRequest(**(request.get_json(silent=True) or {}))
        query = Fingerprint(readings=data.readings)
        logger.debug(f"Validated input data: {data.model_dump()}")
    except ValidationError as e:
        logger.error(f"Validation error: {str(e)}")
        return jsonify({"error": str(e)}), 400

    update = {"algorithm": data.algorithm}
    if data.k is not None:
        update["k"] = data.k
    cfg = LocalizerConfig(**update)

    try:
        result = estimate(query, _radio_map(), cfg)
    except AlgorithmError as e:
        logger.error(f"Localization failed: {str(e)}")
        return jsonify({"error": str(e)}), 422

    logger.info(f"Estimated position ({result.position[0]:.2f}, {result.position[1]:.2f}) with {cfg.algorithm}")

    return jsonify({
        "x": result.position[0],
        "y": result.position[1],
        "floor": result.floor,
        "algorithm": cfg.algorithm,
        "k": cfg.k,
        "contributors": [{
            "rp_id": c.rp_id,
            "distance": c.distance,
            "weight": c.weight
        } for c in result.contributors]
    }), 200


@bp.route('/posterior', methods=['POST'])
def posterior_endpoint():
    logger.info("Received posterior request.")

    try:
        data = PosteriorRequest(**(request.get_json(silent=True) or {}))
        query = Fingerprint(readings=data.readings)
    except ValidationError as e:
        logger.error(f"Validation error: {str(e)}")
        return jsonify({"error": str(e)}), 400

    try:
        posterior = bayes_posterior(query, _radio_map(), LocalizerConfig(algorithm="bayes"))
    except AlgorithmError as e:
        logger.error(f"Posterior failed: {str(e)}")
        return jsonify({"error": str(e)}), 422

    return jsonify([{"rp_id": rp_id, "probability": p} for rp_id, p in posterior]), 200


@bp.route('/map', methods=['GET'])
def map_summary():
    logger.info("Fetching radio map summary")
    return jsonify(summarize_map(_radio_map()).model_dump()), 200
