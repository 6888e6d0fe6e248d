from flask import Flask
import logging
import os

from radiomap.exceptions import RadioMapError

__version__ = "0.1.0"


def configure_logging(level: str = None):
    # Configure logging
    LOG_LEVEL = (level or os.getenv("LOG_LEVEL", "INFO")).upper()

    logging.basicConfig(
        level=LOG_LEVEL,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[
            logging.StreamHandler(),  # Logs to stderr
        ]
    )

    logger = logging.getLogger(__name__)
    logger.debug(f"Logging initialized at {LOG_LEVEL} level.")


def create_app(map_path: str = None, radio_map=None):
    """Online-phase service answering localization queries against one radio map."""
    from radiomap.routes import localization
    from radiomap.storage import load_radio_map

    app = Flask(__name__)
    configure_logging()
    logger = logging.getLogger(__name__)

    if radio_map is None:
        map_path = map_path or os.getenv("RADIO_MAP_PATH")
        if not map_path:
            raise RadioMapError("RADIO_MAP_PATH must point to a radio map JSON file")
        radio_map = load_radio_map(map_path)
        logger.info(f"Loaded radio map from {map_path}.")

    app.config["RADIO_MAP"] = radio_map
    app.register_blueprint(localization.bp)

    return app
