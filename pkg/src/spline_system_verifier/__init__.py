# src/spline_system_verifier/__init__.py

import logging

from .models import (
    CharInterval,
    CheckResult,
    DecayFit,
    ExperimentConfig,
    KnotSequence,
    OrthoFunction,
    OrthoSystem,
    Partition,
    Spline,
    VerificationReport,
)

VERSION = "0.1.0"

logger = logging.getLogger(__name__)
logger.info("spline_system_verifier package version %s initialized.", VERSION)

__all__ = [
    "CharInterval",
    "CheckResult",
    "DecayFit",
    "ExperimentConfig",
    "KnotSequence",
    "OrthoFunction",
    "OrthoSystem",
    "Partition",
    "Spline",
    "VerificationReport",
]
