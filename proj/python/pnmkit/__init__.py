"""Telemetry fault detection: ticket-driven anomaly thresholds, x-of-y event
detection, and co-anomaly clustering for shared-plant vs single-premise
diagnosis."""

from ._pnmkit import *  # noqa: F401,F403
from ._pnmkit import __version__  # noqa: F401
