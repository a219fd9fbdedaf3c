"""Per-site phase corrections for the two directions of an FDD hop."""

from dataclasses import dataclass

import numpy as np

from los_mimo_backhaul.errors import InvalidParameterError
from los_mimo_backhaul.phase_tracking.tracker import PhaseEstimate


@dataclass(frozen=True)
class SitePhaseCorrections:
    """Phases a site removes from its own receive and transmit chains."""

    rx: np.ndarray
    tx: np.ndarray


def plan_fdd_compensation(
    receive: PhaseEstimate, transmit: PhaseEstimate, apply_common_phase: bool = True
) -> SitePhaseCorrections:
    """Corrections from the uplink and downlink estimates held at one site.

    ``receive`` is the estimate of the direction the site receives, where its
    antennas sit on the rx side; ``transmit`` is the estimate of the opposite
    direction, where they sit on the tx side and carry the far reference phase.
    Both chains share the site's oscillator, so the local per-antenna phases are
    the mean of the two views. Both directions book the same common phase (sum
    of the two reference antennas); the receive side removes their mean.

    Raises:
        InvalidParameterError: When the two estimates disagree on the site's antenna count.
    """
    if receive.rx.size != transmit.tx.size:
        raise InvalidParameterError(
            f"site has {receive.rx.size} receive but {transmit.tx.size} transmit phases"
        )
    local = 0.5 * (receive.rx + transmit.tx - transmit.common_phase)
    common = 0.5 * (receive.common_phase + transmit.common_phase) if apply_common_phase else 0.0
    return SitePhaseCorrections(rx=local + common, tx=local)
