"""SINR thresholds for adaptive square-QAM selection."""

import functools
import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc

from los_mimo_backhaul.link_sim.qam import MAX_LEVEL, MIN_LEVEL
from los_mimo_backhaul.models.modulation import ModulationEntry, ModulationTable


def q_function(x: np.ndarray | float) -> np.ndarray:
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def square_qam_ser(sinr: np.ndarray | float, q_m: int) -> np.ndarray:
    """Symbol error rate 1 - (1 - P)^2 with per-axis P = 2(1 - 1/sqrt(Q)) Q(sqrt(3 SINR/(Q-1)))."""
    per_axis = 2.0 * (1.0 - 1.0 / math.sqrt(q_m))
    per_axis = per_axis * q_function(np.sqrt(3.0 * np.asarray(sinr, dtype=float) / (q_m - 1)))
    return 1.0 - (1.0 - per_axis) ** 2


def sinr_threshold_db(q_m: int, target_ser: float = 1e-3) -> float:
    """Smallest SINR (dB) at which the level meets the target SER."""
    return float(
        brentq(lambda x: float(square_qam_ser(10.0 ** (x / 10.0), q_m)) - target_ser, -20.0, 90.0)
    )


@functools.lru_cache(maxsize=8)
def build_modulation_table(target_ser: float = 1e-3, cap_bits: int = 12) -> ModulationTable:
    """Square levels 4 .. 2^cap_bits with their SER thresholds."""
    entries = []
    level = MIN_LEVEL
    while level <= min(MAX_LEVEL, 2**cap_bits):
        entries.append(
            ModulationEntry(
                qam_level=level,
                min_sinr_db=sinr_threshold_db(level, target_ser),
                bits=level.bit_length() - 1,
            )
        )
        level *= 4
    return ModulationTable(target_ser=target_ser, entries=entries)


def adaptive_modulation(per_stream_sinr_db: np.ndarray, table: ModulationTable) -> list[int]:
    """Highest level whose threshold the SINR reaches, 0 when the stream is dropped."""
    levels = []
    for sinr_db in np.asarray(per_stream_sinr_db, dtype=float):
        chosen = 0
        for entry in table.entries:
            if sinr_db >= entry.min_sinr_db:
                chosen = entry.qam_level
        levels.append(chosen)
    return levels


def level_bits(q_m: int) -> int:
    return 0 if q_m == 0 else q_m.bit_length() - 1
