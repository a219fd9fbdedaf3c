"""Per-purpose random streams for one trial."""

import numpy as np

# Fixed spawn keys: enabling or disabling one impairment never shifts another's draws.
STREAM_KEYS: dict[str, int] = {
    "channel": 0,
    "timing": 1,
    "phase_noise": 2,
    "noise": 3,
    "data": 4,
    "sequences": 5,
}

SeedLike = int | np.random.SeedSequence | np.random.Generator | None


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Accept a seed, seed sequence or generator and return a generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    """Seed sequence for one trial of an experiment."""
    return np.random.SeedSequence(entropy=seed, spawn_key=(trial,))


class TrialStreams:
    """Named, reproducible generators derived from one trial seed."""

    def __init__(self, seed: int | np.random.SeedSequence) -> None:
        if isinstance(seed, np.random.SeedSequence):
            self._root = seed
        else:
            self._root = np.random.SeedSequence(seed)

    def generator(self, purpose: str, *sub: int) -> np.random.Generator:
        """Fresh generator for a purpose; ``sub`` keys split it further (direction, xpd index)."""
        if purpose not in STREAM_KEYS:
            raise KeyError(f"unknown random stream '{purpose}'")
        key = (*self._root.spawn_key, STREAM_KEYS[purpose], *sub)
        return np.random.default_rng(np.random.SeedSequence(self._root.entropy, spawn_key=key))
