"""CSV fixtures for channel taps, sequence sets and impairment realizations."""

from pathlib import Path
from typing import Any

import numpy as np

from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.impairments.fdd import FddImpairments
from los_mimo_backhaul.sequences.correlation import SequenceSet
from los_mimo_backhaul.storage.artifacts import read_csv, write_csv


def save_taps(path: Path, taps: ChannelTaps, config: dict[str, Any] | None = None) -> Path:
    """Rows are receive antennas; columns are (tap, tx) re/im pairs."""
    header = ["rx"]
    for w in range(-taps.window_w, taps.window_w + 1):
        for j in range(taps.m_tx):
            header += [f"w{w}_tx{j}_re", f"w{w}_tx{j}_im"]
    aggregate = taps.aggregate()
    rows = []
    for i in range(taps.n_rx):
        values = np.column_stack([aggregate[i].real, aggregate[i].imag]).ravel()
        rows.append([i, *values.tolist()])
    meta = {"window_w": taps.window_w, "reference_symbol": taps.reference_symbol}
    return write_csv(path, header, rows, {**(config or {}), "taps": meta})


def load_taps(path: Path) -> ChannelTaps:
    config, rows = read_csv(path)
    meta = (config or {}).get("taps", {})
    window_w = int(meta.get("window_w", 0))
    values = np.array([[float(v) for k, v in row.items() if k != "rx"] for row in rows])
    aggregate = values[:, 0::2] + 1j * values[:, 1::2]
    return ChannelTaps.from_aggregate(aggregate, window_w, int(meta.get("reference_symbol", 0)))


def save_sequences(path: Path, seq_set: SequenceSet, config: dict[str, Any] | None = None) -> Path:
    """One row per symbol index with re/im columns per sequence."""
    header = ["k"]
    for j in range(seq_set.m):
        header += [f"seq{j}_re", f"seq{j}_im"]
    rows = []
    for k in range(seq_set.length):
        column = seq_set.sequences[:, k]
        rows.append([k, *np.column_stack([column.real, column.imag]).ravel().tolist()])
    meta = {"family": seq_set.family, "lag_window": seq_set.lag_window}
    return write_csv(path, header, rows, {**(config or {}), "sequences": meta})


def load_sequences(path: Path) -> SequenceSet:
    config, rows = read_csv(path)
    meta = (config or {}).get("sequences", {})
    values = np.array([[float(v) for k, v in row.items() if k != "k"] for row in rows])
    sequences = (values[:, 0::2] + 1j * values[:, 1::2]).T
    return SequenceSet(
        sequences=np.ascontiguousarray(sequences),
        lag_window=int(meta.get("lag_window", 0)),
        family=meta.get("family", "designed"),
    )


def save_impairments(
    path: Path, impairments: FddImpairments, config: dict[str, Any] | None = None
) -> Path:
    """Per-antenna offsets and initial oscillator phases of both sites."""
    rows = []
    for site in (impairments.site_a, impairments.site_b):
        for antenna in range(site.n_antennas):
            rows.append(
                [site.name, antenna, float(site.tau[antenna]), float(site.theta[0, antenna])]
            )
    return write_csv(path, ["site", "antenna", "tau", "theta0"], rows, config)


def load_impairments(path: Path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Site name -> (tau, theta0) arrays ordered by antenna."""
    _, rows = read_csv(path)
    sites: dict[str, list[tuple[int, float, float]]] = {}
    for row in rows:
        sites.setdefault(row["site"], []).append(
            (int(row["antenna"]), float(row["tau"]), float(row["theta0"]))
        )
    loaded = {}
    for name, entries in sites.items():
        entries.sort()
        loaded[name] = (
            np.array([tau for _, tau, _ in entries]),
            np.array([theta for _, _, theta in entries]),
        )
    return loaded
