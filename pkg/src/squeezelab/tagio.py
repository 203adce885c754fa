"""Tag stream file formats.

Binary format (bit exact): little-endian records of 16 bytes each,
u16 channel, u16 flags, u32 reserved, u64 time in integer picoseconds since
run start, plus a sidecar key-value header carrying the clock period, run
duration and channel names.  A CSV alternative
(channel, clock_index, time_offset_ps) is accepted for interoperability.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ConfigError
from .tags import TagStream

_RECORD_DTYPE = np.dtype(
    [
        ("channel", "<u2"),
        ("flags", "<u2"),
        ("reserved", "<u4"),
        ("time_ps", "<u8"),
    ]
)


def sidecar_path(binary_path) -> Path:
    return Path(binary_path).with_suffix(".hdr")


def write_binary(stream: TagStream, path) -> None:
    """Write records plus the sidecar header next to them."""
    path = Path(path)
    records = np.zeros(len(stream), dtype=_RECORD_DTYPE)
    records["channel"] = stream.channel
    records["time_ps"] = np.rint(stream.absolute_time_ps()).astype(np.uint64)
    records.tofile(path)

    lines = [
        f"clock_period_ps = {stream.clock_period_ps!r}",
        f"duration_s = {stream.duration_s!r}",
    ]
    for idx, name in enumerate(stream.channel_names):
        lines.append(f"channel_{idx} = {name}")
    sidecar_path(path).write_text("\n".join(lines) + "\n")


def read_binary(path) -> TagStream:
    path = Path(path)
    header = {}
    for line in sidecar_path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        header[key.strip()] = value.strip()
    try:
        period = float(header["clock_period_ps"])
        duration = float(header["duration_s"])
    except KeyError as exc:
        raise ConfigError(f"sidecar header missing key: {exc}") from exc
    names = tuple(
        header[k] for k in sorted(h for h in header if h.startswith("channel_"))
    )
    records = np.fromfile(path, dtype=_RECORD_DTYPE)
    return TagStream.from_absolute(
        channel=records["channel"],
        time_ps=records["time_ps"].astype(np.float64),
        clock_period_ps=period,
        duration_s=duration,
        channel_names=names,
    )


def write_csv(stream: TagStream, path) -> None:
    path = Path(path)
    with path.open("w") as handle:
        handle.write(f"# clock_period_ps = {stream.clock_period_ps!r}\n")
        handle.write(f"# duration_s = {stream.duration_s!r}\n")
        handle.write("channel,clock_index,time_offset_ps\n")
        for ch, idx, off in zip(
            stream.channel, stream.clock_index, stream.time_offset_ps
        ):
            handle.write(f"{ch},{idx},{off!r}\n")


def read_csv(path) -> TagStream:
    path = Path(path)
    meta = {}
    with path.open() as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            key, _, value = line.lstrip("# ").partition("=")
            meta[key.strip()] = value.strip()
    if "clock_period_ps" not in meta or "duration_s" not in meta:
        raise ConfigError("tag CSV must carry clock_period_ps and duration_s comments")
    rows = []
    with path.open() as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("channel"):
                continue
            rows.append([float(x) for x in line.split(",")])
    arr = np.asarray(rows, dtype=float).reshape(-1, 3)
    return TagStream(
        channel=arr[:, 0].astype(np.uint16),
        clock_index=arr[:, 1].astype(np.int64),
        time_offset_ps=arr[:, 2],
        clock_period_ps=float(meta["clock_period_ps"]),
        duration_s=float(meta["duration_s"]),
    )


def write_tes_csv(records, path) -> None:
    """Photon-number records (clock_index, n_c, n_d); zero pulses omitted."""
    path = Path(path)
    with path.open("w") as handle:
        handle.write(f"# n_pulses = {records.n_pulses}\n")
        handle.write("clock_index,n_c,n_d\n")
        for idx, nc, nd in zip(records.clock_index, records.n_c, records.n_d):
            handle.write(f"{idx},{nc},{nd}\n")


def read_tes_csv(path):
    from .montecarlo import TesRecords

    path = Path(path)
    n_pulses = None
    rows = []
    with path.open() as handle:
        for line in handle:
            line = line.strip()
            if line.startswith("#"):
                key, _, value = line.lstrip("# ").partition("=")
                if key.strip() == "n_pulses":
                    n_pulses = int(value)
                continue
            if not line or line.startswith("clock_index"):
                continue
            rows.append([int(x) for x in line.split(",")])
    if n_pulses is None:
        raise ConfigError("TES CSV must carry an n_pulses comment")
    arr = np.asarray(rows, dtype=np.int64).reshape(-1, 3)
    return TesRecords(
        clock_index=arr[:, 0], n_c=arr[:, 1], n_d=arr[:, 2], n_pulses=n_pulses
    )
