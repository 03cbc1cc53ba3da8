"""Monte Carlo detector time-tag streams and windowed coincidence counting.

Pairs are emitted as a homogeneous Poisson process, routed to the four
detectors (channels 0,1 on output arm a; 2,3 on arm b) by sampling the
pattern and splitter-tree outcomes, thinned by per-mode transmission and
per-detector efficiency, jittered, and merged with per-channel Poisson dark
counts.  Timestamps are integer picoseconds.

Randomness comes from numpy's PCG64 generator seeded with the configured
seed; the draw order is fixed (pair count, pair times, pattern, two routing
draws, two mode-transmission draws, two detector-efficiency draws, two
jitter draws, then dark counts per channel in ascending channel order), so
a given config reproduces a bit-identical stream.
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .detection import (
    CROSS_PAIRS,
    DETECTION_PATTERNS,
    VisibilityFit,
    fit_fringe,
)

__all__ = [
    "TagStream",
    "TagSimConfig",
    "CoincidenceResult",
    "generate_tags",
    "count_coincidences",
    "count_pattern_coincidences",
    "FringeEstimate",
    "fringe_from_tags",
    "STANDARD_PAIRS",
    "write_tags",
    "read_tags",
    "tags_to_bytes",
    "tags_from_bytes",
]

STANDARD_CHANNELS = (0, 1, 2, 3)
# Same-arm pairs signal the bunched patterns, cross pairs the split one.
STANDARD_PAIRS = ((0, 1), (2, 3)) + CROSS_PAIRS

_BINARY_MAGIC = b"NOONTAG1"


@dataclass(frozen=True)
class TagStream:
    """Time-ordered detector click records over a fixed acquisition window."""

    channels: np.ndarray
    timestamps_ps: np.ndarray
    duration_s: float
    channel_ids: tuple[int, ...] = STANDARD_CHANNELS

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=np.uint8)
        ts = np.asarray(self.timestamps_ps, dtype=np.int64)
        if ch.shape != ts.shape or ch.ndim != 1:
            raise ValueError("channels and timestamps must be 1-d arrays of equal length")
        if len(ts) > 1 and np.any(np.diff(ts) < 0):
            raise ValueError("timestamps must be non-decreasing")
        ids = set(int(c) for c in self.channel_ids)
        present = set(np.unique(ch).tolist())
        if not present <= ids:
            raise ValueError(f"records reference unregistered channels {sorted(present - ids)}")
        if self.duration_s <= 0:
            raise ValueError("duration must be > 0")
        object.__setattr__(self, "channels", ch)
        object.__setattr__(self, "timestamps_ps", ts)
        object.__setattr__(self, "channel_ids", tuple(int(c) for c in self.channel_ids))

    def __len__(self) -> int:
        return len(self.timestamps_ps)

    def singles(self) -> dict[int, int]:
        counts = {c: 0 for c in self.channel_ids}
        values, n = np.unique(self.channels, return_counts=True)
        for c, k in zip(values.tolist(), n.tolist()):
            counts[int(c)] = int(k)
        return counts

    def channel_timestamps(self, channel: int) -> np.ndarray:
        if channel not in self.channel_ids:
            raise ValueError(f"unknown channel id {channel}")
        return self.timestamps_ps[self.channels == channel]


@dataclass(frozen=True)
class TagSimConfig:
    """Configuration of one acquisition run.

    pattern_probs is in the canonical pattern order ((2,0), (1,1), (0,2))
    and may sum to less than one; the deficit is treated as undetected
    pairs.  mode_transmission models the collection loss in each output arm
    ahead of the splitter tree.
    """

    pair_rate_hz: float
    pattern_probs: tuple[float, float, float]
    duration_s: float
    seed: int
    detector_efficiency: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    mode_transmission: tuple[float, float] = (1.0, 1.0)
    dark_rate_hz: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    jitter_sigma_ps: float = 0.0

    def __post_init__(self):
        if self.pair_rate_hz < 0:
            raise ValueError("pair rate must be >= 0")
        probs = tuple(float(p) for p in self.pattern_probs)
        if len(probs) != 3 or min(probs) < -1e-12 or sum(probs) > 1.0 + 1e-9:
            raise ValueError("pattern_probs must be three probabilities summing to <= 1")
        if self.duration_s <= 0:
            raise ValueError("duration must be > 0")
        if not isinstance(self.seed, (int, np.integer)):
            raise ValueError("seed is mandatory and must be an integer")
        eff = tuple(float(e) for e in self.detector_efficiency)
        if len(eff) != 4 or any(not 0.0 <= e <= 1.0 for e in eff):
            raise ValueError("detector_efficiency must be four values in [0, 1]")
        eta = tuple(float(t) for t in self.mode_transmission)
        if len(eta) != 2 or any(not 0.0 <= t <= 1.0 for t in eta):
            raise ValueError("mode_transmission must be two values in [0, 1]")
        dark = self.dark_rate_hz
        if isinstance(dark, (int, float)):
            dark = (float(dark),) * 4
        dark = tuple(float(d) for d in dark)
        if len(dark) != 4 or min(dark) < 0:
            raise ValueError("dark_rate_hz must be four non-negative rates")
        if self.jitter_sigma_ps < 0:
            raise ValueError("jitter sigma must be >= 0")
        object.__setattr__(self, "pattern_probs", probs)
        object.__setattr__(self, "detector_efficiency", eff)
        object.__setattr__(self, "mode_transmission", eta)
        object.__setattr__(self, "dark_rate_hz", dark)


def generate_tags(cfg: TagSimConfig) -> TagStream:
    """Simulate one acquisition and return the sorted click stream."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    duration_ps = int(round(cfg.duration_s * 1e12))

    n_pairs = int(rng.poisson(cfg.pair_rate_hz * cfg.duration_s))
    t_pair = np.sort(rng.random(n_pairs)) * cfg.duration_s

    cum = np.cumsum(cfg.pattern_probs)
    pattern = np.searchsorted(cum, rng.random(n_pairs), side="right")
    emitted = pattern < 3
    # Photon modes per pattern: (2,0) -> both a, (1,1) -> one each, (0,2) -> both b.
    mode1 = np.where(pattern == 2, 1, 0)
    mode2 = np.where(pattern == 0, 0, 1)

    route1 = (rng.random(n_pairs) >= 0.5).astype(np.int64)
    route2 = (rng.random(n_pairs) >= 0.5).astype(np.int64)
    det1 = 2 * mode1 + route1
    det2 = 2 * mode2 + route2

    eta = np.asarray(cfg.mode_transmission)
    eff = np.asarray(cfg.detector_efficiency)
    keep1 = emitted & (rng.random(n_pairs) < eta[mode1]) & (rng.random(n_pairs) < eff[det1])
    keep2 = emitted & (rng.random(n_pairs) < eta[mode2]) & (rng.random(n_pairs) < eff[det2])

    jit1 = rng.normal(0.0, cfg.jitter_sigma_ps, n_pairs)
    jit2 = rng.normal(0.0, cfg.jitter_sigma_ps, n_pairs)
    t_ps = t_pair * 1e12
    ts1 = np.rint(t_ps + jit1).astype(np.int64)[keep1]
    ts2 = np.rint(t_ps + jit2).astype(np.int64)[keep2]

    chunks_ch = [det1[keep1].astype(np.uint8), det2[keep2].astype(np.uint8)]
    chunks_ts = [ts1, ts2]

    for ch in STANDARD_CHANNELS:
        n_dark = int(rng.poisson(cfg.dark_rate_hz[ch] * cfg.duration_s))
        dark_ts = np.rint(rng.random(n_dark) * cfg.duration_s * 1e12).astype(np.int64)
        chunks_ch.append(np.full(n_dark, ch, dtype=np.uint8))
        chunks_ts.append(dark_ts)

    channels = np.concatenate(chunks_ch) if chunks_ch else np.empty(0, np.uint8)
    timestamps = np.concatenate(chunks_ts) if chunks_ts else np.empty(0, np.int64)
    in_range = (timestamps >= 0) & (timestamps < duration_ps)
    channels, timestamps = channels[in_range], timestamps[in_range]
    order = np.lexsort((channels, timestamps))
    return TagStream(channels[order], timestamps[order], cfg.duration_s)


def _match_sorted(a: list[int], b: list[int], half_width: float) -> int:
    """Greedy nearest-match pairing of two sorted timestamp lists.

    Walks both lists once in time order; a candidate pairing defers to the
    next tag on the other channel when that one is strictly closer.  Each
    tag is consumed by at most one coincidence.
    """
    i = j = matched = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        dt = a[i] - b[j]
        if dt > half_width:
            j += 1
            continue
        if dt < -half_width:
            i += 1
            continue
        if dt > 0 and j + 1 < lb and abs(b[j + 1] - a[i]) < dt:
            j += 1
            continue
        if dt < 0 and i + 1 < la and abs(a[i + 1] - b[j]) < -dt:
            i += 1
            continue
        matched += 1
        i += 1
        j += 1
    return matched


@dataclass(frozen=True)
class CoincidenceResult:
    """Windowed coincidence counts with singles and accidental estimates.

    Accidentals per pair follow R1 * R2 * window * duration computed from
    the measured singles rates; they are reported, not subtracted.
    """

    window_ps: float
    duration_s: float
    singles: dict[int, int]
    pair_counts: dict[tuple[int, int], int]
    pair_accidentals: dict[tuple[int, int], float]

    def pattern_counts(self) -> dict[str, int]:
        return {
            p.label: sum(self.pair_counts.get(pair, 0) for pair in p.detector_pairs)
            for p in DETECTION_PATTERNS
        }

    def pattern_accidentals(self) -> dict[str, float]:
        return {
            p.label: sum(self.pair_accidentals.get(pair, 0.0) for pair in p.detector_pairs)
            for p in DETECTION_PATTERNS
        }


def count_coincidences(stream: TagStream, window_ps: float, pairs) -> CoincidenceResult:
    """Count coincidences where two channels click within +/- window/2.

    Single pass per channel pair over the sorted stream (constant auxiliary
    memory); each tag is consumed at most once per pair.
    """
    if window_ps <= 0:
        raise ValueError("window must be > 0")
    singles = stream.singles()
    per_channel = {c: stream.channel_timestamps(c).tolist() for c in stream.channel_ids}
    half = window_ps / 2.0
    pair_counts: dict[tuple[int, int], int] = {}
    pair_acc: dict[tuple[int, int], float] = {}
    for c1, c2 in pairs:
        for c in (c1, c2):
            if c not in per_channel:
                raise ValueError(f"unknown channel id {c}")
        key = (int(c1), int(c2))
        pair_counts[key] = _match_sorted(per_channel[c1], per_channel[c2], half)
        pair_acc[key] = singles[c1] * singles[c2] * (window_ps * 1e-12) / stream.duration_s
    return CoincidenceResult(
        window_ps=window_ps,
        duration_s=stream.duration_s,
        singles=singles,
        pair_counts=pair_counts,
        pair_accidentals=pair_acc,
    )


def count_pattern_coincidences(stream: TagStream, window_ps: float) -> CoincidenceResult:
    """Coincidences over the six standard detector pairs of the splitter tree."""
    return count_coincidences(stream, window_ps, STANDARD_PAIRS)


@dataclass(frozen=True)
class FringeEstimate:
    """Fringe reconstruction from per-phase tag streams."""

    phases: np.ndarray
    fractions: dict[str, np.ndarray]
    sigmas: dict[str, np.ndarray]
    fractions_corrected: dict[str, np.ndarray]
    fits: dict[str, VisibilityFit]
    fits_corrected: dict[str, VisibilityFit]
    visibility_sigma: dict[str, float]
    insufficient: bool


def _visibility_sigma(phases, sigmas, frequency, fit: VisibilityFit) -> float:
    """1-sigma error on amplitude/offset by linear propagation through the fit."""
    design = np.column_stack(
        [np.ones_like(phases), np.cos(frequency * phases), np.sin(frequency * phases)]
    )
    pinv = np.linalg.pinv(design)
    cov = pinv @ np.diag(np.asarray(sigmas) ** 2) @ pinv.T
    c = fit.offset
    if c <= 0:
        return float("inf")
    a = fit.amplitude * math.cos(fit.phase)
    b = -fit.amplitude * math.sin(fit.phase)
    amp = fit.amplitude
    if amp < 1e-300:
        grad = np.array([0.0, 1.0 / c, 1.0 / c])
    else:
        grad = np.array([-amp / c**2, a / (amp * c), b / (amp * c)])
    return float(math.sqrt(max(grad @ cov @ grad, 0.0)))


def fringe_from_tags(scans, window_ps: float, frequency: float = 2.0) -> FringeEstimate:
    """Estimate per-pattern fringes and visibilities from (phase, stream) scans.

    Rates are normalized per phase point by the total pattern coincidences;
    both raw and accidental-corrected fractions are reported, with binomial
    1-sigma errors propagated into the visibility fits.
    """
    if len(scans) < 5:
        raise ValueError("need at least 5 phase points")
    phases = np.array([p for p, _ in scans], dtype=float)
    labels = [p.label for p in DETECTION_PATTERNS]
    raw = {lab: np.zeros(len(scans)) for lab in labels}
    corrected = {lab: np.zeros(len(scans)) for lab in labels}
    sigmas = {lab: np.zeros(len(scans)) for lab in labels}
    insufficient = False

    for k, (_, stream) in enumerate(scans):
        res = count_pattern_coincidences(stream, window_ps)
        counts = res.pattern_counts()
        acc = res.pattern_accidentals()
        total = sum(counts.values())
        corr = {lab: max(counts[lab] - acc[lab], 0.0) for lab in labels}
        total_corr = sum(corr.values())
        if total == 0:
            insufficient = True
            for lab in labels:
                sigmas[lab][k] = 1.0
            continue
        for lab in labels:
            f = counts[lab] / total
            raw[lab][k] = f
            sigmas[lab][k] = math.sqrt(max(f * (1.0 - f), 1.0 / total) / total)
            corrected[lab][k] = corr[lab] / total_corr if total_corr > 0 else 0.0

    fits = {lab: fit_fringe(phases, raw[lab], frequency) for lab in labels}
    fits_corr = {lab: fit_fringe(phases, corrected[lab], frequency) for lab in labels}
    vis_sigma = {
        lab: _visibility_sigma(phases, sigmas[lab], frequency, fits[lab]) for lab in labels
    }
    return FringeEstimate(
        phases=phases,
        fractions=raw,
        sigmas=sigmas,
        fractions_corrected=corrected,
        fits=fits,
        fits_corrected=fits_corr,
        visibility_sigma=vis_sigma,
        insufficient=insufficient,
    )


# --- stream file formats ---------------------------------------------------
#
# Binary: magic "NOONTAG1", then little-endian f64 duration_s, u8 channel
# count, that many u8 channel ids, u64 record count, and records of
# (u8 channel, u64 timestamp_ps).
#
# CSV: header "channel,timestamp_ps", one record per line.  The CSV form
# carries no duration/channel metadata; readers may pass it explicitly.


def tags_to_bytes(stream: TagStream, fmt: str = "binary") -> bytes:
    if fmt == "binary":
        buf = io.BytesIO()
        buf.write(_BINARY_MAGIC)
        buf.write(struct.pack("<d", stream.duration_s))
        buf.write(struct.pack("<B", len(stream.channel_ids)))
        buf.write(struct.pack(f"<{len(stream.channel_ids)}B", *stream.channel_ids))
        buf.write(struct.pack("<Q", len(stream)))
        records = np.empty(
            len(stream), dtype=np.dtype([("ch", "u1"), ("ts", "<u8")])
        )
        records["ch"] = stream.channels
        records["ts"] = stream.timestamps_ps.astype(np.uint64)
        buf.write(records.tobytes())
        return buf.getvalue()
    if fmt == "csv":
        lines = ["channel,timestamp_ps"]
        lines.extend(
            f"{int(c)},{int(t)}"
            for c, t in zip(stream.channels.tolist(), stream.timestamps_ps.tolist())
        )
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown tag stream format {fmt!r}")


def tags_from_bytes(data: bytes, fmt: str = "binary", duration_s: float | None = None) -> TagStream:
    if fmt == "binary":
        if data[:8] != _BINARY_MAGIC:
            raise ValueError("not a tag stream: bad magic header")
        off = 8
        (duration,) = struct.unpack_from("<d", data, off)
        off += 8
        (n_ch,) = struct.unpack_from("<B", data, off)
        off += 1
        channel_ids = struct.unpack_from(f"<{n_ch}B", data, off)
        off += n_ch
        (n_rec,) = struct.unpack_from("<Q", data, off)
        off += 8
        records = np.frombuffer(
            data, dtype=np.dtype([("ch", "u1"), ("ts", "<u8")]), count=n_rec, offset=off
        )
        return TagStream(
            records["ch"].copy(),
            records["ts"].astype(np.int64),
            duration,
            channel_ids,
        )
    if fmt == "csv":
        text = data.decode()
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != "channel,timestamp_ps":
            raise ValueError("not a tag stream CSV: missing header")
        ch, ts = [], []
        for ln in lines[1:]:
            c, t = ln.split(",")
            ch.append(int(c))
            ts.append(int(t))
        channels = np.array(ch, dtype=np.uint8)
        timestamps = np.array(ts, dtype=np.int64)
        if duration_s is None:
            duration_s = (float(timestamps.max()) + 1.0) / 1e12 if len(timestamps) else 1.0
        ids = tuple(sorted(set(ch))) if ch else STANDARD_CHANNELS
        return TagStream(channels, timestamps, duration_s, ids)
    raise ValueError(f"unknown tag stream format {fmt!r}")


def write_tags(stream: TagStream, path, fmt: str = "binary") -> None:
    with open(path, "wb") as fh:
        fh.write(tags_to_bytes(stream, fmt))


def read_tags(path, fmt: str | None = None, duration_s: float | None = None) -> TagStream:
    with open(path, "rb") as fh:
        data = fh.read()
    if fmt is None:
        fmt = "binary" if data[:8] == _BINARY_MAGIC else "csv"
    return tags_from_bytes(data, fmt, duration_s)
