"""Offline curation over precomputed per-frame feature streams.

Scene boundaries come from L1 jumps between consecutive color histograms,
calm segments are low-motion runs that never cross a scene boundary, and
clips are cut greedily as non-overlapping fixed-length windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, TextIO

from .errors import FileFormatError, OutOfRangeError

DEFAULT_HIST_BINS = 64
DEFAULT_THETA_HIST = 0.4
DEFAULT_THETA_MOTION = 0.5
DEFAULT_MIN_DURATION_S = 180.0
DEFAULT_CLIP_LENGTH_S = 180.0
BOUNDARY_MERGE_WINDOW_S = 1.0

_HIST_SUM_TOL = 1e-6


@dataclass(frozen=True)
class FrameFeature:
    """One frame sample: timestamp, mean optical-flow magnitude, color histogram."""

    t: float
    motion: float
    histogram: tuple[float, ...]

    def __post_init__(self) -> None:
        if not math.isfinite(self.t):
            raise OutOfRangeError(f"timestamp not finite: {self.t!r}")
        if not math.isfinite(self.motion) or self.motion < 0.0:
            raise OutOfRangeError(f"motion must be >= 0, got {self.motion!r}")
        if not self.histogram:
            raise OutOfRangeError("histogram must be non-empty")
        for v in self.histogram:
            if not math.isfinite(v) or v < 0.0:
                raise OutOfRangeError(f"histogram entry {v!r} must be >= 0")
        if abs(math.fsum(self.histogram) - 1.0) > _HIST_SUM_TOL:
            raise OutOfRangeError("histogram must sum to 1 within 1e-6")


@dataclass(frozen=True)
class SceneBoundary:
    """Timestamp at which a new scene begins."""

    t: float


@dataclass(frozen=True)
class CalmSegment:
    """A contiguous low-motion span inside a single scene."""

    start_s: float
    end_s: float

    def __post_init__(self) -> None:
        if not self.end_s > self.start_s:
            raise OutOfRangeError(f"segment end {self.end_s} must exceed start {self.start_s}")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class Clip:
    """A fixed-length cut from a calm segment of one stream."""

    clip_id: str
    source: str
    start_s: float
    end_s: float

    def __post_init__(self) -> None:
        if not self.end_s > self.start_s:
            raise OutOfRangeError(f"clip end {self.end_s} must exceed start {self.start_s}")


def _check_stream(stream: Sequence[FrameFeature]) -> None:
    for prev, cur in zip(stream, stream[1:]):
        if not cur.t > prev.t:
            raise OutOfRangeError(f"timestamps must strictly increase ({prev.t} -> {cur.t})")


def detect_scenes(
    stream: Sequence[FrameFeature],
    theta_hist: float = DEFAULT_THETA_HIST,
    merge_window_s: float = BOUNDARY_MERGE_WINDOW_S,
) -> list[SceneBoundary]:
    """Boundaries where the L1 histogram distance to the previous frame exceeds theta.

    Candidate boundaries closer than the merge window to the previously kept
    one are dropped (the first wins). Streams shorter than 2 frames have no
    boundaries; the first frame never starts a new scene.
    """
    if theta_hist <= 0.0:
        raise OutOfRangeError("theta_hist must be > 0")
    if len(stream) < 2:
        return []
    _check_stream(stream)
    boundaries: list[SceneBoundary] = []
    last_kept: float | None = None
    for prev, cur in zip(stream, stream[1:]):
        if len(prev.histogram) != len(cur.histogram):
            raise OutOfRangeError("histogram bin count changed mid-stream")
        dist = math.fsum(abs(a - b) for a, b in zip(prev.histogram, cur.histogram))
        if dist > theta_hist:
            if last_kept is None or cur.t - last_kept >= merge_window_s:
                boundaries.append(SceneBoundary(cur.t))
                last_kept = cur.t
    return boundaries


def _calm_runs(
    frames: list[FrameFeature], theta_motion: float, min_dur_s: float
) -> list[CalmSegment]:
    runs: list[CalmSegment] = []
    start: float | None = None
    last: float | None = None
    for frame in frames:
        if frame.motion <= theta_motion:
            if start is None:
                start = frame.t
            last = frame.t
        else:
            if start is not None and last is not None and last - start >= min_dur_s:
                runs.append(CalmSegment(start, last))
            start = last = None
    if start is not None and last is not None and last - start >= min_dur_s:
        runs.append(CalmSegment(start, last))
    return runs


def detect_calm_segments(
    stream: Sequence[FrameFeature],
    boundaries: Sequence[SceneBoundary],
    theta_motion: float = DEFAULT_THETA_MOTION,
    min_dur_s: float = DEFAULT_MIN_DURATION_S,
) -> list[CalmSegment]:
    """Maximal low-motion runs per scene lasting at least min_dur_s.

    A frame at time t belongs to the scene starting at the latest boundary
    <= t, so runs never cross boundaries.
    """
    if theta_motion <= 0.0:
        raise OutOfRangeError("theta_motion must be > 0")
    if min_dur_s <= 0.0:
        raise OutOfRangeError("min_dur_s must be > 0")
    if not stream:
        return []
    _check_stream(stream)
    cuts = [b.t for b in boundaries]
    segments: list[CalmSegment] = []
    scene_frames: list[FrameFeature] = []
    ci = 0
    for frame in stream:
        while ci < len(cuts) and frame.t >= cuts[ci]:
            segments.extend(_calm_runs(scene_frames, theta_motion, min_dur_s))
            scene_frames = []
            ci += 1
        scene_frames.append(frame)
    segments.extend(_calm_runs(scene_frames, theta_motion, min_dur_s))
    return segments


def partition_clips(
    segments: Sequence[CalmSegment],
    clip_len_s: float = DEFAULT_CLIP_LENGTH_S,
    stream_id: str = "stream",
) -> list[Clip]:
    """Greedy non-overlapping fixed-length cuts; short remainders are dropped.

    Clip ids are `<stream>#<index>` with the index sequential across all
    segments of the stream.
    """
    if clip_len_s <= 0.0:
        raise OutOfRangeError("clip_len_s must be > 0")
    clips: list[Clip] = []
    counter = 0
    for seg in segments:
        i = 0
        while True:
            start = seg.start_s + i * clip_len_s
            end = seg.start_s + (i + 1) * clip_len_s
            if end > seg.end_s:
                break
            clips.append(Clip(f"{stream_id}#{counter}", stream_id, start, end))
            counter += 1
            i += 1
    return clips


def curate_stream(
    stream: Sequence[FrameFeature],
    stream_id: str = "stream",
    theta_hist: float = DEFAULT_THETA_HIST,
    theta_motion: float = DEFAULT_THETA_MOTION,
    min_dur_s: float = DEFAULT_MIN_DURATION_S,
    clip_len_s: float = DEFAULT_CLIP_LENGTH_S,
) -> list[Clip]:
    """Full pipeline: scenes -> calm segments -> clips."""
    boundaries = detect_scenes(stream, theta_hist)
    segments = detect_calm_segments(stream, boundaries, theta_motion, min_dur_s)
    return partition_clips(segments, clip_len_s, stream_id)


def parse_feature_stream(text: str) -> list[FrameFeature]:
    """Parse the stream file: header `#H=<bins>`, then `t<TAB>motion<TAB>h0,h1,...`."""
    frames: list[FrameFeature] = []
    bins: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("#H="):
                try:
                    bins = int(line[3:])
                except ValueError as exc:
                    raise FileFormatError(f"line {lineno}: bad header bin count") from exc
                if bins < 1:
                    raise FileFormatError(f"line {lineno}: bin count must be >= 1")
            continue
        if bins is None:
            raise FileFormatError("missing `#H=<bins>` header before frame lines")
        parts = line.split("\t")
        if len(parts) != 3:
            raise FileFormatError(f"line {lineno}: expected t<TAB>motion<TAB>histogram")
        try:
            t = float(parts[0])
            motion = float(parts[1])
            histogram = tuple(float(v) for v in parts[2].split(","))
        except ValueError as exc:
            raise FileFormatError(f"line {lineno}: bad number") from exc
        if len(histogram) != bins:
            raise FileFormatError(f"line {lineno}: expected {bins} histogram bins")
        frames.append(FrameFeature(t, motion, histogram))
    _check_stream(frames)
    return frames


def read_feature_stream(path: str) -> list[FrameFeature]:
    with open(path, encoding="utf-8") as fh:
        return parse_feature_stream(fh.read())


def write_clips_tsv(fh: TextIO, clips: Sequence[Clip]) -> None:
    """Emit `clip_id<TAB>start_s<TAB>end_s` rows."""
    for clip in clips:
        fh.write(f"{clip.clip_id}\t{clip.start_s:g}\t{clip.end_s:g}\n")
