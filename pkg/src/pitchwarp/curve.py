"""Pitch-curve container and preprocessing."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

HZ = "Hz"
SEMITONE = "semitone"
#: unitless z-scores produced by z_normalize
ZSCORE = "z"
UNITS = (HZ, SEMITONE, ZSCORE)

#: default analysis framing: 128-sample hop at 22050 Hz
DEFAULT_HOP_SECONDS = 128 / 22050
DEFAULT_REF_HZ = 55.0


class CurveError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PitchCurve:
    """Framed F0 sequence.

    ``values`` holds one F0 per frame (Hz or semitones, see ``unit``);
    ``voiced`` flags frames carrying periodic sound. Unvoiced frames hold 0
    until :func:`interpolate_unvoiced` fills them.
    """

    values: np.ndarray
    voiced: np.ndarray
    hop_seconds: float
    unit: str = HZ

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        voiced = np.array(self.voiced, dtype=bool).reshape(-1)
        if values.shape != voiced.shape:
            raise CurveError(
                f"values and voiced differ in length ({values.size} != {voiced.size})"
            )
        if not self.hop_seconds > 0:
            raise CurveError(f"hop_seconds must be positive, got {self.hop_seconds}")
        if self.unit not in UNITS:
            raise CurveError(f"unknown unit {self.unit!r}")
        if not np.all(np.isfinite(values)):
            raise CurveError("curve values must be finite")
        if self.unit == HZ and np.any(values < 0):
            raise CurveError("negative F0 values are not allowed")
        values.flags.writeable = False
        voiced.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "voiced", voiced)
        object.__setattr__(self, "hop_seconds", float(self.hop_seconds))

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, PitchCurve):
            return NotImplemented
        return (
            self.unit == other.unit
            and self.hop_seconds == other.hop_seconds
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.voiced, other.voiced)
        )

    def with_values(self, values, unit=None) -> "PitchCurve":
        return replace(self, values=values, unit=unit or self.unit)

    def shifted(self, delta: float) -> "PitchCurve":
        """Add ``delta`` to every frame value (semitone transposition)."""
        return self.with_values(self.values + delta)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "hop_seconds": self.hop_seconds,
            "unit": self.unit,
            "values": self.values.tolist(),
            "voiced": self.voiced.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PitchCurve":
        try:
            return cls(
                values=np.asarray(data["values"], dtype=np.float64),
                voiced=np.asarray(data["voiced"], dtype=bool),
                hop_seconds=data["hop_seconds"],
                unit=data.get("unit", HZ),
            )
        except KeyError as exc:
            raise CurveError(f"curve record is missing field {exc}") from None


def from_frames(values, voiced, hop_seconds: float) -> PitchCurve:
    """Build a Hz curve from per-frame F0 values and voicing flags."""
    return PitchCurve(
        values=np.array(values, dtype=np.float64),
        voiced=np.array(voiced, dtype=bool),
        hop_seconds=hop_seconds,
        unit=HZ,
    )


def interpolate_unvoiced(curve: PitchCurve) -> PitchCurve:
    """Fill unvoiced frames by linear interpolation between voiced neighbours.

    Leading and trailing gaps are held at the nearest voiced value. The
    voicing flags are kept so metrics can still mask the filled frames.
    """
    voiced = curve.voiced
    if not voiced.any():
        raise CurveError("cannot interpolate a curve with no voiced frames")
    frames = np.arange(len(curve))
    filled = np.interp(frames, frames[voiced], curve.values[voiced])
    return curve.with_values(filled)


def hz_to_semitones(curve: PitchCurve, ref_hz: float = DEFAULT_REF_HZ) -> PitchCurve:
    """Convert every frame to 12*log2(f/ref_hz)."""
    if curve.unit != HZ:
        raise CurveError(f"expected a Hz curve, got unit {curve.unit!r}")
    if not ref_hz > 0:
        raise CurveError("ref_hz must be positive")
    if np.any(curve.values <= 0):
        raise CurveError(
            "curve has zero or negative F0 values; run interpolate_unvoiced first"
        )
    return curve.with_values(12.0 * np.log2(curve.values / ref_hz), unit=SEMITONE)


def semitones_to_hz(curve: PitchCurve, ref_hz: float = DEFAULT_REF_HZ) -> PitchCurve:
    if curve.unit != SEMITONE:
        raise CurveError(f"expected a semitone curve, got unit {curve.unit!r}")
    return curve.with_values(ref_hz * 2.0 ** (curve.values / 12.0), unit=HZ)


def z_normalize(curve: PitchCurve) -> PitchCurve:
    """Standardize voiced frames to zero mean and unit population std.

    Unvoiced frames are set to 0 and the result is tagged unit ``"z"``.
    """
    voiced = curve.voiced
    if voiced.sum() < 2:
        raise CurveError("z_normalize needs at least two voiced frames")
    sel = curve.values[voiced]
    mean = sel.mean()
    std = sel.std()
    if not std > 0:
        raise CurveError("cannot z-normalize a constant curve (zero variance)")
    out = np.zeros(len(curve))
    out[voiced] = (sel - mean) / std
    return curve.with_values(out, unit=ZSCORE)


def as_unit(curve: PitchCurve, unit: str, ref_hz: float = DEFAULT_REF_HZ) -> PitchCurve:
    """Return ``curve`` expressed in ``unit``, converting when needed."""
    if curve.unit == unit:
        return curve
    if unit == SEMITONE:
        return hz_to_semitones(curve, ref_hz)
    return semitones_to_hz(curve, ref_hz)


# -- file formats ----------------------------------------------------------


def save_json(curve: PitchCurve, path) -> None:
    Path(path).write_text(json.dumps(curve.to_dict()), encoding="utf-8")


def load_json(path) -> PitchCurve:
    return PitchCurve.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_csv(curve: PitchCurve, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "f0", "voiced"])
        for i, (v, flag) in enumerate(zip(curve.values, curve.voiced)):
            writer.writerow([i, f"{v:.6f}", int(flag)])


def load_csv(path, hop_seconds: float = DEFAULT_HOP_SECONDS, unit: str = HZ) -> PitchCurve:
    """Read a ``frame,f0,voiced`` CSV. The hop is not stored in the file."""
    values, voiced = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != [
            "frame",
            "f0",
            "voiced",
        ]:
            raise CurveError(f"{path}: expected header 'frame,f0,voiced'")
        for expected, row in enumerate(reader):
            if int(row["frame"]) != expected:
                raise CurveError(f"{path}: frames must be numbered 0..N-1")
            values.append(float(row["f0"]))
            voiced.append(row["voiced"].strip().lower() in ("1", "true", "t", "yes"))
    return PitchCurve(np.array(values), np.array(voiced, dtype=bool), hop_seconds, unit)


def load_curve(path, hop_seconds: float = DEFAULT_HOP_SECONDS) -> PitchCurve:
    """Load a curve from ``.json`` or ``.csv`` by extension."""
    if str(path).lower().endswith(".csv"):
        return load_csv(path, hop_seconds=hop_seconds)
    return load_json(path)


def save_curve(curve: PitchCurve, path) -> None:
    if str(path).lower().endswith(".csv"):
        save_csv(curve, path)
    else:
        save_json(curve, path)
