"""CSV and WAV writers.  CSV: header row, comma separated, 9 significant digits, LF."""

from __future__ import annotations

import io
import wave
from typing import Iterable, Sequence

import numpy as np


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.9g}"


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def probe_csv(samples) -> str:
    return csv_text(("step", "value"), enumerate(np.asarray(samples, dtype=float).tolist()))


def curve_csv(curve) -> str:
    return csv_text(("omega_nominal", "speed_ratio"), zip(curve.omega_nominal, curve.speed_ratio))


def spectrum_csv(spec) -> str:
    return csv_text(("omega", "magnitude_db"), zip(spec.omega, spec.magnitude_db))


def modes_csv(match) -> str:
    rows = (
        (e.m, e.n, e.omega_ideal, e.omega_predicted, e.omega_measured, e.relative_deviation)
        for e in match.entries
    )
    return csv_text(("m", "n", "omega_ideal", "omega_predicted", "omega_measured", "deviation"), rows)


def write_wav(path, samples, sample_rate: int = 44100, peak_dbfs: float = -1.0) -> None:
    """Mono 16-bit PCM, normalised so the largest sample sits at ``peak_dbfs``."""
    x = np.asarray(samples, dtype=float)
    peak = np.max(np.abs(x)) if x.size else 0.0
    gain = (10.0 ** (peak_dbfs / 20.0)) / peak if peak > 0 else 0.0
    pcm = np.round(x * gain * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(sample_rate))
        w.writeframes(pcm.tobytes())
