"""Text file formats: sweep CSV and the ``POPSCB v1`` codebook file.

Floats are written with ``repr`` (shortest round-trip decimal) so that a
write/read cycle is bit exact; infinities are spelled ``inf``/``-inf``.
"""
from __future__ import annotations

import math

import numpy as np

from .channel import DelayProfile, Jakes, Lines, ScatteringSpec
from .lattice import LatticeConfig, SampledWaveform
from .metrics import Codebook, DesignedPair, SweepResult

CODEBOOK_MAGIC = "POPSCB v1"


class FormatError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return repr(x)


def sweep_to_csv(res: SweepResult) -> str:
    names = list(res.series)
    lines = [",".join(["axis"] + names)]
    for i, a in enumerate(res.axis_values):
        lines.append(",".join([fmt(a)] + [fmt(res.series[n][i]) for n in names]))
    return "\n".join(lines) + "\n"


def write_csv(path, res: SweepResult):
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(sweep_to_csv(res))


def read_csv(path, axis_name: str = "axis") -> SweepResult:
    with open(path, encoding="utf-8") as f:
        rows = [ln.rstrip("\n").split(",") for ln in f if ln.strip()]
    if not rows or rows[0][0] != "axis":
        raise FormatError(f"{path}: missing 'axis' header")
    names = rows[0][1:]
    data = [[float(v) for v in r] for r in rows[1:]]
    series = {n: [r[i + 1] for r in data] for i, n in enumerate(names)}
    return SweepResult(axis_name, [r[0] for r in data], series)


def _spec_lines(spec: ScatteringSpec) -> list:
    d = spec.doppler
    if isinstance(d, Jakes):
        dop = f"doppler jakes {fmt(d.f_D)}"
    else:
        dop = "doppler lines " + " ".join(f"{fmt(f)}:{fmt(w)}" for f, w in zip(d.freqs, d.weights))
    paths = " ".join(f"{p}:{fmt(w)}" for p, w in zip(spec.delay.delays, spec.delay.powers))
    return [f"delay {paths}", dop, f"offsets {spec.time_offset_samples} {fmt(spec.freq_offset)}"]


def _waveform_lines(tag: str, w: SampledWaveform) -> list:
    out = [f"{tag} {w.start_index} {len(w)}"]
    out.extend(f"{fmt(z.real)},{fmt(z.imag)}" for z in w.samples)
    return out


def codebook_to_text(cb: Codebook) -> str:
    lines = [CODEBOOK_MAGIC, f"entries {len(cb.entries)}"]
    for e in cb.entries:
        c = e.lattice
        lines.append(f"design_BdTm {fmt(e.design_BdTm)}")
        lines.append(f"lattice {c.kind} {c.Q} {c.N}")
        lines.append(f"Ts {fmt(c.Ts)}")
        lines.append(f"snr {fmt(e.snr)}")
        lines.append(f"sir_dB {fmt(e.sir_dB if e.sir_dB is not None else math.nan)}")
        lines.extend(_spec_lines(e.spec))
        lines.extend(_waveform_lines("phi", e.phi))
        lines.extend(_waveform_lines("psi", e.psi))
    return "\n".join(lines) + "\n"


def write_codebook(path, cb: Codebook):
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(codebook_to_text(cb))


class _Reader:
    def __init__(self, lines):
        self.lines = lines
        self.i = 0

    def next(self, key: str) -> list:
        if self.i >= len(self.lines):
            raise FormatError(f"unexpected end of codebook, expected {key!r}")
        parts = self.lines[self.i].split()
        self.i += 1
        if not parts or parts[0] != key:
            raise FormatError(f"line {self.i}: expected {key!r}, got {self.lines[self.i - 1]!r}")
        return parts[1:]

    def samples(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=complex)
        for j in range(n):
            re, im = self.lines[self.i].split(",")
            out[j] = complex(float(re), float(im))
            self.i += 1
        return out


def _pairs(tokens):
    return [tuple(t.split(":")) for t in tokens]


def codebook_from_text(text: str) -> Codebook:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CODEBOOK_MAGIC:
        raise FormatError(f"not a codebook file (expected header {CODEBOOK_MAGIC!r})")
    r = _Reader(lines)
    r.i = 1
    n = int(r.next("entries")[0])
    entries = []
    for _ in range(n):
        bdtm = float(r.next("design_BdTm")[0])
        kind, Q, N = r.next("lattice")
        Ts = float(r.next("Ts")[0])
        snr = float(r.next("snr")[0])
        sir = float(r.next("sir_dB")[0])
        paths = _pairs(r.next("delay"))
        dop = r.next("doppler")
        if dop[0] == "jakes":
            doppler = Jakes(float(dop[1]))
        else:
            fw = _pairs(dop[1:])
            doppler = Lines(tuple(float(f) for f, _ in fw), tuple(float(w) for _, w in fw))
        dt, dnu = r.next("offsets")
        spec = ScatteringSpec(DelayProfile(tuple(int(p) for p, _ in paths), tuple(float(w) for _, w in paths)),
                              doppler, int(dt), float(dnu))
        cfg = LatticeConfig(kind, int(Q), int(N), Ts)
        ws = []
        for tag in ("phi", "psi"):
            start, length = r.next(tag)
            ws.append(SampledWaveform(r.samples(int(length)), Ts, int(start)))
        entries.append(DesignedPair(ws[0], ws[1], spec, cfg, bdtm, snr, None if math.isnan(sir) else sir))
    return Codebook(entries)


def read_codebook(path) -> Codebook:
    with open(path, encoding="utf-8") as f:
        return codebook_from_text(f.read())
