"""``popslab`` batch front-end.

An experiment descriptor is a small INI-like document::

    # comments start with '#'
    [lattice]
    kind = hexagonal
    Q = 128
    CP = 32

    [channel]
    BdTm = 0.01

    [pops]
    D_over_T = 7
    snr_dB = inf

Lists are comma separated; ``a:b:s`` expands to the inclusive range
``a, a+s, ..., b``.  Unknown sections or keys are errors.

Exit codes: 0 success, 2 descriptor error, 3 I/O error, 4 computation
error, 5 validation tolerance breach.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io, metrics
from .channel import DelayProfile, Jakes, ScatteringSpec, balanced_spec, exponential_profile, nominal_spec
from .lattice import HEXAGONAL, LATTICE_KINDS, LatticeConfig
from .mc_oracle import simulate_link
from .solver import PopsConfig, from_db, optimize_balanced, sinr_of_pair

COMMANDS = ("optimize", "sweep", "psd", "sensitivity", "codebook", "validate")

EXIT_OK, EXIT_DESCRIPTOR, EXIT_IO, EXIT_COMPUTE, EXIT_VALIDATION = 0, 2, 3, 4, 5


class DescriptorError(ValueError):
    pass


def _int(v):
    return int(v)


def _float(v):
    return float(v)


def _word(v):
    return v.strip()


def _bool(v):
    v = v.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _expand(token: str, conv):
    if ":" in token:
        a, b, s = (Fraction(x.strip()) for x in token.split(":"))
        if s == 0 or (b - a) * s < 0:
            raise ValueError(f"bad range {token!r}")
        n = int((b - a) / s)
        return [conv(str(float(a + i * s))) if conv is _float else conv(str(int(a + i * s))) for i in range(n + 1)]
    return [conv(token)]


def _list_of(conv):
    def parse(v):
        out = []
        for tok in v.split(","):
            tok = tok.strip()
            if tok:
                out.extend(_expand(tok, conv))
        if not out:
            raise ValueError("empty list")
        return out
    return parse


SCHEMA = {
    "experiment": {"command": _word, "seed": _int, "out": _word},
    "lattice": {"kind": _word, "Q": _int, "N": _int, "CP": _int, "FT": _word, "Ts": _float},
    "channel": {"BdTm": _float, "K_grid": _list_of(_int), "balance": _word,
                "f_D": _float, "K": _int, "b": _float},
    "pops": {"snr_dB": _float, "epsilon": _float, "max_iters": _int, "D_over_T": _int,
             "window_search": _int, "screen_iters": _int},
    "sweep": {"axis": _word, "values": _list_of(_float), "D_list": _list_of(_int), "kinds": _list_of(_word),
              "include_ofdm": _bool},
    "psd": {"n_subcarriers": _int, "oversample": _int, "D_list": _list_of(_int), "kinds": _list_of(_word)},
    "sensitivity": {"axis": _word, "values": _list_of(_float), "kinds": _list_of(_word), "include_ofdm": _bool},
    "codebook": {"BdTm_list": _list_of(_float), "eval_grid": _list_of(_float)},
    "validate": {"trials": _int, "snr_dB": _float, "tolerance_dB": _float},
}


@dataclass
class ExperimentDescriptor:
    command: str = None
    lattice: LatticeConfig = None
    channel: dict = field(default_factory=dict)
    pops: PopsConfig = None
    D_over_T: int = 3
    sections: dict = field(default_factory=dict)
    seed: int = 0
    out: str = None

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})


def _raw_sections(text: str) -> dict:
    """``{section: {key: (value, line)}}`` with duplicate and syntax checks."""
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise DescriptorError(f"line {lineno}: malformed section header {raw.strip()!r}")
            current = line[1:-1].strip()
            if current not in SCHEMA:
                raise DescriptorError(f"line {lineno}: unknown section [{current}]")
            if current in sections:
                raise DescriptorError(f"line {lineno}: section [{current}] repeated")
            sections[current] = {}
            continue
        if "=" not in line:
            raise DescriptorError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if current is None:
            raise DescriptorError(f"line {lineno}: key outside of any section")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA[current]:
            raise DescriptorError(f"line {lineno}: unknown key {key!r} in [{current}]")
        if key in sections[current]:
            first = sections[current][key][1]
            raise DescriptorError(f"duplicate key {key!r} in [{current}] at lines {first} and {lineno}")
        sections[current][key] = (value, lineno)
    return sections


def _typed(sections: dict) -> dict:
    out = {}
    for name, entries in sections.items():
        out[name] = {}
        for key, (value, lineno) in entries.items():
            try:
                out[name][key] = SCHEMA[name][key](value)
            except ValueError as exc:
                raise DescriptorError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return out


def _lattice(sec: dict) -> LatticeConfig:
    kind = sec.get("kind", HEXAGONAL)
    if kind not in LATTICE_KINDS:
        raise DescriptorError(f"lattice.kind: unknown lattice {kind!r}")
    if "Q" not in sec:
        raise DescriptorError("lattice.Q is required")
    Q = sec["Q"]
    given = [k for k in ("N", "CP", "FT") if k in sec]
    if len(given) != 1:
        raise DescriptorError("lattice: give exactly one of N, CP, FT")
    if "N" in sec:
        N = sec["N"]
    elif "CP" in sec:
        N = Q + sec["CP"]
    else:
        N = Fraction(sec["FT"]) * Q
        if N.denominator != 1:
            raise DescriptorError(f"lattice.FT: FT*Q = {N} is not an integer")
        N = int(N)
    try:
        return LatticeConfig(kind, Q, N, sec.get("Ts", 1e-6))
    except ValueError as exc:
        raise DescriptorError(f"lattice.N: {exc}") from None


def _channel(sec: dict) -> dict:
    explicit = [k for k in ("f_D", "K", "b") if k in sec]
    if ("BdTm" in sec) == bool(explicit):
        raise DescriptorError("channel: give either BdTm or the explicit (f_D, K[, b]) parameters")
    if explicit:
        if "f_D" not in sec or "K" not in sec:
            raise DescriptorError("channel: explicit parameterization needs both f_D and K")
        for k in ("K_grid", "balance"):
            if k in sec:
                raise DescriptorError(f"channel.{k}: only valid together with BdTm")
        return dict(sec)
    if sec["BdTm"] <= 0:
        raise DescriptorError("channel.BdTm must be positive")
    bal = sec.get("balance", "search")
    if bal not in ("search", "nominal"):
        raise DescriptorError(f"channel.balance: expected 'search' or 'nominal', got {bal!r}")
    return dict(sec)


def _pops(sec: dict, channel: dict) -> tuple:
    D = sec.get("D_over_T", 3)
    if D < 1:
        raise DescriptorError("pops.D_over_T must be a positive integer")
    snr_dB = sec.get("snr_dB", math.inf)
    kw = {"snr": from_db(snr_dB)}
    for k in ("epsilon", "max_iters", "window_search", "screen_iters"):
        if k in sec:
            kw[k] = sec[k]
    if "K_grid" in channel:
        kw["K_grid"] = tuple(channel["K_grid"])
    try:
        return PopsConfig(**kw), D
    except ValueError as exc:
        raise DescriptorError(f"pops: {exc}") from None


def parse_descriptor(text: str) -> ExperimentDescriptor:
    sections = _typed(_raw_sections(text))
    exp = sections.get("experiment", {})
    cmd = exp.get("command")
    if cmd is not None and cmd not in COMMANDS:
        raise DescriptorError(f"experiment.command: unknown command {cmd!r}")
    if "lattice" not in sections:
        raise DescriptorError("missing [lattice] section")
    if "channel" not in sections:
        raise DescriptorError("missing [channel] section")
    lattice = _lattice(sections["lattice"])
    channel = _channel(sections["channel"])
    pops, D = _pops(sections.get("pops", {}), channel)
    return ExperimentDescriptor(cmd, lattice, channel, pops, D, sections, exp.get("seed", 0), exp.get("out"))


# ---------------------------------------------------------------- commands

def _specs(d: ExperimentDescriptor, cfg: LatticeConfig = None, BdTm: float = None):
    """Channel candidates for a design on ``cfg``."""
    cfg = cfg or d.lattice
    ch = d.channel
    if "f_D" in ch:
        prof = exponential_profile(ch["K"], ch.get("b"))
        return [ScatteringSpec(DelayProfile(prof.delays, prof.powers), Jakes(ch["f_D"]))]
    b = ch["BdTm"] if BdTm is None else BdTm
    if ch.get("balance", "search") == "nominal":
        return [nominal_spec(b, cfg)]
    return balanced_spec(b, cfg, d.pops.K_grid)


def _design(d: ExperimentDescriptor, cfg: LatticeConfig, D: int = None):
    D = d.D_over_T if D is None else D
    res = optimize_balanced(d.channel.get("BdTm"), cfg, d.pops, D * cfg.N, D * cfg.N, specs=_specs(d, cfg))
    pair = metrics.pair_from_result(res, cfg, d.channel.get("BdTm", math.nan), d.pops.snr)
    return res, pair


def _with_kind(cfg: LatticeConfig, kind: str) -> LatticeConfig:
    return LatticeConfig(kind, cfg.Q, cfg.N, cfg.Ts)


def _ofdm(d: ExperimentDescriptor, spec=None):
    cfg = d.lattice
    return metrics.ofdm_design(cfg.Q, cfg.N - cfg.Q, d.channel.get("BdTm", 0.0), d.pops.snr, cfg.Ts, spec=spec)


def cmd_optimize(d, out: Path, workers: int):
    res, pair = _design(d, d.lattice)
    trace = metrics.SweepResult("half_step", list(range(1, len(res.sinr_trace) + 1)), {"sinr_dB": res.sinr_trace})
    io.write_csv(out / "trace.csv", trace)
    io.write_codebook(out / "pair.popscb", metrics.Codebook([pair]))
    return EXIT_OK


def cmd_sweep(d, out: Path, workers: int):
    s = d.section("sweep")
    axis = s.get("axis", "ft")
    cfg = d.lattice
    kinds = tuple(s.get("kinds", LATTICE_KINDS))
    D_list = s.get("D_list", [d.D_over_T])
    bdtm = d.channel.get("BdTm")
    if bdtm is None:
        raise DescriptorError("sweep: requires the BdTm channel parameterization")
    if "values" not in s:
        raise DescriptorError("sweep.values is required")
    vals = s["values"]
    if axis == "ft":
        res = metrics.sweep_ft(cfg.Q, bdtm, D_list, [Fraction(v).limit_denominator(1000) for v in vals], kinds,
                               d.pops, s.get("include_ofdm", True), cfg.Ts, workers)
    elif axis == "spread":
        res = metrics.sweep_spread(cfg.Q, cfg.FT, D_list[0], vals, d.pops, kinds, s.get("include_ofdm", True),
                                   cfg.Ts, workers)
    elif axis == "q":
        res = metrics.sweep_q([int(v) for v in vals], D_list, [cfg.FT], bdtm, d.pops, cfg.kind, cfg.Ts, workers)
    elif axis == "snr":
        res = metrics.sweep_snr(cfg.Q, [cfg.FT], D_list[0], bdtm, vals, d.pops, cfg.kind, cfg.Ts, workers)
    else:
        raise DescriptorError(f"sweep.axis: unknown axis {axis!r}")
    io.write_csv(out / f"sweep_{axis}.csv", res)
    return EXIT_OK


def cmd_psd(d, out: Path, workers: int):
    s = d.section("psd")
    cfg = d.lattice
    n_sub = s.get("n_subcarriers", 65)
    over = s.get("oversample", 64)
    single, agg = {}, {}
    for kind in s.get("kinds", [cfg.kind]):
        for D in s.get("D_list", [d.D_over_T]):
            _, pair = _design(d, _with_kind(cfg, kind), D)
            name = f"{kind}_D{D}"
            single[name] = metrics.psd(pair.phi, cfg.Q, over)
            agg[name] = metrics.aggregate_psd(pair.phi, cfg, n_sub, over)
    phi, _, ocfg = metrics.conventional_ofdm_pair(cfg.Q, cfg.N - cfg.Q, cfg.Ts)
    single["ofdm"] = metrics.psd(phi, cfg.Q, over)
    agg["ofdm"] = metrics.aggregate_psd(phi, ocfg, n_sub, over)
    for tag, table in (("single", single), ("aggregate", agg)):
        # spectra of different lengths live on different grids; resample onto the finest
        ref = max(table.values(), key=lambda p: p.freq.size).freq
        series = {k: list(_interp(p, ref)) for k, p in table.items()}
        io.write_csv(out / f"psd_{tag}.csv", metrics.SweepResult("f_over_F", list(ref), series))
    return EXIT_OK


def _interp(p, grid):
    if p.freq.size == grid.size:
        return p.psd_dB
    return np.interp(grid, p.freq, p.psd_dB)


def cmd_sensitivity(d, out: Path, workers: int):
    s = d.section("sensitivity")
    axis = s.get("axis", "freq")
    if axis not in ("freq", "time"):
        raise DescriptorError(f"sensitivity.axis: expected 'freq' or 'time', got {axis!r}")
    if "values" not in s:
        raise DescriptorError("sensitivity.values is required")
    systems = {}
    for kind in s.get("kinds", list(LATTICE_KINDS)):
        _, pair = _design(d, _with_kind(d.lattice, kind))
        systems[kind] = pair
    if s.get("include_ofdm", True):
        systems["ofdm"] = _ofdm(d) if "BdTm" in d.channel else _ofdm(d, _specs(d)[0])
    vals = s["values"]
    if axis == "time":
        vals = [int(round(v)) for v in vals]
    res = metrics.sensitivity_sweep(systems, axis, vals, d.pops.snr)
    io.write_csv(out / f"sensitivity_{axis}.csv", res)
    return EXIT_OK


def cmd_codebook(d, out: Path, workers: int):
    s = d.section("codebook")
    if "BdTm_list" not in s:
        raise DescriptorError("codebook.BdTm_list is required")
    cb = metrics.build_codebook(s["BdTm_list"], d.lattice, d.D_over_T, d.pops)
    io.write_codebook(out / "codebook.popscb", cb)
    grid = s.get("eval_grid", s["BdTm_list"])
    io.write_csv(out / "mismatch.csv", metrics.mismatch_matrix(cb, grid, d.pops.snr))
    return EXIT_OK


def cmd_validate(d, out: Path, workers: int):
    s = d.section("validate")
    trials = s.get("trials", 10000)
    tol = s.get("tolerance_dB", 0.2)
    snr = from_db(s["snr_dB"]) if "snr_dB" in s else d.pops.snr
    res, pair = _design(d, d.lattice)
    analytic = sinr_of_pair(pair.phi, pair.psi, res.spec, d.lattice, snr)
    est = simulate_link(pair.phi, pair.psi, res.spec, d.lattice, snr, trials, d.seed)
    diff = est.sinr_dB - analytic
    table = metrics.SweepResult("trials", [trials], {
        "analytic_dB": [analytic], "montecarlo_dB": [est.sinr_dB], "ci95_dB": [est.ci95_dB], "diff_dB": [diff],
        "P_S": [est.P_S], "P_I": [est.P_I], "P_N": [est.P_N]})
    io.write_csv(out / "validate.csv", table)
    if not abs(diff) <= tol:
        print(f"validation breach: |{diff:.4f}| dB > {tol} dB", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


HANDLERS = {"optimize": cmd_optimize, "sweep": cmd_sweep, "psd": cmd_psd, "sensitivity": cmd_sensitivity,
            "codebook": cmd_codebook, "validate": cmd_validate}


def _threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get("POPSLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DescriptorError(f"POPSLAB_THREADS must be an integer, got {env!r}") from None
    return 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="popslab", description="Waveform design for multicarrier lattices.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="experiment descriptor")
    ap.add_argument("--out", help="output directory (default: descriptor's experiment.out or '.')")
    ap.add_argument("--seed", type=int, help="Monte-Carlo seed (overrides the descriptor)")
    ap.add_argument("--threads", type=int, help="worker processes for sweeps")
    args = ap.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"cannot read descriptor: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        d = parse_descriptor(text)
        if d.command is not None and d.command != args.command:
            raise DescriptorError(f"descriptor is for {d.command!r}, not {args.command!r}")
        d.command = args.command
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise DescriptorError("--seed must be an unsigned 64-bit integer")
            d.seed = args.seed
        workers = _threads(args.threads)
    except DescriptorError as exc:
        print(f"descriptor error: {exc}", file=sys.stderr)
        return EXIT_DESCRIPTOR

    out = Path(args.out or d.out or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        return HANDLERS[d.command](d, out, workers)
    except DescriptorError as exc:
        print(f"descriptor error: {exc}", file=sys.stderr)
        return EXIT_DESCRIPTOR
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
