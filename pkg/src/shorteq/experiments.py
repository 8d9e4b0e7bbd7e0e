"""Monte Carlo experiment runner and report writers.

Experiments are driven by a JSON :class:`ExperimentConfig`.  Each SNR point
fixes the noise variance through the convention ``sw2 = ||h||^2 / 10^(dB/10)``,
designs the filters, and simulates blocks of ``message_len`` symbols until
every detector has seen ``min_bit_errors`` errors or the block budget runs
out.  Blocks draw from counter-based streams keyed by (seed, point, block),
and stopping decisions consume results in block order, so reports are
bit-identical for any worker count.

Each transmitted block is the message framed by ``pad`` copies of the
constellation's first symbol on both sides, matching the known start/end
state convention of the trellis detectors; framing symbols are excluded
from error counts.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import RatePoint, score_design, wilson_interval
from .channel import (
    ChannelInstance,
    Constellation,
    RngStream,
    constellation_by_name,
    equalize,
    exp_decay_channel,
    load_channel_spec,
    transmit,
)
from .designs import (
    DesignResult,
    gpr_monic_target,
    mmse_fixed_target,
    posterior_equivalent_family,
    zfe,
)
from .detect import Trellis, viterbi_detect
from .errors import ConfigError
from .firtarget import (
    FirProblem,
    dominant_error_search,
    fir_loss_curve,
    predict_error_rates,
    snr_upper_bound,
    solve_fir_target,
)
from .sequences import DEFAULT_GRID, Sequence

#: State budget for the full-complexity (unequalized) reference detector.
FULL_STATE_BUDGET = {2: 256, 3: 6561}

CSV_HEADER = "snr_db,trials,errors,rate,ci_lo,ci_hi,predicted"

_SIM_METHODS = ("monic", "fir", "zfe", "mmse", "family")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description (see README for the JSON schema)."""

    snr_db: tuple
    channel: object = "exp8"
    constellation: str = "bpsk"
    method: str = "monic"
    target_len: int = 3
    target_lens: tuple | None = None  # sweep for fir-loss runs
    alpha: float | None = None
    beta: float | None = None
    equalizer_len: int = 21
    message_len: int = 10000
    min_bit_errors: int = 100
    max_blocks: int = 2000
    seed: int = 0
    workers: int = 1
    grid_size: int = DEFAULT_GRID
    full_detector: bool = True

    @classmethod
    def from_json(cls, source) -> "ExperimentConfig":
        if isinstance(source, (str, bytes)):
            try:
                with open(source) as fh:
                    raw = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {source!r}: {exc}") from exc
        else:
            raw = dict(source)
        try:
            cfg = cls(
                snr_db=tuple(float(s) for s in raw["snr_db"]),
                channel=raw.get("channel", "exp8"),
                constellation=raw.get("constellation", "bpsk"),
                method=raw.get("method", "monic"),
                target_len=int(raw.get("target_len", 3)),
                target_lens=tuple(int(v) for v in raw["target_lens"]) if "target_lens" in raw else None,
                alpha=float(raw["alpha"]) if raw.get("alpha") is not None else None,
                beta=float(raw["beta"]) if raw.get("beta") is not None else None,
                equalizer_len=int(raw.get("equalizer_len", 21)),
                message_len=int(raw.get("message_len", 10000)),
                min_bit_errors=int(raw.get("min_bit_errors", 100)),
                max_blocks=int(raw.get("max_blocks", 2000)),
                seed=int(raw.get("seed", 0)),
                workers=int(raw.get("workers", 1)),
                grid_size=int(raw.get("grid_size", DEFAULT_GRID)),
                full_detector=bool(raw.get("full_detector", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad experiment config: {exc}") from exc
        cfg.validate()
        return cfg

    def validate(self):
        if not self.snr_db:
            raise ConfigError("snr_db must be a nonempty list")
        if self.method not in _SIM_METHODS:
            raise ConfigError(f"method must be one of {_SIM_METHODS}, got {self.method!r}")
        if self.target_len < 1:
            raise ConfigError("target_len must be >= 1")
        if self.message_len < self.target_len:
            raise ConfigError("message_len must be >= target_len")
        if self.min_bit_errors < 1 or self.max_blocks < 1 or self.workers < 1:
            raise ConfigError("min_bit_errors, max_blocks and workers must be >= 1")
        try:
            constellation_by_name(self.constellation)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        self.resolve_channel()

    def resolve_channel(self) -> Sequence:
        if isinstance(self.channel, str) and self.channel == "exp8":
            return exp_decay_channel(9, 0.5)
        try:
            return load_channel_spec(self.channel, self.grid_size).h
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot resolve channel {self.channel!r}: {exc}") from exc

    def to_dict(self) -> dict:
        d = {
            "snr_db": list(self.snr_db),
            "channel": self.channel if isinstance(self.channel, str) else dict(self.channel),
            "constellation": self.constellation,
            "method": self.method,
            "target_len": self.target_len,
            "alpha": self.alpha,
            "beta": self.beta,
            "equalizer_len": self.equalizer_len,
            "message_len": self.message_len,
            "min_bit_errors": self.min_bit_errors,
            "max_blocks": self.max_blocks,
            "seed": self.seed,
            "workers": self.workers,
            "grid_size": self.grid_size,
            "full_detector": self.full_detector,
        }
        if self.target_lens is not None:
            d["target_lens"] = list(self.target_lens)
        return d


def sigma_for_snr(h: Sequence, snr_db: float) -> float:
    """Noise variance from the ``||h||^2 / sw2`` SNR convention."""
    return h.energy() / 10.0 ** (snr_db / 10.0)


def truncated_target(g: Sequence, length: int) -> Sequence:
    """Leading ``length`` taps of a causal target."""
    if len(g) <= length:
        return g
    return Sequence(0, g.taps[:length], trim=False)


def build_design(config: ExperimentConfig, ch: ChannelInstance):
    """Design filters for one SNR point.

    Returns ``(design, fir_solution_or_None, dominant_error_or_None)``.
    ``monic`` uses the length-constrained monic GPR quadratic; ``zfe`` and
    ``mmse`` reuse its target with their own equalizers; ``family`` targets
    are truncated to ``target_len`` leading taps.
    """
    length = config.target_len
    eq_len = config.equalizer_len
    grid = config.grid_size
    if config.method == "fir":
        dom = dominant_error_search(ch)
        sol = solve_fir_target(
            FirProblem(ch, length, dom.e, grid), equalizer_len=eq_len
        )
        design = DesignResult(
            method="fir_optimal",
            f=sol.f,
            g=sol.g,
            sigma_v2=sol.lam,
            lam=sol.lam,
            diagnostics={"loss_db": sol.loss_db, "snr": sol.snr, "snr_max": sol.snr_max},
        )
        return design, sol, dom
    if config.method == "monic":
        design = gpr_monic_target(ch, length, equalizer_len=eq_len, grid_size=grid)
        return design, None, None
    if config.method == "family":
        alpha = config.alpha if config.alpha is not None else 1.0
        beta = config.beta if config.beta is not None else 0.0
        fam = posterior_equivalent_family(
            ch, alpha, beta, equalizer_len=eq_len, grid_size=grid
        )
        g_short = truncated_target(fam.g, length)
        return replace(fam, g=g_short), None, None
    g_short = gpr_monic_target(ch, length, equalizer_len=eq_len, grid_size=grid).g
    if config.method == "zfe":
        return zfe(ch, g_short, equalizer_len=eq_len, grid_size=grid), None, None
    return mmse_fixed_target(ch, g_short, equalizer_len=eq_len, grid_size=grid), None, None


@dataclass(frozen=True)
class DetectorSpec:
    name: str
    equalizer: Sequence | None  # None = detect on the raw channel output
    trellis: Trellis


def _simulate_block(args):
    (seed, stream_id, ch, constellation, message_len, pad, specs) = args
    gen = RngStream(seed, stream_id).generator()
    msg_idx = gen.integers(0, constellation.size, size=message_len)
    pts = constellation.points
    framed = np.concatenate(
        [np.full(pad, pts[0]), pts[msg_idx], np.full(pad, pts[0])]
    )
    x = Sequence(-pad, framed, trim=False)
    y = transmit(x, ch, gen)
    counts = {}
    for spec in specs:
        z = y if spec.equalizer is None else equalize(y, spec.equalizer)
        res = viterbi_detect(z, spec.trellis, message_len)
        counts[spec.name] = int(np.sum(res.symbol_indices != msg_idx))
    return counts


def _run_point(
    ch: ChannelInstance,
    constellation: Constellation,
    specs: list,
    config: ExperimentConfig,
    point_index: int,
) -> dict:
    """Simulate one SNR point; returns per-detector (errors, trials, blocks)."""
    pad = max(spec.trellis.target_len for spec in specs) - 1
    m_len = config.message_len
    totals = {spec.name: 0 for spec in specs}
    blocks_used = 0
    # The full-complexity reference has the lowest error rate; letting it
    # gate the stop rule would inflate every budget, so it may end censored.
    gating = [spec.name for spec in specs if spec.name != "full"] or [specs[0].name]

    def make_args(block):
        stream_id = (point_index << 32) | block
        return (config.seed, stream_id, ch, constellation, m_len, pad, specs)

    def consume(counts):
        nonlocal blocks_used
        for name, errs in counts.items():
            totals[name] += errs
        blocks_used += 1
        return all(totals[name] >= config.min_bit_errors for name in gating)

    done = False
    if config.workers == 1:
        for block in range(config.max_blocks):
            if consume(_simulate_block(make_args(block))):
                done = True
                break
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            block = 0
            while block < config.max_blocks and not done:
                wave = list(range(block, min(block + config.workers, config.max_blocks)))
                for counts in pool.map(_simulate_block, [make_args(b) for b in wave]):
                    # Results are consumed in block order even when more of
                    # the wave finished, so stopping is schedule-independent.
                    if consume(counts):
                        done = True
                        break
                block = wave[-1] + 1
    trials = blocks_used * m_len
    return {name: (errs, trials) for name, errs in totals.items()}


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    series: dict = field(default_factory=dict)  # name -> list[RatePoint]
    curve: list = field(default_factory=list)  # fir-loss rows (L, loss_db)
    artifacts: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    @property
    def primary_name(self) -> str:
        return next(iter(self.series))

    def to_json_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "config": self.config,
            "runtime_s": self.runtime_s,
            "series": {
                name: [vars(pt) for pt in pts] for name, pts in self.series.items()
            },
            "artifacts": self.artifacts,
        }
        if self.curve:
            out["curve"] = [{"L": l, "loss_db": v} for l, v in self.curve]
        return out

    def write_json(self, path: str):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def csv_lines(self, series_name: str) -> list[str]:
        lines = [CSV_HEADER]
        for pt in self.series[series_name]:
            pred = "" if pt.predicted is None else f"{pt.predicted:.10g}"
            lines.append(
                f"{pt.snr_db:.10g},{pt.trials},{pt.errors},{pt.rate:.10g},"
                f"{pt.ci_lo:.10g},{pt.ci_hi:.10g},{pred}"
            )
        return lines

    def write_csv(self, path: str, series_name: str | None = None):
        if self.kind == "fir_loss":
            lines = ["L,loss_db"] + [f"{l},{v:.10g}" for l, v in self.curve]
        else:
            lines = self.csv_lines(series_name or self.primary_name)
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _point_rows(series_totals, snr_db, min_errors, predicted):
    rows = {}
    for name, (errors, trials) in series_totals.items():
        rate = errors / trials if trials else float("nan")
        lo, hi = wilson_interval(errors, trials)
        rows[name] = RatePoint(
            snr_db=snr_db,
            trials=trials,
            errors=errors,
            rate=rate,
            ci_lo=lo,
            ci_hi=hi,
            predicted=predicted.get(name),
            censored=errors < min_errors,
        )
    return rows


def _full_detector_spec(ch: ChannelInstance, constellation: Constellation):
    budget = FULL_STATE_BUDGET.get(constellation.size)
    if budget is None:
        return None
    states = constellation.size ** (len(ch.h) - 1)
    if states > budget:
        return None
    return DetectorSpec("full", None, Trellis(constellation, ch.h, 0.0))


def run_ber(config: ExperimentConfig) -> ExperimentReport:
    """Binary BER of the configured shortened design vs the full detector."""
    t0 = time.time()
    constellation = constellation_by_name(config.constellation)
    if constellation.size != 2:
        raise ConfigError("run_ber expects a binary constellation")
    h = config.resolve_channel()
    report = ExperimentReport(kind="ber", config=config.to_dict())
    series: dict[str, list] = {}
    for idx, snr_db in enumerate(config.snr_db):
        ch = ChannelInstance(h, sigma_for_snr(h, snr_db), constellation.mode)
        design, sol, dom = build_design(config, ch)
        specs = [DetectorSpec("shortened", design.f, Trellis(constellation, design.g, 0.0))]
        if config.full_detector:
            full = _full_detector_spec(ch, constellation)
            if full is not None:
                specs.append(full)
        if dom is None:
            dom = dominant_error_search(ch)
        if sol is not None:
            model = predict_error_rates(sol, ch, dom.e, config.message_len, dom.multiplicity)
        else:
            model = score_design(design, ch, dom.e, config.message_len, dom.multiplicity)
        totals = _run_point(ch, constellation, specs, config, idx)
        rows = _point_rows(
            totals, snr_db, config.min_bit_errors, {"shortened": model.p_bit}
        )
        for name, row in rows.items():
            series.setdefault(name, []).append(row)
        report.artifacts[f"snr_{snr_db:g}"] = {
            "design": design.to_dict(),
            "predicted_ber": model.p_bit,
            "dominant_error": dom.e.to_dict(),
            "dominant_multiplicity": dom.multiplicity,
        }
    report.series = series
    report.runtime_s = time.time() - t0
    return report


def run_ser_ternary(config: ExperimentConfig) -> ExperimentReport:
    """Ternary SER with and without the prior-correction branch term.

    Three detectors share every received block: the shortened design with
    the ``-lam |x_n|^2`` correction, the same without it, and (state budget
    permitting) the full-complexity detector on the raw channel output.
    """
    t0 = time.time()
    constellation = constellation_by_name(config.constellation)
    if constellation.size != 3:
        raise ConfigError("run_ser_ternary expects the ternary constellation")
    h = config.resolve_channel()
    report = ExperimentReport(kind="ser", config=config.to_dict())
    series: dict[str, list] = {}
    for idx, snr_db in enumerate(config.snr_db):
        ch = ChannelInstance(h, sigma_for_snr(h, snr_db), constellation.mode)
        design, _, _ = build_design(config, ch)
        corr = design.correction
        specs = [
            DetectorSpec("corrected", design.f, Trellis(constellation, design.g, corr)),
            DetectorSpec("uncorrected", design.f, Trellis(constellation, design.g, 0.0)),
        ]
        if config.full_detector:
            full = _full_detector_spec(ch, constellation)
            if full is not None:
                specs.append(full)
        totals = _run_point(ch, constellation, specs, config, idx)
        rows = _point_rows(totals, snr_db, config.min_bit_errors, {})
        for name, row in rows.items():
            series.setdefault(name, []).append(row)
        report.artifacts[f"snr_{snr_db:g}"] = {
            "design": design.to_dict(),
            "correction": corr,
        }
    report.series = series
    report.runtime_s = time.time() - t0
    return report


def run_fir_loss(config: ExperimentConfig) -> ExperimentReport:
    """Sweep target length at the first configured SNR; no simulation."""
    t0 = time.time()
    h = config.resolve_channel()
    lengths = config.target_lens or tuple(range(2, 11))
    snr_db = config.snr_db[0]
    ch = ChannelInstance(h, sigma_for_snr(h, snr_db), "real")
    dom = dominant_error_search(ch)
    report = ExperimentReport(kind="fir_loss", config=config.to_dict())
    report.curve = fir_loss_curve(
        ch, lengths, e=dom.e, grid_size=config.grid_size, equalizer_len=config.equalizer_len
    )
    report.artifacts = {
        "snr_db": snr_db,
        "dominant_error": dom.e.to_dict(),
        "snr_max": snr_upper_bound(ch, dom.e),
    }
    report.runtime_s = time.time() - t0
    return report


def run_predict(config: ExperimentConfig) -> ExperimentReport:
    """Model-only error-rate predictions (no simulation columns)."""
    t0 = time.time()
    constellation = constellation_by_name(config.constellation)
    if constellation.size != 2:
        raise ConfigError("predictions are defined for binary signaling")
    h = config.resolve_channel()
    report = ExperimentReport(kind="predict", config=config.to_dict())
    rows = []
    for snr_db in config.snr_db:
        ch = ChannelInstance(h, sigma_for_snr(h, snr_db), "real")
        design, sol, dom = build_design(config, ch)
        if dom is None:
            dom = dominant_error_search(ch)
        if sol is not None:
            model = predict_error_rates(sol, ch, dom.e, config.message_len, dom.multiplicity)
        else:
            model = score_design(design, ch, dom.e, config.message_len, dom.multiplicity)
        rows.append(
            RatePoint(
                snr_db=snr_db,
                trials=0,
                errors=0,
                rate=float("nan"),
                ci_lo=float("nan"),
                ci_hi=float("nan"),
                predicted=model.p_bit,
                censored=False,
            )
        )
        report.artifacts[f"snr_{snr_db:g}"] = {
            "design": design.to_dict(),
            "snr_eff": model.snr_eff,
            "kappa": model.kappa,
            "p_seq": model.p_seq,
        }
    report.series = {"predicted": rows}
    report.runtime_s = time.time() - t0
    return report


def run_design(config: ExperimentConfig) -> dict:
    """Design filters at the first configured SNR and return the JSON dict."""
    h = config.resolve_channel()
    constellation = constellation_by_name(config.constellation)
    ch = ChannelInstance(h, sigma_for_snr(h, config.snr_db[0]), constellation.mode)
    design, sol, _ = build_design(config, ch)
    out = design.to_dict()
    if sol is not None:
        out["fir_solution"] = sol.to_dict()
    out["channel"] = ch.to_dict()
    out["snr_db"] = config.snr_db[0]
    return out
