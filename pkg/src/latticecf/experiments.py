"""Experiment configuration, presets and the report runner.

Configs are plain JSON: a kind, a channel given by powers in dB and
squared gains, the schemes to include, grid densities and Monte-Carlo
settings.  The runner writes delimited output with 12 significant
digits so repeated runs are byte identical; figures are rendered next
to the tables unless plotting is turned off.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .channel import ChannelConfig, config_from_db
from .lattices import canonical_family
from .rates import (
    SCHEME_AF,
    SCHEME_DF,
    SCHEME_LCF1,
    SCHEME_LCF2,
    SCHEME_OUTER,
    asymptotic_references,
    canonical_scheme,
    equal_rate_curve,
    lcf1_distortions,
    lcf2_distortions,
    optimize_region,
)
from .schemes import (
    InfeasibleError,
    optimal_params_lcf1,
    optimal_params_lcf2,
    simulate_scheme,
)

KINDS = ("region", "equal_rate", "distortion", "simulate", "asymptotics")

_RATE_LABEL = {
    SCHEME_AF: "r_AF",
    SCHEME_DF: "r_DF",
    SCHEME_LCF1: "r_LCF1",
    SCHEME_LCF2: "r_LCF2",
    SCHEME_OUTER: "r_outer",
}
_CANONICAL_ORDER = (SCHEME_AF, SCHEME_DF, SCHEME_LCF1, SCHEME_LCF2, SCHEME_OUTER)

_CHANNEL_REQUIRED = ("p1_db", "p2_db", "pr_db", "h1_sq", "h2_sq")
_CHANNEL_OPTIONAL = ("sigma_r2", "sigma_1_2", "sigma_2_2")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class GridSpec:
    """Point counts of the uniform [0, 1] grids."""

    alpha: int = 201
    nu: int = 201
    eta: int = 101

    def __post_init__(self):
        for name in ("alpha", "nu", "eta"):
            v = getattr(self, name)
            if not (isinstance(v, int) and v >= 1):
                raise ConfigError(f"grid {name} must be a positive integer")


@dataclass(frozen=True)
class McSpec:
    n_blocks: int = 200
    block_dim: int = 800
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.n_blocks, int) and self.n_blocks >= 1):
            raise ConfigError("mc n_blocks must be a positive integer")
        if not (isinstance(self.block_dim, int) and self.block_dim >= 1):
            raise ConfigError("mc block_dim must be a positive integer")
        if not isinstance(self.seed, int):
            raise ConfigError("mc seed must be an integer")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    channel: Optional[dict] = None
    schemes: tuple = ()
    grids: GridSpec = field(default_factory=GridSpec)
    mc: Optional[McSpec] = None
    snr_db: Optional[tuple] = None
    alpha: float = 0.5
    nu: float = 0.5
    beta: float = 1.0
    family: str = "E8"
    margin: float = 1.2
    output_path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}, expected one of {KINDS}")

    def channel_config(self) -> ChannelConfig:
        if self.channel is None:
            raise ConfigError(f"kind {self.kind!r} needs a channel section")
        ch = self.channel
        return config_from_db(
            ch["p1_db"], ch["p2_db"], ch["pr_db"], ch["h1_sq"], ch["h2_sq"],
            sigma_r2=ch.get("sigma_r2", 1.0),
            sigma_1_2=ch.get("sigma_1_2", 1.0),
            sigma_2_2=ch.get("sigma_2_2", 1.0),
        )

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.channel is not None:
            d["channel"] = dict(self.channel)
        if self.schemes:
            d["schemes"] = list(self.schemes)
        d["grids"] = {"alpha": self.grids.alpha, "nu": self.grids.nu,
                      "eta": self.grids.eta}
        if self.mc is not None:
            d["mc"] = {"n_blocks": self.mc.n_blocks,
                       "block_dim": self.mc.block_dim, "seed": self.mc.seed}
        if self.snr_db is not None:
            d["snr_db"] = list(self.snr_db)
        if self.kind in ("distortion", "simulate"):
            d["alpha"] = self.alpha
            d["nu"] = self.nu
            d["beta"] = self.beta
        if self.kind == "simulate":
            d["family"] = self.family
            d["margin"] = self.margin
        if self.output_path is not None:
            d["output_path"] = self.output_path
        return d

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        allowed = {"kind", "channel", "schemes", "grids", "mc", "snr_db",
                   "alpha", "nu", "beta", "family", "margin", "output_path"}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "kind" not in data:
            raise ConfigError("config needs a kind")
        kind = str(data["kind"]).replace("-", "_")
        if kind not in KINDS:
            raise ConfigError(f"unknown kind {data['kind']!r}, expected one of {KINDS}")

        channel = data.get("channel")
        if channel is not None:
            if not isinstance(channel, dict):
                raise ConfigError("channel must be an object")
            missing = [k for k in _CHANNEL_REQUIRED if k not in channel]
            if missing:
                raise ConfigError(f"channel is missing: {', '.join(missing)}")
            bad = sorted(set(channel) - set(_CHANNEL_REQUIRED) - set(_CHANNEL_OPTIONAL))
            if bad:
                raise ConfigError(f"unknown channel keys: {', '.join(bad)}")
            try:
                channel = {k: float(v) for k, v in channel.items()}
            except (TypeError, ValueError):
                raise ConfigError("channel values must be numbers")
        elif kind in ("region", "distortion", "simulate"):
            raise ConfigError(f"kind {kind!r} needs a channel section")

        try:
            schemes = tuple(canonical_scheme(s) for s in data.get("schemes", ()))
        except ValueError as e:
            raise ConfigError(str(e))
        if kind in ("region", "equal_rate", "distortion") and not schemes:
            raise ConfigError(f"kind {kind!r} needs at least one scheme")
        if kind == "simulate":
            if len(schemes) != 1 or schemes[0] not in (SCHEME_LCF1, SCHEME_LCF2):
                raise ConfigError("simulate takes exactly one scheme, LCF1 or LCF2")
        if kind == "distortion":
            extra = [s for s in schemes if s not in (SCHEME_LCF1, SCHEME_LCF2)]
            if extra:
                raise ConfigError("distortion supports only LCF1 and LCF2")

        grids_in = data.get("grids", {})
        if not isinstance(grids_in, dict):
            raise ConfigError("grids must be an object")
        try:
            grids = GridSpec(**{k: int(v) for k, v in grids_in.items()})
        except TypeError:
            raise ConfigError("grids accepts keys alpha, nu, eta")
        except ValueError:
            raise ConfigError("grid sizes must be integers")

        mc = None
        if "mc" in data:
            mc_in = data["mc"]
            if not isinstance(mc_in, dict):
                raise ConfigError("mc must be an object")
            try:
                mc = McSpec(**{k: int(v) for k, v in mc_in.items()})
            except TypeError:
                raise ConfigError("mc accepts keys n_blocks, block_dim, seed")
            except ValueError:
                raise ConfigError("mc values must be integers")

        snr_db = None
        if "snr_db" in data:
            try:
                snr_db = tuple(float(v) for v in data["snr_db"])
            except (TypeError, ValueError):
                raise ConfigError("snr_db must be a list of numbers")
            if not snr_db:
                raise ConfigError("snr_db must be nonempty")

        def num(key, default, low=None, high=None, strict_low=False):
            v = data.get(key, default)
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise ConfigError(f"{key} must be a number")
            if low is not None and (v <= low if strict_low else v < low):
                raise ConfigError(f"{key} out of range")
            if high is not None and v > high:
                raise ConfigError(f"{key} out of range")
            return v

        alpha = num("alpha", 0.5, low=0.0, high=1.0)
        nu = num("nu", 0.5, low=0.0, high=1.0)
        beta = num("beta", 1.0, low=0.0, strict_low=True)
        margin = num("margin", 1.2, low=0.0, strict_low=True)
        try:
            family = canonical_family(data.get("family", "E8"))
        except ValueError as e:
            raise ConfigError(str(e))

        output_path = data.get("output_path")
        if output_path is not None and not isinstance(output_path, str):
            raise ConfigError("output_path must be a string")

        return ExperimentConfig(kind=kind, channel=channel, schemes=schemes,
                                grids=grids, mc=mc, snr_db=snr_db, alpha=alpha,
                                nu=nu, beta=beta, family=family, margin=margin,
                                output_path=output_path)


def load_config(path) -> ExperimentConfig:
    """Parse a JSON experiment config, reporting the error location."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}")
    return ExperimentConfig.from_dict(data)


def _preset(name, kind, channel=None, schemes=(), snr_db=None) -> ExperimentConfig:
    return ExperimentConfig(kind=kind, channel=channel, schemes=schemes,
                            snr_db=snr_db, output_path=name)


def _ch(p1, p2, pr, h1_sq, h2_sq):
    return {"p1_db": float(p1), "p2_db": float(p2), "pr_db": float(pr),
            "h1_sq": float(h1_sq), "h2_sq": float(h2_sq),
            "sigma_r2": 1.0, "sigma_1_2": 1.0, "sigma_2_2": 1.0}


_BASELINE_SET = (SCHEME_AF, SCHEME_DF, SCHEME_LCF1, SCHEME_OUTER)
_LAYERED_SET = (SCHEME_LCF1, SCHEME_LCF2)
_FULL_SET = (SCHEME_AF, SCHEME_DF, SCHEME_LCF1, SCHEME_LCF2)

PRESETS = {
    "fig5a": _preset("fig5a", "region", _ch(15, 10, 20, 0.5, 1.0), _BASELINE_SET),
    "fig5b": _preset("fig5b", "region", _ch(10, 15, 20, 2.0, 0.5), _BASELINE_SET),
    "fig6": _preset("fig6", "equal_rate", None, _BASELINE_SET,
                    snr_db=tuple(float(s) for s in range(31))),
    "fig7a": _preset("fig7a", "region", _ch(10, 5, 5, 2.0, 0.5), _LAYERED_SET),
    "fig7b": _preset("fig7b", "region", _ch(10, 5, 5, 6.0, 0.5), _LAYERED_SET),
    "fig8a": _preset("fig8a", "region", _ch(30, 25, 30, 1.0, 0.2), _FULL_SET),
    "fig8b": _preset("fig8b", "region", _ch(20, 18, 17, 4.0, 0.5), _FULL_SET),
    "fig8c": _preset("fig8c", "region", _ch(10, 9, 9, 4.0, 2.0), _FULL_SET),
    "fig8d": _preset("fig8d", "region", _ch(5, 3, 3, 4.0, 0.5), _FULL_SET),
}


def get_preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")


def preset_catalog() -> str:
    """One deterministic description line per preset."""
    lines = []
    for name in sorted(PRESETS):
        cfg = PRESETS[name]
        if cfg.channel is not None:
            ch = cfg.channel
            span = (f"P1={ch['p1_db']:g} P2={ch['p2_db']:g} PR={ch['pr_db']:g} dB"
                    f"  |h1|^2={ch['h1_sq']:g} |h2|^2={ch['h2_sq']:g}")
        else:
            span = f"symmetric snr {cfg.snr_db[0]:g}..{cfg.snr_db[-1]:g} dB"
        lines.append(f"{name:<7} {cfg.kind:<11} {span}  schemes="
                     f"{','.join(cfg.schemes)}")
    return "\n".join(lines)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".12g")
    return str(value)


def _write_csv(path: Path, header, rows) -> str:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return str(path)


def _ordered(schemes) -> list:
    return [s for s in _CANONICAL_ORDER if s in schemes]


def _run_region(cfg, cc, stem, grids, no_plot):
    etas = np.linspace(0.0, 1.0, grids.eta)
    alphas = np.linspace(0.0, 1.0, grids.alpha)
    nus = np.linspace(0.0, 1.0, grids.nu)
    paths = []
    regions = {}
    for scheme in _ordered(cfg.schemes):
        region = optimize_region(cc, scheme, etas, alphas, nus)
        regions[scheme] = region
        rows = [(scheme, eta, p.alpha_used, p.nu_used, p.r12, p.r21)
                for eta, p in zip(region.etas, region.points)]
        paths.append(_write_csv(Path(f"{stem}_{scheme.lower()}.csv"),
                                ["scheme", "eta", "alpha", "nu", "r12", "r21"],
                                rows))
    if not no_plot:
        from . import plotting
        paths.append(plotting.region_overlay(regions, f"{stem}.png"))
    return paths


def _run_equal_rate(cfg, stem, grids, no_plot):
    snrs = cfg.snr_db or tuple(float(s) for s in range(31))
    alphas = np.linspace(0.0, 1.0, grids.alpha)
    nus = np.linspace(0.0, 1.0, grids.nu)
    order = _ordered(cfg.schemes)
    curves = {s: [r for _, r in equal_rate_curve(snrs, s, alphas, nus)]
              for s in order}
    header = ["snr_dB"] + [_RATE_LABEL[s] for s in order]
    rows = [[snr] + [curves[s][i] for s in order] for i, snr in enumerate(snrs)]
    paths = [_write_csv(Path(f"{stem}.csv"), header, rows)]
    if not no_plot:
        from . import plotting
        series = {s: (list(snrs), curves[s]) for s in order}
        paths.append(plotting.curve_plot(series, "SNR (dB)",
                                         "equal rate (bits/use)", f"{stem}.png"))
    return paths


def _run_distortion(cfg, cc, stem):
    rows = []
    for scheme in _ordered(cfg.schemes):
        try:
            if scheme == SCHEME_LCF1:
                res = lcf1_distortions(cc, cfg.alpha, cfg.beta)
                nu_used = math.nan
            else:
                res = lcf2_distortions(cc, cfg.alpha, cfg.nu, cfg.beta)
                nu_used = cfg.nu
        except ValueError as e:
            raise InfeasibleError(f"{scheme}: {e}")
        rows.append((scheme, cfg.alpha, nu_used, res.beta_used,
                     res.d1_min, res.d2_min, res.gamma1_star, res.gamma2_star,
                     res.r_wz))
    header = ["scheme", "alpha", "nu", "beta", "d1_min", "d2_min",
              "gamma1_star", "gamma2_star", "r_wz"]
    return [_write_csv(Path(f"{stem}.csv"), header, rows)]


def _run_simulate(cfg, cc, stem, seed):
    scheme = cfg.schemes[0]
    if scheme == SCHEME_LCF1:
        params = optimal_params_lcf1(cc, cfg.alpha, cfg.beta)
    else:
        params = optimal_params_lcf2(cc, cfg.alpha, cfg.nu, cfg.beta)
    if params.degenerate:
        raise InfeasibleError(
            "no finite quantizer second moment exists at this operating point")
    mc = cfg.mc or McSpec()
    if seed is None:
        seed = mc.seed
    report = simulate_scheme(cc, scheme, params, mc.n_blocks, mc.block_dim,
                             seed, family=cfg.family, margin=cfg.margin)
    header = ["terminal", "scheme", "family", "lattice_dim", "n_blocks",
              "block_dim", "block_count", "overload_count", "overload_rate",
              "e_q_variance", "z_eq_variance", "z_eq_target", "residual_var",
              "decode_max_err", "gamma", "beta",
              "sigma2_lambda1_target", "sigma2_lambda1_realized",
              "sigma2_lambda0_target", "sigma2_lambda0_realized", "sigma2_lambda2",
              "margin_requested", "margin_realized", "chain_adjusted",
              "recombination_mismatch_count", "common_only_residual_var",
              "corr_eq_yr", "seed"]
    lam0_t = math.nan if report.target_sigma2_lambda0 is None else report.target_sigma2_lambda0
    lam0_r = math.nan if report.realized_sigma2_lambda0 is None else report.realized_sigma2_lambda0
    common_resid = (math.nan if report.common_only_residual_var is None
                    else report.common_only_residual_var)
    rows = []
    for terminal, diag, gamma, max_err, z_target, resid in (
            (1, report.terminal1, report.gamma1, report.decode_max_err_t1,
             report.z_eq_target_t1, report.residual_var_t1),
            (2, report.terminal2, report.gamma2, report.decode_max_err_t2,
             report.z_eq_target_t2, report.residual_var_t2)):
        rows.append((terminal, scheme, report.chain.base.family,
                     report.lattice_dim, report.n_blocks, report.block_dim,
                     diag.block_count, diag.overload_count,
                     diag.overload_count / diag.block_count,
                     diag.e_q_variance, diag.z_eq_variance, z_target, resid,
                     max_err, gamma, report.beta,
                     report.target_sigma2_lambda1, report.realized_sigma2_lambda1,
                     lam0_t, lam0_r, report.sigma2_lambda2,
                     report.margin_requested, report.margin_realized,
                     report.chain_adjusted,
                     report.recombination_mismatch_count, common_resid,
                     report.corr_eq_yr, seed))
    return [_write_csv(Path(f"{stem}.csv"), header, rows)]


def _run_asymptotics(cfg, stem, no_plot):
    snrs = cfg.snr_db or tuple(float(s) for s in range(51))
    rows = []
    for snr_db in snrs:
        refs = asymptotic_references(10.0 ** (snr_db / 10.0))
        rows.append((snr_db, refs.r_df_low, refs.r_df_high,
                     refs.r_lcf1_low, refs.r_lcf1_high))
    header = ["snr_dB", "r_df_low", "r_df_high", "r_lcf1_low", "r_lcf1_high"]
    paths = [_write_csv(Path(f"{stem}.csv"), header, rows)]
    if not no_plot:
        from . import plotting
        xs = [r[0] for r in rows]
        series = {name: (xs, [r[i] for r in rows])
                  for i, name in ((1, "r_df_low"), (2, "r_df_high"),
                                  (3, "r_lcf1_low"), (4, "r_lcf1_high"))}
        paths.append(plotting.curve_plot(series, "SNR (dB)", "reference rate",
                                         f"{stem}.png", logy=True))
    return paths


def run_experiment(config: ExperimentConfig, out=None, seed=None,
                   grid_alpha=None, grid_nu=None, grid_eta=None,
                   no_plot=False) -> list:
    """Run one experiment and return the list of files written.

    out overrides the output stem (directory components are created);
    seed overrides the Monte-Carlo seed and is ignored by the
    deterministic kinds.  Grid overrides replace the config's point
    counts.
    """
    grids = GridSpec(alpha=grid_alpha or config.grids.alpha,
                     nu=grid_nu or config.grids.nu,
                     eta=grid_eta or config.grids.eta)
    stem = Path(out) if out is not None else Path(config.output_path or config.kind)
    if stem.suffix == ".csv":
        stem = stem.with_suffix("")
    if stem.parent != Path("."):
        stem.parent.mkdir(parents=True, exist_ok=True)
    stem = str(stem)

    if config.kind == "region":
        return _run_region(config, config.channel_config(), stem, grids, no_plot)
    if config.kind == "equal_rate":
        return _run_equal_rate(config, stem, grids, no_plot)
    if config.kind == "distortion":
        return _run_distortion(config, config.channel_config(), stem)
    if config.kind == "simulate":
        return _run_simulate(config, config.channel_config(), stem, seed)
    return _run_asymptotics(config, stem, no_plot)
