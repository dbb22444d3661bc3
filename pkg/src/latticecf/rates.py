"""Closed-form rate regions, distortions and baseline comparisons.

Rates are bits per channel use with the time-division fraction alpha
splitting uplink from downlink.  The compress-and-forward expressions
are evaluated literally from their end-to-end SNR forms; the
amplify-and-forward, decode-and-forward and cut-set outer-bound
baselines use the standard two-hop formulas.  Sweeps over alpha, nu and
the scalarization weight eta run on uniform grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .channel import ChannelConfig
from .schemes import (
    _bc_snrs,
    _worst_unknown_power,
    optimal_params_lcf1,
    optimal_params_lcf2,
)

SCHEME_LCF1 = "LCF1"
SCHEME_LCF2 = "LCF2"
SCHEME_AF = "AF"
SCHEME_DF = "DF"
SCHEME_OUTER = "OUTER"
ALL_SCHEMES = (SCHEME_AF, SCHEME_DF, SCHEME_LCF1, SCHEME_LCF2, SCHEME_OUTER)

DEFAULT_ALPHA_GRID = 201
DEFAULT_NU_GRID = 201
DEFAULT_ETA_GRID = 101


def canonical_scheme(name: str) -> str:
    key = str(name).upper()
    if key not in ALL_SCHEMES:
        raise ValueError(f"unknown scheme {name!r}, expected one of {ALL_SCHEMES}")
    return key


@dataclass(frozen=True)
class RateResult:
    """One achievable (or bounding) rate pair.

    snr fields are the end-to-end SNRs of the compress-and-forward
    schemes; they are NaN for the baselines, whose rates are not of
    that form.  nu_used is NaN except for the layered scheme.
    """

    r12: float
    r21: float
    snr_1to2: float
    snr_2to1: float
    alpha_used: float
    nu_used: float
    scheme: str


@dataclass(frozen=True)
class RateRegion:
    """Scalarization sweep output: one maximizer per weight eta.

    hull is the convex closure of the maximizers together with the axis
    intercepts, as counterclockwise polygon vertices.
    """

    points: list
    hull: list
    etas: list


@dataclass(frozen=True)
class DistortionResult:
    """Reconstruction mean square errors of the relay's description.

    d1_min belongs to the terminal reconstructing more accurately, so
    d1_min <= d2_min always; relabeled records whether that terminal is
    the one labeled 2 in the config.
    """

    d1_min: float
    d2_min: float
    gamma1_star: float
    gamma2_star: float
    beta_used: float
    r_wz: float
    relabeled: bool = False


def _check_cfg(cfg: ChannelConfig):
    if not (cfg.sigma_R2 > 0 and cfg.sigma_1_2 > 0 and cfg.sigma_2_2 > 0):
        raise ValueError("rate analysis requires strictly positive noise variances")


def _grid(values, name: str, default_points: int) -> np.ndarray:
    if values is None:
        return np.linspace(0.0, 1.0, default_points)
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.size == 0:
        raise ValueError(f"{name} grid must be nonempty")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} grid must lie within [0, 1]")
    return arr


def _nan_clean(x: np.ndarray) -> np.ndarray:
    return np.where(np.isnan(x), 0.0, x)


def _lcf1_arrays(cfg: ChannelConfig, alpha):
    alpha = np.asarray(alpha, dtype=float)
    q = min(_bc_snrs(cfg))
    s2u = _worst_unknown_power(cfg)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        bracket = np.power(1.0 + q, (1.0 - alpha) / alpha) - 1.0
        noise = cfg.sigma_R2 + s2u / bracket
        snr12 = cfg.h1 ** 2 * cfg.P1 / noise
        snr21 = cfg.h2 ** 2 * cfg.P2 / noise
        r12 = 0.5 * alpha * np.log2(1.0 + snr12)
        r21 = 0.5 * alpha * np.log2(1.0 + snr21)
    edge = (alpha <= 0.0) | (alpha >= 1.0)
    zero = np.zeros_like(alpha)
    return (np.where(edge, zero, _nan_clean(r12)),
            np.where(edge, zero, _nan_clean(r21)),
            _nan_clean(snr12), _nan_clean(snr21))


def lcf1_rates(cfg: ChannelConfig, alpha: float) -> RateResult:
    """Single-layer compress-and-forward rate pair at a given time division.

    The relay's description must be decodable by both terminals, so the
    quantization noise is set by the weaker downlink and the larger
    unknown-part variance; both directions then see the same added
    noise on top of the relay noise.
    """
    _check_cfg(cfg)
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    r12, r21, s12, s21 = _lcf1_arrays(cfg, alpha)
    return RateResult(float(r12), float(r21), float(s12), float(s21),
                      alpha, math.nan, SCHEME_LCF1)


def _lcf2_arrays(cfg: ChannelConfig, alpha, nu):
    alpha, nu = np.broadcast_arrays(np.asarray(alpha, dtype=float),
                                    np.asarray(nu, dtype=float))
    b1, b2 = _bc_snrs(cfg)
    relabeled = b1 < b2
    qc, qr = min(b1, b2), max(b1, b2)
    s2u = _worst_unknown_power(cfg)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        expo = (1.0 - alpha) / alpha
        b_common = np.power(1.0 + nu * qc / ((1.0 - nu) * qc + 1.0), expo)
        b_refine = np.power(1.0 + (1.0 - nu) * qr, expo)
        s2l1 = s2u / (b_common - 1.0)
        s2l0 = s2l1 / b_refine
        noise_c = cfg.sigma_R2 + s2l1
        noise_r = cfg.sigma_R2 + s2l0
        # the common layer serves the terminal with the weaker downlink
        n12 = noise_r if relabeled else noise_c
        n21 = noise_c if relabeled else noise_r
        snr12 = cfg.h1 ** 2 * cfg.P1 / n12
        snr21 = cfg.h2 ** 2 * cfg.P2 / n21
        r12 = 0.5 * alpha * np.log2(1.0 + snr12)
        r21 = 0.5 * alpha * np.log2(1.0 + snr21)
    edge = (alpha <= 0.0) | (alpha >= 1.0) | (nu <= 0.0)
    zero = np.zeros_like(alpha)
    return (np.where(edge, zero, _nan_clean(r12)),
            np.where(edge, zero, _nan_clean(r21)),
            _nan_clean(snr12), _nan_clean(snr21))


def lcf2_rates(cfg: ChannelConfig, alpha: float, nu: float) -> RateResult:
    """Layered compress-and-forward rate pair.

    The relay splits its power: a fraction nu carries a description
    both terminals decode, the rest a refinement for the terminal with
    the better downlink.  At nu = 1 the refinement vanishes and the
    result coincides with the single-layer scheme.
    """
    _check_cfg(cfg)
    alpha = float(alpha)
    nu = float(nu)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not 0.0 <= nu <= 1.0:
        raise ValueError("nu must lie in [0, 1]")
    r12, r21, s12, s21 = _lcf2_arrays(cfg, alpha, nu)
    return RateResult(float(r12), float(r21), float(s12), float(s21),
                      alpha, nu, SCHEME_LCF2)


def af_rates(cfg: ChannelConfig, alpha: float = 0.5) -> RateResult:
    """Amplify-and-forward baseline with echo cancellation.

    The relay rescales its noisy observation to its power budget and
    retransmits; each terminal removes its own echo.  Equal slot
    lengths are assumed throughout.
    """
    _check_cfg(cfg)
    if float(alpha) != 0.5:
        raise ValueError("this baseline fixes the time division at one half")
    g2 = cfg.PR / (cfg.h1 ** 2 * cfg.P1 + cfg.h2 ** 2 * cfg.P2 + cfg.sigma_R2)
    snr12 = (g2 * cfg.h1 ** 2 * cfg.h2 ** 2 * cfg.P1
             / (g2 * cfg.h2 ** 2 * cfg.sigma_R2 + cfg.sigma_2_2))
    snr21 = (g2 * cfg.h1 ** 2 * cfg.h2 ** 2 * cfg.P2
             / (g2 * cfg.h1 ** 2 * cfg.sigma_R2 + cfg.sigma_1_2))
    return RateResult(0.25 * math.log2(1.0 + snr12), 0.25 * math.log2(1.0 + snr21),
                      snr12, snr21, 0.5, math.nan, SCHEME_AF)


def _cut_set_caps(cfg: ChannelConfig, alpha):
    a = np.asarray(alpha, dtype=float)
    c1 = np.minimum(
        0.5 * a * np.log2(1.0 + cfg.h1 ** 2 * cfg.P1 / cfg.sigma_R2),
        0.5 * (1.0 - a) * np.log2(1.0 + cfg.h2 ** 2 * cfg.PR / cfg.sigma_2_2),
    )
    c2 = np.minimum(
        0.5 * a * np.log2(1.0 + cfg.h2 ** 2 * cfg.P2 / cfg.sigma_R2),
        0.5 * (1.0 - a) * np.log2(1.0 + cfg.h1 ** 2 * cfg.PR / cfg.sigma_1_2),
    )
    total = 0.5 * a * np.log2(
        1.0 + (cfg.h1 ** 2 * cfg.P1 + cfg.h2 ** 2 * cfg.P2) / cfg.sigma_R2
    )
    return c1, c2, total


def df_rates(cfg: ChannelConfig, alpha: float) -> RateResult:
    """Decode-and-forward vertex that maximizes the smaller rate first.

    Each direction is capped by its uplink and downlink hops, and the
    uplink decoding adds a sum constraint.  Among the feasible pairs the
    returned vertex maximizes min(r12, r21), then the sum.
    """
    _check_cfg(cfg)
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    c1, c2, s = _cut_set_caps(cfg, alpha)
    r12 = min(float(c1), max(float(s) / 2.0, float(s) - float(c2)))
    r21 = min(float(c2), float(s) - r12)
    return RateResult(r12, r21, math.nan, math.nan, alpha, math.nan, SCHEME_DF)


def outer_bound(cfg: ChannelConfig, alpha: float) -> RateResult:
    """Cut-set bound: each direction capped by its two hops, no sum constraint."""
    _check_cfg(cfg)
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    c1, c2, _ = _cut_set_caps(cfg, alpha)
    return RateResult(float(c1), float(c2), math.nan, math.nan,
                      alpha, math.nan, SCHEME_OUTER)


def _df_pair_for_eta(c1, c2, s, eta: float):
    if eta > 0.5:
        r12 = np.minimum(c1, s)
        r21 = np.minimum(c2, s - r12)
    elif eta < 0.5:
        r21 = np.minimum(c2, s)
        r12 = np.minimum(c1, s - r21)
    else:
        r12 = np.minimum(c1, np.maximum(s / 2.0, s - c2))
        r21 = np.minimum(c2, s - r12)
    return r12, r21


def _convex_hull(points: Iterable[tuple]) -> list:
    """Counterclockwise convex hull by the monotone chain construction."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def optimize_region(cfg: ChannelConfig, scheme: str, eta_grid=None,
                    alpha_grid=None, nu_grid=None) -> RateRegion:
    """Sweep the scalarized objective eta*r12 + (1-eta)*r21 over a grid.

    For each weight eta the maximizing operating point over the alpha
    grid (and nu grid for the layered scheme) is reported; the hull
    closes the set of maximizers with the axis intercepts.
    """
    _check_cfg(cfg)
    scheme = canonical_scheme(scheme)
    etas = _grid(eta_grid, "eta", DEFAULT_ETA_GRID)
    alphas = _grid(alpha_grid, "alpha", DEFAULT_ALPHA_GRID)
    nus = _grid(nu_grid, "nu", DEFAULT_NU_GRID)

    points = []
    if scheme == SCHEME_LCF1:
        r12, r21, s12, s21 = _lcf1_arrays(cfg, alphas)
        for eta in etas:
            i = int(np.argmax(eta * r12 + (1.0 - eta) * r21))
            points.append(RateResult(float(r12[i]), float(r21[i]),
                                     float(s12[i]), float(s21[i]),
                                     float(alphas[i]), math.nan, scheme))
    elif scheme == SCHEME_LCF2:
        a_mesh, n_mesh = np.meshgrid(alphas, nus, indexing="ij")
        a_flat, n_flat = a_mesh.ravel(), n_mesh.ravel()
        r12, r21, s12, s21 = _lcf2_arrays(cfg, a_flat, n_flat)
        for eta in etas:
            i = int(np.argmax(eta * r12 + (1.0 - eta) * r21))
            points.append(RateResult(float(r12[i]), float(r21[i]),
                                     float(s12[i]), float(s21[i]),
                                     float(a_flat[i]), float(n_flat[i]), scheme))
    elif scheme == SCHEME_AF:
        p = af_rates(cfg)
        points = [p for _ in etas]
    elif scheme == SCHEME_DF:
        c1, c2, s = _cut_set_caps(cfg, alphas)
        for eta in etas:
            r12, r21 = _df_pair_for_eta(c1, c2, s, float(eta))
            i = int(np.argmax(eta * r12 + (1.0 - eta) * r21))
            points.append(RateResult(float(r12[i]), float(r21[i]),
                                     math.nan, math.nan,
                                     float(alphas[i]), math.nan, scheme))
    else:
        c1, c2, _ = _cut_set_caps(cfg, alphas)
        for eta in etas:
            i = int(np.argmax(eta * c1 + (1.0 - eta) * c2))
            points.append(RateResult(float(c1[i]), float(c2[i]),
                                     math.nan, math.nan,
                                     float(alphas[i]), math.nan, scheme))

    coords = [(p.r12, p.r21) for p in points]
    max12 = max(r for r, _ in coords)
    max21 = max(r for _, r in coords)
    hull = _convex_hull(coords + [(0.0, 0.0), (max12, 0.0), (0.0, max21)])
    return RateRegion(points=points, hull=hull, etas=[float(e) for e in etas])


def equal_rate_curve(cfg_family: Sequence[float], scheme: str,
                     alpha_grid=None, nu_grid=None) -> list:
    """Largest symmetric rate for each SNR of a symmetric channel sweep.

    cfg_family is a sequence of SNR values in dB; each builds a channel
    with unit gains, unit noise variances and all powers equal to the
    SNR.  The reported rate is the best min(r12, r21) over the time
    division (and power split where applicable).
    """
    scheme = canonical_scheme(scheme)
    alphas = _grid(alpha_grid, "alpha", DEFAULT_ALPHA_GRID)
    nus = _grid(nu_grid, "nu", DEFAULT_NU_GRID)
    curve = []
    for snr_db in cfg_family:
        p = 10.0 ** (float(snr_db) / 10.0)
        cfg = ChannelConfig(h1=1.0, h2=1.0, P1=p, P2=p, PR=p,
                            sigma_R2=1.0, sigma_1_2=1.0, sigma_2_2=1.0)
        if scheme == SCHEME_LCF1:
            r12, r21, _, _ = _lcf1_arrays(cfg, alphas)
            best = float(np.max(np.minimum(r12, r21)))
        elif scheme == SCHEME_LCF2:
            a_mesh, n_mesh = np.meshgrid(alphas, nus, indexing="ij")
            r12, r21, _, _ = _lcf2_arrays(cfg, a_mesh.ravel(), n_mesh.ravel())
            best = float(np.max(np.minimum(r12, r21)))
        elif scheme == SCHEME_AF:
            p_af = af_rates(cfg)
            best = min(p_af.r12, p_af.r21)
        elif scheme == SCHEME_DF:
            c1, c2, s = _cut_set_caps(cfg, alphas)
            best = float(np.max(np.minimum(np.minimum(c1, c2), s / 2.0)))
        else:
            c1, c2, _ = _cut_set_caps(cfg, alphas)
            best = float(np.max(np.minimum(c1, c2)))
        curve.append((float(snr_db), best))
    return curve


def _sorted_distortions(pairs: dict) -> tuple:
    # pairs: terminal -> (distortion, gamma); the smaller distortion is d1
    if pairs[1][0] <= pairs[2][0]:
        return pairs[1][0], pairs[2][0], pairs[1][1], pairs[2][1], False
    return pairs[2][0], pairs[1][0], pairs[2][1], pairs[1][1], True


def lcf1_distortions(cfg: ChannelConfig, alpha: float, beta: float = 1.0) -> DistortionResult:
    """Reconstruction error of the single-layer description at each terminal.

    Both terminals decode at the same quantization lattice, so the
    terminal whose unknown part is smaller reconstructs better.
    """
    _check_cfg(cfg)
    if not 0.0 < float(alpha) < 1.0:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    params = optimal_params_lcf1(cfg, alpha, beta)
    if params.degenerate:
        raise ValueError("operating point is degenerate, no finite design exists")
    lam = params.sigma2_lambda1_min
    beta = params.beta
    pairs = {}
    for terminal, s2u in ((1, cfg.sigma2_u1), (2, cfg.sigma2_u2)):
        d = lam * s2u / (beta ** 2 * s2u + lam)
        gamma = beta * s2u / (beta ** 2 * s2u + lam)
        pairs[terminal] = (d, gamma)
    d1, d2, g1, g2, swapped = _sorted_distortions(pairs)
    r_wz = 0.5 * math.log2(1.0 + beta ** 2 * _worst_unknown_power(cfg) / lam)
    return DistortionResult(d1, d2, g1, g2, beta, r_wz, swapped)


def lcf2_distortions(cfg: ChannelConfig, alpha: float, nu: float,
                     beta: float = 1.0) -> DistortionResult:
    """Layered reconstruction errors.

    The refined terminal decodes at the finest lattice, the other at
    the middle one.  At nu = 1 this reduces to the single-layer result.
    """
    _check_cfg(cfg)
    if not 0.0 < float(alpha) < 1.0:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    if not 0.0 < float(nu) <= 1.0:
        raise ValueError("nu must lie in (0, 1] for distortion analysis")
    params = optimal_params_lcf2(cfg, alpha, nu, beta)
    if params.degenerate:
        raise ValueError("operating point is degenerate, no finite design exists")
    beta = params.beta
    refined_user = 2 if params.relabeled else 1
    pairs = {}
    for terminal, s2u in ((1, cfg.sigma2_u1), (2, cfg.sigma2_u2)):
        lam = (params.sigma2_lambda0_min if terminal == refined_user
               else params.sigma2_lambda1_min)
        d = lam * s2u / (beta ** 2 * s2u + lam)
        gamma = beta * s2u / (beta ** 2 * s2u + lam)
        pairs[terminal] = (d, gamma)
    d1, d2, g1, g2, swapped = _sorted_distortions(pairs)
    r_wz = 0.5 * math.log2(
        1.0 + beta ** 2 * _worst_unknown_power(cfg) / params.sigma2_lambda1_min
    )
    return DistortionResult(d1, d2, g1, g2, beta, r_wz, swapped)


class AsymptoticReferences(NamedTuple):
    """Reference expressions for the symmetric equal-rate curves."""

    r_df_low: float
    r_df_high: float
    r_lcf1_low: float
    r_lcf1_high: float


def asymptotic_references(snr: float) -> AsymptoticReferences:
    """Small- and large-SNR reference rates for the symmetric channel.

    The low-SNR decode-and-forward reference is SNR/4; its high-SNR
    counterpart grows like log2(SNR)/6.  The compress-and-forward
    references are the matching closed forms for the single-layer
    scheme.  Useful only as test anchors for the equal-rate curves.
    """
    snr = float(snr)
    if not snr > 0:
        raise ValueError("snr must be positive (linear, not dB)")
    root = math.sqrt(snr)
    root_p1 = math.sqrt(snr + 1.0)
    r_df_low = snr / 4.0
    r_df_high = math.log2(snr) / 6.0
    r_lcf1_low = (((root_p1 - 1.0) + (snr - 2.0 * root + 2.0) * root) * snr ** 2
                  / (2.0 * (root_p1 - 1.0) + root))
    r_lcf1_high = 0.25 * (math.log2(snr) - 1.0)
    return AsymptoticReferences(r_df_low, r_df_high, r_lcf1_low, r_lcf1_high)
