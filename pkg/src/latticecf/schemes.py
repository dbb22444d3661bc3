"""Lattice compress-and-forward encoder and decoder chains.

The relay scales its uplink observation, adds a dither, quantizes onto
a fine lattice and keeps only the coset of the result relative to a
coarse shaping lattice.  Terminals subtract the dither and their own
echo, reduce modulo the coarse lattice and rescale.  The single-layer
scheme (LCF1) sends one description to both terminals; the layered
scheme (LCF2) superimposes a refinement for the terminal with the
better downlink.

Also here: the closed-form optimal second moments and decoder scales,
realization of those targets with integer-nested concrete lattices, and
a seed-deterministic Monte-Carlo simulator with decode diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .channel import (
    ChannelConfig,
    MessageIndex,
    SignalBlock,
    block_samples,
    decompose,
    generate_source,
    mac_phase,
)
from .lattices import (
    COMMON,
    DitherVector,
    NestedChain,
    coset_index,
    dither_batch,
    make_lattice,
    mod_lattice,
    nearest_point,
    second_moment,
)


class InfeasibleError(ValueError):
    """A requested operating point cannot be realized by any concrete chain."""


@dataclass(frozen=True)
class SchemeConfig:
    """Bundle of knobs for one encoder/decoder instantiation."""

    alpha: float
    nu: float
    beta: float
    gamma1: float
    gamma2: float
    chain: NestedChain

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0.0 <= self.nu <= 1.0:
            raise ValueError("nu must lie in [0, 1]")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not (self.gamma1 > 0 and self.gamma2 > 0):
            raise ValueError("decoder scales must be positive")


def _dither_rows(dither, n: int, rows: int) -> np.ndarray:
    values = dither.values if isinstance(dither, DitherVector) else np.asarray(dither, float)
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.shape != (n,):
        raise ValueError(f"dither must have length {n}, got {values.shape}")
    return np.broadcast_to(values, (rows, n))


def _signal_rows(x, n: int) -> tuple[np.ndarray, tuple]:
    s = block_samples(x)
    if s.size == 0 or s.size % n:
        raise ValueError(f"signal length {s.size} is not a positive multiple of {n}")
    return s.reshape(-1, n), s.shape


def lcf1_encode(y_r, chain: NestedChain, beta: float, dither) -> np.ndarray:
    """Quantize the scaled, dithered observation and keep its coarse coset.

    Returns the coset leader, a point of the quantization lattice inside
    the shaping cell.  Inputs longer than one lattice block are handled
    blockwise with the same dither.
    """
    if chain.levels != 2:
        raise ValueError("single-layer encoding expects a two-level chain")
    rows, shape = _signal_rows(y_r, chain.mid.dimension)
    t = _dither_rows(dither, chain.mid.dimension, rows.shape[0])
    q = nearest_point(chain.mid, beta * rows + t)
    v = q - nearest_point(chain.coarse, q)
    return v.reshape(shape)


def lcf1_decode(v_r, s_i, dither, beta: float, gamma_i: float, chain: NestedChain) -> SignalBlock:
    """Recover the unknown uplink part from the relay's coset leader.

    Subtracts the dither and the terminal's own echo, folds into the
    shaping cell and rescales.  Absent overload the output equals
    gamma * (beta * u + e_q) with e_q the quantization error.
    """
    n = chain.mid.dimension
    v_rows, shape = _signal_rows(v_r, n)
    s_rows, _ = _signal_rows(s_i, n)
    if v_rows.shape != s_rows.shape:
        raise ValueError("coset leader and side information lengths must agree")
    t = _dither_rows(dither, n, v_rows.shape[0])
    u_hat = gamma_i * mod_lattice(chain.coarse, v_rows - t - beta * s_rows)
    flat = u_hat.reshape(shape)
    return SignalBlock(samples=flat, per_dimension_power=float(np.mean(flat ** 2)))


def lcf2_encode(y_r, chain3: NestedChain, beta: float, dither) -> tuple[np.ndarray, np.ndarray]:
    """Common and refinement coset leaders of the layered description.

    The common leader is the quantization onto the middle lattice
    reduced by the coarse one; the refinement leader is the quantization
    onto the finest lattice reduced by the middle one.  Their sum is
    congruent, modulo the coarse lattice, to the fine quantization of
    the dithered observation.
    """
    if chain3.levels != 3:
        raise ValueError("layered encoding expects a three-level chain")
    n = chain3.mid.dimension
    rows, shape = _signal_rows(y_r, n)
    t = _dither_rows(dither, n, rows.shape[0])
    w = beta * rows + t
    q1 = nearest_point(chain3.mid, w)
    v_c = q1 - nearest_point(chain3.coarse, q1)
    q0 = nearest_point(chain3.fine, w)
    v_r = q0 - nearest_point(chain3.mid, q0)
    return v_c.reshape(shape), v_r.reshape(shape)


def lcf2_decode_common(v_rc, s_2, dither, beta: float, gamma2: float,
                       chain3: NestedChain) -> SignalBlock:
    """Decode the common layer only (the coarser description)."""
    if chain3.levels != 3:
        raise ValueError("expected a three-level chain")
    n = chain3.mid.dimension
    v_rows, shape = _signal_rows(v_rc, n)
    s_rows, _ = _signal_rows(s_2, n)
    if v_rows.shape != s_rows.shape:
        raise ValueError("coset leader and side information lengths must agree")
    t = _dither_rows(dither, n, v_rows.shape[0])
    u_hat = gamma2 * mod_lattice(chain3.coarse, v_rows - t - beta * s_rows)
    flat = u_hat.reshape(shape)
    return SignalBlock(samples=flat, per_dimension_power=float(np.mean(flat ** 2)))


def lcf2_decode_refined(v_rc, v_rr, s_1, dither, beta: float, gamma1: float,
                        chain3: NestedChain) -> SignalBlock:
    """Decode common plus refinement (the finer description)."""
    if chain3.levels != 3:
        raise ValueError("expected a three-level chain")
    n = chain3.mid.dimension
    vc_rows, shape = _signal_rows(v_rc, n)
    vr_rows, _ = _signal_rows(v_rr, n)
    s_rows, _ = _signal_rows(s_1, n)
    if not (vc_rows.shape == vr_rows.shape == s_rows.shape):
        raise ValueError("leader and side information lengths must agree")
    t = _dither_rows(dither, n, vc_rows.shape[0])
    u_hat = gamma1 * mod_lattice(chain3.coarse, vc_rows + vr_rows - t - beta * s_rows)
    flat = u_hat.reshape(shape)
    return SignalBlock(samples=flat, per_dimension_power=float(np.mean(flat ** 2)))


def leader_message(chain: NestedChain, leader, level: str = COMMON) -> MessageIndex:
    """Wrap a coset leader's index with the bit budget of its codebook."""
    k = chain.k_mid_to_coarse if level == COMMON else chain.k_fine_to_mid
    n = chain.base.dimension
    bits = max(1, (k ** n - 1).bit_length())
    return MessageIndex(value=coset_index(chain, leader, level), bits=bits)


@dataclass(frozen=True)
class OptimalParams:
    """Design point for the encoder and decoders.

    sigma2_lambda0_min is None for the single-layer scheme.  degenerate
    marks boundary operating points (time division 0 or 1, or a zero
    common-layer power split) whose limits carry zero rate; relabeled
    marks configs where terminal 1 has the weaker downlink, so the
    layered roles of the terminals are swapped internally.
    """

    sigma2_lambda1_min: float
    sigma2_lambda0_min: Optional[float]
    gamma1_star: float
    gamma2_star: float
    beta: float
    degenerate: bool = False
    relabeled: bool = False


def _bc_snrs(cfg: ChannelConfig) -> tuple[float, float]:
    return (cfg.h1 ** 2 * cfg.PR / cfg.sigma_1_2,
            cfg.h2 ** 2 * cfg.PR / cfg.sigma_2_2)


def _worst_unknown_power(cfg: ChannelConfig) -> float:
    return max(cfg.h1 ** 2 * cfg.P1, cfg.h2 ** 2 * cfg.P2) + cfg.sigma_R2


def _check_unit(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def optimal_params_lcf1(cfg: ChannelConfig, alpha: float, beta: float = 1.0) -> OptimalParams:
    """Smallest quantization second moment the downlink can carry, and
    the matching minimum mean square error decoder scales.

    The binding constraint is the worse of the two downlinks and the
    worse of the two unknown-part variances, since one description must
    serve both terminals.
    """
    alpha = _check_unit(alpha, "alpha")
    beta = float(beta)
    if not beta > 0:
        raise ValueError("beta must be positive")
    q = min(_bc_snrs(cfg))
    s2u = _worst_unknown_power(cfg)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        expo = np.float64(1.0 - alpha) / np.float64(alpha)
        bracket = float(np.power(1.0 + q, expo)) - 1.0
        s2l1 = beta ** 2 * s2u / bracket if bracket != 0.0 else math.inf
    degenerate = alpha in (0.0, 1.0) or not (0.0 < s2l1 < math.inf)
    g1 = beta * cfg.sigma2_u1 / (beta ** 2 * cfg.sigma2_u1 + s2l1)
    g2 = beta * cfg.sigma2_u2 / (beta ** 2 * cfg.sigma2_u2 + s2l1)
    return OptimalParams(
        sigma2_lambda1_min=s2l1,
        sigma2_lambda0_min=None,
        gamma1_star=g1,
        gamma2_star=g2,
        beta=beta,
        degenerate=degenerate,
    )


def optimal_params_lcf2(cfg: ChannelConfig, alpha: float, nu: float,
                        beta: float = 1.0) -> OptimalParams:
    """Layered design point under a relay power split nu.

    A fraction nu of the relay power carries the common description,
    decoded by both terminals while treating the refinement as noise;
    the rest carries the refinement for the terminal with the better
    downlink.  gamma values are the stationary points of each
    terminal's reconstruction error, evaluated at that terminal's own
    decode lattice.
    """
    alpha = _check_unit(alpha, "alpha")
    nu = _check_unit(nu, "nu")
    beta = float(beta)
    if not beta > 0:
        raise ValueError("beta must be positive")
    b1, b2 = _bc_snrs(cfg)
    relabeled = b1 < b2
    qc, qr = min(b1, b2), max(b1, b2)
    s2u = _worst_unknown_power(cfg)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        expo = np.float64(1.0 - alpha) / np.float64(alpha)
        b_common = float(np.power(1.0 + nu * qc / ((1.0 - nu) * qc + 1.0), expo))
        b_refine = float(np.power(1.0 + (1.0 - nu) * qr, expo))
        s2l1 = beta ** 2 * s2u / (b_common - 1.0) if b_common != 1.0 else math.inf
        s2l0 = s2l1 / b_refine  # inf/inf at the degenerate corner gives nan
    degenerate = (alpha in (0.0, 1.0) or nu == 0.0
                  or not (0.0 < s2l1 < math.inf))
    refined_user = 2 if relabeled else 1
    lam1 = s2l0 if refined_user == 1 else s2l1
    lam2 = s2l0 if refined_user == 2 else s2l1
    g1 = beta * cfg.sigma2_u1 / (beta ** 2 * cfg.sigma2_u1 + lam1)
    g2 = beta * cfg.sigma2_u2 / (beta ** 2 * cfg.sigma2_u2 + lam2)
    return OptimalParams(
        sigma2_lambda1_min=s2l1,
        sigma2_lambda0_min=s2l0,
        gamma1_star=g1,
        gamma2_star=g2,
        beta=beta,
        degenerate=degenerate,
        relabeled=relabeled,
    )


@dataclass(frozen=True)
class RealizedChain:
    """A concrete integer-nested chain meeting the design targets.

    Integer nesting cannot hit arbitrary second-moment ratios, so the
    shaping ratio rounds up (extra overload protection) and the
    refinement ratio rounds down (never more refinement rate than the
    downlink carries).  adjusted is set when either rounding moved the
    realized moments off their targets.
    """

    chain: NestedChain
    sigma2_lambda1: float
    sigma2_lambda0: Optional[float]
    sigma2_lambda2: float
    margin_requested: float
    margin_realized: float
    adjusted: bool


def realize_chain(cfg: ChannelConfig, params: OptimalParams, family: str = "E8",
                  margin: float = 1.2) -> RealizedChain:
    if not margin > 0:
        raise ValueError("margin must be positive")
    s2l1 = params.sigma2_lambda1_min
    if params.degenerate or not (0.0 < s2l1 < math.inf):
        raise InfeasibleError(
            "quantization second moment must be positive and finite; "
            f"got {s2l1} from a degenerate operating point"
        )
    probe = make_lattice(family)
    beta = params.beta
    s2u = _worst_unknown_power(cfg)
    ratio = margin * (beta ** 2 * s2u + s2l1) / s2l1
    k2 = max(1, math.ceil(math.sqrt(ratio)))
    mid_scale = math.sqrt(s2l1 / probe.base_second_moment)
    if params.sigma2_lambda0_min is None:
        chain = NestedChain(base=make_lattice(family, scale=mid_scale),
                            k_mid_to_coarse=k2)
    else:
        s2l0 = params.sigma2_lambda0_min
        if not 0.0 < s2l0 < math.inf:
            raise InfeasibleError(
                f"refinement second moment must be positive and finite, got {s2l0}"
            )
        k1 = max(1, math.floor(math.sqrt(s2l1 / s2l0)))
        chain = NestedChain(base=make_lattice(family, scale=mid_scale / k1),
                            k_mid_to_coarse=k2, k_fine_to_mid=k1, levels=3)
    real1 = second_moment(chain.mid)
    real0 = second_moment(chain.fine) if chain.levels == 3 else None
    real2 = second_moment(chain.coarse)
    margin_real = real2 / (beta ** 2 * s2u + real1)
    adjusted = margin_real > margin * (1.0 + 1e-9)
    if real0 is not None:
        target0 = params.sigma2_lambda0_min
        adjusted = adjusted or abs(real0 - target0) > 1e-9 * target0
    return RealizedChain(
        chain=chain,
        sigma2_lambda1=real1,
        sigma2_lambda0=real0,
        sigma2_lambda2=real2,
        margin_requested=float(margin),
        margin_realized=float(margin_real),
        adjusted=bool(adjusted),
    )


@dataclass(frozen=True)
class DecodeDiagnostics:
    """Per-terminal empirical decode statistics.

    e_q_variance pools all lattice blocks; z_eq_variance and the decode
    identity are evaluated only on blocks without overload, since the
    modulo identity holds exactly only there.
    """

    e_q_variance: float
    z_eq_variance: float
    overload_count: int
    block_count: int


@dataclass(frozen=True)
class SimReport:
    scheme: str
    n_blocks: int
    block_dim: int
    lattice_dim: int
    chain: NestedChain
    target_sigma2_lambda1: float
    realized_sigma2_lambda1: float
    target_sigma2_lambda0: Optional[float]
    realized_sigma2_lambda0: Optional[float]
    sigma2_lambda2: float
    margin_requested: float
    margin_realized: float
    chain_adjusted: bool
    beta: float
    gamma1: float
    gamma2: float
    relabeled: bool
    terminal1: DecodeDiagnostics
    terminal2: DecodeDiagnostics
    corr_eq_yr: float
    corr_eq_fine_yr: Optional[float]
    decode_max_err_t1: float
    decode_max_err_t2: float
    z_eq_target_t1: float
    z_eq_target_t2: float
    residual_var_t1: float
    residual_var_t2: float
    recombination_mismatch_count: int = 0
    common_only_residual_var: Optional[float] = None
    notes: str = ""


class _Correlation:
    """Streaming Pearson correlation over flattened sample pairs."""

    def __init__(self):
        self.n = 0
        self.sx = self.sy = self.sxx = self.syy = self.sxy = 0.0

    def add(self, x: np.ndarray, y: np.ndarray):
        x = x.ravel()
        y = y.ravel()
        self.n += x.size
        self.sx += float(x.sum())
        self.sy += float(y.sum())
        self.sxx += float((x * x).sum())
        self.syy += float((y * y).sum())
        self.sxy += float((x * y).sum())

    def value(self) -> float:
        num = self.n * self.sxy - self.sx * self.sy
        den = math.sqrt((self.n * self.sxx - self.sx ** 2)
                        * (self.n * self.syy - self.sy ** 2))
        return num / den if den > 0 else 0.0


def simulate_scheme(cfg: ChannelConfig, scheme: str, params: OptimalParams,
                    n_blocks: int, block_dim_source: int, seed,
                    family: str = "E8", margin: float = 1.2) -> SimReport:
    """Monte-Carlo check of the encode/decode pipeline.

    Runs n_blocks independent uplink blocks of block_dim_source
    dimensions each, with per-block seeds derived from the root seed so
    results do not depend on execution order.  Fresh dithers are drawn
    for every lattice block.  Overload (the folded decode landing in the
    wrong shaping cell) is counted per lattice block and per terminal;
    the decode identity and the effective noise statistics are measured
    on the remaining blocks.  For the layered scheme the refined decode
    additionally requires the mid point of the fine quantization to
    match the direct mid quantization; blocks where boundary ties break
    that are counted in recombination_mismatch_count and excluded the
    same way.
    """
    scheme = str(scheme).upper()
    if scheme not in ("LCF1", "LCF2"):
        raise ValueError("scheme must be LCF1 or LCF2")
    wants_layers = scheme == "LCF2"
    if wants_layers and params.sigma2_lambda0_min is None:
        raise ValueError("layered simulation needs layered parameters")
    realized = realize_chain(cfg, params, family=family, margin=margin)
    chain = realized.chain
    if wants_layers and chain.levels != 3:
        raise ValueError("layered simulation needs a three-level chain")
    n = chain.mid.dimension
    nd = int(block_dim_source)
    if nd < n or nd % n:
        raise ValueError(
            f"block_dim_source must be a positive multiple of the lattice dimension {n}"
        )
    n_blocks = int(n_blocks)
    if n_blocks < 1:
        raise ValueError("n_blocks must be positive")
    rows = nd // n
    beta = params.beta
    gammas = {1: params.gamma1_star, 2: params.gamma2_star}
    refined_user = (2 if params.relabeled else 1) if wants_layers else None

    acc = {t: {"eq_sq": 0.0, "eq_n": 0, "z_sum": 0.0, "z_sq": 0.0, "z_n": 0,
               "r_sum": 0.0, "r_sq": 0.0, "r_n": 0,
               "over": 0, "rows": 0, "max_err": 0.0} for t in (1, 2)}
    common_only = {"sum": 0.0, "sq": 0.0, "n": 0}
    n_mismatch = 0
    corr_common = _Correlation()
    corr_fine = _Correlation() if wants_layers else None

    for b in range(n_blocks):
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(b,))
        seed_x1, seed_x2, seed_zr, seed_t = ss.spawn(4)
        x1 = generate_source(cfg.P1, nd, seed_x1)
        x2 = generate_source(cfg.P2, nd, seed_x2)
        y = mac_phase(cfg, x1, x2, seed_zr)
        y_rows = y.samples.reshape(rows, n)
        t_rows = dither_batch(chain.mid, rows, np.random.default_rng(seed_t))

        w = beta * y_rows + t_rows
        q1 = nearest_point(chain.mid, w)
        eq1 = q1 - w
        v_c = q1 - nearest_point(chain.coarse, q1)
        corr_common.add(eq1, y_rows)
        if wants_layers:
            q0 = nearest_point(chain.fine, w)
            eq0 = q0 - w
            q0_mid = nearest_point(chain.mid, q0)
            v_r = q0 - q0_mid
            # layer recombination assumes the mid point recovered from the
            # fine point matches the direct one; boundary ties break that
            mismatch = np.any(q0_mid != q1, axis=1)
            n_mismatch += int(mismatch.sum())
            corr_fine.add(eq0, y_rows)

        side = {}
        unknown = {}
        for terminal in (1, 2):
            s_blk, u_blk = decompose(cfg, y, x1, x2, terminal)
            side[terminal] = s_blk.samples.reshape(rows, n)
            unknown[terminal] = u_blk.samples.reshape(rows, n)

        for terminal in (1, 2):
            gamma = gammas[terminal]
            if wants_layers and terminal == refined_user:
                eq = eq0
                v_used = v_c + v_r
            else:
                eq = eq1
                v_used = v_c
            inner = beta * unknown[terminal] + eq
            overload = np.any(nearest_point(chain.coarse, inner) != 0.0, axis=1)
            u_hat = gamma * mod_lattice(
                chain.coarse, v_used - t_rows - beta * side[terminal]
            )
            a = acc[terminal]
            a["eq_sq"] += float((eq * eq).sum())
            a["eq_n"] += eq.size
            a["over"] += int(overload.sum())
            a["rows"] += rows
            ok = ~overload
            if wants_layers and terminal == refined_user:
                ok &= ~mismatch
            if ok.any():
                direct = gamma * inner[ok]
                a["max_err"] = max(a["max_err"],
                                   float(np.max(np.abs(u_hat[ok] - direct))))
                # effective noise around the wanted signal h_j x_j
                z = u_hat[ok] - gamma * beta * side[3 - terminal][ok]
                a["z_sum"] += float(z.sum())
                a["z_sq"] += float((z * z).sum())
                a["z_n"] += z.size
                # decode residual u_hat/gamma - beta*u, equal to e_q here
                resid = eq[ok]
                a["r_sum"] += float(resid.sum())
                a["r_sq"] += float((resid * resid).sum())
                a["r_n"] += resid.size
            if wants_layers and terminal == refined_user:
                # what the same terminal would see decoding the common
                # layer alone, for the refinement-gain comparison
                inner_c = beta * unknown[terminal] + eq1
                ok_c = ~np.any(nearest_point(chain.coarse, inner_c) != 0.0,
                               axis=1)
                if ok_c.any():
                    rc = eq1[ok_c]
                    common_only["sum"] += float(rc.sum())
                    common_only["sq"] += float((rc * rc).sum())
                    common_only["n"] += rc.size

    def diag(t: int) -> DecodeDiagnostics:
        a = acc[t]
        mean = a["z_sum"] / a["z_n"] if a["z_n"] else math.nan
        var = a["z_sq"] / a["z_n"] - mean ** 2 if a["z_n"] else math.nan
        return DecodeDiagnostics(
            e_q_variance=a["eq_sq"] / a["eq_n"],
            z_eq_variance=var,
            overload_count=a["over"],
            block_count=a["rows"],
        )

    def z_target(t: int) -> float:
        if wants_layers and t == refined_user:
            lam = realized.sigma2_lambda0
        else:
            lam = realized.sigma2_lambda1
        return gammas[t] ** 2 * (beta ** 2 * cfg.sigma_R2 + lam)

    def mean_var(total: float, total_sq: float, count: int) -> float:
        if not count:
            return math.nan
        mean = total / count
        return total_sq / count - mean ** 2

    notes = "z_eq and the decode identity are measured on lattice blocks without overload"
    if wants_layers:
        notes += ("; at the refined terminal, blocks where the mid point of the "
                  "fine quantization differs from the direct mid quantization "
                  "(recombination mismatch) are excluded as well")

    return SimReport(
        scheme=scheme,
        n_blocks=n_blocks,
        block_dim=nd,
        lattice_dim=n,
        chain=chain,
        target_sigma2_lambda1=params.sigma2_lambda1_min,
        realized_sigma2_lambda1=realized.sigma2_lambda1,
        target_sigma2_lambda0=params.sigma2_lambda0_min,
        realized_sigma2_lambda0=realized.sigma2_lambda0,
        sigma2_lambda2=realized.sigma2_lambda2,
        margin_requested=realized.margin_requested,
        margin_realized=realized.margin_realized,
        chain_adjusted=realized.adjusted,
        beta=beta,
        gamma1=params.gamma1_star,
        gamma2=params.gamma2_star,
        relabeled=params.relabeled,
        terminal1=diag(1),
        terminal2=diag(2),
        corr_eq_yr=corr_common.value(),
        corr_eq_fine_yr=corr_fine.value() if wants_layers else None,
        decode_max_err_t1=acc[1]["max_err"],
        decode_max_err_t2=acc[2]["max_err"],
        z_eq_target_t1=z_target(1),
        z_eq_target_t2=z_target(2),
        residual_var_t1=mean_var(acc[1]["r_sum"], acc[1]["r_sq"], acc[1]["r_n"]),
        residual_var_t2=mean_var(acc[2]["r_sum"], acc[2]["r_sq"], acc[2]["r_n"]),
        recombination_mismatch_count=n_mismatch,
        common_only_residual_var=(
            mean_var(common_only["sum"], common_only["sq"], common_only["n"])
            if wants_layers else None),
        notes=notes,
    )
