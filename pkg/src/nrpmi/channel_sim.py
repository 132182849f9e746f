"""Random multipath OFDM MIMO channels and UE-side codebook search.

The channel model is a clustered geometric model (non-normative): each path
has a complex gain, a continuous transmit direction on the oversampled beam
grid, a delay, and a Doppler shift.  The second polarization reuses the path
geometry with independent phases scaled by a cross-coupling factor.

The release searches follow one recipe: project the per-unit channels onto
wideband receive directions, select beams/ports by projected energy, DFT
across frequency units (and slot intervals) to the delay (Doppler) domain,
keep the strongest taps (shifts), and quantize the surviving coefficients
under the nonzero-coefficient budget.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import type2_r16, type2_r17, type2_r18
from .bases import ArrayGeometry, orthogonal_group
from .combinadics import encode_combination
from .errors import DomainError
from .quantization import amp_r15_wideband

_R15_WB_AMPS = np.array([amp_r15_wideband(k) for k in range(8)])
_R16_WB_AMPS = type2_r16._WB_AMPS
_R16_SB_AMPS = type2_r16._SB_AMPS


@dataclass(frozen=True)
class ChannelModel:
    """Clustered geometric multipath model over the logical antenna array."""

    n_paths: int = 4
    delay_spread: float = 1e-6        # seconds
    doppler_max: float = 0.0          # Hz
    subcarrier_spacing: float = 15e3  # Hz
    n_subcarriers: int = 12
    cross_pol: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_paths < 1:
            raise DomainError("at least one path required")
        if self.delay_spread < 0:
            raise DomainError("delays must be nonnegative")


@dataclass(frozen=True)
class ChannelRealization:
    """Per-interval, per-subcarrier channels h with shape (N4, M, Nr, P)."""

    h: np.ndarray
    f: np.ndarray | None = None  # optional port-external beamforming matrix

    @property
    def h1(self) -> np.ndarray:
        return self.h[..., :self.h.shape[-1] // 2]

    @property
    def h2(self) -> np.ndarray:
        return self.h[..., self.h.shape[-1] // 2:]

    @property
    def flat(self) -> np.ndarray:
        """Single-interval view (M, Nr, P); requires N4 = 1."""
        if self.h.shape[0] != 1:
            raise DomainError("channel has multiple intervals")
        return self.h[0]


def _tx_response(geom: ArrayGeometry, x1: float, x2: float) -> np.ndarray:
    """Array response at continuous beam coordinates (vertical fastest)."""
    a = np.exp(2j * np.pi * x1 * np.arange(geom.n1) / geom.beams_h)
    u = np.exp(2j * np.pi * x2 * np.arange(geom.n2) / geom.beams_v)
    return np.kron(a, u)


def draw_channel(model: ChannelModel, geom: ArrayGeometry, nr: int,
                 trial: int = 0, n4: int = 1,
                 interval_duration: float = 5e-4) -> ChannelRealization:
    """Deterministic channel draw for (seed, trial); see the module model."""
    rng = np.random.default_rng([model.seed, trial])
    p = geom.n_ports
    half = p // 2
    m = model.n_subcarriers
    # normalized so the expected squared Frobenius norm per unit is Nt*Nr
    gain_var = 2 * nr / ((1 + model.cross_pol**2) * model.n_paths)
    h = np.zeros((n4, m, nr, p), dtype=complex)
    for _ in range(model.n_paths):
        x1 = rng.uniform(0, geom.beams_h)
        x2 = rng.uniform(0, geom.beams_v)
        delay = rng.uniform(0, model.delay_spread)
        doppler = rng.uniform(-model.doppler_max, model.doppler_max)
        a_tx = _tx_response(geom, x1, x2)
        a_rx = rng.standard_normal(nr) + 1j * rng.standard_normal(nr)
        a_rx /= np.linalg.norm(a_rx)
        g1 = math.sqrt(gain_var / 2) * complex(rng.standard_normal(),
                                               rng.standard_normal())
        g2 = model.cross_pol * abs(g1) * np.exp(2j * np.pi * rng.random())
        freq_phase = np.exp(-2j * np.pi * delay
                            * model.subcarrier_spacing * np.arange(m))
        time_phase = np.exp(2j * np.pi * doppler
                            * interval_duration * np.arange(n4))
        outer = np.outer(a_rx, a_tx.conj())
        for iota in range(n4):
            phases = (time_phase[iota] * freq_phase)[:, None, None]
            h[iota, :, :, :half] += g1 * phases * outer
            h[iota, :, :, half:] += g2 * phases * outer
    return ChannelRealization(h=h)


def effective_channel(h1: np.ndarray, h2: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Beam-domain channel [H1 F, H2 F] for full-connect port beamforming."""
    h1 = np.asarray(h1)
    h2 = np.asarray(h2)
    f = np.asarray(f)
    if h1.shape != h2.shape or h1.shape[-1] != f.shape[0]:
        raise DomainError(
            f"dimension mismatch: H halves {h1.shape}/{h2.shape}, F {f.shape}")
    return np.concatenate([h1 @ f, h2 @ f], axis=-1)


# ---------------------------------------------------------------------------
# shared search helpers

def _rx_directions(h: np.ndarray, rank: int) -> np.ndarray:
    """Dominant wideband receive directions as rows, shape (rank, Nr)."""
    nr = h.shape[-2]
    if rank > nr:
        raise DomainError(f"rank {rank} exceeds {nr} receive antennas")
    cov = np.einsum("nmrp,nmsp->rs", h, h.conj())
    _, vecs = np.linalg.eigh(cov)
    return vecs[:, ::-1][:, :rank].T


def _targets(h: np.ndarray, rank: int) -> np.ndarray:
    """Matched-filter targets H^H u_l, shape (rank, N4, M, P).

    A common receive direction per layer keeps the relative phases across
    frequency units and intervals, preserving the delay and Doppler
    sparsity that per-unit eigenvectors would scramble.
    """
    u = _rx_directions(h, rank)
    return np.einsum("lr,nmrp->lnmp", u, h.conj())


def _beam_projections(targets: np.ndarray, basis: np.ndarray,
                      gain: float) -> np.ndarray:
    """Coefficients of both polarization halves, shape (rank, N4, M, 2L)."""
    half = targets.shape[-1] // 2
    b1 = np.einsum("pl,knmp->knml", basis.conj(), targets[..., :half]) / gain
    b2 = np.einsum("pl,knmp->knml", basis.conj(), targets[..., half:]) / gain
    return np.concatenate([b1, b2], axis=-1)


def _group_candidates(targets: np.ndarray, geom: ArrayGeometry, l: int):
    """Groups whose best-L beams capture (close to) the maximum energy.

    Degenerate beam combinations are exactly representable in several
    groups, so ties are real; every tied candidate is returned for a full
    evaluation.
    """
    entries = []
    for q1 in range(geom.o1):
        for q2 in range(geom.o2):
            grp = orthogonal_group(geom, q1, q2)
            proj = _beam_projections(targets, grp, geom.n1 * geom.n2)
            energy = (np.abs(proj) ** 2).sum(axis=(0, 1, 2))
            per_beam = energy[:grp.shape[1]] + energy[grp.shape[1]:]
            flats = np.sort(np.argsort(per_beam)[-l:])
            score = float(per_beam[flats].sum())
            entries.append((score, (q1, q2), tuple(int(v) for v in flats), grp))
    top = max(e[0] for e in entries)
    return [(q, flats, grp[:, list(flats)]) for score, q, flats, grp in entries
            if score >= top * (1 - 1e-9)]


def _quantize_r16_grid(coef: np.ndarray, l: int, k0: int, budget_left: int,
                       wb_amps: np.ndarray, sb_amps: np.ndarray,
                       n_psk: int, star_slots: np.ndarray | None = None):
    """Quantize one layer's coefficient grid (2L, ...) against the Rel-16
    amplitude tables; returns (bitmap, k1, k2, c, strongest multi-index).

    ``star_slots`` restricts which tail slots may host the normalization
    reference (the strongest tap's coefficients); None allows every slot.
    """
    shape = coef.shape
    flat_tail = coef.reshape(2 * l, -1)
    mag = np.abs(flat_tail)
    star_mag = np.round(mag, 12).copy()
    if star_slots is not None:
        star_mag[:, ~star_slots] = -1.0
    star = np.unravel_index(int(np.argmax(star_mag)), mag.shape)
    scale = mag[star]
    if scale == 0:
        raise DomainError("no usable coefficient at the reference tap")
    coef = coef * np.exp(-1j * np.angle(flat_tail[star]))
    flat_tail = coef.reshape(2 * l, -1)
    mag = np.abs(flat_tail) / scale
    p_star = star[0] // l
    k1 = np.ones(2, dtype=int)
    k1[p_star] = 15
    other = 1 - p_star
    other_max = float(mag[other * l:other * l + l].max())
    k1[other] = (int(np.abs(wb_amps[1:] - min(other_max, 1.0)).argmin()) + 1
                 if other_max > 0 else 1)
    pol_amp = np.repeat(wb_amps[k1], l)[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(pol_amp > 0, mag / pol_amp, 0.0)
    k2 = np.abs(np.minimum(ratio, 1.0)[..., None] - sb_amps).argmin(axis=-1)
    keep = ratio >= sb_amps[0] / 2
    keep[star] = True
    # budget: strongest first, then by magnitude
    cap = min(k0, budget_left)
    if keep.sum() > cap:
        order = np.argsort(mag, axis=None)[::-1]
        allowed = {int(np.ravel_multi_index(star, mag.shape))}
        for pos in order:
            if len(allowed) >= cap:
                break
            if keep.flat[pos]:
                allowed.add(int(pos))
        keep = np.zeros_like(keep)
        keep.flat[list(allowed)] = True
    phases = np.round(np.angle(flat_tail) / (2 * np.pi) * n_psk).astype(int) % n_psk
    bitmap = keep.astype(np.int8)
    k2 = np.where(bitmap > 0, k2, 0)
    c = np.where(bitmap > 0, phases, 0)
    k2[star] = 7
    c[star] = 0
    return (bitmap.reshape(shape), k1, k2.reshape(shape), c.reshape(shape),
            star)


def _window_raw(rel: int, m_init: int, mv: int, n3: int) -> int:
    """Pre-adjustment value of a relative tap inside the i15 window."""
    return rel if rel <= m_init + 2 * mv - 1 else rel - (n3 - 2 * mv)


def _pick_taps(ref_metric: np.ndarray, energy: np.ndarray, mv: int, n3: int,
               window_mode: bool):
    """Reference tap (strongest coefficient) plus the best representable
    companions by energy; returns (ref, relative taps in decode order,
    M_init)."""
    ref = int(np.argmax(np.round(ref_metric, 12)))
    rel_energy = np.roll(energy, -ref)
    if mv == 1:
        return ref, (0,), 0
    if not window_mode:
        rest = np.sort(np.argsort(rel_energy[1:])[::-1][:mv - 1] + 1)
        return ref, (0,) + tuple(int(t) for t in rest), 0
    if 2 * mv >= n3:
        raise DomainError(f"window of {2 * mv} taps is ambiguous for N3={n3}")
    # signed relative position; the window [M_init, M_init + 2Mv - 1] must
    # cover every pick and contain 0
    signed = {}
    for rel in range(1, n3):
        s = rel if rel <= 2 * mv - 1 else rel - n3
        if -2 * mv + 1 <= s <= 2 * mv - 1:
            signed[rel] = s
    order = sorted(signed, key=lambda rel: -rel_energy[rel])
    chosen: list[int] = []
    lo = hi = 0
    for rel in order:
        if len(chosen) == mv - 1:
            break
        s = signed[rel]
        new_lo, new_hi = min(lo, s), max(hi, s)
        if new_hi - new_lo <= 2 * mv - 2:
            chosen.append(rel)
            lo, hi = new_lo, new_hi
    m_init = min(0, lo)
    rels = [0] + sorted(chosen, key=lambda rel: _window_raw(rel, m_init, mv, n3))
    return ref, tuple(rels), m_init


def _refit_window(ref: int, energy: np.ndarray, mv: int, n3: int,
                  m_init: int):
    """Best companion taps inside a fixed window [M_init, M_init+2Mv-1]."""
    rel_energy = np.roll(energy, -ref)
    allowed = [s % n3 for s in range(m_init, m_init + 2 * mv) if s % n3 != 0]
    picks = sorted(allowed, key=lambda rel: -rel_energy[rel])[:mv - 1]
    return (0,) + tuple(sorted(picks,
                               key=lambda rel: _window_raw(rel, m_init, mv, n3)))


def search_r16(channel: ChannelRealization, config: type2_r16.R16Config
               ) -> type2_r16.R16Pmi:
    """UE-side Enhanced Type II report selection."""
    h = channel.flat[None]  # (1, M, Nr, P)
    if h.shape[1] != config.n3:
        raise DomainError(f"need one frequency unit per subcarrier: "
                          f"M={h.shape[1]} vs N3={config.n3}")
    if h.shape[-1] != config.n_ports:
        raise DomainError(f"channel must have {config.n_ports} ports")
    targets = _targets(h, config.rank)
    l = config.l
    if config.variant == type2_r16.REGULAR:
        g = config.geom
        best_pmi, best_fit = None, -1.0
        for q, flats, basis in _group_candidates(targets, g, l):
            i12 = encode_combination(flats, g.n1 * g.n2, l)
            pmi = _finish_r16_search(config, targets, q, i12, basis,
                                     g.n1 * g.n2)
            fit = _fit_r16(config, pmi, targets)
            if fit > best_fit + 1e-12:
                best_pmi, best_fit = pmi, fit
        return best_pmi
    else:
        half = config.p_csirs // 2
        max_start = half - l
        energy = (np.abs(targets) ** 2).sum(axis=(0, 1, 2))
        per_port = energy[:half] + energy[half:]
        blocks = [sum(per_port[b * config.d + i] for i in range(l))
                  for b in range(max_start // config.d + 1)]
        i11 = int(np.argmax(blocks))
        cols = np.zeros((half, l))
        for i in range(l):
            cols[i11 * config.d + i, i] = 1.0
        return _finish_r16_search(config, targets, i11, None, cols, 1)


def _fit_r16(config, pmi, targets) -> float:
    ws = type2_r16.reconstruct_all(config, pmi)  # (N3, P, rank)
    unit = targets[:, 0] / np.linalg.norm(targets[:, 0], axis=-1,
                                          keepdims=True)
    corr = np.einsum("ltp,tpl->tl", unit.conj(), ws)
    return float((np.abs(corr) ** 2).sum())


def _finish_r16_search(config, targets, i11, i12, basis, gain):
    """Tap selection and coefficient quantization for a fixed beam set."""
    l = config.l
    proj = _beam_projections(targets, basis, gain)[:, 0]  # (rank, M, 2L)
    spectrum = np.fft.fft(proj, axis=1) / config.n3       # (rank, N3, 2L)

    mv = config.mv
    two_l = 2 * l
    bitmap = np.zeros((config.rank, two_l, mv), dtype=np.int8)
    k1 = np.ones((config.rank, 2), dtype=int)
    k2 = np.zeros((config.rank, two_l, mv), dtype=int)
    c = np.zeros((config.rank, two_l, mv), dtype=int)
    i16 = []
    i18 = []
    i15_common: int | None = None
    budget_left = 2 * config.k0
    star_slots = np.zeros(mv, dtype=bool)
    star_slots[0] = True  # the reference lives on the remapped tap 0
    for layer in range(config.rank):
        energy = (np.abs(spectrum[layer]) ** 2).sum(axis=1)
        peak = np.abs(spectrum[layer]).max(axis=1)
        ref, rels, m_init = _pick_taps(peak, energy, mv, config.n3,
                                       config.window_mode)
        if config.window_mode and i15_common is not None:
            # one i15 field serves the whole report: refit later layers
            # inside the window fixed by the first layer
            fixed = 0 if i15_common == 0 else i15_common - 2 * mv
            if m_init != fixed:
                m_init = fixed
                rels = _refit_window(ref, energy, mv, config.n3, m_init)
        idx, i15 = type2_r16.encode_taps(config, rels, m_init)
        if config.window_mode and i15_common is None:
            i15_common = i15
        i16.append(idx)
        abs_taps = [(ref + rel) % config.n3 for rel in rels]
        coef = spectrum[layer][abs_taps].T                # (2L, Mv)
        bm, kk1, kk2, cc, star = _quantize_r16_grid(
            coef, l, config.k0, budget_left, _R16_WB_AMPS, _R16_SB_AMPS, 16,
            star_slots)
        budget_left -= int(bm.sum())
        bitmap[layer], k1[layer], k2[layer], c[layer] = bm, kk1, kk2, cc
        i18.append(type2_r16.encode_strongest(config, bitmap[layer], star[0]))
    i15_field = (i15_common if config.window_mode else None)
    return type2_r16.R16Pmi(i11, i12, i15_field, tuple(i16), tuple(i18),
                            bitmap, k1, k2, c)


def search_r17(channel: ChannelRealization, config: type2_r17.R17Config
               ) -> type2_r17.R17Pmi:
    """UE-side Further Enhanced port-selection report (beam-domain channel)."""
    h = channel.flat[None]
    if h.shape[1] != config.n3:
        raise DomainError(f"need one frequency unit per subcarrier: "
                          f"M={h.shape[1]} vs N3={config.n3}")
    if h.shape[-1] != config.p_csirs:
        raise DomainError(f"channel must have {config.p_csirs} ports")
    targets = _targets(h, config.rank)
    half = config.p_csirs // 2
    l = config.l
    energy = (np.abs(targets) ** 2).sum(axis=(0, 1, 2))
    per_port = energy[:half] + energy[half:]
    if config.alpha == 1.0:
        ports = tuple(range(l))
    else:
        ports = tuple(int(v) for v in np.sort(np.argsort(per_port)[-l:]))
    i12 = type2_r17.encode_ports(config, ports)
    basis = np.zeros((half, l))
    for j, d in enumerate(ports):
        basis[d, j] = 1.0
    proj = _beam_projections(targets, basis, 1.0)[:, 0]   # (rank, M, K1)
    spectrum = np.fft.fft(proj, axis=1) / config.n3

    taps: tuple[int, ...]
    if config.m == 1:
        taps = (0,)
        i16 = None
    elif not config.i16_reported:
        taps = (0, 1)
        i16 = None
    else:
        window = config.window
        tap_energy = (np.abs(spectrum) ** 2).sum(axis=(0, 2))[:window]
        second = 1 + int(np.argmax(tap_energy[1:]))
        taps = (0, second)
        i16 = second - 1

    k1b, m = config.k1_beams, config.m
    bitmap = np.zeros((config.rank, k1b, m), dtype=np.int8)
    k1 = np.ones((config.rank, 2), dtype=int)
    k2 = np.zeros((config.rank, k1b, m), dtype=int)
    c = np.zeros((config.rank, k1b, m), dtype=int)
    i18 = []
    budget_left = 2 * config.k0
    for layer in range(config.rank):
        coef = spectrum[layer][list(taps)].T              # (K1, M)
        bm, kk1, kk2, cc, star = _quantize_r16_grid(
            coef, l, config.k0, budget_left, _R16_WB_AMPS, _R16_SB_AMPS, 16)
        budget_left -= int(bm.sum())
        bitmap[layer], k1[layer], k2[layer], c[layer] = bm, kk1, kk2, cc
        i18.append(k1b * star[1] + star[0])
    return type2_r17.R17Pmi(i12, i16, tuple(i18), bitmap, k1, k2, c)


def search_r18(channel: ChannelRealization, config: type2_r18.R18Config
               ) -> type2_r18.R18Pmi:
    """UE-side predicted-PMI report over N4 slot intervals."""
    h = channel.h
    if h.shape[0] != config.n4:
        raise DomainError(f"channel must cover N4={config.n4} intervals")
    if h.shape[1] != config.n3:
        raise DomainError(f"need one frequency unit per subcarrier: "
                          f"M={h.shape[1]} vs N3={config.n3}")
    if h.shape[-1] != config.n_ports:
        raise DomainError(f"channel must have {config.n_ports} ports")
    targets = _targets(h, config.rank)
    g = config.geom
    l = config.l
    best_pmi, best_fit = None, -1.0
    for q, flats, basis in _group_candidates(targets, g, l):
        i12 = encode_combination(flats, g.n1 * g.n2, l)
        pmi = _finish_r18_search(config, targets, q, i12, basis)
        ws = type2_r18.reconstruct_all(config, pmi)  # (N3, N4, P, rank)
        unit = targets / np.linalg.norm(targets, axis=-1, keepdims=True)
        corr = np.einsum("lntp,tnpl->tnl", unit.conj(), ws)
        fit = float((np.abs(corr) ** 2).sum())
        if fit > best_fit + 1e-12:
            best_pmi, best_fit = pmi, fit
    return best_pmi


def _finish_r18_search(config, targets, i11, i12, basis):
    g = config.geom
    l = config.l
    proj = _beam_projections(targets, basis, g.n1 * g.n2)  # (rank, N4, M, 2L)
    # 2-D DFT: frequency units -> taps, intervals -> shifts
    spectrum = np.fft.fft(proj, axis=2) / config.n3
    spectrum = np.fft.fft(spectrum, axis=1) / config.n4    # (rank,N4,N3,2L)

    mv, n_q = config.mv, config.q
    two_l = 2 * l
    bitmap = np.zeros((config.rank, two_l, mv, n_q), dtype=np.int8)
    k1 = np.ones((config.rank, 2), dtype=int)
    k2 = np.zeros((config.rank, two_l, mv, n_q), dtype=int)
    c = np.zeros((config.rank, two_l, mv, n_q), dtype=int)
    i16 = []
    i18 = []
    i110 = []
    i15_common: int | None = None
    budget_left = 2 * config.k0
    star_slots = np.zeros((mv, n_q), dtype=bool)
    star_slots[0, :] = True  # reference on the remapped tap 0, either shift
    for layer in range(config.rank):
        if config.n4 > 1:
            shift_energy = (np.abs(spectrum[layer]) ** 2).sum(axis=(1, 2))
            second = 1 + int(np.argmax(shift_energy[1:]))
            shifts = (0, second)
            i110.append(second - 1)
        else:
            shifts = (0,)
        sub = spectrum[layer][list(shifts)]               # (Q, N3, 2L)
        tap_energy = (np.abs(sub) ** 2).sum(axis=(0, 2))
        tap_peak = np.abs(sub).max(axis=(0, 2))
        ref, rels, m_init = _pick_taps(tap_peak, tap_energy, mv, config.n3,
                                       config.window_mode)
        if config.window_mode and i15_common is not None:
            fixed = 0 if i15_common == 0 else i15_common - 2 * mv
            if m_init != fixed:
                m_init = fixed
                rels = _refit_window(ref, tap_energy, mv, config.n3, m_init)
        idx, i15 = type2_r18.encode_taps(config, rels, m_init)
        if config.window_mode and i15_common is None:
            i15_common = i15
        i16.append(idx)
        abs_taps = [(ref + rel) % config.n3 for rel in rels]
        # coefficient tensor (2L, Mv, Q): tap index then shift index
        coef = np.stack([sub[tau][abs_taps].T for tau in range(len(shifts))],
                        axis=-1)
        bm, kk1, kk2, cc, star = _quantize_r16_grid(
            coef, l, config.k0, budget_left, _R16_WB_AMPS, _R16_SB_AMPS, 16,
            star_slots[:, :len(shifts)].reshape(-1))
        budget_left -= int(bm.sum())
        bitmap[layer], k1[layer], k2[layer], c[layer] = bm, kk1, kk2, cc
        # star multi-index over the (Mv*Q) tail: tail order is (f, tau)
        _, tau_star = np.unravel_index(star[1], (mv, len(shifts)))
        i18.append(type2_r18.encode_strongest(config, bitmap[layer], star[0],
                                              int(tau_star)))
    i15_field = (i15_common if config.window_mode else None)
    return type2_r18.R18Pmi(i11, i12, i15_field, tuple(i16), tuple(i18),
                            tuple(i110) if config.n4 > 1 else None,
                            bitmap, k1, k2, c)


# ---------------------------------------------------------------------------
# spectral efficiency experiment (Type I vs Type II, single polarization)

def _type1_single_pol_rate(h: np.ndarray, geom: ArrayGeometry,
                           snr: float) -> float:
    best = 0.0
    n = geom.n1 * geom.n2
    for l in range(geom.beams_h):
        for m_v in range(geom.beams_v):
            v = _tx_response(geom, l, m_v) / math.sqrt(n)
            gain = abs(np.vdot(h.conj(), v)) ** 2
            best = max(best, gain)
    return math.log2(1 + snr * best)


def _type2_single_pol_rate(h: np.ndarray, geom: ArrayGeometry, snr: float,
                           l_beams: int = 4, n_psk: int = 4) -> float:
    n = geom.n1 * geom.n2
    target = h.conj()  # the matched beamformer direction
    best_group, best_energy = None, -1.0
    for q1 in range(geom.o1):
        for q2 in range(geom.o2):
            grp = orthogonal_group(geom, q1, q2)
            proj = np.abs(grp.conj().T @ target) ** 2
            energy = float(np.sort(proj)[-l_beams:].sum())
            if energy > best_energy + 1e-12:
                best_group, best_energy = grp, energy
    proj = best_group.conj().T @ target / n
    picks = np.argsort(np.abs(proj))[-l_beams:]
    coef = proj[picks]
    scale = np.abs(coef).max()
    rel = coef / (scale * np.exp(1j * np.angle(coef[np.abs(coef).argmax()])))
    amp_idx = np.abs(np.abs(rel)[:, None] - _R15_WB_AMPS).argmin(axis=1)
    phase_idx = np.round(np.angle(rel) / (2 * np.pi) * n_psk).astype(int) % n_psk
    a_hat = _R15_WB_AMPS[amp_idx] * np.exp(2j * np.pi * phase_idx / n_psk)
    w = best_group[:, picks] @ a_hat
    norm = np.linalg.norm(w)
    if norm == 0:
        return 0.0
    gain = abs(np.vdot(h.conj(), w / norm)) ** 2
    return math.log2(1 + snr * gain)


def spectral_efficiency_experiment(antenna_configs=((4, 1), (16, 1)),
                                   snr_db=(-10, 0, 10, 20), trials: int = 500,
                                   n_paths: int = 4, seed: int = 0,
                                   l_beams: int = 4) -> list[dict]:
    """Monte-Carlo single-stream, single-polarization comparison.

    Type I feeds back the single best oversampled beam; Type II combines
    the best L beams of the best group with 3-bit amplitudes, QPSK phases,
    and no subband amplitude.  Returns rows of snr_db, scheme, mean_rate,
    ci95.
    """
    rows = []
    for n1, n2 in antenna_configs:
        geom = ArrayGeometry.from_antennas(n1, n2)
        model = ChannelModel(n_paths=n_paths, n_subcarriers=1,
                             cross_pol=0.0, seed=seed)
        rates1 = np.zeros((len(snr_db), trials))
        rates2 = np.zeros((len(snr_db), trials))
        for trial in range(trials):
            ch = draw_channel(model, geom, nr=1, trial=trial)
            h = ch.h1[0, 0, 0]  # single polarization slice, (N1*N2,)
            for si, s in enumerate(snr_db):
                snr = 10 ** (s / 10)
                rates1[si, trial] = _type1_single_pol_rate(h, geom, snr)
                rates2[si, trial] = _type2_single_pol_rate(h, geom, snr,
                                                           l_beams)
        for si, s in enumerate(snr_db):
            for name, r in (("type1", rates1[si]), ("type2", rates2[si])):
                rows.append({
                    "antennas": f"{n1}x{n2}",
                    "snr_db": s,
                    "scheme": name,
                    "mean_rate": float(r.mean()),
                    "ci95": float(1.96 * r.std(ddof=1) / math.sqrt(trials)),
                })
    return rows
