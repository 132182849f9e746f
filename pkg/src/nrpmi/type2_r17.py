"""Rel-17 Further Enhanced Type II port-selection codebook.

Ports are selected freely (any L of P/2) instead of as a consecutive block,
and the delay compression is reduced to M in {1, 2} taps drawn from a small
window near tap zero, relying on uplink/downlink angle-delay reciprocity
(TS 38.214 Table 5.2.2.2.7-3).  K1 = alpha * P_CSI-RS beams are combined
over both polarizations.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import quantization as qt
from .bases import port_selection_basis
from .combinadics import binomial, decode_combination, encode_combination
from .errors import BudgetError, ConsistencyError, DomainError, FormatError

# paraCombination-r17 -> (M, alpha, beta)
PARAM_COMBINATIONS: dict[int, tuple[int, float, float]] = {
    1: (1, 3 / 4, 1 / 2),
    2: (1, 1.0, 1 / 2),
    3: (1, 1.0, 3 / 4),
    4: (1, 1.0, 1.0),
    5: (2, 1 / 2, 1 / 2),
    6: (2, 3 / 4, 1 / 2),
    7: (2, 1.0, 1 / 2),
    8: (2, 1.0, 3 / 4),
}

N_PSK16 = 16
_WB_AMPS = np.array([0.0] + [qt.amp_r16_wideband(k) for k in range(1, 16)])
_SB_AMPS = np.array([qt.amp_r16_subband(k) for k in range(8)])


@dataclass(frozen=True)
class R17Config:
    p_csirs: int
    param_combination: int
    n3: int
    n_threshold: int = 2  # tap window bound N
    rank: int = 1

    def __post_init__(self):
        if self.p_csirs not in (4, 8, 12, 16, 24, 32):
            raise DomainError(f"nrofPorts {self.p_csirs} unsupported")
        if self.param_combination not in PARAM_COMBINATIONS:
            raise DomainError(f"paraCombination-r17 {self.param_combination} "
                              "outside [1, 8]")
        if self.n_threshold not in (2, 4):
            raise DomainError(f"tap window bound N={self.n_threshold} not in {{2,4}}")
        if not 3 <= self.n3 <= 36:
            raise DomainError(f"N3={self.n3} outside [3, 36]")
        if not 1 <= self.rank <= 4:
            raise DomainError(f"rank {self.rank} outside [1, 4]")
        k1 = PARAM_COMBINATIONS[self.param_combination][1] * self.p_csirs
        if k1 != int(k1) or int(k1) % 2 or k1 <= 0:
            raise DomainError(
                f"K1 = alpha * P = {k1} must be a positive even integer")
        if self.l > self.p_csirs // 2:
            raise DomainError(f"L={self.l} exceeds P/2={self.p_csirs // 2}")

    @property
    def m(self) -> int:
        return PARAM_COMBINATIONS[self.param_combination][0]

    @property
    def alpha(self) -> float:
        return PARAM_COMBINATIONS[self.param_combination][1]

    @property
    def beta(self) -> float:
        return PARAM_COMBINATIONS[self.param_combination][2]

    @property
    def k1_beams(self) -> int:
        return int(self.alpha * self.p_csirs)

    @property
    def l(self) -> int:
        return self.k1_beams // 2

    @property
    def k0(self) -> int:
        return math.ceil(self.beta * self.k1_beams * self.m)

    @property
    def window(self) -> int:
        return min(self.n_threshold, self.n3)

    @property
    def i16_reported(self) -> bool:
        return self.m == 2 and self.window > 2


@dataclass(frozen=True)
class R17Pmi:
    """Index fields of one report.

    ``i12`` is absent when alpha = 1 (all ports selected); ``i16`` is absent
    unless M = 2 with a window larger than 2.  Coefficient arrays have shape
    (rank, K1, M); unreported entries hold zeros.
    """

    i12: int | None
    i16: int | None
    i18: tuple[int, ...]
    bitmap: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    c: np.ndarray


def decode_ports(config: R17Config, pmi: R17Pmi) -> tuple[int, ...]:
    """The L selected ports per polarization, strictly increasing."""
    half = config.p_csirs // 2
    if config.alpha == 1.0:
        if pmi.i12 is not None:
            raise FormatError("i_1,2 must be absent when alpha = 1")
        return tuple(range(config.l))
    count = binomial(half, config.l)
    if pmi.i12 is None or not 0 <= pmi.i12 < count:
        raise FormatError(f"i_1,2={pmi.i12} outside [0, {count})")
    return decode_combination(pmi.i12, half, config.l)


def encode_ports(config: R17Config, ports) -> int | None:
    if config.alpha == 1.0:
        if tuple(ports) != tuple(range(config.l)):
            raise DomainError("alpha = 1 fixes the ports to 0..L-1")
        return None
    return encode_combination(sorted(ports), config.p_csirs // 2, config.l)


def decode_tap_offset(config: R17Config, pmi: R17Pmi) -> tuple[int, ...]:
    """Tap indices n3^(0..M-1); tap 0 is the reciprocity-aligned reference."""
    if config.m == 1:
        if pmi.i16 is not None:
            raise FormatError("i_1,6 must be absent when M = 1")
        return (0,)
    if not config.i16_reported:
        if pmi.i16 is not None:
            raise FormatError("i_1,6 must be absent when the window is 2")
        return (0, 1)
    if pmi.i16 is None or not 0 <= pmi.i16 < config.window - 1:
        raise FormatError(f"i_1,6={pmi.i16} outside [0, {config.window - 1})")
    return (0, pmi.i16 + 1)


def strongest_position(config: R17Config, pmi: R17Pmi, layer: int) -> tuple[int, int]:
    """Decode i_1,8 = K1*f* + i* into (i*, f*)."""
    i18 = pmi.i18[layer]
    if not 0 <= i18 < config.k1_beams * config.m:
        raise FormatError(f"i_1,8={i18} outside [0, {config.k1_beams * config.m})")
    return i18 % config.k1_beams, i18 // config.k1_beams


def validate_budget(config: R17Config, pmi: R17Pmi) -> None:
    k1b, m = config.k1_beams, config.m
    if pmi.bitmap.shape != (config.rank, k1b, m):
        raise FormatError("bitmap must have shape (rank, K1, M)")
    k0 = config.k0
    total = 0
    for layer in range(config.rank):
        k_nz = int(pmi.bitmap[layer].sum())
        if k_nz > k0:
            raise BudgetError(f"layer {layer}: K_NZ={k_nz} exceeds K0={k0}")
        total += k_nz
        i_star, f_star = strongest_position(config, pmi, layer)
        if not pmi.bitmap[layer, i_star, f_star]:
            raise ConsistencyError("strongest coefficient must be reported")
        if pmi.k2[layer, i_star, f_star] != 7 or pmi.c[layer, i_star, f_star] != 0:
            raise ConsistencyError("strongest coefficient must carry k2=7, c=0")
        if pmi.k1[layer, i_star // config.l] != 15:
            raise ConsistencyError("strongest polarization must carry k1=15")
        off = pmi.bitmap[layer] == 0
        if np.any(pmi.k2[layer][off] != 0) or np.any(pmi.c[layer][off] != 0):
            raise ConsistencyError("unreported coefficients must be zero")
    if total > 2 * k0:
        raise BudgetError(f"total K_NZ={total} exceeds 2*K0={2 * k0}")


def layer_coefficients(config: R17Config, pmi: R17Pmi, layer: int) -> np.ndarray:
    p1 = _WB_AMPS[pmi.k1[layer]]
    p2 = _SB_AMPS[pmi.k2[layer]]
    phi = np.exp(2j * np.pi * pmi.c[layer] / N_PSK16)
    pol = np.repeat(p1, config.l)[:, None]
    return pol * p2 * phi * pmi.bitmap[layer]


def reconstruct_all(config: R17Config, pmi: R17Pmi) -> np.ndarray:
    """Precoders for every frequency unit, shape (N3, P, rank)."""
    validate_budget(config, pmi)
    ports = decode_ports(config, pmi)
    taps = decode_tap_offset(config, pmi)
    v = np.column_stack([port_selection_basis(config.p_csirs, d) for d in ports])
    n3 = config.n3
    y = np.exp(2j * np.pi * np.outer(np.arange(n3), taps) / n3)
    out = np.empty((n3, config.p_csirs, config.rank), dtype=complex)
    for layer in range(config.rank):
        coef = layer_coefficients(config, pmi, layer)   # (K1, M)
        ct = coef @ y.T                                  # (K1, N3)
        gamma = (np.abs(ct) ** 2).sum(axis=0)
        if np.any(gamma <= 1e-12 * gamma.max()):
            raise ConsistencyError(
                f"layer {layer} has zero energy at some frequency unit")
        halves = np.vstack([v @ ct[:config.l], v @ ct[config.l:]])
        out[:, :, layer] = (halves / np.sqrt(gamma)).T
    return out / np.sqrt(config.rank)


def reconstruct(config: R17Config, pmi: R17Pmi, t: int) -> np.ndarray:
    if not 0 <= t < config.n3:
        raise DomainError(f"frequency unit {t} outside [0, {config.n3})")
    return reconstruct_all(config, pmi)[t]


def random_valid_pmi(config: R17Config, rng: np.random.Generator) -> R17Pmi:
    """Draw a random internally consistent report."""
    from .errors import DegenerateReportError

    for _ in range(100):
        pmi = _draw_pmi(config, rng)
        try:
            reconstruct_all(config, pmi)
        except ConsistencyError:
            continue
        return pmi
    raise DegenerateReportError("could not draw a non-degenerate report")


def _draw_pmi(config: R17Config, rng: np.random.Generator) -> R17Pmi:
    half = config.p_csirs // 2
    k1b, m = config.k1_beams, config.m
    if config.alpha == 1.0:
        i12 = None
    else:
        i12 = int(rng.integers(binomial(half, config.l)))
    i16 = int(rng.integers(config.window - 1)) if config.i16_reported else None
    k0 = config.k0
    budget_total = 2 * k0
    bitmap = np.zeros((config.rank, k1b, m), dtype=np.int8)
    k1 = np.ones((config.rank, 2), dtype=int)
    k2 = np.zeros((config.rank, k1b, m), dtype=int)
    c = np.zeros((config.rank, k1b, m), dtype=int)
    i18 = []
    for layer in range(config.rank):
        cap = min(k0, budget_total - (config.rank - layer - 1))
        k_nz = int(rng.integers(1, max(2, cap + 1)))
        budget_total -= k_nz
        i_star = int(rng.integers(k1b))
        f_star = int(rng.integers(m))
        cells = [(i, f) for i in range(k1b) for f in range(m)
                 if (i, f) != (i_star, f_star)]
        rng.shuffle(cells)
        for i, f in [(i_star, f_star)] + cells[:k_nz - 1]:
            bitmap[layer, i, f] = 1
            k2[layer, i, f] = int(rng.integers(8))
            c[layer, i, f] = int(rng.integers(N_PSK16))
        p_star = i_star // config.l
        k1[layer, p_star] = 15
        k1[layer, 1 - p_star] = int(rng.integers(1, 16))
        k2[layer, i_star, f_star] = 7
        c[layer, i_star, f_star] = 0
        i18.append(k1b * f_star + i_star)
    return R17Pmi(i12, i16, tuple(i18), bitmap, k1, k2, c)
