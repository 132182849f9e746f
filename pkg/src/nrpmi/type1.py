"""Rel-15 Type I single-panel codebook, ranks 1-2, codebook modes 1 and 2.

A Type I precoder applies one DFT beam per layer with a co-phasing factor
between the two polarizations (TS 38.214 Table 5.2.2.2.1-5/-6).  Mode 1
keeps the beam fixed across the band and lets i2 pick the co-phase per
subband; mode 2 additionally folds a 4-beam group choice into i2.
"""

from dataclasses import dataclass

import numpy as np

from .bases import ArrayGeometry, dft_beam
from .errors import DomainError, RestrictionError

# i_{1,3} -> (k1, k2) offsets for rank 2, by geometry regime
# (TS 38.214 Tables 5.2.2.2.1-3/-4)
_K_OFFSETS = {
    "n1>n2>1": [(0, 0), ("o1", 0), (0, "o2"), ("2o1", 0)],
    "n1==n2": [(0, 0), ("o1", 0), (0, "o2"), ("o1", "o2")],
    "n1>2,n2==1": [(0, 0), ("o1", 0), ("2o1", 0), ("3o1", 0)],
    # (N1, N2) = (2, 1): only two distinct horizontal offsets exist
    "n1==2,n2==1": [(0, 0), ("o1", 0)],
}


def _regime(geom: ArrayGeometry) -> str:
    n1, n2 = geom.n1, geom.n2
    if n1 > n2 > 1:
        return "n1>n2>1"
    if n1 == n2:
        return "n1==n2"
    if n1 > 2 and n2 == 1:
        return "n1>2,n2==1"
    if n1 == 2 and n2 == 1:
        return "n1==2,n2==1"
    raise DomainError(f"no i_1,3 offset regime for (N1,N2)=({n1},{n2})")


def k_offsets(i13: int, geom: ArrayGeometry) -> tuple[int, int]:
    """Beam-index offsets (k1, k2) of the second layer relative to the first."""
    table = _K_OFFSETS[_regime(geom)]
    if not 0 <= i13 < len(table):
        raise DomainError(f"i_1,3={i13} invalid for (N1,N2)=({geom.n1},{geom.n2})")
    scale = {"o1": geom.o1, "2o1": 2 * geom.o1, "3o1": 3 * geom.o1, "o2": geom.o2}
    k1, k2 = table[i13]
    return (scale.get(k1, 0) if isinstance(k1, str) else k1,
            scale.get(k2, 0) if isinstance(k2, str) else k2)


def i13_range(geom: ArrayGeometry) -> int:
    return len(_K_OFFSETS[_regime(geom)])


@dataclass(frozen=True)
class Type1Config:
    geom: ArrayGeometry
    mode: int = 1
    rank: int = 1
    subband_count: int = 1

    def __post_init__(self):
        if self.mode not in (1, 2):
            raise DomainError(f"codebook mode {self.mode} not in {{1, 2}}")
        if self.mode == 2 and self.geom.n2 == 1:
            raise DomainError("codebook mode 2 requires N2 > 1")
        if self.rank not in (1, 2):
            raise DomainError(f"rank {self.rank} not supported (1 or 2)")
        if self.subband_count < 1:
            raise DomainError("subband_count must be positive")

    @property
    def i11_range(self) -> int:
        return self.geom.beams_h // (1 if self.mode == 1 else 2)

    @property
    def i12_range(self) -> int:
        return self.geom.beams_v // (1 if self.mode == 1 else 2)

    @property
    def i2_range(self) -> int:
        if self.mode == 1:
            return 4 if self.rank == 1 else 2
        return 8


@dataclass(frozen=True)
class Type1Pmi:
    i11: int
    i12: int
    i2: tuple[int, ...]  # one entry per subband
    i13: int | None = None  # rank 2 only

    def validate(self, config: Type1Config) -> None:
        if not 0 <= self.i11 < config.i11_range:
            raise DomainError(f"i_1,1={self.i11} outside [0, {config.i11_range})")
        if not 0 <= self.i12 < config.i12_range:
            raise DomainError(f"i_1,2={self.i12} outside [0, {config.i12_range})")
        if len(self.i2) != config.subband_count:
            raise DomainError("one i_2 value per subband required")
        for v in self.i2:
            if not 0 <= v < config.i2_range:
                raise DomainError(f"i_2={v} outside [0, {config.i2_range})")
        if config.rank == 2:
            if self.i13 is None or not 0 <= self.i13 < i13_range(config.geom):
                raise DomainError(f"i_1,3={self.i13} invalid for this geometry")
        elif self.i13 is not None:
            raise DomainError("i_1,3 present in a rank-1 report")


def _beam_and_phase(config: Type1Config, pmi: Type1Pmi, subband: int) -> tuple[int, int, int]:
    """Resolve (l, m, n) of the first layer for one subband."""
    i2 = pmi.i2[subband]
    if config.mode == 1:
        l, m = pmi.i11, pmi.i12
        n = i2
    else:
        # i2 in {0..7}: pairs select the beam within the 2x2 group, parity
        # selects the co-phase
        l = 2 * pmi.i11 + ((i2 // 2) % 2)
        m = 2 * pmi.i12 + (i2 // 4)
        n = i2 % 2
    return l, m, n


def build_rank1(config: Type1Config, pmi: Type1Pmi, subband: int = 0,
                restriction: np.ndarray | None = None) -> np.ndarray:
    """w = (1/sqrt(P)) [v; phi_n v], a (P, 1) matrix."""
    pmi.validate(config)
    l, m, n = _beam_and_phase(config, pmi, subband)
    _check_beams_allowed(restriction, config.geom, [(l, m)])
    v = dft_beam(config.geom, l, m)
    phi = np.exp(1j * np.pi * n / 2)
    p = config.geom.n_ports
    return (np.concatenate([v, phi * v]) / np.sqrt(p)).reshape(p, 1)


def build_rank2(config: Type1Config, pmi: Type1Pmi, subband: int = 0,
                restriction: np.ndarray | None = None) -> np.ndarray:
    """W = (1/sqrt(2P)) [[v, v'], [phi_n v, -phi_n v']], a (P, 2) matrix."""
    pmi.validate(config)
    l, m, n = _beam_and_phase(config, pmi, subband)
    k1, k2 = k_offsets(pmi.i13, config.geom)
    lp, mp = l + k1, m + k2
    _check_beams_allowed(restriction, config.geom, [(l, m), (lp, mp)])
    v = dft_beam(config.geom, l, m)
    vp = dft_beam(config.geom, lp % config.geom.beams_h, mp % config.geom.beams_v)
    phi = np.exp(1j * np.pi * n / 2)
    p = config.geom.n_ports
    w1 = np.concatenate([v, phi * v])
    w2 = np.concatenate([vp, -phi * vp])
    return np.column_stack([w1, w2]) / np.sqrt(2 * p)


def build_precoder(config: Type1Config, pmi: Type1Pmi, subband: int = 0,
                   restriction: np.ndarray | None = None) -> np.ndarray:
    if config.rank == 1:
        return build_rank1(config, pmi, subband, restriction)
    return build_rank2(config, pmi, subband, restriction)


def check_beam_restriction(bit_sequence: np.ndarray, geom: ArrayGeometry,
                           l: int, m: int) -> bool:
    """Beam (l, m) is allowed iff bit N2*O2*l + m of the sequence is set."""
    seq = np.asarray(bit_sequence)
    if seq.size != geom.beams_h * geom.beams_v:
        raise DomainError(f"restriction needs {geom.beams_h * geom.beams_v} bits")
    return bool(seq[geom.beams_v * (l % geom.beams_h) + (m % geom.beams_v)])


def _check_beams_allowed(restriction, geom, beams):
    if restriction is None:
        return
    for l, m in beams:
        if not check_beam_restriction(restriction, geom, l, m):
            raise RestrictionError(f"beam ({l % geom.beams_h}, {m % geom.beams_v}) "
                                   "is restricted")


def check_rank_restriction(r_bits, rank: int) -> bool:
    """r_bits[i] = 0 prohibits reporting precoders with i+1 layers."""
    bits = list(r_bits)
    if len(bits) != 8:
        raise DomainError("rank restriction requires 8 bits r0..r7")
    if not 1 <= rank <= 8:
        raise DomainError(f"rank {rank} outside [1, 8]")
    return bool(bits[rank - 1])


def _subband_rate(h_sub: np.ndarray, w: np.ndarray, noise_power: float) -> float:
    """Single-user rate of one subband, summed over its subcarriers."""
    total = 0.0
    for h in h_sub:
        g = h @ w
        m = np.eye(g.shape[0]) + (g.conj().T @ g) / noise_power
        sign, logdet = np.linalg.slogdet(m)
        total += logdet / np.log(2)
    return total


def search_type1(channel: np.ndarray, config: Type1Config,
                 restriction: np.ndarray | None = None,
                 rank_restriction=None, noise_power: float = 1.0) -> Type1Pmi:
    """Exhaustive PMI scan maximizing the wideband single-user rate.

    ``channel`` has shape (M, Nr, P); subcarriers are split evenly over the
    configured subbands.  Ties break toward the smallest flat PMI encoding
    (scan order), making the result reproducible.
    """
    h = np.asarray(channel)
    if h.ndim != 3 or h.shape[2] != config.geom.n_ports:
        raise DomainError(f"channel must be (M, Nr, {config.geom.n_ports})")
    if not np.any(np.abs(h) > 0):
        raise DomainError("zero channel")
    if rank_restriction is not None and not check_rank_restriction(
            rank_restriction, config.rank):
        raise RestrictionError(f"rank {config.rank} is prohibited")

    n_sb = config.subband_count
    edges = np.linspace(0, h.shape[0], n_sb + 1).astype(int)
    i13_values = range(i13_range(config.geom)) if config.rank == 2 else (None,)

    best = None
    best_rate = -np.inf
    for i11 in range(config.i11_range):
        for i12 in range(config.i12_range):
            for i13 in i13_values:
                i2_pick = []
                total = 0.0
                for sb in range(n_sb):
                    h_sub = h[edges[sb]:edges[sb + 1]]
                    sb_best, sb_rate = None, -np.inf
                    for i2 in range(config.i2_range):
                        pmi = Type1Pmi(i11, i12, (i2,) * n_sb, i13)
                        try:
                            w = build_precoder(config, pmi, sb, restriction)
                        except RestrictionError:
                            continue
                        r = _subband_rate(h_sub, w, noise_power)
                        if r > sb_rate:
                            sb_best, sb_rate = i2, r
                    if sb_best is None:
                        break  # every beam choice restricted for this subband
                    i2_pick.append(sb_best)
                    total += sb_rate
                if len(i2_pick) < n_sb:
                    continue
                if total > best_rate + 1e-12:
                    best_rate = total
                    best = Type1Pmi(i11, i12, tuple(i2_pick), i13)
    if best is None:
        raise RestrictionError("no admissible PMI under the given restriction")
    return best
