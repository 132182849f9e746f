import numpy as np
import pytest

from nrpmi import compact, type2_r16, type2_r17, type2_r18
from nrpmi.bases import ArrayGeometry
from nrpmi.channel_sim import (
    ChannelModel,
    ChannelRealization,
    draw_channel,
    effective_channel,
    search_r16,
    search_r17,
    search_r18,
    spectral_efficiency_experiment,
)
from nrpmi.combinadics import decode_combination
from nrpmi.errors import DomainError

GEOM = ArrayGeometry(4, 2, 4, 4)


def test_determinism():
    model = ChannelModel(n_paths=3, seed=7, n_subcarriers=4)
    a = draw_channel(model, GEOM, nr=2, trial=5)
    b = draw_channel(model, GEOM, nr=2, trial=5)
    assert np.array_equal(a.h, b.h)
    c = draw_channel(model, GEOM, nr=2, trial=6)
    assert not np.array_equal(a.h, c.h)


def test_energy_normalization():
    model = ChannelModel(n_paths=6, seed=1, n_subcarriers=2, cross_pol=0.5)
    total = 0.0
    trials = 400
    for trial in range(trials):
        ch = draw_channel(model, GEOM, nr=2, trial=trial)
        total += np.mean(np.abs(ch.h) ** 2) * ch.h.shape[-1] * ch.h.shape[-2]
    expected = GEOM.n_ports * 2
    assert abs(total / trials - expected) / expected < 0.15


def test_two_orthogonal_paths_rank2():
    # plant two paths on orthogonal beams with orthogonal rx signatures
    from nrpmi.channel_sim import _tx_response
    a1 = _tx_response(GEOM, 0, 0)
    a2 = _tx_response(GEOM, 4, 0)  # same group, orthogonal
    h = np.zeros((1, 1, 2, 8), dtype=complex)
    h[0, 0, 0, :] = a1.conj()
    h[0, 0, 1, :] = a2.conj()
    s = np.linalg.svd(h[0, 0], compute_uv=False)
    assert s[1] > 1e-6


def test_zero_paths_rejected():
    with pytest.raises(DomainError):
        ChannelModel(n_paths=0)


def test_effective_channel():
    rng = np.random.default_rng(0)
    h1 = rng.standard_normal((3, 2, 8)) + 1j * rng.standard_normal((3, 2, 8))
    h2 = rng.standard_normal((3, 2, 8)) + 1j * rng.standard_normal((3, 2, 8))
    f = rng.standard_normal((8, 4)) + 1j * rng.standard_normal((8, 4))
    he = effective_channel(h1, h2, f)
    assert he.shape == (3, 2, 8)
    np.testing.assert_allclose(he[..., :4], h1 @ f)
    f1 = f[:, :1]
    assert effective_channel(h1, h2, f1).shape == (3, 2, 2)
    with pytest.raises(DomainError):
        effective_channel(h1, h2, np.zeros((5, 2)))


def plant_r16(cfg, pmi, sigmas=None):
    """Channel whose matched-filter targets equal the unnormalized
    codebook synthesis of the planted report."""
    rng = np.random.default_rng(123)
    nr = max(cfg.rank, 2)
    u = np.linalg.qr(rng.standard_normal((nr, nr))
                     + 1j * rng.standard_normal((nr, nr)))[0]
    sigmas = sigmas or [1.0 - 0.35 * i for i in range(cfg.rank)]
    beams = decode_combination(pmi.i12, cfg.geom.n1 * cfg.geom.n2, cfg.l)
    eff = compact.spatial_effective_regular(cfg.geom, *pmi.i11, beams)
    h = np.zeros((1, cfg.n3, nr, cfg.n_ports), dtype=complex)
    for layer in range(cfg.rank):
        taps = type2_r16.decode_taps(cfg, pmi, layer)
        freq = compact.frequency_effective(cfg.n3, taps)
        w = compact.compact_r16(eff, type2_r16.layer_coefficients(cfg, pmi, layer),
                                freq)  # (P, N3), unnormalized
        w = w * (sigmas[layer] / np.linalg.norm(w))
        for t in range(cfg.n3):
            h[0, t] += np.outer(u[:, layer], w[:, t].conj())
    return ChannelRealization(h=h)


def disjoint_layer_supports(pmi, rank, l, rng, cls, **named):
    """Restrict each layer's bitmap to a disjoint set of beam positions so
    the planted layers are separable at the receiver (orthogonal beams)."""
    two_l = 2 * l
    positions = rng.permutation(two_l)
    groups = np.array_split(positions, rank)
    bitmap = np.array(pmi.bitmap)
    k2 = np.array(pmi.k2)
    c = np.array(pmi.c)
    i18 = []
    for layer in range(rank):
        allowed = set(int(i) for i in groups[layer])
        for i in range(two_l):
            if i not in allowed:
                bitmap[layer, i] = 0
                k2[layer, i] = 0
                c[layer, i] = 0
        flat = bitmap[layer].reshape(two_l, -1)
        if not flat[:, 0].any():
            i_star = int(sorted(allowed)[0])
            bitmap[layer].reshape(two_l, -1)[i_star, 0] = 1
        # re-pin the strongest coefficient at tap 0 of this layer
        col = np.flatnonzero(bitmap[layer].reshape(two_l, -1)[:, 0])
        i_star = int(col[0])
        k2[layer].reshape(two_l, -1)[i_star, 0] = 7
        c[layer].reshape(two_l, -1)[i_star, 0] = 0
        i18.append((i_star, layer))
    return bitmap, k2, c, i18


@pytest.mark.parametrize("rank", [1, 2])
def test_search_r16_plant_and_recover(rank):
    cfg = type2_r16.R16Config(param_combination=2, r=1, n3=9, rank=rank,
                              geom=GEOM)
    rng = np.random.default_rng(11)
    ok = 0
    trials = 30
    for _ in range(trials):
        pmi = type2_r16.random_valid_pmi(cfg, rng)
        if rank > 1:
            bitmap, k2, c, stars = disjoint_layer_supports(
                pmi, rank, cfg.l, rng, type2_r16.R16Pmi)
            k1 = np.array(pmi.k1)
            i18 = []
            for i_star, layer in stars:
                k1[layer] = np.maximum(k1[layer], 1)
                k1[layer, i_star // cfg.l] = 15
                i18.append(type2_r16.encode_strongest(cfg, bitmap[layer],
                                                      i_star))
            pmi = type2_r16.R16Pmi(pmi.i11, pmi.i12, pmi.i15, pmi.i16,
                                   tuple(i18), bitmap, k1, k2, c)
            try:
                type2_r16.reconstruct_all(cfg, pmi)
            except Exception:
                continue
        ch = plant_r16(cfg, pmi)
        found = search_r16(ch, cfg)
        w0 = type2_r16.reconstruct_all(cfg, pmi)
        w1 = type2_r16.reconstruct_all(cfg, found)
        corr = min(abs(np.vdot(w0[t, :, l], w1[t, :, l])) * rank
                   for t in range(cfg.n3) for l in range(rank))
        ok += corr > 0.99
    assert ok >= 0.9 * trials


def test_search_r16_flat_channel_taps():
    # frequency-flat channel: all energy on tap 0
    cfg = type2_r16.R16Config(param_combination=2, r=1, n3=8, rank=1, geom=GEOM)
    rng = np.random.default_rng(2)
    a = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    h = np.repeat(a[None, None, None, :], 8, axis=1)
    found = search_r16(ChannelRealization(h=h), cfg)
    taps = type2_r16.decode_taps(cfg, found, 0)
    coef = type2_r16.layer_coefficients(cfg, found, 0)
    energy = np.abs(coef) ** 2
    assert energy[:, 0].sum() > 0.99 * energy.sum()
    assert taps[0] == 0


def test_search_r16_discrete_delay():
    # single discrete delay aligned with tap 3: selected pre-remap taps
    # include 3
    cfg = type2_r16.R16Config(param_combination=2, r=1, n3=8, rank=1, geom=GEOM)
    from nrpmi.channel_sim import _tx_response
    a = _tx_response(GEOM, 4, 1)
    h = np.zeros((1, 8, 1, 16), dtype=complex)
    for t in range(8):
        phase = np.exp(2j * np.pi * 3 * t / 8)
        h[0, t, 0, :8] = (phase * a).conj()
    found = search_r16(ChannelRealization(h=h), cfg)
    # remapped reference absorbed tap 3: the planted tap is the new origin;
    # verify through reconstruction correlation with the planted response
    w = type2_r16.reconstruct_all(cfg, found)
    for t in range(8):
        target = np.concatenate([np.exp(2j * np.pi * 3 * t / 8) * a,
                                 np.zeros(8)])
        corr = abs(np.vdot(target / np.linalg.norm(target), w[t, :, 0]))
        assert corr > 0.99


def plant_r17(cfg, pmi, nr=2):
    rng = np.random.default_rng(321)
    u = np.linalg.qr(rng.standard_normal((nr, nr))
                     + 1j * rng.standard_normal((nr, nr)))[0]
    ports = type2_r17.decode_ports(cfg, pmi)
    taps = type2_r17.decode_tap_offset(cfg, pmi)
    eff = compact.spatial_effective_ps(cfg.p_csirs, ports)
    h = np.zeros((1, cfg.n3, nr, cfg.p_csirs), dtype=complex)
    sigmas = [1.0 - 0.35 * i for i in range(cfg.rank)]
    for layer in range(cfg.rank):
        freq = compact.frequency_effective(cfg.n3, taps)
        w = compact.compact_r16(eff, type2_r17.layer_coefficients(cfg, pmi, layer),
                                freq)
        w = w * (sigmas[layer] / np.linalg.norm(w))
        for t in range(cfg.n3):
            h[0, t] += np.outer(u[:, layer], w[:, t].conj())
    return ChannelRealization(h=h)


@pytest.mark.parametrize("combo", [1, 6])
def test_search_r17_plant_and_recover(combo):
    cfg = type2_r17.R17Config(p_csirs=16, param_combination=combo, n3=6,
                              n_threshold=4, rank=1)
    rng = np.random.default_rng(13)
    ok = 0
    trials = 30
    for _ in range(trials):
        pmi = type2_r17.random_valid_pmi(cfg, rng)
        ch = plant_r17(cfg, pmi)
        found = search_r17(ch, cfg)
        w0 = type2_r17.reconstruct_all(cfg, pmi)
        w1 = type2_r17.reconstruct_all(cfg, found)
        corr = min(abs(np.vdot(w0[t, :, 0], w1[t, :, 0]))
                   for t in range(cfg.n3))
        ok += corr > 0.99
    assert ok >= 0.9 * trials


def plant_r18(cfg, pmi, nr=2):
    rng = np.random.default_rng(555)
    u = np.linalg.qr(rng.standard_normal((nr, nr))
                     + 1j * rng.standard_normal((nr, nr)))[0]
    beams = decode_combination(pmi.i12, cfg.geom.n1 * cfg.geom.n2, cfg.l)
    eff = compact.spatial_effective_regular(cfg.geom, *pmi.i11, beams)
    h = np.zeros((cfg.n4, cfg.n3, nr, cfg.n_ports), dtype=complex)
    sigmas = [1.0 - 0.35 * i for i in range(cfg.rank)]
    for layer in range(cfg.rank):
        taps = type2_r18.decode_taps(cfg, pmi, layer)
        shifts = type2_r18.decode_shifts(cfg, pmi, layer)
        freq = compact.frequency_effective(cfg.n3, taps)
        time = compact.temporal_effective(cfg.n4, shifts)
        core = type2_r18.layer_coefficients(cfg, pmi, layer)[:, :, :len(shifts)]
        w = compact.compact_r18_tucker(core, eff, freq, time)  # (P, N3, N4)
        w = w * (sigmas[layer] / np.linalg.norm(w))
        for t in range(cfg.n3):
            for n in range(cfg.n4):
                h[n, t] += np.outer(u[:, layer], w[:, t, n].conj())
    return ChannelRealization(h=h)


@pytest.mark.parametrize("rank", [1, 2])
def test_search_r18_plant_and_recover(rank):
    cfg = type2_r18.R18Config(geom=GEOM, param_combination=2, r=1, n3=9,
                              n4=4, rank=rank)
    rng = np.random.default_rng(17)
    ok = 0
    trials = 25
    for _ in range(trials):
        pmi = type2_r18.random_valid_pmi(cfg, rng)
        if rank > 1:
            bitmap, k2, c, stars = disjoint_layer_supports(
                pmi, rank, cfg.l, rng, type2_r18.R18Pmi)
            k1 = np.array(pmi.k1)
            i18 = []
            for i_star, layer in stars:
                k1[layer] = np.maximum(k1[layer], 1)
                k1[layer, i_star // cfg.l] = 15
                i18.append(type2_r18.encode_strongest(cfg, bitmap[layer],
                                                      i_star, 0))
            pmi = type2_r18.R18Pmi(pmi.i11, pmi.i12, pmi.i15, pmi.i16,
                                   tuple(i18), pmi.i110, bitmap, k1, k2, c)
            try:
                type2_r18.reconstruct_all(cfg, pmi)
            except Exception:
                continue
        ch = plant_r18(cfg, pmi)
        found = search_r18(ch, cfg)
        w0 = type2_r18.reconstruct_all(cfg, pmi)
        w1 = type2_r18.reconstruct_all(cfg, found)
        corr = min(abs(np.vdot(w0[t, n, :, l], w1[t, n, :, l])) * rank
                   for t in range(cfg.n3) for n in range(cfg.n4)
                   for l in range(rank))
        ok += corr > 0.99
    assert ok >= 0.9 * trials


def test_search_r18_static_channel():
    # static over intervals: shift-1 contribution vanishes, precoders constant
    cfg = type2_r18.R18Config(geom=GEOM, param_combination=2, r=1, n3=8,
                              n4=4, rank=1)
    rng = np.random.default_rng(3)
    a = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    h = np.repeat(np.repeat(a[None, None, None, :], 8, axis=1), 4, axis=0)
    found = search_r18(ChannelRealization(h=h), cfg)
    coef = type2_r18.layer_coefficients(cfg, found, 0)
    shift1_energy = float((np.abs(coef[:, :, 1]) ** 2).sum())
    total = float((np.abs(coef) ** 2).sum())
    assert shift1_energy < 1e-9 * total
    ws = type2_r18.reconstruct_all(cfg, found)
    for n in range(1, 4):
        np.testing.assert_allclose(ws[:, n], ws[:, 0], atol=1e-9)


def test_spectral_efficiency_experiment_shape():
    rows = spectral_efficiency_experiment(antenna_configs=((4, 1),),
                                          snr_db=(0, 10), trials=20, seed=1)
    assert len(rows) == 4
    r10 = [r for r in rows if r["snr_db"] == 10]
    t2 = next(r for r in r10 if r["scheme"] == "type2")
    t1 = next(r for r in r10 if r["scheme"] == "type1")
    assert t2["mean_rate"] >= t1["mean_rate"] - 1e-9


def test_search_r16_port_selection_plant():
    cfg = type2_r16.R16Config(param_combination=1, r=1, n3=8, rank=1,
                              variant=type2_r16.PORT_SELECTION,
                              p_csirs=16, d=2)
    rng = np.random.default_rng(23)
    ok = 0
    trials = 20
    for _ in range(trials):
        pmi = type2_r16.random_valid_pmi(cfg, rng)
        ports = [pmi.i11 * cfg.d + i for i in range(cfg.l)]
        eff = compact.spatial_effective_ps(cfg.p_csirs, ports)
        taps = type2_r16.decode_taps(cfg, pmi, 0)
        freq = compact.frequency_effective(cfg.n3, taps)
        w = compact.compact_r16(eff, type2_r16.layer_coefficients(cfg, pmi, 0),
                                freq)
        u = np.array([1.0, 1j]) / np.sqrt(2)
        h = np.zeros((1, cfg.n3, 2, cfg.p_csirs), dtype=complex)
        for t in range(cfg.n3):
            h[0, t] = np.outer(u, w[:, t].conj())
        found = search_r16(ChannelRealization(h=h), cfg)
        w0 = type2_r16.reconstruct_all(cfg, pmi)
        w1 = type2_r16.reconstruct_all(cfg, found)
        ok += all(abs(np.vdot(w0[t, :, 0], w1[t, :, 0])) > 0.99
                  for t in range(cfg.n3))
    assert ok >= 0.9 * trials
