"""Unit tests for epipolar-weighted attention, the latent codec and denoising backends."""

import math

import numpy as np
import pytest

from prosplat.application.services.attention_service import AttentionService
from prosplat.application.services.denoising_backend import (
    BACKENDS,
    DenoisingBackend,
    IdentityBackend,
    get_backend,
    register_backend,
)
from prosplat.application.services.latent_codec import LatentCodec
from prosplat.application.services.resampling import block_mean, pooled_grid, resample_to, upsample
from prosplat.domain.entities import (
    DepthwiseSeparableWeights,
    EpipolarDistanceMap,
    FeatureGrid,
    ProjectionWeights,
)
from prosplat.domain.enums import FusionMode, NormScope
from prosplat.domain.exceptions import InvalidConfig, ShapeMismatch
from prosplat.domain.value_objects import AttentionConfig
from prosplat.infrastructure.data_providers.weights_provider import load_weights, save_weights


def distance_map(distances, target_dims, ref_dims, degenerate=None):
    distances = np.asarray(distances, dtype=np.float64)
    if degenerate is None:
        degenerate = np.zeros(distances.shape[0], dtype=bool)
    return EpipolarDistanceMap(target_dims=target_dims, ref_dims=ref_dims,
                               distances=distances, degenerate_rows=np.asarray(degenerate))


def hand_weights():
    return ProjectionWeights(
        wq=np.array([[0.5, -0.2], [0.1, 0.3]]),
        wk=np.array([[0.4, 0.0], [-0.3, 0.6]]),
        wv=np.array([[1.0, 0.5], [-0.5, 2.0]]),
        dsc_x2=DepthwiseSeparableWeights.identity(2),
        dsc_x4=DepthwiseSeparableWeights.identity(2),
    )


def scalar_chain(tgt, ref, d, weights, softmax=True, sigmoid=True):
    """Brute-force evaluation of the full attention chain with Python scalars."""
    p_count, q_count, dk = tgt.shape[0], ref.shape[0], weights.dk
    q = [[sum(tgt[p][i] * weights.wq[i][k] for i in range(tgt.shape[1])) for k in range(dk)]
         for p in range(p_count)]
    key = [[sum(ref[r][i] * weights.wk[i][k] for i in range(ref.shape[1])) for k in range(dk)]
           for r in range(q_count)]
    val = [[sum(ref[r][i] * weights.wv[i][k] for i in range(ref.shape[1])) for k in range(dk)]
           for r in range(q_count)]
    out = []
    for p in range(p_count):
        scores = [sum(q[p][k] * key[r][k] for k in range(dk)) / math.sqrt(dk)
                  for r in range(q_count)]
        if softmax:
            top = max(scores)
            exps = [math.exp(s - top) for s in scores]
            scores = [e / sum(exps) for e in exps]
        raw = [math.exp(-d[p][r]) for r in range(q_count)]
        lo, hi = min(raw), max(raw)
        mod = [1.0 if hi == lo else (x - lo) / (hi - lo) for x in raw]
        comb = [s * m for s, m in zip(scores, mod)]
        gate = [1.0 / (1.0 + math.exp(-c)) for c in comb] if sigmoid else comb
        out.append([sum(gate[r] * val[r][k] for r in range(q_count)) for k in range(dk)])
    return np.array(out)


# ╔══════════════════════════════════════════════════════════════╗
# ║  Distance modulation                                         ║
# ╚══════════════════════════════════════════════════════════════╝

class TestModulation:

    def test_row_extremes(self, rng):
        d = rng.uniform(0.0, 5.0, (6, 9))
        mod = AttentionService.modulation(d)
        rows = np.arange(6)
        np.testing.assert_allclose(mod[rows, d.argmin(axis=1)], 1.0)
        np.testing.assert_allclose(mod[rows, d.argmax(axis=1)], 0.0, atol=1e-15)
        assert mod.min() >= 0.0 and mod.max() <= 1.0

    def test_zero_distances_give_ones(self):
        np.testing.assert_array_equal(AttentionService.modulation(np.zeros((3, 4))), np.ones((3, 4)))
        np.testing.assert_array_equal(
            AttentionService.modulation(np.zeros((3, 4)), scope=NormScope.GLOBAL), np.ones((3, 4))
        )

    def test_global_scope(self):
        d = np.array([[0.0, 1.0], [2.0, 3.0]])
        mod = AttentionService.modulation(d, scope=NormScope.GLOBAL)
        e = np.exp(-d)
        np.testing.assert_allclose(mod, (e - e.min()) / (e.max() - e.min()))
        assert mod[0, 0] == 1.0 and mod[1, 1] == 0.0

    def test_degenerate_rows_get_zero(self):
        d = np.array([[0.0, 1.0], [5.0, 5.0], [2.0, 0.5]])
        mod = AttentionService.modulation(d, np.array([False, True, False]))
        np.testing.assert_array_equal(mod[1], [0.0, 0.0])
        np.testing.assert_allclose(mod[0], [1.0, 0.0])


# ╔══════════════════════════════════════════════════════════════╗
# ║  Attention                                                   ║
# ╚══════════════════════════════════════════════════════════════╝

class TestEpipolarAttention:

    def test_tiny_instance_matches_scalar_chain(self):
        tgt = FeatureGrid(np.array([[[0.2, -0.4], [1.0, 0.3]], [[-0.6, 0.8], [0.05, 0.0]]]))
        ref = FeatureGrid(np.array([[[0.7, 0.1], [-0.2, 0.9]], [[0.4, -0.5], [1.2, 0.6]]]))
        d = np.array([[0.0, 1.5, 2.0, 0.3],
                      [0.8, 0.1, 3.0, 1.1],
                      [2.2, 2.2, 0.4, 0.0],
                      [1.0, 0.6, 0.9, 4.0]])
        dmap = distance_map(d, (2, 2), (2, 2))
        weights = hand_weights()
        out = AttentionService().dwea_attention(tgt, ref, dmap, weights)
        expected = scalar_chain(tgt.flat(), ref.flat(), d, weights)
        np.testing.assert_allclose(out.flat(), expected, atol=1e-10)

    def test_without_softmax_and_sigmoid(self):
        rng = np.random.default_rng(5)
        tgt = FeatureGrid(rng.normal(size=(2, 2, 2)))
        ref = FeatureGrid(rng.normal(size=(2, 2, 2)))
        d = rng.uniform(0, 3, (4, 4))
        weights = hand_weights()
        svc = AttentionService(AttentionConfig(dk=2, apply_softmax=False, apply_sigmoid=False))
        out = svc.dwea_attention(tgt, ref, distance_map(d, (2, 2), (2, 2)), weights)
        expected = scalar_chain(tgt.flat(), ref.flat(), d, weights, softmax=False, sigmoid=False)
        np.testing.assert_allclose(out.flat(), expected, atol=1e-10)

    def test_plain_fusion_ignores_distances(self):
        rng = np.random.default_rng(8)
        tgt = FeatureGrid(rng.normal(size=(2, 2, 2)))
        ref = FeatureGrid(rng.normal(size=(2, 2, 2)))
        d = rng.uniform(0, 3, (4, 4))
        weights = hand_weights()
        svc = AttentionService(AttentionConfig(dk=2, fusion=FusionMode.PLAIN))
        dmap = distance_map(d, (2, 2), (2, 2), degenerate=[True, False, False, False])
        maps = svc.attention_maps(tgt, ref, dmap, weights)
        np.testing.assert_array_equal(maps.modulation, 1.0)
        np.testing.assert_array_equal(maps.combined, maps.scores)
        out = svc.dwea_attention(tgt, ref, dmap, weights, maps)
        expected = scalar_chain(tgt.flat(), ref.flat(), np.zeros((4, 4)), weights)
        np.testing.assert_allclose(out.flat(), expected, atol=1e-10)

    def test_intermediate_maps(self, rng):
        tgt = FeatureGrid(rng.normal(size=(3, 2, 4)))
        ref = FeatureGrid(rng.normal(size=(2, 3, 4)))
        d = rng.uniform(0, 2, (6, 6))
        maps = AttentionService().attention_maps(tgt, ref, distance_map(d, (3, 2), (2, 3)),
                                                 ProjectionWeights.random(4, seed=3))
        np.testing.assert_allclose(maps.scores.sum(axis=1), 1.0)
        np.testing.assert_allclose(maps.combined, maps.scores * maps.modulation)
        assert np.all((maps.gate > 0) & (maps.gate < 1))

    def test_reference_permutation_invariance(self, rng):
        tgt = FeatureGrid(rng.normal(size=(2, 3, 4)))
        ref_flat = rng.normal(size=(5, 4))
        d = rng.uniform(0, 3, (6, 5))
        weights = ProjectionWeights.random(4, seed=11)
        svc = AttentionService()
        base = svc.dwea_attention(tgt, FeatureGrid(ref_flat[None]), distance_map(d, (2, 3), (1, 5)),
                                  weights)
        perm = rng.permutation(5)
        permuted = svc.dwea_attention(tgt, FeatureGrid(ref_flat[perm][None]),
                                      distance_map(d[:, perm], (2, 3), (1, 5)), weights)
        np.testing.assert_allclose(permuted.data, base.data, atol=1e-12)

    def test_worker_count_does_not_change_output(self, rng):
        tgt = FeatureGrid(rng.normal(size=(5, 4, 3)))
        ref = FeatureGrid(rng.normal(size=(3, 3, 3)))
        dmap = distance_map(rng.uniform(0, 3, (20, 9)), (5, 4), (3, 3))
        weights = ProjectionWeights.random(3, seed=2)
        one = AttentionService(AttentionConfig(dk=3), workers=1).dwea_attention(tgt, ref, dmap,
                                                                               weights)
        many = AttentionService(AttentionConfig(dk=3), workers=4).dwea_attention(tgt, ref, dmap,
                                                                                weights)
        np.testing.assert_allclose(one.data, many.data, rtol=1e-14, atol=1e-15)

    def test_fuse_adds_residual(self, rng):
        tgt = FeatureGrid(rng.normal(size=(2, 2, 2)))
        ref = FeatureGrid(rng.normal(size=(2, 2, 2)))
        dmap = distance_map(rng.uniform(0, 3, (4, 4)), (2, 2), (2, 2))
        svc = AttentionService(AttentionConfig(dk=2))
        fused = svc.fuse(tgt, ref, dmap, hand_weights())
        out = svc.dwea_attention(tgt, ref, dmap, hand_weights())
        np.testing.assert_allclose(fused.data, tgt.data + out.data)

    def test_fuse_needs_matching_width(self, rng):
        tgt = FeatureGrid(rng.normal(size=(2, 2, 4)))
        ref = FeatureGrid(rng.normal(size=(2, 2, 4)))
        dmap = distance_map(rng.uniform(0, 3, (4, 4)), (2, 2), (2, 2))
        with pytest.raises(ShapeMismatch):
            AttentionService().fuse(tgt, ref, dmap, ProjectionWeights.random(4, dk=2))

    def test_grid_mismatch(self, rng):
        tgt = FeatureGrid(rng.normal(size=(2, 2, 2)))
        ref = FeatureGrid(rng.normal(size=(2, 3, 2)))
        dmap = distance_map(rng.uniform(0, 3, (4, 4)), (2, 2), (2, 2))
        with pytest.raises(ShapeMismatch):
            AttentionService().dwea_attention(tgt, ref, dmap, hand_weights())

    def test_invalid_config(self):
        with pytest.raises(InvalidConfig):
            AttentionConfig(latent_scale=3)
        with pytest.raises(InvalidConfig):
            AttentionConfig(dk=0)


# ╔══════════════════════════════════════════════════════════════╗
# ║  Injection path                                              ║
# ╚══════════════════════════════════════════════════════════════╝

class TestInjection:

    def test_depthwise_separable_matches_dense_loops(self, rng):
        x = rng.normal(size=(4, 4, 3))
        dsc = DepthwiseSeparableWeights(rng.normal(size=(3, 3, 3)), rng.normal(size=(3, 3)))
        out = AttentionService.depthwise_separable(x, dsc)

        padded = np.pad(x, ((1, 1), (1, 1), (0, 0)))
        expected = np.zeros_like(x)
        for i in range(4):
            for j in range(4):
                depthwise = [
                    sum(padded[i + a, j + b, ch] * dsc.depthwise[ch, a, b]
                        for a in range(3) for b in range(3))
                    for ch in range(3)
                ]
                for o in range(3):
                    expected[i, j, o] = sum(depthwise[ch] * dsc.pointwise[ch, o] for ch in range(3))
        np.testing.assert_allclose(out, expected, atol=1e-10)

    def test_identity_stages_on_constant_grid(self):
        fused = FeatureGrid(np.full((3, 2, 2), 0.7))
        weights = ProjectionWeights(
            wq=np.eye(2), wk=np.eye(2), wv=np.eye(2),
            dsc_x2=DepthwiseSeparableWeights.identity(2),
            dsc_x4=DepthwiseSeparableWeights.identity(2),
        )
        x2, x4 = AttentionService().fuse_and_inject(fused, weights)
        assert x2.data.shape == (6, 4, 2)
        assert x4.data.shape == (12, 8, 2)
        np.testing.assert_allclose(x2.data, 0.7, atol=1e-12)
        np.testing.assert_allclose(x4.data, 0.7, atol=1e-12)

    def test_general_kernel_keeps_constant_interior(self, rng):
        fused = FeatureGrid(np.full((3, 3, 2), 1.5))
        weights = ProjectionWeights.random(2, seed=4)
        x2, _ = AttentionService().fuse_and_inject(fused, weights)
        dsc = weights.dsc_x2
        expected = (1.5 * dsc.depthwise.sum(axis=(1, 2))) @ dsc.pointwise
        np.testing.assert_allclose(x2.data[1:-1, 1:-1], np.broadcast_to(expected, (4, 4, 2)),
                                   atol=1e-12)


class TestResampling:

    def test_block_mean(self):
        data = np.arange(16, dtype=float).reshape(4, 4)
        np.testing.assert_allclose(block_mean(data, 2), [[2.5, 4.5], [10.5, 12.5]])

    def test_upsample_preserves_constant_and_shape(self):
        out = upsample(np.full((2, 3, 4), 0.25), 4)
        assert out.shape == (8, 12, 4)
        np.testing.assert_allclose(out, 0.25)

    def test_upsample_midpoints(self):
        out = upsample(np.array([[0.0, 1.0]]), 2)
        # Half-pixel centers: x2 samples at -0.25, 0.25, 0.75, 1.25 (edge clamped).
        np.testing.assert_allclose(out[0], [0.0, 0.25, 0.75, 1.0])

    def test_resample_to_prefers_block_mean(self):
        data = np.arange(16, dtype=float).reshape(4, 4)
        np.testing.assert_array_equal(resample_to(data, 2, 2), block_mean(data, 2))
        assert resample_to(data, 3, 5).shape == (3, 5)

    def test_pooled_grid_requires_exact_tiling(self):
        assert pooled_grid(32, 24, 8) == (3, 4)
        for width, height, factor in [(33, 24, 8), (32, 20, 8), (4, 4, 8), (32, 24, 0)]:
            with pytest.raises(ShapeMismatch):
                pooled_grid(width, height, factor)


# ╔══════════════════════════════════════════════════════════════╗
# ║  Latent codec and backends                                   ║
# ╚══════════════════════════════════════════════════════════════╝

class TestLatentCodec:

    def test_encode_shape(self, rng):
        latent = LatentCodec(channels=8, latent_scale=8).encode(rng.uniform(size=(48, 64, 3)))
        assert latent.data.shape == (6, 8, 8)

    def test_constant_image_round_trip(self):
        codec = LatentCodec(channels=6, latent_scale=4, seed=9)
        image = np.empty((16, 24, 3))
        image[:] = [0.2, 0.6, 0.9]
        np.testing.assert_allclose(codec.decode(codec.encode(image), 16, 24), image, atol=1e-12)

    def test_seeded(self, rng):
        image = rng.uniform(size=(16, 16, 3))
        a = LatentCodec(seed=1, latent_scale=4).encode(image)
        b = LatentCodec(seed=1, latent_scale=4).encode(image)
        np.testing.assert_array_equal(a.data, b.data)

    def test_invalid_settings(self):
        with pytest.raises(InvalidConfig):
            LatentCodec(latent_scale=3)
        with pytest.raises(InvalidConfig):
            LatentCodec(channels=0)


class TestDenoisingBackend:

    def test_identity_without_injections(self, rng):
        latent = FeatureGrid(rng.normal(size=(3, 4, 2)))
        out = get_backend("identity").enhance(latent, [], 999)
        np.testing.assert_array_equal(out.data, latent.data)

    def test_identity_adds_resampled_injections(self, rng):
        latent = FeatureGrid(np.zeros((3, 4, 2)))
        x2 = FeatureGrid(np.ones((6, 8, 2)))
        x4 = FeatureGrid(np.full((12, 16, 2), 2.0))
        out = IdentityBackend().enhance(latent, [x2, x4], 999)
        np.testing.assert_allclose(out.data, 3.0)

    def test_channel_mismatch(self, rng):
        with pytest.raises(ShapeMismatch):
            IdentityBackend().enhance(FeatureGrid(np.zeros((2, 2, 2))),
                                      [FeatureGrid(np.zeros((4, 4, 3)))], 999)

    def test_unknown_backend(self):
        with pytest.raises(InvalidConfig) as exc:
            get_backend("stable-diffusion")
        assert "identity" in exc.value.details["available"]

    def test_register_backend(self):
        @register_backend
        class NegateBackend(DenoisingBackend):
            name = "negate-test"

            def enhance(self, latent, injections, timestep):
                return FeatureGrid(-latent.data)

        try:
            out = get_backend("negate-test").enhance(FeatureGrid(np.ones((1, 1, 1))), [], 0)
            assert out.data[0, 0, 0] == -1.0
        finally:
            BACKENDS.pop("negate-test", None)


class TestWeightBundle:

    def test_save_and_load(self, tmp_path):
        weights = ProjectionWeights.random(4, dk=4, seed=7)
        header, blob = save_weights(tmp_path / "weights", weights)
        assert header.suffix == ".json" and blob.suffix == ".bin"
        assert blob.stat().st_size == 4 * sum(t.size for t in weights.tensors().values())
        loaded = load_weights(tmp_path / "weights")
        for name, tensor in weights.tensors().items():
            np.testing.assert_array_equal(loaded.tensors()[name],
                                          tensor.astype("<f4").astype(np.float64))

    def test_truncated_bundle(self, tmp_path):
        save_weights(tmp_path / "w", ProjectionWeights.random(2, seed=1))
        blob = tmp_path / "w.bin"
        blob.write_bytes(blob.read_bytes()[:-8])
        with pytest.raises(InvalidConfig):
            load_weights(tmp_path / "w")

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(ShapeMismatch):
            ProjectionWeights(
                wq=np.eye(2), wk=np.eye(3), wv=np.eye(2),
                dsc_x2=DepthwiseSeparableWeights.identity(2),
                dsc_x4=DepthwiseSeparableWeights.identity(2),
            )
