"""Energy encoding and prompt derivation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from labelforge import (
    BinaryMask,
    ConfigError,
    EnergyConfig,
    Prompt,
    PromptSet,
    derive_prompts,
    encode_energy,
    gaussian_at,
)
from oracles import flood_components, gaussian_value, nearest_pixel


class TestEnergyConfig:
    def test_defaults(self):
        cfg = EnergyConfig()
        assert cfg.sigma == 4.0
        assert cfg.truncation_radius == 12  # ceil(3 * 4)
        assert cfg.combine == "sum"

    def test_truncation_follows_sigma(self):
        assert EnergyConfig(sigma=2.5).truncation_radius == 8  # ceil(7.5)

    def test_validation(self):
        with pytest.raises(ConfigError):
            EnergyConfig(sigma=0.0)
        with pytest.raises(ConfigError):
            EnergyConfig(truncation_radius=-1)
        with pytest.raises(ConfigError):
            EnergyConfig(combine="mean")


class TestGaussianAt:
    def test_center_is_one(self):
        assert gaussian_at(0, 0, sigma=4.0) == 1.0

    def test_one_sigma_offset(self):
        assert gaussian_at(4, 0, sigma=4.0) == pytest.approx(math.exp(-0.5), abs=1e-9)

    def test_beyond_truncation_is_zero(self):
        assert gaussian_at(13, 0, sigma=4.0, truncation_radius=12) == 0.0

    def test_at_exact_truncation_radius_still_nonzero(self):
        assert gaussian_at(12, 0, sigma=4.0, truncation_radius=12) > 0.0

    def test_matches_scalar_oracle(self):
        for dx, dy in [(0, 0), (1, 2), (-3, 5), (7, -7), (12, 0), (9, 9)]:
            assert gaussian_at(dx, dy, 4.0, 12) == pytest.approx(
                gaussian_value(dx, dy, 4.0, 12), abs=1e-15
            )

    def test_rejects_bad_sigma(self):
        with pytest.raises(ConfigError):
            gaussian_at(0, 0, sigma=-1.0)


class TestEncodeEnergy:
    def test_prompt_pixel_is_one(self):
        ps = PromptSet(prompts=(Prompt(20, 20),))
        e = encode_energy(ps, 41, 41)
        assert e.data[20, 20] == pytest.approx(1.0, abs=1e-12)

    def test_rotational_symmetry_at_center(self):
        ps = PromptSet(prompts=(Prompt(20, 20),))
        e = encode_energy(ps, 41, 41)
        for d in (1, 3, 7, 12):
            vals = [e.data[20, 20 + d], e.data[20, 20 - d], e.data[20 + d, 20], e.data[20 - d, 20]]
            assert max(vals) - min(vals) <= 1e-12

    def test_disjoint_blobs_sum_to_independent_maps(self):
        a, b = Prompt(10, 16), Prompt(50, 16)  # 40 px apart, truncation 12
        both = encode_energy(PromptSet(prompts=(a, b)), 64, 32)
        only_a = encode_energy(PromptSet(prompts=(a,)), 64, 32)
        only_b = encode_energy(PromptSet(prompts=(b,)), 64, 32)
        assert np.array_equal(both.data, only_a.data + only_b.data)

    def test_close_prompts_sum_at_midpoint(self):
        ps = PromptSet(prompts=(Prompt(20, 16), Prompt(24, 16)))
        e = encode_energy(ps, 48, 32)
        expected = 2.0 * math.exp(-(2.0 ** 2) / (2.0 * 16.0))
        assert e.data[16, 22] == pytest.approx(expected, abs=1e-12)

    def test_max_combine_keeps_unit_range(self):
        ps = PromptSet(prompts=(Prompt(20, 16), Prompt(21, 16)))
        e = encode_energy(ps, 48, 32, EnergyConfig(combine="max"))
        assert e.data.max() <= 1.0
        assert e.data[16, 20] == pytest.approx(1.0, abs=1e-12)

    def test_blob_clipped_at_borders(self):
        e = encode_energy(PromptSet(prompts=(Prompt(0, 0),)), 32, 32)
        # no wraparound: the far corner stays empty
        assert e.data[31, 31] == 0.0
        assert e.data[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_values_outside_truncation_are_exactly_zero(self):
        e = encode_energy(PromptSet(prompts=(Prompt(16, 16),)), 33, 33)
        assert e.data[16, 29] == 0.0  # distance 13 > 12
        assert e.data[16, 28] > 0.0  # distance 12, inside

    def test_translation_equivariance_is_exact(self):
        base = encode_energy(PromptSet(prompts=(Prompt(16, 16),)), 64, 64)
        moved = encode_energy(PromptSet(prompts=(Prompt(21, 19),)), 64, 64)
        # both blobs fully interior: shifted windows must agree bit for bit
        assert np.array_equal(
            base.data[16 - 12 : 16 + 13, 16 - 12 : 16 + 13],
            moved.data[19 - 12 : 19 + 13, 21 - 12 : 21 + 13],
        )

    def test_out_of_bounds_prompt_rejected(self):
        with pytest.raises(Exception):
            encode_energy(PromptSet(prompts=(Prompt(64, 0),)), 64, 64)

    def test_energy_map_carries_prompts(self):
        ps = PromptSet(image_id="img7", prompts=(Prompt(5, 5),))
        assert encode_energy(ps, 16, 16).prompts is ps


class TestDerivePrompts:
    def test_square_component_centroid(self):
        mask = np.zeros((9, 9), dtype=np.uint8)
        mask[3:6, 3:6] = 1
        ps = derive_prompts(BinaryMask(mask), mode="centroid")
        assert [(p.x, p.y) for p in ps] == [(4, 4)]
        assert ps.prompts[0].kind == "centroid"

    def test_empty_mask_gives_empty_set(self):
        ps = derive_prompts(BinaryMask(np.zeros((4, 4), dtype=np.uint8)), mode="centroid")
        assert len(ps) == 0

    def test_l_shape_snaps_to_nearest_component_pixel(self):
        mask = np.zeros((8, 8), dtype=np.uint8)
        mask[0, 0:5] = 1  # horizontal arm
        mask[0:5, 0] = 1  # vertical arm
        ps = derive_prompts(BinaryMask(mask), mode="centroid")
        pixels = sorted(flood_components(mask)[0])
        cx = sum(p[0] for p in pixels) / len(pixels)
        cy = sum(p[1] for p in pixels) / len(pixels)
        rounded = (math.floor(cx + 0.5), math.floor(cy + 0.5))
        assert rounded not in set(pixels)  # the scene exercises the snap path
        assert (ps.prompts[0].x, ps.prompts[0].y) == nearest_pixel(pixels, cx, cy)

    def test_one_prompt_per_component_in_label_order(self):
        mask = np.zeros((16, 16), dtype=np.uint8)
        mask[2, 2] = 1
        mask[2, 10] = 1
        mask[12, 5] = 1
        ps = derive_prompts(BinaryMask(mask), mode="centroid")
        assert [(p.x, p.y) for p in ps] == [(2, 2), (10, 2), (5, 12)]

    def test_coarse_is_reproducible(self):
        rng = np.random.default_rng(5)
        mask = BinaryMask((rng.random((32, 32)) < 0.1).astype(np.uint8))
        a = derive_prompts(mask, mode="coarse", rng_seed=7, image_id="x")
        b = derive_prompts(mask, mode="coarse", rng_seed=7, image_id="x")
        assert [(p.x, p.y) for p in a] == [(p.x, p.y) for p in b]

    def test_coarse_seed_changes_selection(self):
        mask = np.zeros((12, 40), dtype=np.uint8)
        mask[2:10, 2:38] = 1  # one big component, 288 candidate pixels
        picks = {
            (derive_prompts(BinaryMask(mask), "coarse", rng_seed=s, image_id="y").prompts[0].x,
             derive_prompts(BinaryMask(mask), "coarse", rng_seed=s, image_id="y").prompts[0].y)
            for s in range(8)
        }
        assert len(picks) > 1

    def test_invalid_mode_rejected(self):
        with pytest.raises(ConfigError):
            derive_prompts(BinaryMask(np.zeros((2, 2), dtype=np.uint8)), mode="random")

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1), st.integers(0, 1000))
    def test_coarse_prompts_always_land_on_foreground(self, mask_seed, rng_seed):
        rng = np.random.default_rng(mask_seed)
        arr = (rng.random((24, 24)) < 0.12).astype(np.uint8)
        mask = BinaryMask(arr)
        ps = derive_prompts(mask, mode="coarse", rng_seed=rng_seed, image_id="p")
        assert len(ps) == len(flood_components(arr))
        for p in ps:
            assert arr[p.y, p.x] == 1
            assert p.kind == "coarse"
