"""Testes da transformada de Hough suave e da extração de retas"""

import math

import numpy as np
import pytest
import torch

from src.contrails.exceptions import ShapeMismatchError
from src.contrails.hough import (
    HoughAccumulator,
    Line,
    LineSet,
    accumulate_numpy,
    build_grid,
    extract_lines,
    render_lines,
    soft_accumulate,
    squash,
)
from tests.synthetic import brute_force_votes, line_mask


class TestGrid:
    def test_bin_counts_for_training_frames(self):
        grid = build_grid(320, 320)
        assert grid.n_rho == 453
        assert grid.shape == (453, 180)
        assert grid.rho_max == pytest.approx(0.5 * math.hypot(320, 320))

    def test_rho_grid_is_symmetric(self):
        grid = build_grid(20, 30, n_theta=12, rho_resolution=2.0)
        np.testing.assert_allclose(grid.rho_values, -grid.rho_values[::-1])
        assert grid.rho_values[grid.n_half] == 0.0
        assert grid.theta_values[0] == 0.0 and grid.theta_values[-1] < np.pi

    @pytest.mark.parametrize("kwargs", [
        {"height": 0, "width": 10},
        {"height": 10, "width": 10, "n_theta": 1},
        {"height": 10, "width": 10, "rho_resolution": 0.0},
    ])
    def test_invalid_arguments(self, kwargs):
        with pytest.raises(ValueError):
            build_grid(**kwargs)


class TestSoftAccumulate:
    def test_empty_mask(self):
        grid = build_grid(16, 16, n_theta=30)
        np.testing.assert_array_equal(accumulate_numpy(np.zeros((16, 16)), grid), 0.0)

    def test_centre_pixel_votes_rho_zero_everywhere(self):
        grid = build_grid(33, 33, n_theta=45)
        mask = np.zeros((33, 33))
        mask[16, 16] = 1.0

        acc = soft_accumulate(mask, grid)
        raw = acc.raw.numpy()

        np.testing.assert_allclose(raw[grid.n_half], 1.0, atol=1e-12)
        assert raw.sum() == pytest.approx(grid.n_theta)

    def test_matches_pixel_by_pixel_votes(self):
        rng = np.random.default_rng(0)
        mask = rng.random((15, 13))
        grid = build_grid(15, 13, n_theta=24)

        acc = soft_accumulate(mask, grid)
        votes, lengths = brute_force_votes(mask, n_theta=24)

        np.testing.assert_allclose(acc.raw.numpy(), votes, atol=1e-9)
        np.testing.assert_allclose(acc.length.numpy(), lengths, atol=1e-9)

    def test_matches_pixel_by_pixel_votes_on_many_masks(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            height, width = rng.integers(1, 17, size=2)
            mask = rng.random((height, width)) * (rng.random((height, width)) > 0.5)
            grid = build_grid(int(height), int(width), n_theta=12)

            votes, _ = brute_force_votes(mask, n_theta=12)
            np.testing.assert_allclose(soft_accumulate(mask, grid).raw.numpy(), votes, atol=1e-6)

    def test_full_row_peaks_at_one(self):
        grid = build_grid(33, 33)
        acc = accumulate_numpy(line_mask(33, 33, rows=[20]), grid)

        peak = np.unravel_index(np.argmax(acc), acc.shape)
        assert peak == (grid.n_half + 4, 90)
        assert acc[peak] == pytest.approx(1.0, abs=1e-9)
        assert acc.max() <= 1.0 + 1e-9

    def test_linear_in_the_mask(self):
        rng = np.random.default_rng(1)
        a, b = rng.random((12, 12)), rng.random((12, 12))
        grid = build_grid(12, 12, n_theta=20)

        combined = accumulate_numpy(0.3 * a + 1.7 * b, grid)
        separate = 0.3 * accumulate_numpy(a, grid) + 1.7 * accumulate_numpy(b, grid)
        np.testing.assert_allclose(combined, separate, atol=1e-10)

    def test_quarter_turn_shifts_theta(self):
        mask = np.random.default_rng(2).random((17, 17))
        grid = build_grid(17, 17, n_theta=36)

        acc = accumulate_numpy(mask, grid)
        turned = accumulate_numpy(np.rot90(mask, k=-1), grid)

        half = grid.n_theta // 2
        np.testing.assert_allclose(turned[:, half:], acc[:, :half], atol=1e-9)
        np.testing.assert_allclose(turned[:, :half], acc[::-1, half:], atol=1e-9)

    def test_batched_input_matches_single(self):
        rng = np.random.default_rng(3)
        masks = torch.from_numpy(rng.random((3, 1, 10, 10)))
        grid = build_grid(10, 10, n_theta=16)

        batched = soft_accumulate(masks, grid).values
        assert batched.shape == (3, grid.n_rho, 16)
        for k in range(3):
            torch.testing.assert_close(batched[k], soft_accumulate(masks[k, 0], grid).values)

    def test_gradient(self):
        grid = build_grid(6, 6, n_theta=8)
        mask = torch.rand(6, 6, dtype=torch.float64, requires_grad=True)
        assert torch.autograd.gradcheck(lambda m: soft_accumulate(m, grid).values, (mask,), eps=1e-4, atol=1e-6)

    def test_gradient_on_training_sized_masks(self):
        grid = build_grid(16, 16, n_theta=6)
        generator = torch.Generator().manual_seed(0)
        for _ in range(5):
            mask = torch.rand(16, 16, dtype=torch.float64, generator=generator).requires_grad_(True)
            assert torch.autograd.gradcheck(lambda m: soft_accumulate(m, grid).values, (mask,), eps=1e-4, atol=1e-6)

    def test_wrong_grid(self):
        with pytest.raises(ShapeMismatchError):
            soft_accumulate(np.zeros((8, 8)), build_grid(8, 9))


class TestSquash:
    def test_values(self):
        grid = build_grid(4, 4, n_theta=2)
        acc = HoughAccumulator(values=torch.tensor([0.0, 0.25, 1.0], dtype=torch.float64), grid=grid)

        out = squash(acc, tau=0.25, beta=20.0).values

        assert out[1].item() == pytest.approx(0.5)
        assert out[0].item() == pytest.approx(1 / (1 + math.exp(5.0)))
        assert out[2].item() == pytest.approx(1 / (1 + math.exp(-15.0)))

    def test_monotone(self):
        grid = build_grid(4, 4, n_theta=2)
        values = torch.linspace(0, 1, 50, dtype=torch.float64)
        out = squash(HoughAccumulator(values=values, grid=grid)).values
        assert torch.all(out[1:] > out[:-1])


class TestExtractLines:
    def test_empty_accumulator(self):
        grid = build_grid(33, 33)
        assert len(extract_lines(soft_accumulate(np.zeros((33, 33)), grid))) == 0

    @pytest.mark.parametrize("mask, theta", [
        (np.eye(33), 3 * np.pi / 4),
        (np.fliplr(np.eye(33)), np.pi / 4),
    ])
    def test_default_arguments_find_one_corner_to_corner_line(self, mask, theta):
        lines = extract_lines(soft_accumulate(mask, build_grid(33, 33)))

        assert len(lines) == 1
        assert lines.lines[0].rho == pytest.approx(0.0, abs=1e-9)
        assert lines.lines[0].theta == pytest.approx(theta)

    def test_single_row(self):
        grid = build_grid(33, 33)
        lines = extract_lines(soft_accumulate(line_mask(33, 33, rows=[20]), grid), min_line_length=8)

        assert len(lines) == 1
        line = lines.lines[0]
        assert line.rho == pytest.approx(4.0)
        assert line.theta == pytest.approx(np.pi / 2)
        assert line.support == pytest.approx(1.0, abs=1e-9)

    def test_two_parallel_rows(self):
        grid = build_grid(33, 33)
        lines = extract_lines(soft_accumulate(line_mask(33, 33, rows=[13, 19]), grid), min_line_length=8)

        assert len(lines) == 2
        assert sorted(line.rho for line in lines) == pytest.approx([-3.0, 3.0])
        assert all(line.theta == pytest.approx(np.pi / 2) for line in lines)

    def test_short_corner_lines_are_filtered(self):
        grid = build_grid(33, 33)
        mask = np.zeros((33, 33))
        mask[0, 0] = 1.0
        acc = soft_accumulate(mask, grid)

        assert len(extract_lines(acc, min_line_length=0.0)) >= 1
        assert len(extract_lines(acc, min_line_length=8.0)) == 0

    def test_sorted_by_support(self):
        grid = build_grid(33, 33)
        mask = line_mask(33, 33, rows=[8], cols=[25]).astype(np.float64)
        mask[8, :] *= 0.7
        lines = extract_lines(soft_accumulate(mask, grid), threshold=0.5, min_line_length=8)

        supports = [line.support for line in lines]
        assert supports == sorted(supports, reverse=True)
        assert len(lines) == 2

    def test_rejects_batches(self):
        grid = build_grid(8, 8, n_theta=4)
        with pytest.raises(ValueError):
            extract_lines(soft_accumulate(torch.zeros(2, 8, 8), grid))

    def test_to_dict(self):
        grid = build_grid(33, 33)
        lines = extract_lines(soft_accumulate(line_mask(33, 33, cols=[16]), grid), min_line_length=8)
        assert lines.to_dict() == [{"rho": 0.0, "theta": 0.0, "support": pytest.approx(1.0)}]


class TestRenderLines:
    def test_horizontal_and_vertical(self):
        lines = LineSet([
            Line(rho=0.0, theta=np.pi / 2, support=1.0, rho_index=0, theta_index=0),
            Line(rho=-5.0, theta=0.0, support=1.0, rho_index=0, theta_index=0),
        ])
        expected = line_mask(33, 33, rows=[16], cols=[11])
        np.testing.assert_array_equal(render_lines(lines, 33, 33), expected)

    def test_diagonal_is_one_pixel_per_column(self):
        lines = LineSet([Line(rho=0.0, theta=3 * np.pi / 4, support=1.0, rho_index=0, theta_index=0)])
        canvas = render_lines(lines, 21, 21)
        np.testing.assert_array_equal(canvas, np.eye(21, dtype=np.uint8))

    def test_line_outside_frame(self):
        lines = LineSet([Line(rho=100.0, theta=np.pi / 2, support=1.0, rho_index=0, theta_index=0)])
        assert render_lines(lines, 20, 20).sum() == 0

    def test_extracted_lines_redraw_the_mask(self):
        grid = build_grid(33, 33)
        mask = line_mask(33, 33, rows=[6, 26], cols=[12])

        lines = extract_lines(soft_accumulate(mask, grid), min_line_length=8)

        np.testing.assert_array_equal(render_lines(lines, 33, 33), mask)
