"""Testes de treino, avaliação, inferência e diagnósticos"""

import json
import math
import os
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import torch
from PIL import Image

from src.contrails.config import HoughSettings, RunConfig, Settings, SRLossConfig
from src.contrails.exceptions import (
    ConfigError,
    DivergenceError,
    EmptyDatasetError,
    MetricsLogError,
    ShapeMismatchError,
)
from src.contrails.ingest import load_split, read_manifest
from src.contrails.model import build, load_checkpoint, save_checkpoint
from src.contrails.pipeline import (
    MetricRecord,
    Trainer,
    append_records,
    compare_losses,
    diagnose_hough,
    evaluate,
    evaluate_scenes,
    overlay_mask,
    plot_metrics,
    predict,
    predict_array,
    read_metrics,
    train,
    window_starts,
)
from src.contrails.pipeline.metrics_log import truncate_after
from tests.synthetic import line_mask


class ConstantLogits(torch.nn.Module):
    """Logit fixo em todos os pixels"""

    def __init__(self, value: float):
        super().__init__()
        self.value = value

    def forward(self, x):
        return torch.full_like(x, self.value)


class PixelwiseLogits(torch.nn.Module):
    """Logit monotônico no valor do pixel, sem contexto espacial"""

    def forward(self, x):
        return 10.0 * (x - 0.5)


def state_dicts_close(a, b):
    for name, value in a.state_dict().items():
        torch.testing.assert_close(value, b.state_dict()[name], rtol=1e-5, atol=1e-6)


class TestTraining:
    def test_history_metrics_and_checkpoints(self, scene_manifest, run_settings):
        settings = run_settings(scene_manifest())
        state = train(settings)

        assert state.step == 4
        assert [entry["step"] for entry in state.history] == [2, 4]

        out = Path(settings.run.output_dir)
        metrics = read_metrics(out / "metrics.jsonl")
        assert len(metrics) == 4
        assert set(metrics["split"]) == {"train", "val"}
        assert metrics["iou"].between(0.0, 1.0).all()

        for step in (2, 4):
            assert (out / "checkpoints" / f"step_{step:06d}.pt").exists()
            assert (out / "checkpoints" / f"step_{step:06d}.json").exists()

    def test_same_seed_same_run(self, scene_manifest, run_settings):
        manifest = scene_manifest()
        first = train(run_settings(manifest, output="a"))
        second = train(run_settings(manifest, output="b"))

        pd.testing.assert_frame_equal(pd.DataFrame(first.history), pd.DataFrame(second.history))
        state_dicts_close(first.model, second.model)

    def test_resume_matches_uninterrupted_run(self, scene_manifest, run_settings):
        manifest = scene_manifest()
        full = train(run_settings(manifest, output="full"))

        resumed_settings = run_settings(manifest, output="resumed")
        midpoint = Path(full.checkpoints[0])
        assert midpoint.name == "step_000002.pt"
        resumed = train(resumed_settings, resume_from=midpoint)

        assert resumed.step == 4
        pd.testing.assert_frame_equal(pd.DataFrame(resumed.history), pd.DataFrame(full.history), atol=1e-6)
        state_dicts_close(resumed.model, full.model)

    def test_resume_in_place_truncates_later_records(self, scene_manifest, run_settings):
        settings = run_settings(scene_manifest())
        first = train(settings)
        log = Path(settings.run.output_dir) / "metrics.jsonl"
        before = read_metrics(log)

        train(settings, resume_from=first.checkpoints[0])

        pd.testing.assert_frame_equal(read_metrics(log), before, atol=1e-6)

    def test_finished_run_is_not_extended(self, scene_manifest, run_settings):
        settings = run_settings(scene_manifest())
        state = train(settings)
        again = train(settings, resume_from=state.checkpoints[-1])
        assert again.step == 4

    @pytest.mark.filterwarnings("error:Converting a tensor with requires_grad:UserWarning")
    def test_divergence_keeps_last_good_checkpoint(self, scene_manifest, run_settings):
        trainer = Trainer(run_settings(scene_manifest()))
        trainer.loss_fn = lambda logits, masks: logits.mean() * float("nan")

        with pytest.raises(DivergenceError) as info:
            trainer.train()

        assert info.value.exit_code == 4
        assert info.value.details["step"] == 1
        assert math.isnan(info.value.details["loss"])
        last_good = Path(info.value.last_good_checkpoint)
        assert last_good.exists()
        _, payload, _ = load_checkpoint(last_good)
        assert payload["step"] == 0

    def test_needs_eval_scenes(self, scene_manifest, run_settings):
        with pytest.raises(EmptyDatasetError):
            train(run_settings(scene_manifest(n_eval=0)))


class TestEvaluation:
    def test_oracle_scores_one(self, scene_manifest, tmp_path):
        table = evaluate(None, scene_manifest(), tmp_path / "eval", out_size=64, oracle=True)

        assert list(table["scene_id"]) == ["eval_0", "eval_1", "mean"]
        assert (table["iou"] == 1.0).all()
        assert (tmp_path / "eval" / "evaluation.csv").exists()

    def test_empty_prediction_scores_zero(self, scene_manifest):
        scenes = load_split(read_manifest(scene_manifest()), "eval")
        table = evaluate_scenes(ConstantLogits(-10.0), scenes, out_size=64)
        assert (table["iou"] == 0.0).all()

    def test_repeated_evaluation_is_identical(self, scene_manifest, tiny_model_config, seeded, tmp_path):
        model = build(tiny_model_config)
        checkpoint = save_checkpoint(tmp_path / "ck.pt", model, step=0, seed=0, loss_id="dice",
                                     extra={"out_size": 64})
        manifest = scene_manifest()

        first = evaluate(checkpoint, manifest, tmp_path / "one")
        second = evaluate(checkpoint, manifest, tmp_path / "two")
        pd.testing.assert_frame_equal(first, second)

    def test_checkpoint_required_outside_oracle_mode(self, scene_manifest, tmp_path):
        with pytest.raises(ConfigError):
            evaluate(None, scene_manifest(), tmp_path, out_size=64)


class TestPrediction:
    def test_window_starts(self):
        assert window_starts(100, 320) == [0]
        assert window_starts(1000, 320, overlap=32) == [0, 288, 576, 680]
        with pytest.raises(ConfigError):
            window_starts(1000, 320, overlap=320)

    @pytest.mark.parametrize("shape", [(1000, 700), (100, 80), (320, 320)])
    def test_tiled_matches_whole_image(self, shape):
        image = np.random.default_rng(0).random(shape).astype(np.float32)
        expected = torch.sigmoid(10.0 * (torch.from_numpy(image) - 0.5)).numpy()

        probs = predict_array(PixelwiseLogits(), image, tile_size=320)

        assert probs.shape == shape
        np.testing.assert_allclose(probs, expected, atol=1e-6)

    def test_tiled_resunet_agrees_with_whole_image(self, tiny_model_config, seeded):
        model = build(tiny_model_config)
        yy, xx = np.mgrid[0:640, 0:640]
        stripes = (np.abs((yy - xx) % 160 - 80) <= 1) | (np.abs(yy + 2 * xx - 700) <= 1)
        image = (0.3 + 0.5 * stripes + 0.05 * seeded.random((640, 640))).astype(np.float32)

        whole = predict_array(model, image, tile_size=640)
        tiled = predict_array(model, image, tile_size=320)

        threshold = np.median(whole)
        agreement = np.mean((whole > threshold) == (tiled > threshold))
        assert agreement >= 0.98

    def test_overlay_marks_mask_in_red(self):
        image = np.zeros((2, 2))
        mask = np.array([[1, 0], [0, 0]])
        rgb = overlay_mask(image, mask)
        assert rgb[0, 0].tolist() == [153, 0, 0]
        assert rgb[1, 1].tolist() == [0, 0, 0]

    def test_predict_writes_outputs_and_leaves_checkpoint(self, tiny_model_config, seeded, write_png, tmp_path):
        model = build(tiny_model_config)
        checkpoint = save_checkpoint(tmp_path / "ck.pt", model, step=0, seed=0, loss_id="dice",
                                     extra={"out_size": 64})
        before = checkpoint.read_bytes()
        image = (np.random.default_rng(1).random((100, 90)) * 255).astype(np.uint8)
        image_path = write_png(image, "scene.png")

        paths = predict(checkpoint, image_path, tmp_path / "out")

        with Image.open(paths["mask"]) as mask:
            assert mask.size == (90, 100)
            assert set(np.unique(np.asarray(mask))) <= {0, 255}
        with Image.open(paths["overlay"]) as overlay:
            assert overlay.mode == "RGB"
        assert checkpoint.read_bytes() == before


class TestDiagnostics:
    def test_hough_figure(self, tmp_path):
        target = line_mask(33, 33, rows=[20])
        result = diagnose_hough(target, target.astype(np.float64), tmp_path)

        assert len(result.target_lines) == len(result.prediction_lines) == 1
        assert result.figure_path.exists()
        np.testing.assert_allclose(result.target_accumulator, result.prediction_accumulator)

    def test_hough_from_png_paths(self, write_png, tmp_path):
        target = write_png(line_mask(33, 33, cols=[10]) * 255, "target.png")
        prediction = write_png(np.zeros((33, 33), dtype=np.uint8), "prediction.png")

        result = diagnose_hough(target, prediction, tmp_path / "fig", HoughSettings(n_theta=90))

        assert len(result.target_lines) == 1
        assert len(result.prediction_lines) == 0

    def test_hough_shape_mismatch(self, tmp_path):
        with pytest.raises(ShapeMismatchError):
            diagnose_hough(np.zeros((8, 8)), np.zeros((8, 9)), tmp_path)

    def test_plot_several_runs(self, tmp_path):
        logs = []
        for name in ("dice", "sr"):
            path = tmp_path / name / "metrics.jsonl"
            append_records(path, [MetricRecord(step, split, 0.1 * step, 0.5)
                                  for step in (1, 2) for split in ("train", "val")])
            logs.append(path)

        figure = plot_metrics(logs, tmp_path / "plots")
        assert figure.exists() and figure.name == "iou_curves.png"

    def test_plot_rejects_empty_log(self, tmp_path):
        empty = tmp_path / "metrics.jsonl"
        empty.write_text("")
        with pytest.raises(MetricsLogError):
            plot_metrics([empty], tmp_path)
        with pytest.raises(MetricsLogError):
            plot_metrics([], tmp_path)


class TestMetricsLog:
    def test_malformed_line(self, tmp_path):
        path = tmp_path / "metrics.jsonl"
        path.write_text(json.dumps({"step": 1, "split": "val", "iou": 0.2, "loss": 0.4}) + "\n{oops\n")
        with pytest.raises(MetricsLogError) as info:
            read_metrics(path)
        assert info.value.details["line"] == 2

    def test_unknown_split(self, tmp_path):
        path = tmp_path / "metrics.jsonl"
        path.write_text(json.dumps({"step": 1, "split": "test", "iou": 0.2, "loss": 0.4}) + "\n")
        with pytest.raises(MetricsLogError):
            read_metrics(path)

    def test_truncate_after(self, tmp_path):
        path = tmp_path / "metrics.jsonl"
        append_records(path, [MetricRecord(step, "val", 0.1, 0.2) for step in (10, 20, 30)])
        truncate_after(path, 20)
        assert list(read_metrics(path)["step"]) == [10, 20]


def test_compare_losses(scene_manifest, run_settings, tmp_path):
    settings = run_settings(scene_manifest(), steps=2, eval_every=2, checkpoint_every=2)
    settings = settings.model_copy(update={"sr": SRLossConfig(hough=HoughSettings(n_theta=36))})

    summary = compare_losses(settings, ["dice", "sr"], tmp_path / "comparison")

    assert list(summary["loss_id"]) == ["dice", "sr"]
    assert (summary["steps"] == 2).all()
    assert summary["best_val_iou"].between(0.0, 1.0).all()
    assert (tmp_path / "comparison" / "loss_comparison.csv").exists()
    assert (tmp_path / "comparison" / "iou_curves.png").exists()
    assert (tmp_path / "comparison" / "sr" / "metrics.jsonl").exists()


@pytest.mark.slow
def test_tiny_model_fits_synthetic_scenes(scene_manifest, run_settings):
    settings = run_settings(scene_manifest(n_train=3, n_eval=2), steps=300, eval_every=50,
                            checkpoint_every=300, batch_size=4)
    state = train(settings)
    assert state.history[-1]["train_iou"] >= 0.5


@pytest.mark.slow
@pytest.mark.skipif(not os.environ.get("CONTRAILS_DATASET_DIR"), reason="CONTRAILS_DATASET_DIR não definido")
def test_dataset_scale_run(tmp_path):
    manifest = Path(os.environ["CONTRAILS_DATASET_DIR"]) / "manifest.tsv"
    entries = read_manifest(manifest)
    assert len(load_split(entries, "train")) == 20 and len(load_split(entries, "eval")) == 10

    settings = Settings(run=RunConfig(loss_id="dice", steps=2000, eval_every=100, checkpoint_every=2000,
                                      manifest_path=str(manifest), output_dir=str(tmp_path / "dice")))
    state = train(settings)

    table = evaluate(state.checkpoints[-1], manifest, tmp_path / "eval")
    assert 0.12 <= table["iou"].iloc[-1] <= 0.25
