"""Testes da ResUNet e dos checkpoints"""

import pytest
import torch
from torchvision import models

from src.contrails.config import ModelConfig
from src.contrails.exceptions import (
    ConfigError,
    EncoderWeightsMismatchError,
    IncompatibleCheckpointError,
    ShapeMismatchError,
)
from src.contrails.model import (
    ResNetEncoder,
    build,
    forward,
    load_checkpoint,
    load_pretrained_encoder,
    parameter_count,
    read_sidecar,
    replicate_channels,
    save_checkpoint,
)


@pytest.fixture
def tiny_model(tiny_model_config, seeded):
    return build(tiny_model_config).eval()


class TestShapes:
    @pytest.mark.parametrize("size", [32, 64, 160, 320])
    def test_output_matches_input_resolution(self, tiny_model, size):
        with torch.no_grad():
            logits = forward(tiny_model, torch.rand(2, 1, size, size))
        assert logits.shape == (2, 1, size, size)

    def test_rectangular_input(self, tiny_model):
        with torch.no_grad():
            logits = tiny_model(torch.rand(1, 1, 64, 96))
        assert logits.shape == (1, 1, 64, 96)

    def test_default_configuration(self, seeded):
        model = build(ModelConfig(use_pretrained=False)).eval()
        assert model.divisor == 32
        with torch.no_grad():
            logits = model(torch.rand(1, 1, 320, 320))
        assert logits.shape == (1, 1, 320, 320)

    def test_three_channel_input(self, tiny_model):
        image = torch.rand(1, 1, 64, 64)
        with torch.no_grad():
            single = tiny_model(image)
            triple = tiny_model(replicate_channels(image))
        torch.testing.assert_close(single, triple)

    def test_indivisible_input(self, tiny_model):
        with pytest.raises(ShapeMismatchError) as info:
            tiny_model(torch.rand(1, 1, 64, 50))
        assert info.value.exit_code == 3

    def test_rank_check(self, tiny_model):
        with pytest.raises(ShapeMismatchError):
            tiny_model(torch.rand(1, 64, 64))


def test_replicate_channels():
    image = torch.arange(6.0).view(2, 3)
    replicated = replicate_channels(image)
    assert replicated.shape == (3, 2, 3)
    for channel in replicated:
        torch.testing.assert_close(channel, image)

    batch = replicate_channels(torch.rand(4, 1, 8, 8))
    assert batch.shape == (4, 3, 8, 8)
    with pytest.raises(ValueError):
        replicate_channels(torch.rand(2, 2, 8, 8))


def test_replicate_channels_gradient_sums_the_copies():
    image = torch.rand(2, 1, 8, 8, requires_grad=True)
    upstream = torch.rand(2, 3, 8, 8)

    replicate_channels(image).backward(upstream)

    torch.testing.assert_close(image.grad, upstream.sum(dim=1, keepdim=True))


def test_unknown_encoder_variant():
    with pytest.raises(ConfigError):
        ResNetEncoder("vgg16", 5)


def test_residual_block_with_zero_branch_is_identity(tiny_model):
    block = tiny_model.encoder.layer1[1]
    with torch.no_grad():
        block.bn2.weight.zero_()
        block.bn2.bias.zero_()

    captured = {}
    handle = block.register_forward_hook(lambda module, inputs, output: captured.update(x=inputs[0], y=output))
    with torch.no_grad():
        tiny_model(torch.rand(1, 1, 64, 64))
    handle.remove()

    # A entrada do bloco já passou por ReLU, então relu(x + 0) == x
    torch.testing.assert_close(captured["y"], captured["x"])


def test_constant_inputs_give_different_outputs(tiny_model):
    with torch.no_grad():
        dark = forward(tiny_model, torch.zeros(1, 1, 64, 64))
        bright = forward(tiny_model, torch.ones(1, 1, 64, 64))
    assert not torch.allclose(dark, bright)


def test_eval_mode_is_deterministic(tiny_model):
    image = torch.rand(2, 1, 64, 64)
    with torch.no_grad():
        torch.testing.assert_close(tiny_model(image), tiny_model(image), rtol=0, atol=0)


def test_parameter_count(tiny_model):
    counts = parameter_count(tiny_model)
    assert counts["total"] == counts["encoder"] + counts["decoder"]
    assert counts["encoder"] > counts["decoder"] > 0


class TestPretrainedEncoder:
    def test_loads_encoder_and_leaves_decoder(self, tiny_model, tmp_path):
        torch.manual_seed(42)
        weights = models.resnet18(weights=None).state_dict()
        path = tmp_path / "resnet18.pt"
        torch.save(weights, path)

        decoder_before = {k: v.clone() for k, v in tiny_model.decoder.state_dict().items()}
        load_pretrained_encoder(tiny_model, str(path))

        for name, value in tiny_model.encoder.state_dict().items():
            torch.testing.assert_close(value, weights[name], rtol=0, atol=0)
        for name, value in tiny_model.decoder.state_dict().items():
            assert torch.equal(value, decoder_before[name])

    def test_loaded_encoder_features_vary(self, tiny_model, tmp_path):
        torch.manual_seed(7)
        path = tmp_path / "resnet18.pt"
        torch.save(models.resnet18(weights=None).state_dict(), path)
        load_pretrained_encoder(tiny_model, str(path))

        with torch.no_grad():
            features = tiny_model.encoder(replicate_channels(torch.rand(1, 1, 64, 64)))

        assert len(features) == tiny_model.cfg.encoder_depth
        for stage in features:
            assert stage.var().item() > 0

    def test_wrong_architecture(self, tiny_model, tmp_path):
        path = tmp_path / "resnet50.pt"
        torch.save(models.resnet50(weights=None).state_dict(), path)
        with pytest.raises(EncoderWeightsMismatchError) as info:
            load_pretrained_encoder(tiny_model, str(path))
        assert info.value.parameter.startswith("layer1")

    def test_missing_weights_file(self, tiny_model, tmp_path):
        with pytest.raises(ConfigError):
            load_pretrained_encoder(tiny_model, str(tmp_path / "absent.pt"))


class TestCheckpoint:
    def test_roundtrip(self, tiny_model, tmp_path):
        path = save_checkpoint(tmp_path / "ck" / "step_000010.pt", tiny_model, step=10, seed=3,
                               loss_id="sr", history=[{"step": 10, "val_iou": 0.4}], extra={"out_size": 64})

        sidecar = read_sidecar(path)
        assert sidecar["step"] == 10 and sidecar["loss_id"] == "sr" and sidecar["out_size"] == 64

        loaded, payload, _ = load_checkpoint(path, expected_config=tiny_model.cfg)
        assert not loaded.training
        assert payload["history"][0]["val_iou"] == 0.4

        image = torch.rand(1, 1, 64, 64)
        with torch.no_grad():
            torch.testing.assert_close(loaded(image), tiny_model(image))

    def test_incompatible_config(self, tiny_model, tmp_path):
        path = save_checkpoint(tmp_path / "ck.pt", tiny_model, step=1, seed=0, loss_id="dice")
        other = tiny_model.cfg.model_copy(update={"decoder_channels": [64, 32, 16, 8]})
        with pytest.raises(IncompatibleCheckpointError):
            load_checkpoint(path, expected_config=other)

    def test_missing_checkpoint(self, tmp_path):
        with pytest.raises(IncompatibleCheckpointError):
            load_checkpoint(tmp_path / "absent.pt")

    def test_loading_does_not_touch_the_file(self, tiny_model, tmp_path):
        path = save_checkpoint(tmp_path / "ck.pt", tiny_model, step=1, seed=0, loss_id="dice")
        before = path.read_bytes()
        load_checkpoint(path)
        assert path.read_bytes() == before
