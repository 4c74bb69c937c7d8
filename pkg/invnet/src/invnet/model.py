"""Encoder-decoder network from receiver gathers to obstacle masks.

The encoder runs 1-D convolutions along the time axis of an 11-channel,
1400-sample gather, halving the length with max pooling after every block
until 10 samples remain; a valid convolution over those 10 samples produces
a 256-channel code that is reshaped into a single 16x16 plane.  The decoder
upsamples that plane by 2x four times with 3x3 convolutions in between,
ending in a sigmoid, so the output is a 256x256 probability mask.

Residual variants insert one or two width-preserving residual blocks after
each pooling stage; they change capacity but not any interface shape.
"""

from dataclasses import asdict, dataclass

import torch
from torch import nn

__all__ = [
    "SpecError",
    "NetworkSpec",
    "VARIANTS",
    "InvNet",
    "build_model",
    "count_parameters",
    "save_checkpoint",
    "load_checkpoint",
]

# Starting the output head near the typical foreground rate (roughly 7.5% of
# pixels are obstacle in generated scenes) keeps the first epochs of BCE from
# burning steps on the class prior.
_PRIOR_LOGIT = -2.51


class SpecError(ValueError):
    """An architecture spec whose composed shapes do not line up."""


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture parameters; validate() checks the composed geometry."""

    n_residual: int = 0
    widths: tuple = (32, 64, 128, 256, 512, 512, 768)
    kernel: int = 7
    decoder_widths: tuple = (128, 64, 32)
    n_receivers: int = 11
    input_length: int = 1400
    bottleneck_side: int = 16
    output_side: int = 256
    upsample_mode: str = "nearest"

    def encoder_lengths(self) -> list:
        """Signal length after each pooling stage."""
        lengths = []
        n = self.input_length
        for _ in self.widths:
            n //= 2
            lengths.append(n)
        return lengths

    def validate(self) -> "NetworkSpec":
        if not self.widths:
            raise SpecError("encoder needs at least one block")
        if any(w < 1 for w in self.widths) or any(w < 1 for w in self.decoder_widths):
            raise SpecError("channel widths must be positive")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise SpecError(f"encoder kernel must be odd for same padding, got {self.kernel}")
        if not 0 <= self.n_residual <= 2:
            raise SpecError(f"n_residual must be 0, 1, or 2, got {self.n_residual}")
        if self.n_receivers < 1 or self.input_length < 1:
            raise SpecError("input shape must be positive")
        if self.bottleneck_side < 1:
            raise SpecError("bottleneck side must be positive")
        if self.upsample_mode not in ("nearest", "bilinear"):
            raise SpecError(
                f"upsample_mode must be 'nearest' or 'bilinear', "
                f"got {self.upsample_mode!r}")
        for i, n in enumerate(self.encoder_lengths()):
            if n < 1:
                raise SpecError(
                    f"encoder block {i + 1} pools a {self.input_length}-sample "
                    f"input down to nothing")
        side = self.bottleneck_side * 2 ** (len(self.decoder_widths) + 1)
        if side != self.output_side:
            raise SpecError(
                f"decoder upsampling reaches {side}x{side}, "
                f"not {self.output_side}x{self.output_side}")
        return self


VARIANTS = {
    "invnet": NetworkSpec(n_residual=0),
    "invnet+1res": NetworkSpec(n_residual=1),
    "invnet+2res": NetworkSpec(n_residual=2),
}


class _Residual1d(nn.Module):
    """y = relu(x + f(x)) with f = conv-bn-relu-conv-bn, width preserving."""

    def __init__(self, width: int):
        super().__init__()
        self.body = nn.Sequential(
            nn.Conv1d(width, width, 3, padding=1),
            nn.BatchNorm1d(width),
            nn.ReLU(),
            nn.Conv1d(width, width, 3, padding=1),
            nn.BatchNorm1d(width),
        )
        self.act = nn.ReLU()

    def forward(self, x):
        return self.act(x + self.body(x))


class InvNet(nn.Module):
    """Maps a (batch, n_receivers, input_length) gather to a mask in [0, 1]."""

    def __init__(self, spec: NetworkSpec = NetworkSpec()):
        super().__init__()
        spec.validate()
        self.spec = spec

        blocks = []
        in_ch = spec.n_receivers
        for width in spec.widths:
            blocks += [
                nn.Conv1d(in_ch, width, spec.kernel, padding=spec.kernel // 2),
                nn.BatchNorm1d(width),
                nn.ReLU(),
                nn.MaxPool1d(2),
            ]
            blocks += [_Residual1d(width) for _ in range(spec.n_residual)]
            in_ch = width
        self.encoder = nn.Sequential(*blocks)

        # Valid convolution over the remaining samples collapses the time
        # axis entirely; the channel count is exactly one bottleneck plane.
        code_channels = spec.bottleneck_side ** 2
        self.to_code = nn.Conv1d(in_ch, code_channels, spec.encoder_lengths()[-1])

        blocks = []
        in_ch = 1
        for width in spec.decoder_widths:
            blocks += [
                nn.Upsample(scale_factor=2, mode=spec.upsample_mode),
                nn.Conv2d(in_ch, width, 3, padding=1),
                nn.BatchNorm2d(width),
                nn.ReLU(),
            ]
            in_ch = width
        head = nn.Conv2d(in_ch, 1, 3, padding=1)
        nn.init.constant_(head.bias, _PRIOR_LOGIT)
        blocks += [nn.Upsample(scale_factor=2, mode=spec.upsample_mode), head,
                   nn.Sigmoid()]
        self.decoder = nn.Sequential(*blocks)

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        """(batch, n_receivers, input_length) -> (batch, 1, side, side)."""
        expected = (self.spec.n_receivers, self.spec.input_length)
        if tuple(x.shape[1:]) != expected:
            raise ValueError(
                f"expected input of shape (batch, {expected[0]}, {expected[1]}), "
                f"got {tuple(x.shape)}")
        code = self.to_code(self.encoder(x))
        side = self.spec.bottleneck_side
        return code.reshape(x.shape[0], 1, side, side)

    def decode(self, code: torch.Tensor) -> torch.Tensor:
        """(batch, 1, side, side) -> (batch, output_side, output_side)."""
        return self.decoder(code).squeeze(1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.decode(self.encode(x))


def build_model(spec_or_variant="invnet") -> InvNet:
    """Construct a network from a NetworkSpec or a named variant."""
    if isinstance(spec_or_variant, str):
        try:
            spec = VARIANTS[spec_or_variant]
        except KeyError:
            raise SpecError(
                f"unknown variant {spec_or_variant!r}; "
                f"choose from {sorted(VARIANTS)}") from None
    else:
        spec = spec_or_variant
    return InvNet(spec)


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def save_checkpoint(model: InvNet, path, extra: dict = None) -> None:
    payload = {
        "spec": asdict(model.spec),
        "state_dict": model.state_dict(),
        "extra": extra or {},
    }
    torch.save(payload, path)


def load_checkpoint(path) -> tuple:
    """Rebuild a model from a checkpoint; returns (model, extra)."""
    payload = torch.load(path, map_location="cpu", weights_only=False)
    spec_dict = dict(payload["spec"])
    for key in ("widths", "decoder_widths"):
        spec_dict[key] = tuple(spec_dict[key])
    model = InvNet(NetworkSpec(**spec_dict))
    model.load_state_dict(payload["state_dict"])
    return model, payload.get("extra", {})
