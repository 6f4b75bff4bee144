"""Trainable modules: encoders, adversary, and the GAN vocoder."""

from .acoustic import AcousticEncoder, mean_pool
from .adversary import AccentDiscriminator, adversarial_loss, discriminator_loss
from .hifigan import Generator, HifiDiscriminators
from .losses import (
    loss_feature_matching,
    loss_hifigan_adversarial,
    loss_hifigan_discriminator,
    loss_mel,
    mel_spectrogram_torch,
)
from .pronunciation import PronunciationEncoder

__all__ = [
    "AccentDiscriminator",
    "AcousticEncoder",
    "Generator",
    "HifiDiscriminators",
    "PronunciationEncoder",
    "adversarial_loss",
    "discriminator_loss",
    "loss_feature_matching",
    "loss_hifigan_adversarial",
    "loss_hifigan_discriminator",
    "loss_mel",
    "mean_pool",
    "mel_spectrogram_torch",
]
