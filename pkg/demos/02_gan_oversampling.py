"""Train vanilla GAN and WGAN oversamplers on a bimodal minority class.

The fixture has one numeric column drawn from two modes at 0.25 and 0.75.
A good oversampler reproduces both modes instead of collapsing onto one;
the script reports moment gaps and mode occupancy for both GAN variants.
"""

import numpy as np

from fingan import GanConfig, sample_synthetic, train_gan
from fingan.fixtures import bimodal_minority


def describe(name, real, synth):
    gap_mean = abs(synth.mean() - real.mean())
    gap_std = abs(synth.std() - real.std())
    low = (np.abs(synth - 0.25) < np.abs(synth - 0.75)).mean()
    print(f"{name:>8}: mean gap {gap_mean:.3f}, std gap {gap_std:.3f}, "
          f"mode split {low:.0%}/{1 - low:.0%}")


def main():
    table = bimodal_minority(256, seed=1)
    real = table.X[:, 0]
    print(f"minority fixture: {table.n_rows} rows, modes at 0.25 and 0.75\n")

    for mode in ("vanilla", "wgan"):
        config = GanConfig(mode=mode, epochs=600, seed=2)
        model = train_gan(table, config)
        synth = sample_synthetic(model, 2000, seed=7).X[:, 0]
        describe(mode, real, synth)
        d_hist = model.history["d_loss"]
        print(f"          discriminator loss: {d_hist[0]:.3f} -> {d_hist[-1]:.3f}")

    print("\nboth variants should land within ~0.1 of the real moments and "
          "keep both modes populated")


if __name__ == "__main__":
    main()
