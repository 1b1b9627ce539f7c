"""How much sharper is the GLCT than the STFT on linear chirps?

Prints Rényi entropies (order 3, bits) of |STFT|^2 and |GLCT|^2 and the modal
selected angle for a range of chirp rates.
"""

import math

import numpy as np

from rffp.glct import ChirpletParams, alpha_from_chirp_rate, alpha_grid, chirp_rate_from_alpha, glct, \
    renyi_entropy, stft
from rffp.signal import IQSequence

FS = 10e6


def main(n_chirplets=9, w=32, hop=8, n=512):
    p = ChirpletParams.hann(w, n_chirplets, hop)
    grid = alpha_grid(n_chirplets)
    t = np.arange(n) / FS
    print(f"N={n_chirplets} w={w} hop={hop}; grid (deg): {np.round(np.degrees(grid), 1).tolist()}")
    print(f"{'alpha':>7} {'c (rad/s^2)':>12} {'H stft':>7} {'H glct':>7} {'modal':>7} {'nearest':>7}")
    for deg in range(-54, 55, 9):
        c = chirp_rate_from_alpha(math.radians(deg) + 0.02, FS)
        x = IQSequence(np.exp(1j * (2 * np.pi * 1e6 * t + c * t * t)), FS)
        g, s = glct(x, p), stft(x, p)
        e = g.magnitude ** 2
        vals, counts = np.unique(g.selected_alpha[e >= np.quantile(e, 0.95)], return_counts=True)
        modal = math.degrees(vals[np.argmax(counts)])
        nearest = math.degrees(grid[np.argmin(np.abs(grid - alpha_from_chirp_rate(c, FS)))])
        print(f"{deg:>7d} {c:>12.3e} {renyi_entropy(s.magnitude ** 2):>7.3f} {renyi_entropy(e):>7.3f} "
              f"{modal:>7.1f} {nearest:>7.1f}")


if __name__ == "__main__":
    main()
