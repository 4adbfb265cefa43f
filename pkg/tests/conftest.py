import numpy as np

from liouville_sync.operators import HilbertSpace, Operator, random_hermitian
from liouville_sync.liouvillian import LindbladModel


def random_model(space, n_jumps, rng, h_scale=1.0, jump_scale=1.0, label="random"):
    """Generic CPTP generator with a random Hermitian H and random jumps."""
    d = space.total_dim
    h = Operator(space, h_scale * random_hermitian(d, rng))
    jumps = []
    for _ in range(n_jumps):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        jumps.append(Operator(space, jump_scale * g / np.sqrt(d)))
    return LindbladModel(space, h, jumps, label=label)


def random_small_spaces(rng, n, max_sites=2, dims=(2, 3)):
    """Sample spaces up to two qutrits."""
    spaces = []
    for _ in range(n):
        n_sites = rng.integers(1, max_sites + 1)
        spaces.append(HilbertSpace([int(rng.choice(dims)) for _ in range(n_sites)]))
    return spaces
