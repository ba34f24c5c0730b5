from hashlib import blake2b
from math import isfinite
from typing import Optional, Sequence, Union


def derive_seed(base: int, *parts: Union[str, int]) -> int:
    """
    A 63-bit seed derived from `base` and a key, stable across processes and
    python versions (unlike the builtin hash).
    """
    key = "|".join([str(base), *(str(p) for p in parts)]).encode()
    digest = blake2b(key, digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def epochs_to_fraction(
    losses: Sequence[float], frac: float = 0.5
) -> Optional[int]:
    """
    The 1-based epoch at which the loss first drops to `frac` times the
    first-epoch loss, or None if it never does.
    """
    assert 0.0 < frac < 1.0
    if not losses or not isfinite(losses[0]):
        return None
    threshold = frac * losses[0]
    for ix, loss in enumerate(losses):
        if isfinite(loss) and loss <= threshold:
            return ix + 1
    return None
