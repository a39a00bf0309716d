"""Default exponential-blowup caps.

Setting ``REPREP_CAP_OVERRIDE`` to an integer replaces every default cap with
that value (used by CI to force the cap-exceeded paths cheaply).
"""

import os

_DEFAULTS = {
    "strategy": 2**24,   # alphabet ** (numX + numY) for exact value
    "power": 2**20,      # |E| ** k for full products
    "subsets": 2**22,    # 2**numX + 2**numY for exhaustive rectangle scans
    "rectangles": 2**20,  # rectangles visited by exact fortification
    "circuit": 4096,     # inputs + gates handed to the assignment tester
    "gadget": 4096,      # vertices per composed gadget
    "cloud": 256,        # vertices per powering cloud
    "walks": 2**62,      # total (2t+1)-step walks
}


_explicit: dict[str, int] = {}


def set_cap(name: str, value: int) -> None:
    """Replace one default (CLI ``--cap-*`` flags). The env override still wins."""
    if name not in _DEFAULTS:
        raise KeyError(name)
    _explicit[name] = int(value)


def reset_caps() -> None:
    _explicit.clear()


def names() -> tuple[str, ...]:
    return tuple(_DEFAULTS)


def cap(name: str) -> int:
    override = os.environ.get("REPREP_CAP_OVERRIDE")
    if override:
        return int(override)
    return _explicit.get(name, _DEFAULTS[name])
