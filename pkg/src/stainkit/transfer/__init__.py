"""Classical stain color-transfer baselines."""

from __future__ import annotations

from enum import Enum

from ._stains import load_stains, save_stains, stains_from_json, stains_to_json
from .histmatch import histogram_match
from .macenko import macenko_estimate_stains, macenko_normalize
from .reinhard import reinhard_lab, reinhard_transfer
from .vahadane import DictionaryFit, vahadane_fit_dictionary, vahadane_normalize


class TransferMethod(str, Enum):
    REINHARD = "reinhard"
    MACENKO = "macenko"
    VAHADANE = "vahadane"
    HISTMATCH = "histmatch"


def transfer(method, source, target, **options):
    """Run one transfer method by name; ``options`` go to the method."""
    method = TransferMethod(method)
    if method is TransferMethod.REINHARD:
        return reinhard_transfer(source, target)
    if method is TransferMethod.MACENKO:
        return macenko_normalize(source, target, **options)
    if method is TransferMethod.VAHADANE:
        return vahadane_normalize(source, target, **options)
    return histogram_match(source, target, **options)


__all__ = [
    "DictionaryFit",
    "TransferMethod",
    "histogram_match",
    "load_stains",
    "macenko_estimate_stains",
    "macenko_normalize",
    "reinhard_lab",
    "reinhard_transfer",
    "save_stains",
    "stains_from_json",
    "stains_to_json",
    "transfer",
    "vahadane_fit_dictionary",
    "vahadane_normalize",
]
