"""BPSK / QPSK mappers, including symbol-splitting QPSK, and the PNC bit map.

Symbols follow the unnormalized constellation x = 1 - 2v (and ±1 ± j for
QPSK). Formulas written with 1-based symbol index k map to 0-based arrays
here: coded bits (2k-1, 2k) become (2k, 2k+1).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class ModulationScheme(enum.Enum):
    BPSK = "bpsk"
    QPSK_STANDARD = "qpsk"
    QPSK_SPLIT = "qpsk-split"

    @property
    def average_power(self) -> float:
        return 1.0 if self is ModulationScheme.BPSK else 2.0

    @property
    def rails(self) -> tuple[str, ...]:
        return ("",) if self is ModulationScheme.BPSK else ("I", "Q")


BPSK = ModulationScheme.BPSK
QPSK_STANDARD = ModulationScheme.QPSK_STANDARD
QPSK_SPLIT = ModulationScheme.QPSK_SPLIT


@dataclass
class SymbolBlock:
    symbols: np.ndarray
    scheme: ModulationScheme
    sources: tuple = field(default=(), repr=False)

    def __len__(self) -> int:
        return self.symbols.shape[-1]

    def normalized(self) -> np.ndarray:
        """Symbols scaled to unit average power."""
        return self.symbols / np.sqrt(self.scheme.average_power)


def _bits(x) -> np.ndarray:
    return np.asarray(x, dtype=np.uint8)


def bpsk_modulate(codeword) -> SymbolBlock:
    v = _bits(codeword)
    return SymbolBlock((1.0 - 2.0 * v).astype(np.complex128), BPSK, (v,))


def qpsk_standard_modulate(codeword) -> SymbolBlock:
    v = _bits(codeword)
    if v.shape[-1] % 2:
        raise ValueError("standard QPSK needs an even-length codeword")
    sym = (1.0 - 2.0 * v[..., 0::2]) + 1j * (1.0 - 2.0 * v[..., 1::2])
    return SymbolBlock(sym, QPSK_STANDARD, (v,))


def qpsk_split_modulate(codeword_i, codeword_q) -> SymbolBlock:
    """Symbol-splitting QPSK: two separately coded packets ride the I and Q rails."""
    vi, vq = _bits(codeword_i), _bits(codeword_q)
    if vi.shape != vq.shape:
        raise ValueError(f"rail codewords differ in length: {vi.shape} vs {vq.shape}")
    sym = (1.0 - 2.0 * vi) + 1j * (1.0 - 2.0 * vq)
    return SymbolBlock(sym, QPSK_SPLIT, (vi, vq))


def pnc_bit_map(product) -> np.ndarray | int:
    """XOR bit carried by a product of ±1 symbols: +1 -> 0, -1 -> 1."""
    p = np.asarray(product)
    if not np.all(np.isin(p, (1, -1))):
        raise ValueError("PNC map is defined on ±1 symbol products only")
    bit = ((1 - p) // 2).astype(np.uint8)
    return int(bit) if bit.ndim == 0 else bit


def hard_demodulate(block: SymbolBlock) -> np.ndarray | tuple[np.ndarray, np.ndarray]:
    """Sign decisions back to coded bits (rail pair for split QPSK)."""
    re = (block.symbols.real < 0).astype(np.uint8)
    if block.scheme is BPSK:
        return re
    im = (block.symbols.imag < 0).astype(np.uint8)
    if block.scheme is QPSK_SPLIT:
        return re, im
    out = np.empty(re.shape[:-1] + (2 * re.shape[-1],), dtype=np.uint8)
    out[..., 0::2] = re
    out[..., 1::2] = im
    return out
