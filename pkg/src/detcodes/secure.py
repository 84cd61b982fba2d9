"""Secret/key placement for Type-I and Type-II secure message matrices.

Type-I fills every free (V/W) cell in the top l rows with a random key and
every free cell in the bottom d-l rows with a secret.  Type-II splits the
matrix into blocks at row l and at the column boundary between subsets
that touch [l] and subsets inside [l+1:d]; only free cells of the bottom-
right block D (rows > l, column subsets inside [l+1:d]) hold secrets, and
every parity cell inside D depends on secrets alone.  Slot numbering
follows the same canonical column-lex, row-ascending scan as the
non-secure fill order, with separate counters for secrets and keys.
"""

from __future__ import annotations

import enum
import hashlib
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .code import CellKind, SystemParams, cell_kind, fill_parity_cells, info_cells
from .gfmatrix import GFMatrix
from .subsets import Subset, binom


class Scheme(enum.Enum):
    PLAIN = "plain"
    TYPE_I = "type1"
    TYPE_II = "type2"


class Role(enum.Enum):
    SECRET = "secret"
    KEY = "key"
    PARITY = "parity"


def secret_capacity(d: int, ell: int, m: int, scheme: Scheme) -> int:
    """Number of secret symbols per message matrix (F, F_s,I or F_s,II)."""
    if scheme is Scheme.PLAIN or ell == 0:
        return m * binom(d + 1, m + 1)
    if scheme is Scheme.TYPE_I:
        return (d - ell) * binom(d, m) - binom(d, m + 1) + binom(ell, m + 1)
    return m * binom(d - ell + 1, m + 1)


def key_count(d: int, ell: int, m: int, scheme: Scheme) -> int:
    """Number of random keys; always F - F_s for the scheme."""
    return m * binom(d + 1, m + 1) - secret_capacity(d, ell, m, scheme)


@dataclass(frozen=True)
class SecureParams:
    """A base system plus the compromised-node budget and the scheme."""

    base: SystemParams
    ell: int
    scheme: Scheme

    def __post_init__(self) -> None:
        d = self.base.d
        if self.scheme is Scheme.PLAIN:
            if self.ell != 0:
                raise ValueError("plain layout requires ell == 0")
        elif self.scheme is Scheme.TYPE_I:
            if not 0 <= self.ell < d:
                raise ValueError(f"Type-I requires 0 <= ell < d, got ell={self.ell}, d={d}")
        elif not 0 <= self.ell <= d:
            raise ValueError(f"Type-II requires 0 <= ell <= d, got ell={self.ell}, d={d}")
        if (
            self.scheme is Scheme.TYPE_II
            and self.ell > 0
            and self.base.m > d - self.ell
        ):
            warnings.warn(
                f"Type-II with m={self.base.m} > d-ell={d - self.ell} has zero "
                "secret capacity; the matrix stores keys only",
                stacklevel=2,
            )

    @property
    def secret_count(self) -> int:
        return secret_capacity(self.base.d, self.ell, self.base.m, self.scheme)

    @property
    def key_count(self) -> int:
        return key_count(self.base.d, self.ell, self.base.m, self.scheme)


def _free_cell_role(x: int, I: Subset, ell: int, scheme: Scheme) -> Role:
    if scheme is Scheme.PLAIN or ell == 0:
        return Role.SECRET
    if scheme is Scheme.TYPE_I:
        return Role.KEY if x <= ell else Role.SECRET
    # Type-II: secrets live in block D only
    if x > ell and I[0] > ell:
        return Role.SECRET
    return Role.KEY


@dataclass(frozen=True)
class MessageLayout:
    """Role map over the d x alpha grid plus slot orderings."""

    sparams: SecureParams

    @cached_property
    def secret_cells(self) -> tuple[tuple[int, Subset], ...]:
        sp = self.sparams
        return tuple(
            (x, I)
            for x, I in info_cells(sp.base)
            if _free_cell_role(x, I, sp.ell, sp.scheme) is Role.SECRET
        )

    @cached_property
    def key_cells(self) -> tuple[tuple[int, Subset], ...]:
        sp = self.sparams
        return tuple(
            (x, I)
            for x, I in info_cells(sp.base)
            if _free_cell_role(x, I, sp.ell, sp.scheme) is Role.KEY
        )

    @property
    def secret_count(self) -> int:
        return len(self.secret_cells)

    @property
    def key_count(self) -> int:
        return len(self.key_cells)

    def role_of(self, x: int, I: Subset) -> Role:
        if cell_kind(x, I) is CellKind.P:
            return Role.PARITY
        return _free_cell_role(x, I, self.sparams.ell, self.sparams.scheme)

    @cached_property
    def _slot_of(self) -> dict[tuple[int, Subset], tuple[Role, int]]:
        out: dict[tuple[int, Subset], tuple[Role, int]] = {}
        for i, cell in enumerate(self.secret_cells):
            out[cell] = (Role.SECRET, i)
        for i, cell in enumerate(self.key_cells):
            out[cell] = (Role.KEY, i)
        return out

    def slot_of(self, x: int, I: Subset) -> tuple[Role, int]:
        """Role and slot index of a free cell; parity cells have no slot."""
        return self._slot_of[(x, I)]


def build_layout(sparams: SecureParams) -> MessageLayout:
    layout = MessageLayout(sparams)
    # The scan counts must agree with the closed-form capacities.
    if layout.secret_count != sparams.secret_count:
        raise AssertionError(
            f"secret cell scan found {layout.secret_count}, formula says "
            f"{sparams.secret_count}"
        )
    return layout


def assemble(
    layout: MessageLayout, secrets: np.ndarray | list[int], keys: np.ndarray | list[int]
) -> GFMatrix:
    """Place secrets and keys into their slots and close every parity group."""
    sp = layout.sparams
    params = sp.base
    secrets = np.asarray(secrets, dtype=np.int64)
    keys = np.asarray(keys, dtype=np.int64)
    if secrets.shape != (layout.secret_count,):
        raise ValueError(f"expected {layout.secret_count} secrets, got {secrets.shape}")
    if keys.shape != (layout.key_count,):
        raise ValueError(f"expected {layout.key_count} keys, got {keys.shape}")
    arr = np.zeros((params.d, params.alpha), dtype=np.int64)
    cols = params.columns
    for val, (x, I) in zip(secrets, layout.secret_cells):
        arr[x - 1, cols.rank(I)] = int(val) % params.q
    for val, (x, I) in zip(keys, layout.key_cells):
        arr[x - 1, cols.rank(I)] = int(val) % params.q
    fill_parity_cells(arr, params)
    return GFMatrix(params.q, arr)


def extract_secrets(M: GFMatrix, layout: MessageLayout) -> np.ndarray:
    params = layout.sparams.base
    if M.shape != (params.d, params.alpha):
        raise ValueError(f"matrix shape {M.shape} does not match layout")
    cols = params.columns
    return np.array(
        [int(M.a[x - 1, cols.rank(I)]) for x, I in layout.secret_cells], dtype=np.int64
    )


def extract_keys(M: GFMatrix, layout: MessageLayout) -> np.ndarray:
    params = layout.sparams.base
    if M.shape != (params.d, params.alpha):
        raise ValueError(f"matrix shape {M.shape} does not match layout")
    cols = params.columns
    return np.array(
        [int(M.a[x - 1, cols.rank(I)]) for x, I in layout.key_cells], dtype=np.int64
    )


# -- key sampling ---------------------------------------------------------------

_KS_TAG = b"detcodes-keystream-v1"


class KeyStream:
    """Deterministic uniform symbols from a seed, via hashed counter mode.

    The stream is stable across platforms and Python versions (unlike
    random.Random), which keeps shard files byte-identical for a fixed
    seed.  Uniformity over [0, q) uses rejection sampling on 16-bit words.
    """

    def __init__(self, seed: int, q: int, stream: int = 0) -> None:
        if q < 2 or q >= 1 << 16:
            raise ValueError(f"modulus {q} out of supported range [2, 2^16)")
        self.q = q
        self._prefix = (
            _KS_TAG
            + int(seed).to_bytes(8, "little", signed=False)
            + int(stream).to_bytes(8, "little", signed=False)
        )
        self._counter = 0
        self._limit = (1 << 16) - ((1 << 16) % q)

    def _block(self) -> bytes:
        h = hashlib.sha256(self._prefix + self._counter.to_bytes(8, "little")).digest()
        self._counter += 1
        return h

    def draw(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.int64)
        filled = 0
        while filled < count:
            words = np.frombuffer(self._block(), dtype="<u2").astype(np.int64)
            words = words[words < self._limit] % self.q
            take = min(len(words), count - filled)
            out[filled : filled + take] = words[:take]
            filled += take
        return out


def sample_keys(count: int, seed: int, q: int, stream: int = 0) -> np.ndarray:
    """Draw ``count`` uniform field symbols; same arguments, same symbols."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    return KeyStream(seed, q, stream).draw(count)
