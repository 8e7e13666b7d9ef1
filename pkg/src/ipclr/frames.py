"""Window design and forward/inverse STFT with a Parseval-tight frame.

The transform follows the windowed-DFT convention

    S[xi, tau] = sum_l x[l + a*tau] * w[l] * exp(-2j*pi*xi*l/L)

with the full two-sided spectrum (fft_size K = window length L, frequency
step b = 1) and an unnormalized DFT.  Two deterministic framing rules are
supported:

``cover``
    The signal is zero-padded by L - a samples on the left and enough on
    the right that every original sample is covered by a complete lattice
    of window shifts; frame count is ceil(n/a) + L/a - 1.  With the
    canonical tight window this makes the transform Parseval (frame bound
    one) and exactly invertible by windowed overlap-add.

``valid``
    Frames start at sample 0 and only complete frames that lie entirely
    inside the signal are kept (frame count floor((n - L)/a) + 1).  Every
    column is then a pure windowed patch of the signal, which preserves
    the algebraic rank structure of sinusoid spectrograms; this mode is
    not invertible and is meant for analysis experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import SignalBuffer

FRAMINGS = ("cover", "valid")


@dataclass(frozen=True)
class StftConfig:
    """Transform geometry: window length L, hop a, and window family.

    Constraints kept by this artifact: a divides L, a <= L/2 (painless
    overlap for tight-frame construction), fft_size == L and freq_step == 1
    (full two-sided spectrum on the exact DFT grid).
    """

    window_len: int
    hop: int
    fft_size: int = 0
    window_kind: str = "hann"
    freq_step: int = 1

    def __post_init__(self):
        if self.fft_size == 0:
            object.__setattr__(self, "fft_size", self.window_len)
        if self.window_len < 2:
            raise ValueError("window_len must be at least 2")
        if self.hop < 1:
            raise ValueError("hop must be positive")
        if self.hop * 2 > self.window_len:
            raise ValueError("hop must not exceed window_len/2")
        if self.window_len % self.hop != 0:
            raise ValueError("hop must divide window_len")
        if self.fft_size != self.window_len:
            raise ValueError("fft_size must equal window_len in this artifact")
        if self.freq_step != 1:
            raise ValueError("freq_step must be 1 in this artifact")
        if self.window_kind not in ("hann", "hann_tight"):
            raise ValueError(f"unknown window_kind: {self.window_kind!r}")


@dataclass(frozen=True)
class Spectrogram:
    """Complex K x T matrix plus the configuration that produced it.

    ``origin_len`` is the pre-padding signal length; ``framing`` records
    which framing rule built the matrix.  Values are treated as immutable
    after construction.
    """

    data: np.ndarray
    config: StftConfig
    origin_len: int
    sample_rate_hz: float = 1.0
    framing: str = "cover"
    phase_corrected: bool = False

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.ndim != 2:
            raise ValueError("spectrogram data must be a 2-D matrix")
        if data.shape[0] != self.config.fft_size:
            raise ValueError("row count must equal fft_size")
        if self.framing not in FRAMINGS:
            raise ValueError(f"unknown framing: {self.framing!r}")
        object.__setattr__(self, "data", data)

    @property
    def n_frames(self) -> int:
        return self.data.shape[1]

    @property
    def n_bins(self) -> int:
        return self.data.shape[0]


def hann_window(window_len: int) -> np.ndarray:
    """Periodic Hann window w[l] = 0.5 - 0.5*cos(2*pi*l/L)."""
    if window_len < 2:
        raise ValueError("window_len must be at least 2")
    l = np.arange(window_len)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * l / window_len)


def derivative_window(window_len: int) -> np.ndarray:
    """Per-sample time derivative of the Hann window, scaled by L/(2*pi).

    With this scaling the reassignment quotient Im[S_w' / S_w] comes out
    directly in DFT-bin units (cycles per window length); the sign and
    scale are pinned by the on-grid calibration test of the instantaneous
    frequency estimator.
    """
    if window_len < 2:
        raise ValueError("window_len must be at least 2")
    l = np.arange(window_len)
    return 0.5 * np.sin(2.0 * np.pi * l / window_len)


def shifted_square_sum(w: np.ndarray, hop: int) -> np.ndarray:
    """Periodic lattice sum s[l] = sum_n w^2[l - n*hop] (hop must divide L)."""
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[0]
    if n % hop != 0:
        raise ValueError("hop must divide the window length")
    per_residue = w.reshape(-1, hop) ** 2
    return np.tile(per_residue.sum(axis=0), n // hop)


def canonical_tight_window(w: np.ndarray, hop: int) -> np.ndarray:
    """Normalize a window so the cover-mode STFT is a Parseval tight frame.

    Returns w[l] / sqrt(L * sum_n w^2[l - n*hop]).  The extra factor L
    absorbs the unnormalized DFT so that ||stft(x)||_F == ||x||_2 and the
    windowed overlap-add inverse is exact with the same window on both
    sides (frame bound one).
    """
    w = np.asarray(w, dtype=np.float64)
    if hop < 1 or hop * 2 > w.shape[0]:
        raise ValueError("hop must satisfy 1 <= hop <= len(w)/2")
    denom = shifted_square_sum(w, hop)
    if np.any(denom <= 0.0):
        raise ValueError("window/hop incompatible: shifted squared sum has zeros")
    return w / np.sqrt(w.shape[0] * denom)


def analysis_window(config: StftConfig) -> np.ndarray:
    """The window named by ``config.window_kind``."""
    w = hann_window(config.window_len)
    if config.window_kind == "hann_tight":
        return canonical_tight_window(w, config.hop)
    return w


def frame_count(origin_len: int, config: StftConfig, framing: str) -> int:
    """Number of frames produced by the given framing rule."""
    L, a = config.window_len, config.hop
    if framing == "cover":
        return -(-origin_len // a) + L // a - 1
    if framing == "valid":
        if origin_len < L:
            raise ValueError("valid framing requires the signal to span a full window")
        return (origin_len - L) // a + 1
    raise ValueError(f"unknown framing: {framing!r}")


def _pad_left(config: StftConfig, framing: str) -> int:
    return config.window_len - config.hop if framing == "cover" else 0


def frame_signal(x: np.ndarray, config: StftConfig, framing: str = "cover") -> np.ndarray:
    """Arrange a signal into the L x T patch matrix used by the transform."""
    x = np.asarray(x)
    if x.ndim != 1 or x.shape[0] == 0:
        raise ValueError("signal must be a non-empty 1-D array")
    L, a = config.window_len, config.hop
    n_frames = frame_count(x.shape[0], config, framing)
    total = a * (n_frames - 1) + L
    if framing == "valid":
        return np.lib.stride_tricks.sliding_window_view(x[:total], L)[::a].T
    left = _pad_left(config, framing)
    padded = np.zeros(total, dtype=np.promote_types(x.dtype, np.float64))
    padded[left : left + x.shape[0]] = x
    return np.lib.stride_tricks.sliding_window_view(padded, L)[::a].T


def stft(
    x: SignalBuffer | np.ndarray,
    config: StftConfig,
    w: np.ndarray,
    framing: str = "cover",
) -> Spectrogram:
    """Forward STFT of a real or complex signal.

    ``w`` must have length ``config.window_len``.  Rows are DFT bins
    0..K-1 (two-sided), columns are frames in time order.
    """
    if isinstance(x, SignalBuffer):
        samples, rate = x.samples, x.sample_rate_hz
    else:
        samples, rate = np.asarray(x), 1.0
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (config.window_len,):
        raise ValueError("window length does not match config.window_len")
    if framing not in FRAMINGS:
        raise ValueError(f"unknown framing: {framing!r}")
    patches = frame_signal(samples, config, framing)
    data = np.fft.fft(w[:, None] * patches, n=config.fft_size, axis=0)
    return Spectrogram(
        data=data,
        config=config,
        origin_len=samples.shape[0],
        sample_rate_hz=rate,
        framing=framing,
    )


def istft(spec: Spectrogram, w_synth: np.ndarray) -> SignalBuffer:
    """Windowed overlap-add inverse of a cover-mode STFT.

    For the canonical tight window as both analysis and synthesis window
    this reconstructs the original samples exactly (up to roundoff); it is
    also the adjoint of :func:`stft` restricted to real signals, which the
    ADMM solver relies on.
    """
    if spec.framing != "cover":
        raise ValueError("only cover-mode spectrograms are invertible")
    w_synth = np.asarray(w_synth, dtype=np.float64)
    L, a = spec.config.window_len, spec.config.hop
    if w_synth.shape != (L,):
        raise ValueError("synthesis window length does not match config.window_len")
    frames = np.fft.ifft(spec.data, axis=0) * spec.config.fft_size
    frames *= w_synth[:, None]
    n_frames = spec.n_frames
    buf = np.zeros(a * (n_frames - 1) + L, dtype=np.complex128)
    for tau in range(n_frames):
        buf[a * tau : a * tau + L] += frames[:, tau]
    left = _pad_left(spec.config, spec.framing)
    out = buf[left : left + spec.origin_len].real
    return SignalBuffer(out, spec.sample_rate_hz)


def one_sided(data: np.ndarray) -> np.ndarray:
    """Rows 0..K/2 (inclusive) of a two-sided spectrogram matrix."""
    data = np.asarray(data)
    return data[: data.shape[0] // 2 + 1, :]
