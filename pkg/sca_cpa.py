"""
Correlation power analysis on the first-round PRESENT S-box.

Correlations come from a batch-mergeable accumulator (means, centered sums
of squares and cross products), so full-set attacks, prefix evolution and
the plain pearson() helper share one implementation. A column whose spread
is at rounding-noise level against its mean is treated as constant and
correlates to 0.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
import pandas as pd

from config import DEFAULT_MTD_STEP, TOOL_NAME, TOOL_VERSION, WORKERS, ZERO_VARIANCE_RTOL
from present_cipher import HAMMING_WEIGHT, NIBBLES, SBOX_ARRAY, format_state, nibble, nibble_matrix

logger = logging.getLogger(__name__)

GUESSES = 16


class MissingKeyError(ValueError):
    """An operation needs the true key but the trace set withholds it"""


class HypothesisKind(Enum):
    HAMMING_WEIGHT = "hw"
    HAMMING_DISTANCE = "hd"


@dataclass(frozen=True)
class HypothesisModel:
    kind: HypothesisKind = HypothesisKind.HAMMING_WEIGHT
    reference: Optional[int] = None

    def __post_init__(self):
        if self.kind is HypothesisKind.HAMMING_DISTANCE:
            if self.reference is None or not 0 <= self.reference <= 0xF:
                raise ValueError("Hamming-distance model needs a nibble reference")
        elif self.reference is not None:
            raise ValueError("Hamming-weight model takes no reference")

    def describe(self):
        if self.kind is HypothesisKind.HAMMING_DISTANCE:
            return f"HD(sbox(pt ^ k), {self.reference:X})"
        return "HW(sbox(pt ^ k))"


def hypothesis_matrix(plaintexts, nibble_idx, model=None):
    """n × 16 leakage predictions for every key guess of one nibble"""
    if not 0 <= nibble_idx < NIBBLES:
        raise ValueError(f"nibble index must lie in [0, {NIBBLES - 1}], got {nibble_idx}")
    model = model or HypothesisModel()
    pt = nibble_matrix(np.atleast_1d(np.asarray(plaintexts, dtype=np.uint64)))[:, nibble_idx]
    outputs = SBOX_ARRAY[pt[:, None] ^ np.arange(GUESSES, dtype=np.uint8)[None, :]]
    if model.kind is HypothesisKind.HAMMING_DISTANCE:
        outputs = outputs ^ np.uint8(model.reference)
    return HAMMING_WEIGHT[outputs].astype(float)


class CorrelationAccumulator:
    """Pearson correlation between every column of X and every column of Y, fed in batches"""

    def __init__(self, x_columns, y_columns):
        self.n = 0
        self.mean_x = np.zeros(x_columns)
        self.mean_y = np.zeros(y_columns)
        self.m2_x = np.zeros(x_columns)
        self.m2_y = np.zeros(y_columns)
        self.cxy = np.zeros((x_columns, y_columns))

    def _combine(self, nb, mean_x, mean_y, m2_x, m2_y, cxy):
        total = self.n + nb
        dx = mean_x - self.mean_x
        dy = mean_y - self.mean_y
        weight = self.n * nb / total
        self.mean_x = self.mean_x + dx * (nb / total)
        self.mean_y = self.mean_y + dy * (nb / total)
        self.m2_x = self.m2_x + m2_x + dx ** 2 * weight
        self.m2_y = self.m2_y + m2_y + dy ** 2 * weight
        self.cxy = self.cxy + cxy + np.outer(dx, dy) * weight
        self.n = total

    def update(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if y.ndim == 1:
            y = y[:, None]
        if x.shape[0] != y.shape[0]:
            raise ValueError(f"batch length mismatch: {x.shape[0]} vs {y.shape[0]}")
        if x.shape[0] == 0:
            return self
        mx, my = x.mean(axis=0), y.mean(axis=0)
        xc, yc = x - mx, y - my
        self._combine(x.shape[0], mx, my, (xc ** 2).sum(axis=0), (yc ** 2).sum(axis=0), xc.T @ yc)
        return self

    def merge(self, other):
        if other.n:
            self._combine(other.n, other.mean_x, other.mean_y, other.m2_x, other.m2_y, other.cxy)
        return self

    def _spread(self, m2, mean):
        std = np.sqrt(m2 / max(self.n, 1))
        constant = std <= ZERO_VARIANCE_RTOL * np.abs(mean)
        return np.where(constant, 0.0, np.sqrt(m2)), constant

    def correlation(self):
        """x_columns × y_columns matrix, 0 wherever either column is constant"""
        if self.n < 2:
            return np.zeros_like(self.cxy)
        sx, flat_x = self._spread(self.m2_x, self.mean_x)
        sy, flat_y = self._spread(self.m2_y, self.mean_y)
        denom = np.outer(sx, sy)
        with np.errstate(divide='ignore', invalid='ignore'):
            r = np.where(denom > 0, self.cxy / np.where(denom > 0, denom, 1.0), 0.0)
        r[flat_x, :] = 0.0
        r[:, flat_y] = 0.0
        return np.clip(r, -1.0, 1.0)


def pearson(h, s):
    """Sample Pearson coefficient; 0 when either vector is constant"""
    h = np.asarray(h, dtype=float)
    s = np.asarray(s, dtype=float)
    if h.shape != s.shape or h.ndim != 1:
        raise ValueError(f"vectors must be 1-D of equal length, got {h.shape} and {s.shape}")
    if h.size < 2:
        raise ValueError("pearson needs at least two observations")
    return float(CorrelationAccumulator(1, 1).update(h, s).correlation()[0, 0])


def pearson_matrix(h, samples, batch_size=None):
    """Correlation of each hypothesis column against each sample column"""
    h = np.asarray(h, dtype=float)
    samples = np.asarray(samples)
    acc = CorrelationAccumulator(h.shape[1], samples.shape[1])
    step = batch_size or len(h)
    for start in range(0, len(h), max(step, 1)):
        acc.update(h[start:start + step], samples[start:start + step])
    return acc.correlation()


def _order(peaks):
    # decreasing peak, ties toward the smaller guess
    return [int(g) for g in np.lexsort((np.arange(len(peaks)), -peaks))]


def rank_guesses(corr):
    """Guesses by decreasing peak |r|, ties toward the smaller guess"""
    peaks = np.abs(corr).max(axis=1) if corr.shape[1] else np.zeros(corr.shape[0])
    return _order(peaks), peaks


@dataclass
class NibbleResult:
    nibble: int
    corr: np.ndarray = field(repr=False)
    ranking: List[int]
    peak_abs_corr: float
    peaks: np.ndarray = field(repr=False)

    @property
    def best_guess(self):
        return self.ranking[0]

    def rank_of(self, guess):
        return self.ranking.index(guess)


def _require_traces(ts):
    if len(ts) == 0:
        raise ValueError("trace set is empty")


def cpa_nibble(ts, nibble_idx, model=None):
    """Correlation matrix and key-guess ranking for one round-key nibble"""
    _require_traces(ts)
    h = hypothesis_matrix(ts.plaintexts, nibble_idx, model)
    corr = pearson_matrix(h, ts.samples)
    ranking, peaks = rank_guesses(corr)
    return NibbleResult(nibble=nibble_idx, corr=corr, ranking=ranking,
                        peak_abs_corr=float(peaks[ranking[0]]), peaks=peaks)


@dataclass
class CpaResult:
    per_nibble: List[NibbleResult]
    recovered_roundkey: int
    n_traces: int
    model: HypothesisModel = field(default_factory=HypothesisModel)
    true_roundkey: Optional[int] = None
    mtd: Optional[int] = None

    @property
    def success(self):
        """None for a blind attack"""
        if self.true_roundkey is None:
            return None
        return self.recovered_roundkey == self.true_roundkey

    @property
    def correct_nibbles(self):
        if self.true_roundkey is None:
            return None
        return sum(r.best_guess == nibble(self.true_roundkey, r.nibble) for r in self.per_nibble)

    def to_dict(self):
        nibbles = []
        for r in self.per_nibble:
            entry = {
                'nibble': r.nibble,
                'best_guess': r.best_guess,
                'ranking': r.ranking,
                'peak_abs_corr': r.peak_abs_corr,
            }
            if self.true_roundkey is not None:
                true_guess = nibble(self.true_roundkey, r.nibble)
                entry['true_guess'] = true_guess
                entry['true_rank'] = r.rank_of(true_guess) + 1
            nibbles.append(entry)
        result = {
            'tool': TOOL_NAME,
            'version': TOOL_VERSION,
            'n_traces': self.n_traces,
            'model': self.model.describe(),
            'recovered_roundkey': format_state(self.recovered_roundkey),
            'nibbles': nibbles,
        }
        if self.true_roundkey is not None:
            result['success'] = self.success
            result['correct_nibbles'] = self.correct_nibbles
            result['mtd'] = self.mtd
        return result

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def correlation_frame(self, nibble_idx):
        """Long-format (guess, sample, corr, abs_corr) table of one nibble"""
        corr = self.per_nibble[nibble_idx].corr
        guesses, samples = np.meshgrid(np.arange(corr.shape[0]), np.arange(corr.shape[1]), indexing='ij')
        return pd.DataFrame({
            'guess': guesses.ravel(),
            'sample': samples.ravel(),
            'corr': corr.ravel(),
            'abs_corr': np.abs(corr).ravel(),
        })


def cpa_full(ts, model=None, workers=None):
    """Attack all 16 nibbles; success is reported only when the key is known"""
    _require_traces(ts)
    model = model or HypothesisModel()
    workers = workers or WORKERS
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_nibble = list(pool.map(lambda j: cpa_nibble(ts, j, model), range(NIBBLES)))
    else:
        per_nibble = [cpa_nibble(ts, j, model) for j in range(NIBBLES)]

    recovered = 0
    for r in per_nibble:
        recovered = (recovered << 4) | r.best_guess
    result = CpaResult(per_nibble=per_nibble, recovered_roundkey=recovered, n_traces=len(ts),
                       model=model, true_roundkey=ts.round_key)
    logger.info("CPA on %d traces recovered %s (success=%s)", len(ts),
                format_state(recovered), result.success)
    return result


def checkpoints(n, step):
    """Prefix sizes: multiples of step, then n itself"""
    if step < 1:
        raise ValueError(f"step must be at least 1, got {step}")
    if n < 1:
        raise ValueError("trace set is empty")
    points = list(range(step, n + 1, step))
    if not points or points[-1] != n:
        points.append(n)
    return points


def _prefix_peaks(ts, step, model):
    """Yield (prefix size, nibbles × guesses peak |r|), streaming the traces once"""
    acc = CorrelationAccumulator(NIBBLES * GUESSES, ts.meta.n_samples)
    start = 0
    for stop in checkpoints(len(ts), step):
        h = np.hstack([hypothesis_matrix(ts.plaintexts[start:stop], j, model) for j in range(NIBBLES)])
        acc.update(h, ts.samples[start:stop])
        start = stop
        yield stop, np.abs(acc.correlation()).max(axis=1).reshape(NIBBLES, GUESSES)


def prefix_evolution(ts, true_roundkey=None, step=DEFAULT_MTD_STEP, model=None):
    """
    Peak |r| of the true guess and of the best wrong guess, per nibble and
    prefix size. Traces are streamed once through one accumulator.
    """
    _require_traces(ts)
    true_roundkey = true_roundkey if true_roundkey is not None else ts.round_key
    if true_roundkey is None:
        raise MissingKeyError("prefix evolution needs the true round key")
    model = model or HypothesisModel()

    rows = []
    for size, peaks in _prefix_peaks(ts, step, model):
        for j in range(NIBBLES):
            true_guess = nibble(true_roundkey, j)
            rows.append({
                'n_traces': size,
                'nibble': j,
                'true_peak': float(peaks[j, true_guess]),
                'best_wrong_peak': float(np.delete(peaks[j], true_guess).max()),
                'true_rank': _order(peaks[j]).index(true_guess) + 1,
            })
    return pd.DataFrame(rows)


def guess_evolution(ts, step=DEFAULT_MTD_STEP, model=None):
    """Peak |r| of every guess per nibble and prefix size; needs no key"""
    _require_traces(ts)
    model = model or HypothesisModel()
    frames = []
    for size, peaks in _prefix_peaks(ts, step, model):
        nibbles, guesses = np.meshgrid(np.arange(NIBBLES), np.arange(GUESSES), indexing='ij')
        frames.append(pd.DataFrame({
            'n_traces': size,
            'nibble': nibbles.ravel(),
            'guess': guesses.ravel(),
            'peak_abs_corr': peaks.ravel(),
        }))
    return pd.concat(frames, ignore_index=True)


def mtd(ts, true_roundkey=None, step=DEFAULT_MTD_STEP, model=None, evolution=None):
    """
    Measurements to disclosure: the smallest checkpoint from which every
    nibble's true guess ranks first at all larger checkpoints, or None.
    """
    if true_roundkey is None:
        true_roundkey = ts.round_key
    if true_roundkey is None:
        raise MissingKeyError("measurements to disclosure needs the true round key")
    if evolution is None:
        evolution = prefix_evolution(ts, true_roundkey, step, model)
    disclosed = evolution.groupby('n_traces')['true_rank'].max().sort_index() == 1
    found = None
    for size, ok in zip(reversed(disclosed.index.tolist()), reversed(disclosed.tolist())):
        if not ok:
            break
        found = int(size)
    logger.info("Measurements to disclosure: %s", found if found is not None else "not found")
    return found
