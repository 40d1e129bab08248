"""Pure-numpy Viterbi kernel (fallback when the C extension is unavailable).

The trellis is processed for a whole batch of equal-length blocks at once so
the per-step Python overhead amortizes across the batch. Semantics are
identical to :mod:`scmlink._viterbi_cy`, which the test suite checks.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def decode_batch(
    r: np.ndarray,
    prev_state: np.ndarray,
    prev_pattern: np.ndarray,
    n_tail: int,
    terminated: bool,
) -> np.ndarray:
    """Decode a batch of rate-1/2 blocks.

    Parameters
    ----------
    r : float64 [batch, steps, 2]
        Received values per trellis step, one per code bit. Hard decisions
        are passed as 0.0/1.0; soft inputs as reliabilities toward bit 1.
        The branch metric is ``|r - expected_bit|`` summed over the pair,
        which reduces to the Hamming distance for hard input.
    prev_state, prev_pattern : int32 [num_states, 2]
        Predecessor state and output-pattern index (o0*2 + o1) for each of
        the two transitions entering every state.
    n_tail : int
        Number of trailing tail bits to strip from the decided sequence.
    terminated : bool
        Trace back from the zero state (zero-tailed blocks) instead of the
        best-metric final state.
    """
    r = np.ascontiguousarray(r, dtype=np.float64)
    batch, steps, _ = r.shape
    num_states = prev_state.shape[0]
    shift = num_states.bit_length() - 2  # input bit sits in the state's top bit

    pm = np.full((batch, num_states), np.inf)
    pm[:, 0] = 0.0
    decisions = np.empty((steps, batch, num_states), dtype=np.uint8)
    a0 = np.abs(r[:, :, 0])
    b0 = np.abs(1.0 - r[:, :, 0])
    a1 = np.abs(r[:, :, 1])
    b1 = np.abs(1.0 - r[:, :, 1])
    for t in range(steps):
        m4 = np.stack(
            (a0[:, t] + a1[:, t], a0[:, t] + b1[:, t], b0[:, t] + a1[:, t], b0[:, t] + b1[:, t]),
            axis=1,
        )
        cand = pm[:, prev_state] + m4[:, prev_pattern]  # [batch, num_states, 2]
        sel = np.argmin(cand, axis=2).astype(np.uint8)
        pm = np.take_along_axis(cand, sel[:, :, None], axis=2)[:, :, 0]
        decisions[t] = sel

    bits = np.empty((batch, steps), dtype=np.uint8)
    state = (
        np.zeros(batch, dtype=np.int64)
        if terminated
        else np.argmin(pm, axis=1).astype(np.int64)
    )
    rows = np.arange(batch)
    for t in range(steps - 1, -1, -1):
        bits[:, t] = state >> shift
        sel = decisions[t][rows, state]
        state = prev_state[state, sel].astype(np.int64)
    return bits[:, : steps - n_tail] if n_tail else bits
