"""Frame-level Markov chain models of detector dead time.

Dead time couples neighbouring bins: a detection blinds the next ``d``
bins, possibly across a frame boundary, so bin occupancies stop being
independent and the extracted key stops being uniformly random.  This
module builds the chains that quantify the effect:

* the bin-level detector chain and its closed-form entropy bound,
* two equivalent frame-level input chains over occupancy configurations,
  one state per admissible configuration (``bmcm``) or one state per
  (leading blind bins, free detections, trailing overhang) class
  (``rmcm``),
* the output chain over emitted PPM symbols (``omc``), obtained by
  absorbing over invalid frames,
* the compression ratio, i.e. the fraction of extracted bits that survive
  compression back to uniform randomness.

State classes in the reduced method are labelled ``(d_o, n_1, d_i)``:
``d_o`` counts bins at the start of a frame that are guaranteed empty by
downtime leaking in from the previous frame, ``d_i`` counts bins of
downtime leaking out into the next frame (which pins one detection at
position n-1-(d-d_i)), and ``n_1`` counts detections placed freely in the
remaining span.  Every configuration in a class has the same probability
and, under PPM, the same bit yield, so the class is a faithful lumping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import xlogy

from .csvio import fmt_float, render_csv
from .params import binary_entropy

__all__ = [
    "FrameChain",
    "StationaryResult",
    "ConvergenceError",
    "DetectorBound",
    "detector_chain_bound",
    "build_detector_chain",
    "bmcm_state_count",
    "rmcm_state_count",
    "select_method",
    "enumerate_bmcm_states",
    "build_imc",
    "stationary_distribution",
    "raw_rate",
    "valid_frame_prob",
    "build_omc",
    "compression_ratio",
    "adjusted_rate",
    "frame_distribution",
    "simulate_bin_occupancy",
    "frame_configuration_counts",
    "valid_symbol_sequence",
    "dump_chain",
    "sweep_rows",
    "sweep_csv",
    "SWEEP_HEADER",
]

_LOG2 = math.log(2.0)


class ConvergenceError(RuntimeError):
    pass


class FrameChain:
    """A finite Markov chain with labelled states and per-state bit yields.

    The transition matrix is materialized lazily: large input chains (the
    basic method has exponentially many states) can be enumerated and
    counted without paying for a dense matrix nobody asked for.
    """

    def __init__(self, kind, labels, bit_yield, n, d, p, matrix=None, matrix_builder=None, meta=None):
        self.kind = kind
        self.labels = list(labels)
        self.bit_yield = np.asarray(bit_yield, dtype=float)
        self.n = int(n)
        self.d = int(d)
        self.p = float(p)
        self._matrix = matrix
        self._builder = matrix_builder
        self.meta = meta or {}
        if len(self.labels) != len(self.bit_yield):
            raise ValueError("labels and bit_yield length mismatch")

    @property
    def num_states(self) -> int:
        return len(self.labels)

    @property
    def transition_matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = self._builder()
            self._builder = None
        m = self._matrix
        rowsum = m.sum(axis=1)
        if np.any(np.abs(rowsum - 1.0) > 1e-12):
            worst = float(np.abs(rowsum - 1.0).max())
            raise AssertionError(f"{self.kind} chain rows deviate from 1 by {worst:.3e}")
        return m

    def __repr__(self):
        return f"FrameChain(kind={self.kind!r}, states={self.num_states}, n={self.n}, d={self.d}, p={self.p})"


@dataclass(frozen=True)
class StationaryResult:
    distribution: np.ndarray
    entropy_rate: float
    residual: float


@dataclass(frozen=True)
class DetectorBound:
    """Entropy-rate bound of the bin-level detector chain.

    ``bits_per_bin`` is h(p)/(1+pd); ``bits_per_frame`` is n times that.
    ``as_printed`` keeps the alternative normalization h(p)/(n(1+pd)) that
    divides by the bin count instead; it is reported for reference but the
    per-frame value is the one consistent with the explicit chain.
    """

    bits_per_frame: float
    bits_per_bin: float
    as_printed: float


def detector_chain_bound(p: float, d: int, n: int) -> DetectorBound:
    if not (0 <= p <= 1):
        raise ValueError("p must be in [0, 1]")
    if d < 0 or n < 1:
        raise ValueError("need d >= 0 and n >= 1")
    h = binary_entropy(p)
    per_bin = h / (1.0 + p * d)
    return DetectorBound(
        bits_per_frame=n * per_bin,
        bits_per_bin=per_bin,
        as_printed=h / (n * (1.0 + p * d)),
    )


def build_detector_chain(p: float, d: int) -> FrameChain:
    """Bin-level chain: a ready state plus d downtime states.

    Requires d >= 1; with no dead time the state path carries no occupancy
    information and the closed-form bound covers that case.
    """
    if not (0 < p < 1):
        raise ValueError("p must be strictly inside (0, 1)")
    if d < 1:
        raise ValueError("build_detector_chain requires d >= 1")
    size = d + 1
    m = np.zeros((size, size))
    m[0, 0] = 1.0 - p
    m[0, 1] = p
    for j in range(1, d):
        m[j, j + 1] = 1.0
    m[d, 0] = 1.0
    labels = ["ready"] + [f"down{j}" for j in range(1, d + 1)]
    return FrameChain("detector", labels, np.zeros(size), n=1, d=d, p=p, matrix=m)


@lru_cache(maxsize=None)
def bmcm_state_count(n: int, d: int) -> int:
    """Number of basic-method states: N(n) = N(n-1) + N(n-1-d), N(n<1) = 1."""
    if d < 0:
        raise ValueError("d must be >= 0")
    if n < 1:
        return 1
    if d > n:
        raise ValueError("d must not exceed n")
    # iterative so deep recursions never hit the interpreter limit
    counts = [1] * (d + 1)  # values for n' = -d .. 0
    for m in range(1, n + 1):
        counts.append(counts[-1] + counts[-1 - d] if d > 0 else 2 * counts[-1])
    return counts[-1]


def rmcm_state_count(n: int, d: int) -> int:
    """Number of reduced-method states, by the double sum over leak pairs."""
    if d < 0 or d > n:
        raise ValueError("need 0 <= d <= n")

    def n_prime(d_i, d_o):
        return n - d_i if d_o == 0 else (n - d_i) - (d + 1 - d_o)

    total = 0
    for d_i in range(d + 1):
        total += n_prime(d_i, 0) // (d + 1) + 1
        for d_o in range(max(1 + d + d_i - n, 1), d + 1):
            total += n_prime(d_i, d_o) // (d + 1) + 1
    return total


def select_method(n: int, d: int) -> str:
    """Pick the construction with fewer states; ties go to the reduced one."""
    return "bmcm" if bmcm_state_count(n, d) < rmcm_state_count(n, d) else "rmcm"


def enumerate_bmcm_states(n: int, d: int):
    """All occupancy vectors of length n with detections at least d+1 apart.

    Returned as tuples of occupied positions ordered like the bit strings
    they correspond to (bin 0 is the most significant position).
    """
    states = []

    def build(pos, current, last_det):
        if pos == n:
            states.append(tuple(current))
            return
        build(pos + 1, current, last_det)
        if last_det is None or pos - last_det > d:
            current.append(pos)
            build(pos + 1, current, pos)
            current.pop()

    build(0, [], None)
    states.sort(key=lambda dets: sum(1 << (n - 1 - i) for i in dets))
    return states


def _bit_label(dets, n):
    bits = ["0"] * n
    for i in dets:
        bits[i] = "1"
    return "".join(bits)


def _leak_out(dets, n, d):
    if not dets:
        return 0
    return max(0, dets[-1] + d - (n - 1))


def _build_bmcm(n, d, p):
    states = enumerate_bmcm_states(n, d)
    size = len(states)
    q = 1.0 - p
    k = np.array([len(s) for s in states])
    first = np.array([s[0] if s else n for s in states])
    blind = np.array([sum(min(d, n - 1 - i) for i in s) for s in states])
    leak = np.array([_leak_out(s, n, d) for s in states])

    def build_matrix():
        # row depends on the source only through its leak-out, so build one
        # template per leak value and fan out
        templates = np.zeros((d + 1, size))
        for r in range(d + 1):
            compatible = first >= r
            expo = (n - r - k - blind).astype(float)
            templates[r] = np.where(compatible, (p ** k) * (q ** expo), 0.0)
        return templates[leak]

    yields = np.where(k == 1, math.log2(n), 0.0)
    labels = [_bit_label(s, n) for s in states]
    meta = {"dets": states, "leak_out": leak, "occupied": k}
    return FrameChain("bmcm", labels, yields, n, d, p, matrix_builder=build_matrix, meta=meta)


def _rmcm_free_size(n, d, a, b):
    return (n - a) if b == 0 else (n - a) - (d + 1 - b)


def _enumerate_rmcm_states(n, d):
    """Triplets (leak-in a, free detections k, leak-out b) in formula order."""
    states = []
    for a in range(d + 1):
        free = _rmcm_free_size(n, d, a, 0)
        for k in range(free // (d + 1) + 1):
            states.append((a, k, 0))
        for b in range(max(1 + d + a - n, 1), d + 1):
            free = _rmcm_free_size(n, d, a, b)
            for k in range(free // (d + 1) + 1):
                states.append((a, k, b))
    return states


def _build_rmcm(n, d, p):
    states = _enumerate_rmcm_states(n, d)
    size = len(states)
    q = 1.0 - p
    a_arr = np.array([s[0] for s in states])
    k_arr = np.array([s[1] for s in states])
    b_arr = np.array([s[2] for s in states])
    free = np.array([_rmcm_free_size(n, d, a, b) for a, k, b in states])
    counts = np.array([math.comb(f - k * d, k) for (a, k, b), f in zip(states, free)], dtype=float)
    occupied = k_arr + (b_arr > 0)

    def build_matrix():
        dets = (k_arr + (b_arr > 0)).astype(float)
        qexp = (free - k_arr * (d + 1)).astype(float)
        mass = counts * (p ** dets) * (q ** qexp)
        templates = np.zeros((d + 1, size))
        for r in range(d + 1):
            templates[r] = np.where(a_arr == r, mass, 0.0)
        return templates[b_arr]

    yields = np.where(occupied == 1, math.log2(n), 0.0)
    labels = [f"({a},{k},{b})" for a, k, b in states]
    meta = {
        "triplets": states,
        "leak_out": b_arr,
        "occupied": occupied,
        "config_count": counts,
        "free_size": free,
    }
    return FrameChain("rmcm", labels, yields, n, d, p, matrix_builder=build_matrix, meta=meta)


def build_imc(n: int, d: int, p: float, method: str = "auto") -> FrameChain:
    """Frame-level input chain for n bins, dead time d bins, occupancy p."""
    if d < 0 or d > n or n < 1:
        raise ValueError("need 1 <= n and 0 <= d <= n")
    if not (0 < p < 1):
        raise ValueError("chain construction needs p strictly inside (0, 1); "
                         "the degenerate limits are covered analytically")
    if method == "auto":
        method = select_method(n, d)
    if method == "bmcm":
        chain = _build_bmcm(n, d, p)
        expected = bmcm_state_count(n, d)
    elif method == "rmcm":
        chain = _build_rmcm(n, d, p)
        expected = rmcm_state_count(n, d)
    else:
        raise ValueError(f"unknown method {method!r}")
    if chain.num_states != expected:
        raise AssertionError(
            f"{method} produced {chain.num_states} states, formula says {expected}"
        )
    return chain


def _is_irreducible(matrix) -> bool:
    if np.all(matrix > 0):
        return True
    ncomp, _ = connected_components(csr_matrix(matrix > 0), directed=True, connection="strong")
    return ncomp == 1


def stationary_distribution(chain: FrameChain, tol: float = 1e-12, max_iter: int = 10**6) -> StationaryResult:
    """Stationary distribution and entropy rate of an irreducible chain.

    Power iteration on the lazy chain (I+P)/2, which shares the stationary
    vector but converges geometrically even for periodic chains; the
    reported residual is measured against P itself.
    """
    m = chain.transition_matrix
    if not _is_irreducible(m):
        raise ValueError(f"{chain.kind} chain is not irreducible; stationary state undefined")
    size = m.shape[0]
    x = np.full(size, 1.0 / size)
    residual = math.inf
    for _ in range(max_iter):
        y = x @ m
        residual = float(np.abs(y - x).sum())
        if residual < tol:
            x = y
            break
        x = 0.5 * (x + y)
        x /= x.sum()
    else:
        raise ConvergenceError(
            f"stationary distribution did not reach {tol} in {max_iter} iterations "
            f"(residual {residual:.3e})"
        )
    x = np.maximum(x, 0.0)
    x /= x.sum()
    row_entropy = -xlogy(m, m).sum(axis=1) / _LOG2
    entropy_rate = float(x @ row_entropy)
    cap = math.log2(size) if size > 1 else 0.0
    if entropy_rate > cap + 1e-9:
        raise AssertionError(
            f"entropy rate {entropy_rate} exceeds log2(states) = {cap}"
        )
    return StationaryResult(distribution=x, entropy_rate=entropy_rate, residual=residual)


def raw_rate(chain: FrameChain, scheme: str = "ppm", stationary: StationaryResult | None = None) -> float:
    """Average bits per frame: yields weighted by the stationary distribution."""
    if scheme != "ppm":
        raise NotImplementedError("only the PPM binning scheme is supported")
    if stationary is None:
        stationary = stationary_distribution(chain)
    return float(stationary.distribution @ chain.bit_yield)


def _leak_kernel(n, d, p):
    """Transition kernel of the leak-in process plus valid-frame resolution.

    Returns (W, B): W[r, r'] is the probability that a frame entered with r
    blind bins leaks r' bins into the next frame; B[r, j] is the
    probability that such a frame is PPM valid with its detection in bin j.
    """
    q = 1.0 - p
    W = np.zeros((d + 1, d + 1))
    B = np.zeros((d + 1, n))
    for r in range(d + 1):
        for rp in range(d + 1):
            free = _rmcm_free_size(n, d, r, rp)
            if free < 0:
                continue
            if rp > 0:
                acc = 0.0
                for k in range(free // (d + 1) + 1):
                    acc += math.comb(free - k * d, k) * p ** (k + 1) * q ** (free - k * (d + 1))
                W[r, rp] = acc
            else:
                acc = 0.0
                for k in range(free // (d + 1) + 1):
                    acc += math.comb(free - k * d, k) * p ** k * q ** (free - k * (d + 1))
                W[r, 0] = acc
        for j in range(r, n):
            B[r, j] = p * q ** float(n - r - 1 - min(d, n - 1 - j))
    return W, B


def _invalid_kernel(n, d, p):
    """Leak transitions through invalid frames only, as sums of positive terms.

    Valid frames are the k=0 term when downtime leaks out (the single
    detection is the pinned one) and the k=1 term when it does not, so the
    invalid mass is accumulated directly by skipping those terms rather
    than subtracting them; this keeps full relative accuracy even when
    valid frames carry almost no probability.
    """
    q = 1.0 - p
    T = np.zeros((d + 1, d + 1))
    for r in range(d + 1):
        for rp in range(d + 1):
            free = _rmcm_free_size(n, d, r, rp)
            if free < 0:
                continue
            skip = 0 if rp > 0 else 1
            acc = 0.0
            for k in range(free // (d + 1) + 1):
                if k == skip:
                    continue
                acc += math.comb(free - k * d, k) * p ** (k + (1 if rp else 0)) * q ** (free - k * (d + 1))
            T[r, rp] = acc
    return T


def _absorption_probabilities(T, B):
    """Absorption distribution rows for every transient start state.

    State elimination in the style of the GTH algorithm: every denominator
    is a sum of probabilities and nothing is ever subtracted, so the result
    keeps componentwise relative accuracy even when absorption is rare and
    (I - T) is nearly singular.
    """
    T = T.astype(float).copy()
    B = B.astype(float).copy()
    size = T.shape[0]
    for s in range(size - 1, 0, -1):
        denom = T[s, :s].sum() + B[s].sum()
        if denom <= 0:
            raise ConvergenceError("absorption impossible from some leak state")
        factor = T[:s, s] / denom
        T[:s, :s] += np.outer(factor, T[s, :s])
        B[:s, :] += np.outer(factor, B[s, :])
        T[:s, s] = 0.0
    A = np.zeros_like(B)
    total = B[0].sum()
    if total <= 0:
        raise ConvergenceError("absorption impossible from leak state 0")
    A[0] = B[0] / total
    for i in range(1, size):
        row = B[i] + T[i, :i] @ A[:i]
        A[i] = row / row.sum()
    return A


def valid_frame_prob(n: int, d: int, p: float) -> float:
    """Stationary probability that a frame is PPM valid (one occupied bin)."""
    if d == 0:
        return n * p * (1.0 - p) ** (n - 1)
    if not (0 < p < 1):
        raise ValueError("p must be strictly inside (0, 1)")
    W, B = _leak_kernel(n, d, p)
    nu = _solve_stationary_small(W)
    return float(nu @ B.sum(axis=1))


def _solve_stationary_small(W):
    size = W.shape[0]
    a = (W.T - np.eye(size)).copy()
    a[-1, :] = 1.0
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    return np.linalg.solve(a, rhs)


def build_omc(n: int, d: int, p: float) -> FrameChain:
    """Output chain over PPM symbols.

    The single occupied bin of a valid frame fixes the detector state at
    the frame boundary (residual downtime max(0, d-(n-1-i))), so symbols
    form a Markov chain once invalid frames in between are marginalized
    out.  Marginalization is an absorption problem over the d+1 leak-in
    values, solved exactly as a linear system.
    """
    if n < 2:
        raise ValueError("PPM output chain needs n >= 2")
    if d < 0 or d > n:
        raise ValueError("need 0 <= d <= n")
    if not (0 < p < 1):
        raise ValueError("p must be strictly inside (0, 1)")
    _, B = _leak_kernel(n, d, p)
    T = _invalid_kernel(n, d, p)
    A = _absorption_probabilities(T, B)
    residuals = np.array([max(0, j + d - (n - 1)) for j in range(n)])
    matrix = A[residuals]
    labels = [f"{j}|r{residuals[j]}" for j in range(n)]
    yields = np.full(n, math.log2(n))
    meta = {"residuals": residuals, "leak_absorption": A}
    return FrameChain("omc", labels, yields, n, d, p, matrix=matrix, meta=meta)


def compression_ratio(omc: FrameChain) -> float:
    """Entropy rate of the output chain over the raw bits per valid frame."""
    if omc.kind != "omc":
        raise ValueError("compression_ratio expects an output chain")
    result = stationary_distribution(omc)
    ratio = result.entropy_rate / math.log2(omc.n)
    if ratio > 1.0 + 1e-9:
        raise AssertionError(f"compression ratio {ratio} exceeds 1")
    return min(max(ratio, 0.0), 1.0)


def adjusted_rate(n: int, d: int, p: float) -> float:
    """Raw PPM rate corrected for the entropy lost to dead-time memory."""
    base = math.log2(n) * valid_frame_prob(n, d, p)
    if d == 0:
        return base  # no downtime, no compression required
    return base * compression_ratio(build_omc(n, d, p))


def frame_distribution(chain: FrameChain, stationary: StationaryResult | None = None) -> dict:
    """Stationary probability of each occupancy configuration.

    For the basic method this is just the state distribution.  For the
    reduced method each class spreads its mass uniformly over the
    configurations it represents, and a configuration can be reached under
    several leak-in values, so shares are summed across matching classes.
    """
    if stationary is None:
        stationary = stationary_distribution(chain)
    pi = stationary.distribution
    if chain.kind == "bmcm":
        return {label: float(prob) for label, prob in zip(chain.labels, pi)}
    if chain.kind != "rmcm":
        raise ValueError("frame_distribution applies to input chains")
    n, d = chain.n, chain.d
    triplets = chain.meta["triplets"]
    counts = chain.meta["config_count"]
    index = {t: i for i, t in enumerate(triplets)}
    out = {}
    for dets in enumerate_bmcm_states(n, d):
        b = _leak_out(dets, n, d)
        pinned = b > 0
        k_free = len(dets) - (1 if pinned else 0)
        first = dets[0] if dets else n
        total = 0.0
        for a in range(min(d, first) + 1):
            i = index.get((a, k_free, b))
            if i is not None and counts[i] > 0:
                total += pi[i] / counts[i]
        out[_bit_label(dets, n)] = total
    return out


def simulate_bin_occupancy(num_bins: int, p: float, d: int, seed: int) -> np.ndarray:
    """Direct simulation of the blinded Bernoulli bin process.

    Jumps from detection to detection with geometric draws, so the cost
    scales with the number of detections rather than the number of bins.
    """
    if not (0 < p < 1):
        raise ValueError("p must be strictly inside (0, 1)")
    rng = np.random.default_rng(seed)
    occupied = np.zeros(num_bins, dtype=bool)
    pos = 0  # next undetermined bin, detector ready
    expected = int(num_bins / (1.0 / p + d) * 1.1) + 16
    while pos < num_bins:
        gaps = rng.geometric(p, size=expected)
        detections = pos - 1 + np.cumsum(gaps + d) - d
        inside = detections[detections < num_bins]
        occupied[inside] = True
        if len(inside) < len(detections):
            break
        pos = int(detections[-1]) + d + 1
    return occupied


def frame_configuration_counts(occupied: np.ndarray, n: int):
    """Histogram of frame configurations from a simulated bin sequence."""
    frames = len(occupied) // n
    chunk = occupied[: frames * n].reshape(frames, n)
    weights = 1 << np.arange(n - 1, -1, -1)
    values = chunk @ weights
    counts = np.bincount(values, minlength=2**n)
    return {format(v, f"0{n}b"): int(c) for v, c in enumerate(counts) if c > 0}


def valid_symbol_sequence(occupied: np.ndarray, n: int) -> np.ndarray:
    """PPM symbols of the valid frames, in frame order."""
    frames = len(occupied) // n
    chunk = occupied[: frames * n].reshape(frames, n)
    valid = chunk.sum(axis=1) == 1
    return np.argmax(chunk[valid], axis=1)


def dump_chain(chain: FrameChain) -> str:
    """Text dump: one line per state, ``label  yield  row: target:prob ...``."""
    m = chain.transition_matrix
    lines = []
    for i, label in enumerate(chain.labels):
        entries = " ".join(
            f"{chain.labels[j]}:{fmt_float(m[i, j])}" for j in np.nonzero(m[i])[0]
        )
        lines.append(f"{label}  {fmt_float(chain.bit_yield[i])}  row: {entries}")
    return "\n".join(lines) + "\n"


SWEEP_HEADER = ("n", "d", "p", "states", "raw_rate", "c_dr", "adjusted_rate")


def sweep_rows(points):
    """Rows for (n, d, p) triples: state count, raw rate, compression, product."""
    rows = []
    for n, d, p in points:
        chain = build_imc(n, d, p)
        stat = stationary_distribution(chain)
        raw = raw_rate(chain, stationary=stat)
        c = 1.0 if d == 0 else compression_ratio(build_omc(n, d, p))
        rows.append((int(n), int(d), float(p), chain.num_states, raw, c, raw * c))
    return rows


def sweep_csv(points) -> str:
    return render_csv(SWEEP_HEADER, sweep_rows(points))
