"""Continuous-time nearest-neighbour dynamics on interlacing arrays.

The array ``lambda^(1) < ... < lambda^(N)`` evolves by independent jumps
(rates ``w``) and instantaneous propagation to the level above: a move of a
level-(h-1) particle pushes its top-left neighbour with probability ``l``,
its nearest free top-right neighbour with probability ``r``, and forces the
move of the particle directly above when interlacing would otherwise break.

Three profiles are supported in the Schur regime (``push_left``,
``push_right``, ``independent``) and two in the q regime (``push_left``,
``independent``); their edge columns give (q-)PushTASEP and (q-)TASEP.
"""

from __future__ import annotations

import bisect
import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .rng import as_generator
from .symfun import Signature, interlaces, qwhittaker_principal

KINDS = ("clock", "push_left", "push_right", "forced")


@dataclass(frozen=True)
class DynamicsProfile:
    regime: str = "schur"
    choice: str = "independent"
    q: float = 0.0

    def __post_init__(self):
        if self.regime not in ("schur", "q"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.choice not in ("push_left", "push_right", "independent"):
            raise ValueError(f"unknown profile {self.choice!r}")
        if self.regime == "q":
            if not 0 <= self.q < 1:
                raise ValueError("q must lie in [0, 1)")
            if self.choice == "push_right":
                raise ValueError("push_right has no q-deformation: the rate equations "
                                 "force negative probabilities")

    @property
    def qq(self) -> float:
        return 0.0 if self.regime == "schur" else float(self.q)


@dataclass
class LocalRates:
    """Solution of the rate equations for one pair of adjacent levels.

    ``w[j-1]`` is the jump rate of upper particle ``j``; ``l[j-1]`` and
    ``r[j-1]`` are the propagation probabilities attached to lower particle
    ``j`` (meaningful when it has just moved); ``target_r[j-1]`` is the upper
    index pushed by ``r``.
    """
    w: list[float]
    l: list[float]
    r: list[float]
    target_r: list[int]
    free: list[int]
    residual: float = 0.0


@dataclass
class ArrayState:
    rows: list[list[int]]
    time: float = 0.0

    @classmethod
    def packed(cls, N: int) -> "ArrayState":
        return cls([[0] * h for h in range(1, N + 1)], 0.0)

    @property
    def N(self) -> int:
        return len(self.rows)

    def pattern(self) -> tuple[Signature, ...]:
        return tuple(tuple(r) for r in self.rows)

    def check(self) -> None:
        for h in range(1, self.N):
            if not interlaces(self.rows[h - 1], self.rows[h]):
                raise AssertionError(f"interlacing broken between levels {h} and {h + 1}: "
                                     f"{self.rows[h - 1]} vs {self.rows[h]}")


@dataclass
class EventLog:
    events: list[tuple[float, int, int, str]] = field(default_factory=list)

    def add(self, time, level, index, kind):
        self.events.append((time, level, index, kind))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["time", "level", "index", "kind"])
        for t, h, j, k in self.events:
            wr.writerow([repr(float(t)), h, j, k])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# rate equations
# ---------------------------------------------------------------------------

def _qpow(q: float, n: float) -> float:
    if math.isinf(n):
        return 0.0
    return q ** n


def T_coeff(i: int, mu: Sequence[int], lam: Sequence[int], q: float) -> float:
    """T_i for lower particle i (1-based); absent neighbours drop their factor."""
    h = len(lam)
    if i >= h:
        return 0.0
    mu_prev = math.inf if i == 1 else mu[i - 2]
    out = (1 - _qpow(q, mu[i - 1] - lam[i])) * (1 - _qpow(q, mu_prev - mu[i - 1] + 1))
    return out / (1 - _qpow(q, lam[i - 1] - mu[i - 1] + 1))


def S_coeff(j: int, mu: Sequence[int], lam: Sequence[int], q: float) -> float:
    """S_j for upper particle j (1-based)."""
    h = len(lam)
    mu_prev = math.inf if j == 1 else mu[j - 2]
    lam_next = -math.inf if j == h else lam[j]
    out = (1 - _qpow(q, mu_prev - lam[j - 1])) * (1 - _qpow(q, lam[j - 1] - lam_next + 1))
    if j <= h - 1:
        out /= 1 - _qpow(q, lam[j - 1] - mu[j - 1] + 1)
    return out


def free_indices(mu: Sequence[int], lam: Sequence[int]) -> list[int]:
    """Upper indices j (1-based) with lam_j < mu_{j-1}; j = 1 is always free."""
    return [j for j in range(1, len(lam) + 1) if j == 1 or lam[j - 1] < mu[j - 2]]


def solve_local_rates(profile: DynamicsProfile, lower: Sequence[int],
                      upper: Sequence[int]) -> LocalRates:
    """Solve the rate equations of the chosen profile for the pair (lower, upper).

    For the propagation probabilities ``lower`` is the state right after the
    move of the lower particle. The linear equations

        T_{j_{m+1}} r_{j_{m+1}} + T_{j_m} l_{j_m} + w_{j_m + 1} = S_{j_m + 1}

    over the free indices are solved sequentially and the unused last
    equation is returned as ``residual``.
    """
    lam = tuple(upper)
    h = len(lam)
    mu = tuple(lower)
    if len(mu) != h - 1:
        raise ValueError("lower level must be one shorter than the upper level")
    q = profile.qq
    w = [0.0] * h
    l = [0.0] * max(h - 1, 0)
    r = [0.0] * max(h - 1, 0)
    target_r = [0] * max(h - 1, 0)
    if h == 1:
        return LocalRates([1.0], [], [], [], [1])
    F = free_indices(mu, lam)
    kappa = len(F)
    for m in range(1, kappa):
        target_r[F[m] - 2] = F[m - 1]
    S = {f: S_coeff(f, mu, lam, q) for f in F}
    T = {f - 1: T_coeff(f - 1, mu, lam, q) for f in F[1:]}
    choice = profile.choice
    residual = 0.0
    if choice == "independent":
        for f in F:
            w[f - 1] = S[f]
    elif choice == "push_right":
        for m, f in enumerate(F):
            if m >= 1:
                r[f - 2] = 1.0
            nxt = T[F[m + 1] - 1] if m + 1 < kappa else 0.0
            w[f - 1] = S[f] - nxt
    else:  # push_left
        w[0] = 1.0
        for m, f in enumerate(F):
            lhs = w[f - 1]
            if m >= 1:
                lhs += T[f - 1] * l[f - 2]
            rem = S[f] - lhs
            if m + 1 < kappa:
                jn = F[m + 1] - 1
                r[jn - 1] = rem / T[jn]
                l[jn - 1] = 1.0 - r[jn - 1]
            else:
                residual = rem
    return LocalRates(w, l, r, target_r, F, residual)


def qpush_r_closed(j: int, mu_pre: Sequence[int], lam: Sequence[int], q: float) -> float:
    """Closed form of r_j for q/push_left in coordinates before the lower move.

    ``r_1 = q^(lam_1 - mu_1)`` and
    ``r_j = q^(lam_j - mu_j) (1 - q^(mu_{j-1} - lam_j)) / (1 - q^(mu_{j-1} - mu_j))``.
    """
    if j == 1:
        return q ** (lam[0] - mu_pre[0])
    num = q ** (lam[j - 1] - mu_pre[j - 1]) * (1 - q ** (mu_pre[j - 2] - lam[j - 1]))
    return num / (1 - q ** (mu_pre[j - 2] - mu_pre[j - 1]))


# ---------------------------------------------------------------------------
# generic event-driven engine
# ---------------------------------------------------------------------------

def _level_rates(state: ArrayState, profile: DynamicsProfile) -> list[list[float]]:
    out = []
    for h in range(1, state.N + 1):
        if h == 1:
            out.append([1.0])
        else:
            out.append(solve_local_rates(profile, state.rows[h - 2], state.rows[h - 1]).w)
    return out


def _propagate(state: ArrayState, profile: DynamicsProfile, h: int, j: int, old: int,
               rng, log: EventLog | None) -> None:
    """Resolve the consequences of the move of particle j at level h (1-based)."""
    while h < state.N:
        upper = state.rows[h]
        if upper[j - 1] == old:
            kind, nj = "forced", j
        else:
            rates = solve_local_rates(profile, state.rows[h - 1], upper)
            if profile.regime == "q" and profile.choice == "push_left":
                pre = list(state.rows[h - 1])
                pre[j - 1] = old
                rates.r[j - 1] = qpush_r_closed(j, pre, upper, profile.q)
                rates.l[j - 1] = 1.0 - rates.r[j - 1]
            u = rng.random()
            if u < rates.l[j - 1]:
                kind, nj = "push_left", j + 1
            elif u < rates.l[j - 1] + rates.r[j - 1]:
                kind, nj = "push_right", rates.target_r[j - 1]
            else:
                return
        old = upper[nj - 1]
        upper[nj - 1] += 1
        h, j = h + 1, nj
        if log is not None:
            log.add(state.time, h, j, kind)


def evolve_array(state: ArrayState, t_end: float, profile: DynamicsProfile, rng=None,
                 log: bool = False, check: bool = False) -> tuple[ArrayState, EventLog | None]:
    """Exact Gillespie simulation of the array dynamics up to time ``t_end``.

    Rates are recomputed after every event, which is exact because the clocks
    are exponential. Each event is propagated through all higher levels
    before the next clock fires. The input state is copied.
    """
    rng = as_generator(rng)
    if t_end < state.time:
        raise ValueError("t_end precedes the current time")
    st = ArrayState([list(r) for r in state.rows], state.time)
    elog = EventLog() if log else None
    while True:
        rates = _level_rates(st, profile)
        flat = list(itertools.chain.from_iterable(rates))
        total = sum(flat)
        if total <= 0:
            break
        dt = rng.exponential(1.0 / total)
        if st.time + dt > t_end:
            break
        st.time += dt
        cum = list(itertools.accumulate(flat))
        k = min(bisect.bisect_right(cum, rng.random() * total), len(flat) - 1)
        h = 1
        while k >= h:
            k -= h
            h += 1
        j = k + 1
        old = st.rows[h - 1][j - 1]
        st.rows[h - 1][j - 1] += 1
        if elog is not None:
            elog.add(st.time, h, j, "clock")
        _propagate(st, profile, h, j, old, rng, elog)
        if check:
            st.check()
    st.time = t_end
    return st, elog


# ---------------------------------------------------------------------------
# fast kernel for the Schur independent profile
# ---------------------------------------------------------------------------

@numba.njit(cache=True)
def _schur_independent_kernel(N, picks):
    # flat storage: level h (0-based) occupies offsets h(h+1)/2 ... + h
    lam = np.zeros(N * (N + 1) // 2, dtype=np.int64)
    for p in range(picks.shape[0]):
        k = picks[p]
        h = 0
        while k > h:
            k -= h + 1
            h += 1
        j = k
        base = h * (h + 1) // 2
        if h > 0 and j > 0:
            # blocked by the lower particle up-left
            if lam[base + j] == lam[(h - 1) * h // 2 + j - 1]:
                continue
        old = lam[base + j]
        lam[base + j] += 1
        hh = h
        while hh + 1 < N:
            ub = (hh + 1) * (hh + 2) // 2
            if lam[ub + j] == old:
                old = lam[ub + j]
                lam[ub + j] += 1
                hh += 1
            else:
                break
    return lam


def evolve_schur_independent(N: int, t: float, rng=None) -> ArrayState:
    """Schur independent dynamics from the packed array, by uniformization.

    Proposals arrive at total rate ``N(N+1)/2`` and pick a particle uniformly;
    blocked particles ignore their proposal. Only forced moves propagate.
    """
    rng = as_generator(rng)
    M = N * (N + 1) // 2
    n = rng.poisson(M * t)
    picks = rng.integers(0, M, size=n)
    flat = _schur_independent_kernel(N, picks)
    rows = [list(map(int, flat[h * (h + 1) // 2: h * (h + 1) // 2 + h + 1])) for h in range(N)]
    return ArrayState(rows, t)


# ---------------------------------------------------------------------------
# one-dimensional marginals
# ---------------------------------------------------------------------------

MARGINALS = ("tasep", "pushtasep", "qtasep", "qpushtasep")


def marginal_initial(kind: str, N: int) -> list[int]:
    """Step initial data: ``y_h = -h`` for exclusion, ``y_h = h - 1`` for pushing."""
    if kind in ("tasep", "qtasep"):
        return [-h for h in range(1, N + 1)]
    if kind in ("pushtasep", "qpushtasep"):
        return [h - 1 for h in range(1, N + 1)]
    raise ValueError(f"unknown marginal {kind!r}")


def _marginal_rates(kind, y, q):
    N = len(y)
    out = []
    for h in range(N):
        if kind in ("pushtasep", "qpushtasep"):
            out.append(1.0)
        elif h == 0:
            out.append(1.0)
        else:
            gap = y[h - 1] - y[h] - 1
            out.append(float(gap > 0) if kind == "tasep" else 1.0 - q ** gap)
    return out


def run_marginal(kind: str, N: int, q: float, t: float, rng=None) -> list[int]:
    """Simulate one of the edge-column processes from step initial data.

    ``tasep``/``qtasep`` track ``y_h = lambda^(h)_h - h`` (particle 1 leads),
    ``pushtasep``/``qpushtasep`` track ``y_h = lambda^(h)_1 + h - 1`` (particle
    1 is leftmost and pushes to the right).
    """
    rng = as_generator(rng)
    y = marginal_initial(kind, N)
    time = 0.0
    while True:
        rates = _marginal_rates(kind, y, q)
        total = sum(rates)
        if total <= 0:
            break
        time += rng.exponential(1.0 / total)
        if time > t:
            break
        cum = list(itertools.accumulate(rates))
        h = min(bisect.bisect_right(cum, rng.random() * total), N - 1)
        old = y[h]
        y[h] += 1
        if kind == "pushtasep":
            while h + 1 < N and y[h + 1] == old + 1:
                old = y[h + 1]
                y[h + 1] += 1
                h += 1
        elif kind == "qpushtasep":
            while h + 1 < N:
                gap = y[h + 1] - old - 1
                if gap == 0 or rng.random() < q ** gap:
                    old = y[h + 1]
                    y[h + 1] += 1
                    h += 1
                else:
                    break
    return y


@numba.njit(cache=True)
def _marginal_batch_kernel(code, N, q, counts, picks, accept, pushu):
    R = counts.shape[0]
    out = np.empty((R, N), dtype=np.int64)
    y = np.empty(N, dtype=np.int64)
    p0 = 0
    u0 = 0
    for r in range(R):
        for h in range(N):
            y[h] = -(h + 1) if code < 2 else h
        for e in range(counts[r]):
            h = picks[p0 + e]
            acc = accept[p0 + e]
            if code == 0:
                if h > 0 and y[h - 1] - y[h] - 1 <= 0:
                    continue
            elif code == 1:
                if h > 0:
                    gap = y[h - 1] - y[h] - 1
                    if acc >= 1.0 - q ** gap:
                        continue
            old = y[h]
            y[h] += 1
            if code == 2:
                while h + 1 < N and y[h + 1] == old + 1:
                    old = y[h + 1]
                    y[h + 1] += 1
                    h += 1
            elif code == 3:
                while h + 1 < N:
                    gap = y[h + 1] - old - 1
                    u = pushu[u0]
                    u0 += 1
                    if gap == 0 or u < q ** gap:
                        old = y[h + 1]
                        y[h + 1] += 1
                        h += 1
                    else:
                        break
        p0 += counts[r]
        for h in range(N):
            out[r, h] = y[h]
    return out


def run_marginal_batch(kind: str, N: int, q: float, t: float, n_runs: int, rng=None) -> np.ndarray:
    """Many independent runs of :func:`run_marginal` by uniformization.

    Every particle receives proposals at rate 1; a proposal is accepted with
    probability equal to the current rate (all rates are at most 1).
    Returns an ``(n_runs, N)`` integer array of final positions.
    """
    rng = as_generator(rng)
    code = {"tasep": 0, "qtasep": 1, "pushtasep": 2, "qpushtasep": 3}[kind]
    counts = rng.poisson(N * t, size=n_runs)
    total = int(counts.sum())
    picks = rng.integers(0, N, size=total)
    accept = rng.random(total)
    pushu = rng.random(total * max(N - 1, 1)) if code == 3 else np.zeros(1)
    return _marginal_batch_kernel(code, N, float(q), counts, picks, accept, pushu)


# ---------------------------------------------------------------------------
# single-level jump process
# ---------------------------------------------------------------------------

def level_jump_rates(lam: Sequence[int], q: float) -> list[float]:
    """Rates of lam -> lam + e_j for the level-N marginal of the q-array.

    Rate = P_{lam+e_j}(1..1)/P_lam(1..1) * (1 - q^(lam_{j-1} - lam_j)), with
    the last factor equal to 1 for j = 1; q = 0 gives Schur dimension ratios.
    """
    lam = tuple(lam)
    base = qwhittaker_principal(lam, q=q)
    out = []
    for j in range(len(lam)):
        if j > 0 and lam[j - 1] == lam[j]:
            out.append(0.0)
            continue
        nl = list(lam)
        nl[j] += 1
        fac = 1.0 if j == 0 else 1 - q ** (lam[j - 1] - lam[j])
        out.append(qwhittaker_principal(tuple(nl), q=q) / base * fac)
    return out


def run_level_process(N: int, q: float, t: float, rng=None) -> tuple[int, ...]:
    """Single-level jump chain with q-Whittaker rates from the zero signature."""
    rng = as_generator(rng)
    lam = [0] * N
    time = 0.0
    while True:
        rates = level_jump_rates(lam, q)
        total = sum(rates)
        time += rng.exponential(1.0 / total)
        if time > t:
            return tuple(lam)
        cum = list(itertools.accumulate(rates))
        j = min(bisect.bisect_right(cum, rng.random() * total), N - 1)
        lam[j] += 1


# ---------------------------------------------------------------------------
# RSK from random words and last passage oracle
# ---------------------------------------------------------------------------

def insert_letter(rows: list[list[int]], letter: int) -> None:
    """Update the GT pattern of a word by appending ``letter`` (1-based).

    Particle ``lambda^(letter)_1`` jumps; each move of ``lambda^(h)_i``
    pushes ``lambda^(h+1)_i`` if they were equal before the move and
    ``lambda^(h+1)_{i+1}`` otherwise.
    """
    N = len(rows)
    h, i = letter, 1
    old = rows[h - 1][0]
    rows[h - 1][0] += 1
    while h < N:
        up = rows[h]
        ni = i if up[i - 1] == old else i + 1
        old = up[ni - 1]
        up[ni - 1] += 1
        h, i = h + 1, ni


def random_word(N: int, t: float, rng=None) -> list[tuple[float, int]]:
    """Poisson stars: letter j arrives at rate 1 for each j = 1..N on [0, t]."""
    rng = as_generator(rng)
    n = rng.poisson(N * t)
    times = np.sort(rng.random(n) * t)
    letters = rng.integers(1, N + 1, size=n)
    return [(float(s), int(j)) for s, j in zip(times, letters)]


def rsk_from_words(N: int, t: float, rng=None, return_word: bool = False):
    """GT pattern of depth N built from a Poisson random word on [0, t]."""
    word = random_word(N, t, rng)
    rows = pattern_from_word(N, word)
    pat = tuple(tuple(r) for r in rows)
    return (pat, word) if return_word else pat


def pattern_from_word(N: int, word: Sequence[tuple[float, int]]) -> list[list[int]]:
    rows = [[0] * h for h in range(1, N + 1)]
    for _, letter in sorted(word):
        insert_letter(rows, letter)
    return rows


def lpp_oracle(stars: Sequence[tuple[float, int]], h: int, j: int) -> int:
    """Maximal number of stars collected by j nonintersecting up-right paths.

    Path i starts in row i at time 0 and ends in row h - j + i at the
    horizon. The search is a dynamic programme over the rows occupied by the
    paths at each star time (strictly increasing tuples that only move up).
    """
    if j > h:
        raise ValueError("need j <= h")
    if len(stars) > 20:
        raise ValueError("oracle limited to 20 stars")
    if j == 0:
        return 0
    states = [s for s in itertools.combinations(range(1, h + 1), j)
              if all(i + 1 <= s[i] <= h - j + i + 1 for i in range(j))]
    NEG = -1
    best = {s: NEG for s in states}
    best[tuple(range(1, j + 1))] = 0
    for _, letter in sorted(stars):
        new = {}
        for s2 in states:
            top = NEG
            for s1, v in best.items():
                if v > top and all(a <= b for a, b in zip(s1, s2)):
                    top = v
            if top > NEG:
                top += letter in s2
            new[s2] = top
        best = new
    final = tuple(range(h - j + 1, h + 1))
    return max(v for s, v in best.items() if all(a <= b for a, b in zip(s, final)))
