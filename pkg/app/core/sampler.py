"""
Model-space Sampler
Metropolis-Hastings random walk over supports with add/delete/swap
neighborhoods, an exact-enumeration oracle and posterior summaries.

The proposal is uniform on N(S) = N_add(S) u N_del(S) u N_swap(S), with
N_add truncated at s_max. One integer draw in [0, |N(S)|) selects the move
class and the indices, so N(S) is never materialized.
"""
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from core.cache import FitCache
from core.config import get_settings
from core.exceptions import EnumerationTooLargeError, NoValidModelError
from core.marginal import log_posterior_weight
from families import get_family
from models.data import ChainState, Dataset, LogWeight, ModelSupport
from models.schemas import ChainDigest, ChainSettings, Hyperparams, PosteriorSummary, TopModel

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.SeedSequence]


# ==================== Proposal ====================

def neighborhood_counts(s: ModelSupport, p: int, s_max: int) -> Tuple[int, int, int]:
    k = s.size
    n_add = p - k if k < s_max else 0
    return n_add, k, k * (p - k)


def neighborhood_size(s: ModelSupport, p: int, s_max: int) -> int:
    return sum(neighborhood_counts(s, p, s_max))


def propose(s: ModelSupport, p: int, s_max: int, rng: np.random.Generator) -> Tuple[ModelSupport, float, float]:
    """Draw S' uniformly from N(S); returns (S', log q(S'|S), log q(S|S'))."""
    n_add, n_del, n_swap = neighborhood_counts(s, p, s_max)
    total = n_add + n_del + n_swap
    if total == 0:
        raise ValueError(f"empty neighborhood for {s} (p={p}, s_max={s_max})")

    u = int(rng.integers(total))
    outside = np.delete(np.arange(p), s.as_array())
    if u < n_add:
        proposal = s.add(int(outside[u]))
    elif u < n_add + n_del:
        proposal = s.remove(s.indices[u - n_add])
    else:
        v = u - n_add - n_del
        out, into = divmod(v, p - s.size)
        proposal = s.swap(s.indices[out], int(outside[into]))

    return proposal, -math.log(total), -math.log(neighborhood_size(proposal, p, s_max))


def log_acceptance(current: LogWeight, proposed: LogWeight, log_q_fwd: float, log_q_rev: float) -> float:
    """log of 1 ^ pi(S') q(S|S') / (pi(S) q(S'|S))."""
    if not proposed.is_valid:
        return -np.inf
    return min(0.0, proposed.value + log_q_rev - current.value - log_q_fwd)


def mh_step(
    state: ChainState,
    data: Dataset,
    family,
    h: Hyperparams,
    cache: FitCache,
    rng: np.random.Generator,
) -> ChainState:
    proposal, log_q_fwd, log_q_rev = propose(state.current, data.p, h.s_max, rng)
    weight = log_posterior_weight(proposal, data, family, h, cache)
    log_a = log_acceptance(state.current_logweight, weight, log_q_fwd, log_q_rev)

    accept = log_a == 0.0 or (np.isfinite(log_a) and math.log(rng.random()) < log_a)
    if accept:
        return ChainState(proposal, weight, state.iteration + 1, state.n_accepted + 1)
    return ChainState(state.current, state.current_logweight, state.iteration + 1, state.n_accepted)


# ==================== Chains ====================

@dataclass
class ChainRun:
    """Raw output of one chain: post-burn-in visit counts and acceptances."""
    visits: Counter
    n_iter: int
    n_burnin: int
    n_accepted: int
    final: ChainState
    seed_entropy: List[int] = field(default_factory=list)

    @property
    def acceptance_rate(self) -> float:
        return self.n_accepted / self.n_iter if self.n_iter else 0.0

    def frequencies(self) -> Dict[ModelSupport, float]:
        total = sum(self.visits.values())
        return {s: c / total for s, c in self.visits.items()}

    def modal_model(self) -> ModelSupport:
        return _rank(self.visits)[0][0]


def _rank(visits: Mapping[ModelSupport, int]) -> List[Tuple[ModelSupport, int]]:
    return sorted(visits.items(), key=lambda item: (-item[1], item[0].size, item[0].indices))


def _entropy(seed: Seed) -> List[int]:
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy if isinstance(seed.entropy, int) else int(seed.entropy[0])
        return [int(entropy), *[int(k) for k in seed.spawn_key]]
    return [int(seed)]


def sample_chain(
    data: Dataset,
    family,
    h: Hyperparams,
    n_iter: int,
    n_burnin: Optional[int] = None,
    init: Optional[ModelSupport] = None,
    seed: Seed = 0,
    cache: Optional[FitCache] = None,
) -> ChainRun:
    family = get_family(family)
    h.validate_for(data.n, data.p)
    n_burnin = n_iter // 10 if n_burnin is None else n_burnin
    if not 0 <= n_burnin < n_iter:
        raise ValueError(f"need 0 <= n_burnin < n_iter, got {n_burnin} and {n_iter}")
    cache = cache or FitCache(data, family)
    init = (init or ModelSupport.empty()).check_bounds(data.p)

    weight = log_posterior_weight(init, data, family, h, cache)
    if not weight.is_valid:
        raise NoValidModelError(f"initial model {init} has no posterior weight ({weight.status})")

    rng = np.random.default_rng(seed)
    state = ChainState(init, weight)
    visits: Counter = Counter()
    for i in range(n_iter):
        state = mh_step(state, data, family, h, cache, rng)
        if i >= n_burnin:
            visits[state.current] += 1

    run = ChainRun(visits, n_iter, n_burnin, state.n_accepted, state, _entropy(seed))
    logger.info(
        f"Chain finished: {n_iter} iterations, acceptance {run.acceptance_rate:.3f}, "
        f"{len(visits)} models visited, cache {cache.stats()}"
    )
    return run


def summarize(
    runs: Sequence[ChainRun],
    data: Dataset,
    family,
    h: Hyperparams,
    cache: Optional[FitCache] = None,
    top_k: Optional[int] = None,
) -> PosteriorSummary:
    """Merge chains in order and build the posterior summary."""
    cache = cache or FitCache(data, family)
    top_k = top_k or get_settings().top_k
    visits: Counter = Counter()
    for run in runs:
        visits.update(run.visits)
    total = sum(visits.values())

    inclusion = np.zeros(data.p)
    for s, count in visits.items():
        inclusion[list(s.indices)] += count
    inclusion /= total

    top_models = []
    for s, count in _rank(visits)[:top_k]:
        weight = log_posterior_weight(s, data, family, h, cache)
        top_models.append(TopModel(
            indices=list(s.indices),
            labels=[data.labels[j] for j in s.indices],
            visits=count,
            log_weight=weight.value,
            log_prior=weight.log_prior,
            log_laplace=weight.log_laplace,
        ))

    n_iter = sum(r.n_iter for r in runs)
    return PosteriorSummary(
        inclusion_prob=[float(q) for q in np.clip(inclusion, 0.0, 1.0)],
        top_models=top_models,
        acceptance_rate=sum(r.n_accepted for r in runs) / n_iter,
        n_iter=n_iter,
        n_burnin=sum(r.n_burnin for r in runs),
        n_chains=len(runs),
    )


def run_chain(
    data: Dataset,
    family,
    h: Hyperparams,
    n_iter: int,
    n_burnin: Optional[int] = None,
    init: Optional[ModelSupport] = None,
    seed: Seed = 0,
    cache: Optional[FitCache] = None,
    top_k: Optional[int] = None,
) -> PosteriorSummary:
    cache = cache or FitCache(data, family)
    run = sample_chain(data, family, h, n_iter, n_burnin, init, seed, cache)
    return summarize([run], data, family, h, cache, top_k)


def run_chains(
    data: Dataset,
    family,
    h: Hyperparams,
    chain: ChainSettings,
    cache: Optional[FitCache] = None,
    threads: int = 1,
) -> Tuple[PosteriorSummary, List[ChainRun], List[ChainDigest]]:
    """
    Independent chains on worker threads sharing one fit cache. Chain seeds
    are spawned from chain.seed; merging follows chain order.
    """
    cache = cache or FitCache(data, family)
    seeds = np.random.SeedSequence(chain.seed).spawn(chain.n_chains)
    init = ModelSupport.of(chain.init)

    def one(seed):
        return sample_chain(data, family, h, chain.n_iter, chain.burnin, init, seed, cache)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        runs = list(executor.map(one, seeds))

    digests = [
        ChainDigest(
            chain=i,
            seed_entropy=run.seed_entropy,
            acceptance_rate=run.acceptance_rate,
            modal_model=list(run.modal_model().indices),
        )
        for i, run in enumerate(runs)
    ]
    return summarize(runs, data, family, h, cache, chain.top_k), runs, digests


# ==================== Exact enumeration ====================

def count_supports(p: int, s_max: int) -> int:
    return sum(math.comb(p, s) for s in range(min(p, s_max) + 1))


def enumerate_exact(
    data: Dataset,
    family,
    h: Hyperparams,
    cache: Optional[FitCache] = None,
    limit: Optional[int] = None,
) -> Dict[ModelSupport, float]:
    """Normalized posterior over every support with |S| <= s_max (invalid models excluded)."""
    limit = limit or get_settings().enumeration_limit
    total = count_supports(data.p, h.s_max)
    if total > limit:
        raise EnumerationTooLargeError(f"{total} supports exceed the enumeration limit {limit}")
    cache = cache or FitCache(data, family)

    supports, weights = [], []
    for size in range(min(data.p, h.s_max) + 1):
        for combo in combinations(range(data.p), size):
            s = ModelSupport(combo)
            w = log_posterior_weight(s, data, family, h, cache)
            if w.is_valid:
                supports.append(s)
                weights.append(w.value)
    if not supports:
        raise NoValidModelError("every enumerated model is invalid")

    log_norm = logsumexp(weights)
    return {s: float(math.exp(w - log_norm)) for s, w in zip(supports, weights)}


def exact_inclusion_probabilities(probs: Mapping[ModelSupport, float], p: int) -> np.ndarray:
    inclusion = np.zeros(p)
    for s, prob in probs.items():
        inclusion[list(s.indices)] += prob
    return inclusion


def total_variation(first: Mapping[ModelSupport, float], second: Mapping[ModelSupport, float]) -> float:
    keys = set(first) | set(second)
    return 0.5 * sum(abs(first.get(k, 0.0) - second.get(k, 0.0)) for k in keys)


def modal_model(probs: Mapping[ModelSupport, float]) -> ModelSupport:
    return min(probs, key=lambda s: (-probs[s], s.size, s.indices))
