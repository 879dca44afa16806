"""Bernoulli multi-armed bandits, optionally confounded by player intent.

A BanditEnv fixes per-arm success probabilities, either flat or per
confounder state. In the confounded case each state also determines the
arm a naive player would reach for (the intent); policies observe the
intent but never the state itself. Posteriors are Beta(α, β) starting
from (1, 1); regret is measured per round against the best arm given the
realized confounder state (a marginal-optimum benchmark is available
behind a flag). All randomness flows through one numpy PCG64 generator
seeded explicitly, so runs are reproducible.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import MissingIntent, SchemaMismatch, UnknownArm


@dataclass(frozen=True)
class BetaPosterior:
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("Beta parameters must be positive")

    def update(self, reward: int) -> "BetaPosterior":
        if reward not in (0, 1):
            raise ValueError("reward must be 0 or 1")
        return BetaPosterior(self.alpha + reward, self.beta + (1 - reward))

    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.beta(self.alpha, self.beta))


@dataclass(frozen=True)
class BanditEnv:
    """Arm success probabilities, per confounder state.

    payout[state][arm] is the Bernoulli success probability. An
    unconfounded environment has the single state "" and no intuition;
    a confounded one also maps each state to the intent arm.
    """

    payout: Mapping[str, tuple[float, ...]]
    confounder_states: tuple[str, ...] = ("",)
    confounder_probs: tuple[float, ...] = (1.0,)
    intuition: Optional[Mapping[str, int]] = None

    def __post_init__(self):
        object.__setattr__(
            self,
            "payout",
            {s: tuple(float(p) for p in v) for s, v in self.payout.items()},
        )
        states = tuple(self.confounder_states)
        object.__setattr__(self, "confounder_states", states)
        object.__setattr__(
            self, "confounder_probs", tuple(float(p) for p in self.confounder_probs)
        )
        if len(set(states)) != len(states) or not states:
            raise SchemaMismatch("confounder states must be nonempty and unique")
        if set(self.payout) != set(states):
            raise SchemaMismatch("payout rows must match confounder states")
        if len(self.confounder_probs) != len(states):
            raise SchemaMismatch("confounder probabilities must match states")
        if abs(sum(self.confounder_probs) - 1.0) > 1e-9 or any(
            p < 0 for p in self.confounder_probs
        ):
            raise SchemaMismatch("confounder probabilities must form a distribution")
        arm_counts = {len(v) for v in self.payout.values()}
        if len(arm_counts) != 1 or 0 in arm_counts:
            raise SchemaMismatch("every state needs the same nonzero arm count")
        for dist in self.payout.values():
            if any(not 0.0 <= p <= 1.0 for p in dist):
                raise SchemaMismatch("payout probabilities must lie in [0, 1]")
        if self.intuition is not None:
            object.__setattr__(self, "intuition", dict(self.intuition))
            if set(self.intuition) != set(states):
                raise SchemaMismatch("intuition must cover every confounder state")
            for arm in self.intuition.values():
                if not 0 <= arm < self.arms:
                    raise UnknownArm(arm, self.arms)

    @property
    def arms(self) -> int:
        return len(next(iter(self.payout.values())))

    @property
    def confounded(self) -> bool:
        return self.intuition is not None

    def expected(self, state: str, arm: int) -> float:
        if not 0 <= arm < self.arms:
            raise UnknownArm(arm, self.arms)
        return self.payout[state][arm]

    def best_expected(self, state: str) -> float:
        return max(self.payout[state])

    def marginal_expected(self, arm: int) -> float:
        if not 0 <= arm < self.arms:
            raise UnknownArm(arm, self.arms)
        return sum(
            p * self.payout[s][arm]
            for s, p in zip(self.confounder_states, self.confounder_probs)
        )


def pull(env: BanditEnv, arm: int, state: str, rng: np.random.Generator) -> int:
    """One Bernoulli reward draw."""
    return int(rng.random() < env.expected(state, arm))


def thompson_step(
    posteriors: Sequence[BetaPosterior], rng: np.random.Generator
) -> int:
    """Sample each posterior once and play the argmax (ties: lowest index)."""
    alphas = np.array([p.alpha for p in posteriors])
    betas = np.array([p.beta for p in posteriors])
    return int(np.argmax(rng.beta(alphas, betas)))


def epsilon_greedy_step(
    estimates: Sequence[float], epsilon: float, rng: np.random.Generator
) -> int:
    """Explore uniformly with probability epsilon, else play the argmax."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(len(estimates)))
    return int(np.argmax(estimates))


def causal_thompson_step(
    posteriors: Mapping[tuple[int, int], BetaPosterior],
    intent: int,
    arms: int,
    rng: np.random.Generator,
) -> int:
    """Thompson step over the posteriors conditioned on this round's intent.

    For two arms this compares the intuition estimate E[reward | intent,
    arm = intent] against the counter-intuition estimate E[reward | intent,
    arm ≠ intent] and plays the larger sample.
    """
    default = BetaPosterior()
    alphas = np.array(
        [posteriors.get((intent, a), default).alpha for a in range(arms)]
    )
    betas = np.array(
        [posteriors.get((intent, a), default).beta for a in range(arms)]
    )
    return int(np.argmax(rng.beta(alphas, betas)))


class ThompsonPolicy:
    name = "thompson"

    def reset(self, env: BanditEnv) -> None:
        self.posteriors = [BetaPosterior() for _ in range(env.arms)]

    def choose(self, rng, intent=None, state=None) -> int:
        return thompson_step(self.posteriors, rng)

    def observe(self, arm: int, reward: int, intent=None) -> None:
        self.posteriors[arm] = self.posteriors[arm].update(reward)


class EpsilonGreedyPolicy:
    """Sample-mean greedy with epsilon exploration; epsilon=0 is pure greedy.

    Unpulled arms estimate 0, so a pure-greedy agent locks onto the first
    arm that ever pays out.
    """

    def __init__(self, epsilon: float = 0.1):
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        self.epsilon = epsilon
        self.name = "greedy" if epsilon == 0.0 else "epsilon"

    def reset(self, env: BanditEnv) -> None:
        self.pulls = [0] * env.arms
        self.wins = [0] * env.arms

    def estimates(self) -> list[float]:
        return [
            w / c if c else 0.0 for w, c in zip(self.wins, self.pulls)
        ]

    def choose(self, rng, intent=None, state=None) -> int:
        return epsilon_greedy_step(self.estimates(), self.epsilon, rng)

    def observe(self, arm: int, reward: int, intent=None) -> None:
        self.pulls[arm] += 1
        self.wins[arm] += reward

    def seed_pull(self, arm: int, reward: int) -> None:
        """Inject a fictitious prior pull (used to demonstrate lock-in)."""
        self.observe(arm, reward)


class CausalThompsonPolicy:
    """Thompson sampling with posteriors indexed by (intent, arm)."""

    name = "causal_thompson"

    def reset(self, env: BanditEnv) -> None:
        self.arms = env.arms
        self.posteriors: dict[tuple[int, int], BetaPosterior] = {}

    def choose(self, rng, intent=None, state=None) -> int:
        if intent is None:
            raise MissingIntent(
                "causal Thompson sampling needs the round's intent; "
                "the environment has no confounder"
            )
        return causal_thompson_step(self.posteriors, intent, self.arms, rng)

    def observe(self, arm: int, reward: int, intent=None) -> None:
        if intent is None:
            raise MissingIntent("cannot update intent-conditioned posteriors")
        key = (intent, arm)
        self.posteriors[key] = self.posteriors.get(key, BetaPosterior()).update(
            reward
        )


class UniformPolicy:
    name = "uniform"

    def reset(self, env: BanditEnv) -> None:
        self.arms = env.arms

    def choose(self, rng, intent=None, state=None) -> int:
        return int(rng.integers(self.arms))

    def observe(self, arm, reward, intent=None) -> None:
        pass


class OraclePolicy:
    """Plays the best arm for the realized confounder state (regret 0)."""

    name = "oracle"

    def reset(self, env: BanditEnv) -> None:
        self.env = env

    def choose(self, rng, intent=None, state=None) -> int:
        dist = self.env.payout[state]
        return int(np.argmax(dist))

    def observe(self, arm, reward, intent=None) -> None:
        pass


def make_policy(name: str, epsilon: float = 0.1):
    table = {
        "thompson": ThompsonPolicy,
        "causal_thompson": CausalThompsonPolicy,
        "uniform": UniformPolicy,
        "oracle": OraclePolicy,
    }
    if name == "greedy":
        return EpsilonGreedyPolicy(0.0)
    if name == "epsilon":
        return EpsilonGreedyPolicy(epsilon)
    if name in table:
        return table[name]()
    raise SchemaMismatch(f"unknown policy {name!r}")


@dataclass(frozen=True)
class Round:
    arm: int
    reward: int
    intent: Optional[int]


@dataclass(frozen=True)
class RunResult:
    policy: str
    rounds: tuple[Round, ...]
    cum_regret: tuple[float, ...]

    def final_regret(self) -> float:
        return self.cum_regret[-1] if self.cum_regret else 0.0

    def arm_frequency(self, arm: int, tail: float = 1.0) -> float:
        start = int(len(self.rounds) * (1.0 - tail))
        window = self.rounds[start:]
        if not window:
            return 0.0
        return sum(1 for r in window if r.arm == arm) / len(window)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["round", "arm", "intent", "reward", "cum_regret"])
        for i, (r, c) in enumerate(zip(self.rounds, self.cum_regret)):
            writer.writerow(
                [i, r.arm, "" if r.intent is None else r.intent, r.reward, repr(c)]
            )
        return buf.getvalue()


def simulate(
    env: BanditEnv,
    policy,
    horizon: int,
    seed: int,
    regret_benchmark: str = "conditional",
) -> RunResult:
    """Run one policy for `horizon` rounds.

    Per round: draw the confounder state, surface the intent (confounded
    environments only), let the policy choose, draw the Bernoulli reward,
    update the policy, and accrue regret against the benchmark: the best
    arm given the realized state ("conditional", default) or the best
    fixed arm by marginal expectation ("marginal").
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if regret_benchmark not in ("conditional", "marginal"):
        raise ValueError("regret_benchmark must be 'conditional' or 'marginal'")
    rng = np.random.default_rng(seed)
    policy.reset(env)

    states = env.confounder_states
    probs = np.asarray(env.confounder_probs)
    marginal_best = max(env.marginal_expected(a) for a in range(env.arms))

    rounds: list[Round] = []
    cum: list[float] = []
    regret = 0.0
    for _ in range(horizon):
        s_idx = int(rng.choice(len(states), p=probs)) if len(states) > 1 else 0
        state = states[s_idx]
        intent = env.intuition[state] if env.intuition is not None else None
        arm = policy.choose(rng, intent=intent, state=state)
        if not 0 <= arm < env.arms:
            raise UnknownArm(arm, env.arms)
        reward = pull(env, arm, state, rng)
        policy.observe(arm, reward, intent=intent)
        if regret_benchmark == "conditional":
            regret += env.best_expected(state) - env.expected(state, arm)
        else:
            regret += marginal_best - env.expected(state, arm)
        rounds.append(Round(arm=arm, reward=reward, intent=intent))
        cum.append(regret)
    return RunResult(
        policy=getattr(policy, "name", type(policy).__name__),
        rounds=tuple(rounds),
        cum_regret=tuple(cum),
    )


# -- JSON interchange ----------------------------------------------------------


def env_to_dict(env: BanditEnv) -> dict:
    if not env.confounded and env.confounder_states == ("",):
        return {"arms": env.arms, "payout": list(env.payout[""])}
    payload = {
        "arms": env.arms,
        "confounder": {
            "states": list(env.confounder_states),
            "probs": list(env.confounder_probs),
        },
        "payout": {s: list(env.payout[s]) for s in env.confounder_states},
    }
    if env.intuition is not None:
        payload["intuition"] = {s: env.intuition[s] for s in env.confounder_states}
    return payload


def env_from_dict(payload: dict) -> BanditEnv:
    payout = payload["payout"]
    if isinstance(payout, list):
        env = BanditEnv(payout={"": tuple(payout)})
    else:
        conf = payload["confounder"]
        env = BanditEnv(
            payout={s: tuple(v) for s, v in payout.items()},
            confounder_states=tuple(conf["states"]),
            confounder_probs=tuple(conf["probs"]),
            intuition=payload.get("intuition"),
        )
    if "arms" in payload and payload["arms"] != env.arms:
        raise SchemaMismatch(
            f"declared {payload['arms']} arms but payout rows have {env.arms}"
        )
    return env


def env_to_json(env: BanditEnv) -> str:
    return json.dumps(env_to_dict(env), indent=2)


def env_from_json(text: str) -> BanditEnv:
    return env_from_dict(json.loads(text))
