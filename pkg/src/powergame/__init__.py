"""Distributed learning of equilibria and Pareto points for power allocation on fading interference channels."""
from .actions import PolicySet, PowerPolicy, build_policy_sets, enumerate_multirate, enumerate_policies, interference_threshold
from .channel import FadingModel, GainAlphabet, ModelError, example1_model, example2_model, snr_to_budget, user_streams
from .experiments import ConfigError, ExperimentConfig, ResultRow, bundled_config, emit_outputs, load_config, sweep
from .mw import MultiplicativeWeightsLearner, run_cce_learning
from .oracle import Oracle, OutcomeDistribution, brute_force_nb, brute_force_pareto, is_epsilon_cce, is_epsilon_ce
from .regret import RegretMatchingLearner, run_ce_learning
from .search import SearchConfig, run_nash_bargaining, run_pareto_search
from .sim import Game, run_slots, throughput

__all__ = [
    "ConfigError", "ExperimentConfig", "FadingModel", "GainAlphabet", "Game", "ModelError",
    "MultiplicativeWeightsLearner", "Oracle", "OutcomeDistribution", "PolicySet", "PowerPolicy",
    "RegretMatchingLearner", "ResultRow", "SearchConfig",
    "brute_force_nb", "brute_force_pareto", "build_policy_sets", "bundled_config", "emit_outputs",
    "enumerate_multirate", "enumerate_policies", "example1_model", "example2_model", "interference_threshold",
    "is_epsilon_cce", "is_epsilon_ce", "load_config", "run_cce_learning", "run_ce_learning",
    "run_nash_bargaining", "run_pareto_search", "run_slots", "snr_to_budget", "sweep", "throughput", "user_streams",
]
