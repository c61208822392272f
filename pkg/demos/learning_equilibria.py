"""Two links learn to share a channel, then an exact oracle grades the outcome.

Regret matching drives the empirical frequency of play toward a correlated
equilibrium; multiplicative weights drive the average of mixed strategies
toward a coarse correlated one. On a game this small every joint profile can
be enumerated, so the equilibrium conditions are checked exactly.

    python demos/learning_equilibria.py
"""
import numpy as np

from powergame import (
    FadingModel, GainAlphabet, Game, Oracle, build_policy_sets, is_epsilon_cce, is_epsilon_ce,
    run_cce_learning, run_ce_learning, user_streams,
)

# the direct link is either blocked (gain 0) or clear (gain 1)
model = FadingModel.per_receiver(GainAlphabet([0.0, 1.0]), GainAlphabet([0.3, 0.6]), n_users=2)
game = Game(model, build_policy_sets(model, [0, 5, 10], 0.75, 5.0))
oracle = Oracle(game)
print("actions per user:", game.sizes)
for k, pol in enumerate(game.policy_sets[0]):
    print(f"  action {k}: power {pol.powers} per state")

env, users = user_streams(0, 2)
ce = run_ce_learning(game, 100_000, env, users)
check = is_epsilon_ce(ce.distribution, game, 0.05, oracle)
print("\nregret matching, 1e5 slots")
print("  max estimated internal regret per user:", np.round(ce.max_regret(), 4))
print(f"  exact CE violation {check.max_violation:.4f} -> {'certified' if check.passed else 'not certified'} at 0.05")

env, users = user_streams(0, 2)
cce = run_cce_learning(game, 100_000, env, users)
check = is_epsilon_cce(cce.distribution, game, 0.05, oracle)
print("\nmultiplicative weights, 1e5 slots")
print("  external regret per user:", np.round(cce.external_regret(), 4))
print(f"  exact CCE violation {check.max_violation:.4f} -> {'certified' if check.passed else 'not certified'} at 0.05")
