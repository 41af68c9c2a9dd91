"""Learning an edit policy with value-based reinforcement learning."""

from hybridcharge.env import PlanningEnv
from hybridcharge.learner import LearnerConfig, rollout_policy, train_learner
from hybridcharge.plan import ScenarioConfig
from hybridcharge.scenario import GeneratorConfig, generate_scenario
from hybridcharge.search import greedy

sc = generate_scenario(GeneratorConfig(n_nodes=15, params=ScenarioConfig(n_mcs=4)), seed=5)
cfg = LearnerConfig(max_steps=3000, batch_size=64, hidden=(64, 64), target_sync=200)
res = train_learner(PlanningEnv(sc, episode_length=30), cfg, seed=0)

print("mean episode reward while training:")
for step, value in res.curve[:: max(1, len(res.curve) // 10)]:
    print(f"  step {step:>5}: {value:+.4f}")
print(f"best plan seen during training: utility {res.utility:.4f}")
greedy_run = rollout_policy(PlanningEnv(sc, episode_length=30), res.policy)
print(f"one greedy episode of the learned policy: {greedy_run.utility:.4f}")
print(f"hill-climb for comparison: {greedy(PlanningEnv(sc, episode_length=30)).utility:.4f}")
