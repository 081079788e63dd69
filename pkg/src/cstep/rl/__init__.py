"""From-scratch PPO: dense networks, squashed Gaussian policy, GAE and the trainer."""
from .nets import ActorCritic, Adam, DenseNet, GaussianPolicy, build_actor_critic, clip_grad_norm
from .ppo import (LossInfo, PpoConfig, RolloutBuffer, collect_rollout, gae, normalize_advantages,
                  policy_loss_and_grads, train, update)
from .snapshot import load_snapshot, save_snapshot, snapshot_bytes
