"""
Statepipe.

Weakly-supervised object-state recognition for instructional videos.

Turns timestamped narrations into frame-wise, multi-label object-state
pseudo-labels through a three-stage language-model prompt chain, aligns them
to video frames with pluggable vision-language scorers, trains frame-wise
classifiers (MLP and multi-stage TCN) with masked binary cross-entropy,
refines them with ensemble mean-teacher self-training, and evaluates with
F1-max, mAP and causal-ordered precision@1.

Pipeline stages:
- curate: filter training videos by object name, verbs and narration length
- label: narration -> actions -> state descriptions -> ternary verdicts
- align: verdicts -> frame-wise pseudo-label timelines
- train / selftrain: teacher MLP + TCN, then EMA mean-teacher student
- eval / eval-changeit: frame-wise metrics and causal precision@1
"""

__version__ = "0.1.0"
__author__ = "Statepipe developers"

