"""Feedforward + LQ-optimal distributed consensus for heterogeneous discrete-time agents."""
