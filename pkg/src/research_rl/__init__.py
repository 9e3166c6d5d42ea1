"""research-rl-lab: a desk-scale laboratory for RL training of search-and-answer agents."""

__version__ = "0.1.0"
