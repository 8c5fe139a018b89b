"""tcadist - tree-like communication architectures and their distributed automata."""

__version__ = "0.1.0"
