"""Core modules: topology, reconfiguration, automata, distribution and harness."""
