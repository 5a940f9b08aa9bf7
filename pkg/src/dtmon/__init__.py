"""Distributed runtime monitoring of timed-automaton reachability properties
under bounded clock skew and FIFO asynchronous communication."""

__version__ = "0.1.0"
