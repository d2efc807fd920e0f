"""Combinatorial toolkit for shapes: monotone maps of finite posets that
generalise the cube diagrams of functor calculus."""

__version__ = "0.1.0"
