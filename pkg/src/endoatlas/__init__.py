"""Computational atlas for endotrivial modules of finite linear groups."""

__version__ = "0.1.0"
