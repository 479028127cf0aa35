"""Zeno and anti-Zeno effects on pure dephasing."""
